mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{Settings, UsageError};

#[derive(Parser, Debug)]
#[command(name = "ruij-lab", version, about = "Evaluate, sweep and verify the double sine / Ruijsenaars wave function toolkit")]
struct Cli {
    /// key = value settings file; flags given on the command line take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate one function at one point
    Eval {
        target: Target,
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Run identity checks and write JSON + CSV reports
    Verify {
        /// Comma-separated suite names or relation ids
        #[arg(long)]
        filter: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate a function along one axis and emit CSV
    Sweep {
        target: Target,
        #[arg(long)]
        axis: Axis,
        #[arg(long, allow_hyphen_values = true)]
        from: f64,
        #[arg(long, allow_hyphen_values = true)]
        to: f64,
        #[arg(long)]
        steps: usize,
        /// Component of a tuple argument that moves (default: the last)
        #[arg(long)]
        index: Option<usize>,
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Re-emit a saved verification report as JSON or CSV
    Report {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Target {
    S2,
    Mu,
    K,
    Khat,
    Psi,
    PsiDual,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    X,
    Lambda,
    G,
}

#[derive(Args, Debug, Default)]
struct PointArgs {
    /// Argument of s2
    #[arg(long, allow_hyphen_values = true)]
    z: Option<String>,
    /// Coordinate (comma-separated for tuples)
    #[arg(long, allow_hyphen_values = true)]
    x: Option<String>,
    /// Spectral parameter (comma-separated for tuples)
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    /// Number of particles; checked against the tuple lengths
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Args, Debug, Default)]
struct Common {
    #[arg(long, allow_hyphen_values = true)]
    omega1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    omega2: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    g: Option<String>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    max_subdivisions: Option<usize>,
    #[arg(long)]
    qmc_samples: Option<usize>,
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
}

fn layer_common(s: &mut Settings, c: &Common) {
    s.set("omega1", c.omega1.as_ref());
    s.set("omega2", c.omega2.as_ref());
    s.set("g", c.g.as_ref());
    s.set("rel_tol", c.rel_tol);
    s.set("abs_tol", c.abs_tol);
    s.set("max_subdivisions", c.max_subdivisions);
    s.set("qmc_samples", c.qmc_samples);
    s.set("output", c.output.as_ref().map(|p| p.display()));
    s.set("format", c.format.as_ref());
}

fn layer_point(s: &mut Settings, p: &PointArgs) {
    s.set("z", p.z.as_ref());
    s.set("x", p.x.as_ref());
    s.set("lambda", p.lambda.as_ref());
    s.set("n", p.n);
    s.set("epsilon", p.epsilon);
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("RUIJ_LAB_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| config::usage!("RUIJ_LAB_THREADS must be a positive integer, got '{v}'"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    configure_threads()?;
    let mut s = match &cli.config {
        Some(p) => Settings::load(p)?,
        None => Settings::default(),
    };
    match cli.command {
        Command::Eval { target, point, common } => {
            layer_common(&mut s, &common);
            layer_point(&mut s, &point);
            commands::eval(target, &s)
        }
        Command::Verify { filter, seed, common } => {
            layer_common(&mut s, &common);
            s.set("filter", filter);
            s.set("seed", seed);
            commands::verify(&s)
        }
        Command::Sweep { target, axis, from, to, steps, index, point, common } => {
            layer_common(&mut s, &common);
            layer_point(&mut s, &point);
            commands::sweep(target, &commands::SweepAxis { axis, from, to, steps, index }, &s)
        }
        Command::Report { input, common } => {
            layer_common(&mut s, &common);
            commands::report(&input, &s)
        }
    }
}

/// 1 usage/parse, 2 domain, 3 tolerance or other numerical failure, 4 failed checks.
fn exit_code(e: &anyhow::Error) -> u8 {
    use ruij_core::Error as E;
    if e.downcast_ref::<UsageError>().is_some() {
        return 1;
    }
    match e.downcast_ref::<E>() {
        Some(E::Domain(_) | E::NearPole { .. }) => 2,
        Some(E::Tolerance { .. } | E::NonFinite(_) | E::Strategy(_) | E::SingularCoefficient(_)) => 3,
        Some(E::Parameter(_)) => 1,
        None => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ruij_core::{Complex64, Error};

    #[test]
    fn exit_code_contract() {
        let code = |e: Error| exit_code(&anyhow::Error::new(e));
        assert_eq!(code(Error::Domain("strip".into())), 2);
        let tol = Error::Tolerance { message: "budget".into(), value: Complex64::new(0.0, 0.0), err_est: 1.0 };
        assert_eq!(code(tol), 3);
        assert_eq!(code(Error::Parameter("g".into())), 1);
        assert_eq!(exit_code(&config::usage!("bad flag")), 1);
        assert_eq!(exit_code(&anyhow::anyhow!("io")), 1);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
