use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use ruij_core::special_functions::s2;
use ruij_core::verify::{run_all, VerifyConfig, VerifyReport};
use ruij_core::wavefunction::{psi_dual_with, psi_with};
use ruij_core::{Complex64, ComplexTuple, Model, WaveSpec};
use serde_json::json;

use crate::config::{format_complex, usage, Format, Settings};
use crate::output::{emit, write_atomic};
use crate::{Axis, Target};

const CHECKS_FAILED: u8 = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct Value {
    pub value: Complex64,
    pub err_est: Option<f64>,
}

fn scalar(s: &Settings, key: &str) -> Result<Complex64> {
    let t = s.require_tuple(key)?;
    match t.values() {
        [v] => Ok(*v),
        _ => Err(usage!("--{key} takes a single value here, got {}", t.len())),
    }
}

fn wave(s: &Settings) -> Result<WaveSpec> {
    let (lambda, x) = (s.require_tuple("lambda")?, s.require_tuple("x")?);
    if lambda.len() != x.len() {
        return Err(usage!("--lambda and --x need the same length ({} vs {})", lambda.len(), x.len()));
    }
    if let Some(n) = s.n()? {
        if n != x.len() {
            return Err(usage!("--n {n} does not match tuple length {}", x.len()));
        }
    }
    let mut w = WaveSpec::new(lambda, x, s.params()?, s.spec()?);
    if let Some(e) = s.epsilon()? {
        w = w.with_epsilon(e);
    }
    Ok(w)
}

pub fn evaluate(target: Target, s: &Settings) -> Result<Value> {
    let exact = |value| Value { value, err_est: None };
    let est = |e: ruij_core::Estimate| Value { value: e.value, err_est: Some(e.err) };
    Ok(match target {
        Target::S2 => exact(s2(s.require_complex("z")?, &s.periods()?, &s.spec()?)?),
        Target::Mu => exact(Model::new(s.params()?)?.mu(scalar(s, "x")?)?),
        Target::K => exact(Model::new(s.params()?)?.kfun(scalar(s, "x")?)?),
        Target::Khat => exact(Model::new(s.params()?)?.k_hat(scalar(s, "lambda")?)?),
        Target::Psi => {
            let w = wave(s)?;
            est(psi_with(&Model::new(w.params)?, &w)?)
        }
        Target::PsiDual => {
            let w = wave(s)?;
            est(psi_dual_with(&Model::new(w.params)?, &w)?)
        }
    })
}

fn target_name(t: Target) -> &'static str {
    match t {
        Target::S2 => "s2",
        Target::Mu => "mu",
        Target::K => "k",
        Target::Khat => "khat",
        Target::Psi => "psi",
        Target::PsiDual => "psi_dual",
    }
}

pub fn eval(target: Target, s: &Settings) -> Result<ExitCode> {
    let t0 = Instant::now();
    let v = evaluate(target, s)?;
    let ms = t0.elapsed().as_secs_f64() * 1e3;
    println!("value    = {}", format_complex(v.value));
    match v.err_est {
        Some(e) => println!("err_est  = {e:.3e}"),
        None => println!("err_est  = 0 (closed form / table)"),
    }
    println!("runtime  = {ms:.3} ms");
    if let Some(path) = s.output() {
        let mut inputs = serde_json::Map::new();
        for k in ["z", "x", "lambda", "n", "epsilon", "omega1", "omega2", "g"] {
            if let Some(v) = s.get(k) {
                inputs.insert(k.into(), json!(v));
            }
        }
        let record = json!({
            "target": target_name(target),
            "inputs": inputs,
            "value": v.value,
            "err_est": v.err_est,
            "runtime_ms": ms,
        });
        write_atomic(path, &serde_json::to_string_pretty(&record)?)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn csv_path(json: &Path) -> PathBuf {
    json.with_extension("csv")
}

pub fn verify(s: &Settings) -> Result<ExitCode> {
    let mut cfg = VerifyConfig::new(s.seed()?);
    if let Some(f) = s.filter() {
        cfg = cfg.with_checks(f);
    }
    cfg.validate().map_err(|e| usage!("{e}"))?;
    let report = run_all(&cfg)?;
    let json_path = s.output().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("ruij-report.json"));
    write_atomic(&json_path, &report.to_json())?;
    write_atomic(&csv_path(&json_path), &report.to_csv())?;
    for g in &report.summary.groups {
        println!(
            "{} {:<32} n={} params={} count={:<4} max_rel_err={:.2e}",
            if g.passed { "PASS" } else { "FAIL" },
            g.relation_id,
            g.n,
            g.params_hash,
            g.count,
            g.max_rel_err
        );
    }
    let sm = &report.summary;
    println!("{}/{} checks passed; reports in {} and {}", sm.passed, sm.total, json_path.display(), csv_path(&json_path).display());
    Ok(if report.all_passed() { ExitCode::SUCCESS } else { ExitCode::from(CHECKS_FAILED) })
}

pub struct SweepAxis {
    pub axis: Axis,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    pub index: Option<usize>,
}

/// Settings key that `axis` moves for `target`.
fn axis_key(target: Target, axis: Axis) -> Result<&'static str> {
    Ok(match (axis, target) {
        (Axis::G, Target::S2) => return Err(usage!("s2 does not depend on g")),
        (Axis::G, _) => "g",
        (Axis::X, Target::S2) => "z",
        (Axis::X, Target::Mu | Target::K | Target::Psi | Target::PsiDual) => "x",
        (Axis::Lambda, Target::Khat | Target::Psi | Target::PsiDual) => "lambda",
        (a, t) => return Err(usage!("{} cannot be swept along {a:?}", target_name(t))),
    })
}

fn moved(s: &Settings, key: &str, index: Option<usize>, v: f64) -> Result<Settings> {
    let mut out = s.clone();
    let value = if matches!(key, "x" | "lambda") {
        let mut t: ComplexTuple = s.tuple(key)?.unwrap_or_else(|| ComplexTuple::real(&[0.0]));
        let i = index.unwrap_or(t.len() - 1);
        if i >= t.len() {
            return Err(usage!("--index {i} out of range for --{key} of length {}", t.len()));
        }
        t.0[i] = Complex64::new(v, 0.0);
        t.values().iter().map(|&c| format_complex(c)).collect::<Vec<_>>().join(",")
    } else {
        v.to_string()
    };
    out.set(key, Some(value));
    Ok(out)
}

pub fn sweep(target: Target, ax: &SweepAxis, s: &Settings) -> Result<ExitCode> {
    if ax.steps == 0 {
        return Err(usage!("--steps must be at least 1"));
    }
    if !(ax.from.is_finite() && ax.to.is_finite()) {
        return Err(usage!("sweep range must be finite"));
    }
    let key = axis_key(target, ax.axis)?;
    let mut csv = String::from("axis_value,re,im,err_est\n");
    for k in 0..ax.steps {
        let v = if ax.steps == 1 { ax.from } else { ax.from + (ax.to - ax.from) * k as f64 / (ax.steps - 1) as f64 };
        let r = evaluate(target, &moved(s, key, ax.index, v)?).with_context(|| format!("at {key} = {v}"))?;
        csv.push_str(&format!("{v},{:e},{:e},{:e}\n", r.value.re, r.value.im, r.err_est.unwrap_or(0.0)));
    }
    emit(s.output(), &csv)?;
    Ok(ExitCode::SUCCESS)
}

pub fn report(input: &Path, s: &Settings) -> Result<ExitCode> {
    let text = std::fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let r = VerifyReport::from_json(&text).map_err(|e| usage!("{}: {e}", input.display()))?;
    let body = match s.format()? {
        Format::Json => r.to_json() + "\n",
        Format::Csv => r.to_csv(),
    };
    emit(s.output(), &body)?;
    Ok(ExitCode::SUCCESS)
}
