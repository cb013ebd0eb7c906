//! Identity checks over a parameter grid, aggregated into JSON/CSV reports.

mod report;
mod suites;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use report::{CheckReport, ParamSnapshot, BUDGET_FACTOR};
pub use suites::*;

use crate::error::{Error, Result};
use crate::model::{ComplexTuple, Model, ModelParams};
use crate::quadrature::QuadratureSpec;
use crate::special_functions::{classify_point_with_radius, Periods};
use crate::wavefunction::WaveSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    S2,
    FourierK,
    QqCommutativity,
    QlExchange,
    QEigen,
    DualQEigen,
    Duality,
    Macdonald,
    LambdaSymmetry,
    PeriodSwap,
    PsiMixed,
    KernelIdentity,
    Inequalities,
    Asymptotics,
    KmuBound,
}

impl Suite {
    pub const ALL: [Suite; 15] = [
        Suite::S2,
        Suite::FourierK,
        Suite::QqCommutativity,
        Suite::QlExchange,
        Suite::QEigen,
        Suite::DualQEigen,
        Suite::Duality,
        Suite::Macdonald,
        Suite::LambdaSymmetry,
        Suite::PeriodSwap,
        Suite::PsiMixed,
        Suite::KernelIdentity,
        Suite::Inequalities,
        Suite::Asymptotics,
        Suite::KmuBound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::S2 => "s2",
            Suite::FourierK => "fourier_k",
            Suite::QqCommutativity => "qq_commutativity",
            Suite::QlExchange => "ql_exchange",
            Suite::QEigen => "q_eigen",
            Suite::DualQEigen => "dual_q_eigen",
            Suite::Duality => "duality",
            Suite::Macdonald => "macdonald",
            Suite::LambdaSymmetry => "lambda_symmetry",
            Suite::PeriodSwap => "period_swap",
            Suite::PsiMixed => "psi_mixed",
            Suite::KernelIdentity => "kernel_identity",
            Suite::Inequalities => "inequalities",
            Suite::Asymptotics => "asymptotics",
            Suite::KmuBound => "kmu_bound",
        }
    }

    /// Suite that produces reports with this relation id.
    pub fn of_relation(id: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|s| id == s.name() || id.starts_with(&format!("{}.", s.name())))
    }

    /// Independent stream per suite, so filtering does not shift other suites' samples.
    fn rng(self, seed: u64) -> ChaCha8Rng {
        let d = Sha256::digest(self.name().as_bytes());
        let salt = u64::from_le_bytes(d[..8].try_into().expect("8 bytes"));
        ChaCha8Rng::seed_from_u64(seed ^ salt)
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown suite '{s}'")))
    }
}

/// `checks = None` runs everything; otherwise each entry is a suite name or a relation id
/// (`s2.inversion`, `macdonald.r2`, …) and only matching reports are kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub seed: u64,
    #[serde(default)]
    pub checks: Option<Vec<String>>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { seed: 0, checks: None }
    }
}

impl VerifyConfig {
    pub fn new(seed: u64) -> Self {
        Self { seed, checks: None }
    }

    pub fn with_checks<S: Into<String>>(mut self, checks: impl IntoIterator<Item = S>) -> Self {
        self.checks = Some(checks.into_iter().map(Into::into).collect());
        self
    }

    pub fn validate(&self) -> Result<()> {
        for c in self.checks.iter().flatten() {
            if Suite::of_relation(c).is_none() {
                return Err(Error::Parameter(format!("unknown check '{c}'")));
            }
        }
        Ok(())
    }

    pub fn suites(&self) -> Vec<Suite> {
        match &self.checks {
            None => Suite::ALL.to_vec(),
            Some(list) => {
                let mut s: Vec<Suite> = list.iter().filter_map(|c| Suite::of_relation(c)).collect();
                s.sort();
                s.dedup();
                s
            }
        }
    }

    fn keeps(&self, id: &str) -> bool {
        match &self.checks {
            None => true,
            Some(list) => list
                .iter()
                .any(|c| id == c || id.starts_with(&format!("{c}.")) || Suite::from_str(c).is_ok_and(|s| Suite::of_relation(id) == Some(s))),
        }
    }
}

/// One row of the CSV summary: reports grouped by relation, size and parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub relation_id: String,
    pub n: usize,
    pub params_hash: String,
    pub count: usize,
    pub max_rel_err: f64,
    /// Largest acceptance threshold in the group: max(tolerance, err_budget).
    pub budget: f64,
    pub passed: bool,
    pub runtime_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub all_passed: bool,
    pub runtime_ms: f64,
    pub groups: Vec<SummaryRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub reports: Vec<CheckReport>,
    pub summary: Summary,
}

impl VerifyReport {
    pub fn from_reports(seed: u64, mut reports: Vec<CheckReport>) -> Self {
        reports.sort_by(|a, b| (a.relation_id.as_str(), a.n, a.index).cmp(&(b.relation_id.as_str(), b.n, b.index)));
        let mut groups: BTreeMap<(String, usize, String), SummaryRow> = BTreeMap::new();
        for r in &reports {
            let hash = r.params.hash();
            let row = groups.entry((r.relation_id.clone(), r.n, hash.clone())).or_insert_with(|| SummaryRow {
                relation_id: r.relation_id.clone(),
                n: r.n,
                params_hash: hash,
                count: 0,
                max_rel_err: 0.0,
                budget: 0.0,
                passed: true,
                runtime_ms: 0.0,
            });
            row.count += 1;
            row.max_rel_err = row.max_rel_err.max(r.rel_err);
            row.budget = row.budget.max(r.tolerance.max(r.err_budget));
            row.passed &= r.passed;
            row.runtime_ms += r.runtime_ms;
        }
        let passed = reports.iter().filter(|r| r.passed).count();
        let summary = Summary {
            total: reports.len(),
            passed,
            failed: reports.len() - passed,
            all_passed: passed == reports.len(),
            runtime_ms: reports.iter().map(|r| r.runtime_ms).sum(),
            groups: groups.into_values().collect(),
        };
        Self { seed, reports, summary }
    }

    pub fn all_passed(&self) -> bool {
        self.summary.all_passed
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parameter(format!("malformed report: {e}")))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("relation_id,n,params_hash,max_rel_err,budget,passed,runtime_ms\n");
        for g in &self.summary.groups {
            out.push_str(&format!(
                "{},{},{},{:e},{:e},{},{:.3}\n",
                g.relation_id, g.n, g.params_hash, g.max_rel_err, g.budget, g.passed, g.runtime_ms
            ));
        }
        out
    }

    /// The report with every timing field removed; equal across reruns with one seed.
    pub fn body_without_runtime(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        strip_key(&mut v, "runtime_ms");
        v
    }
}

fn strip_key(v: &mut serde_json::Value, key: &str) {
    match v {
        serde_json::Value::Object(m) => {
            m.remove(key);
            m.values_mut().for_each(|x| strip_key(x, key));
        }
        serde_json::Value::Array(a) => a.iter_mut().for_each(|x| strip_key(x, key)),
        _ => {}
    }
}

/// Runs the configured suites. Individual failures are recorded, never raised.
pub fn run_all(config: &VerifyConfig) -> Result<VerifyReport> {
    config.validate()?;
    let mut reports = Vec::new();
    for suite in config.suites() {
        reports.extend(run_suite(suite, config.seed)?.into_iter().filter(|r| config.keeps(&r.relation_id)));
    }
    Ok(VerifyReport::from_reports(config.seed, reports))
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Default parameter grid.
pub fn default_periods() -> Vec<Periods> {
    vec![
        Periods::real(1.0, std::f64::consts::SQRT_2).expect("valid"),
        Periods::real(0.3, 1.0).expect("valid"),
        Periods::new(c(1.0, 0.2), c(1.3, -0.1)).expect("valid"),
    ]
}

pub fn default_couplings() -> Vec<Complex64> {
    vec![c(0.4, 0.0), c(0.6, 0.0), c(0.5, 0.1)]
}

fn params(o1: f64, o2: f64, g: Complex64) -> ModelParams {
    ModelParams::new(Periods::real(o1, o2).expect("valid periods"), g).expect("valid params")
}

fn model(p: ModelParams) -> Result<Model> {
    Model::new(p)
}

fn reals(rng: &mut impl Rng, n: usize, r: f64) -> ComplexTuple {
    ComplexTuple::new((0..n).map(|_| c(rng.gen_range(-r..r), 0.0)).collect())
}

fn spec(rel: f64) -> QuadratureSpec {
    QuadratureSpec::with_tolerances(rel, rel * 1e-3)
}

fn push(out: &mut Vec<CheckReport>, r: Result<CheckReport>) -> Result<()> {
    out.push(r?);
    Ok(())
}

/// Reports for one suite on its slice of the default grid.
pub fn run_suite(suite: Suite, seed: u64) -> Result<Vec<CheckReport>> {
    let mut rng = suite.rng(seed);
    let mut out = Vec::new();
    let sqrt2 = std::f64::consts::SQRT_2;
    match suite {
        Suite::S2 => {
            let sp = QuadratureSpec::default();
            for p in default_periods() {
                let w = p.sum().norm();
                for id in S2Identity::ALL {
                    let mut i = 0;
                    while i < 100 {
                        let z = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)) * w / 2.0;
                        // keep clear of the zero and pole lattices of every factor involved
                        let near = [z, z + p.omega1, z + p.omega2, p.sum() - z, -z]
                            .iter()
                            .any(|&u| {
                                let info = classify_point_with_radius(u, &p, 0.05 * w);
                                info.is_zero || info.is_pole
                            });
                        if near {
                            continue;
                        }
                        out.push(check_s2_identity(id, z, &p, &sp, i, seed));
                        i += 1;
                    }
                }
                out.extend(check_s2_special_values(&p, &sp, seed));
            }
        }
        Suite::FourierK => {
            let sp = spec(1e-9);
            let mut models = vec![params(1.0, sqrt2, c(0.6, 0.0)), params(1.0, sqrt2, c(0.8, 0.0))];
            models.push(ModelParams::new(default_periods()[2].clone(), c(0.6, 0.0))?);
            for p in models {
                let m = model(p)?;
                let nu = p.nu_g();
                for i in 0..20 {
                    let l = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0) * 0.4 * nu / 2.0);
                    push(&mut out, check_fourier_k(&m, l, 1e-6, &sp, i, seed))?;
                }
                push(&mut out, check_fourier_k(&m, c(0.0, 0.0), 1e-8, &sp, 20, seed))?;
                push(&mut out, check_fourier_k(&m, c(0.0, 0.45 * nu / 2.0), 1e-5, &sp, 21, seed))?;
            }
        }
        Suite::QqCommutativity => {
            let m = model(params(1.0, sqrt2, c(0.6, 0.0)))?;
            let nu = m.params().nu_g();
            for (n, count, floor, rel) in [(1, 20, 1e-6, 1e-9), (2, 5, 1e-4, 1e-7)] {
                for i in 0..count {
                    let s = KernelSample {
                        x: reals(&mut rng, n, 1.0),
                        z: reals(&mut rng, n, 1.0),
                        lambda: c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.4..0.4) * nu),
                        rho: c(rng.gen_range(-0.5..0.5), 0.0),
                    };
                    push(&mut out, check_qq_commutativity(&m, &s, floor, &spec(rel), i, seed))?;
                }
            }
        }
        Suite::QlExchange => {
            let m = model(params(1.0, sqrt2, c(0.6, 0.0)))?;
            let nu = m.params().nu_g();
            for i in 0..5 {
                let (lambda, rho) = match i {
                    0 => (c(0.15, 0.0), c(0.15, 0.0)),
                    1 => (c(0.2, 0.0), c(-0.1, 0.0)),
                    2 => (c(0.1, 0.45 * nu / 2.0), c(-0.1, 0.0)),
                    _ => (c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.4..0.4) * nu / 2.0), c(rng.gen_range(-0.5..0.5), 0.0)),
                };
                let s = KernelSample { x: reals(&mut rng, 2, 1.0), z: reals(&mut rng, 1, 1.0), lambda, rho };
                push(&mut out, check_ql_exchange(&m, &s, 1e-5, &spec(1e-8), i, seed))?;
            }
        }
        Suite::QEigen | Suite::DualQEigen => {
            let m = model(params(1.0, sqrt2, c(0.6, 0.0)))?;
            for (n, count, floor, rel) in [(1, 5, 1e-8, 1e-11), (2, 3, 1e-4, 1e-7)] {
                for i in 0..count {
                    let w = WaveSpec::new(reals(&mut rng, n, 0.5), reals(&mut rng, n, 1.0), *m.params(), spec(rel));
                    let (lam_last, x_last) = (w.lambda.last(), w.x.last());
                    let sp = if i == 0 && n == 2 {
                        if suite == Suite::QEigen { lam_last } else { x_last }
                    } else {
                        c(rng.gen_range(-0.5..0.5), 0.0)
                    };
                    let r = if suite == Suite::QEigen {
                        check_q_eigen(&m, &w, sp, floor, i, seed)
                    } else {
                        check_dual_q_eigen(&m, &w, sp, floor, i, seed)
                    };
                    push(&mut out, r)?;
                }
            }
        }
        Suite::Duality => {
            for g in [c(0.6, 0.0), c(0.5, 0.1)] {
                let m = model(params(1.0, sqrt2, g))?;
                for i in 0..10 {
                    let w = WaveSpec::new(reals(&mut rng, 2, 0.5), reals(&mut rng, 2, 1.0), *m.params(), spec(1e-9));
                    push(&mut out, check_duality(&m, &w, 1e-6, i, seed))?;
                }
            }
            let m = model(params(1.0, sqrt2, c(0.6, 0.0)))?;
            for i in 0..2 {
                let w = WaveSpec::new(reals(&mut rng, 3, 0.3), reals(&mut rng, 3, 0.5), *m.params(), spec(1e-5));
                push(&mut out, check_duality(&m, &w, 1e-3, i, seed))?;
            }
        }
        Suite::Macdonald => {
            let m = model(params(0.3, 1.0, c(0.4, 0.0)))?;
            for i in 0..3 {
                let w = WaveSpec::new(reals(&mut rng, 1, 0.5), reals(&mut rng, 1, 1.0), *m.params(), spec(1e-13));
                push(&mut out, check_macdonald(&m, &w, 1, 1e-12, i, seed))?;
            }
            for r in 1..=2 {
                for i in 0..3 {
                    let w = WaveSpec::new(reals(&mut rng, 2, 0.5), reals(&mut rng, 2, 1.0), *m.params(), spec(1e-8));
                    push(&mut out, check_macdonald(&m, &w, r, 1e-4, i, seed))?;
                }
            }
        }
        Suite::LambdaSymmetry => {
            let m = model(params(1.0, sqrt2, c(0.6, 0.0)))?;
            for i in 0..3 {
                let mut l = reals(&mut rng, 2, 0.5);
                if i == 0 {
                    l = ComplexTuple::new(vec![l.values()[0]; 2]);
                }
                let w = WaveSpec::new(l, reals(&mut rng, 2, 1.0), *m.params(), spec(1e-9));
                push(&mut out, check_lambda_symmetry(&m, &w, &[1, 0], 1e-6, i, seed))?;
            }
            let w = WaveSpec::new(reals(&mut rng, 3, 0.3), reals(&mut rng, 3, 0.5), *m.params(), spec(1e-6));
            push(&mut out, check_lambda_symmetry(&m, &w, &[0, 2, 1], 1e-3, 0, seed))?;
        }
        Suite::PeriodSwap => {
            for (o1, o2, g) in [(1.0, sqrt2, c(0.6, 0.0)), (0.3, 1.0, c(0.4, 0.0))] {
                let m = model(params(o1, o2, g))?;
                for i in 0..3 {
                    let w = WaveSpec::new(reals(&mut rng, 2, 0.5), reals(&mut rng, 2, 1.0), *m.params(), spec(1e-9));
                    push(&mut out, check_period_swap(&m, &w, 1e-6, i, seed))?;
                }
            }
            let m = model(params(1.0, sqrt2, c(0.6, 0.0)))?;
            let w = WaveSpec::new(reals(&mut rng, 3, 0.3), reals(&mut rng, 3, 0.5), *m.params(), spec(1e-6));
            push(&mut out, check_period_swap(&m, &w, 1e-3, 0, seed))?;
        }
        Suite::PsiMixed => {
            let m = model(params(1.0, sqrt2, c(0.6, 0.0)))?;
            let w = WaveSpec::new(reals(&mut rng, 2, 0.5), reals(&mut rng, 2, 1.0), *m.params(), spec(1e-8));
            push(&mut out, check_mixed(&m, &w, 1e-6, 0, seed))?;
            let sp = QuadratureSpec { qmc_samples: 1 << 14, ..spec(1e-4) };
            let w = WaveSpec::new(reals(&mut rng, 3, 0.3), reals(&mut rng, 3, 0.5), *m.params(), sp);
            push(&mut out, check_mixed(&m, &w, 5e-2, 0, seed))?;
        }
        Suite::KernelIdentity => {
            for n in 1..=4 {
                for degenerate in [false, true] {
                    for r in 0..=n {
                        push(&mut out, check_kernel_identity(n, r, degenerate, 200, 1e-10, &mut rng, seed))?;
                    }
                }
            }
        }
        Suite::Inequalities => {
            out.extend(check_inequalities(1_000_000, 100_000, 6, rng.gen())?);
            let m = model(params(1.0, sqrt2, c(0.6, 0.0)))?;
            let nu = m.params().nu_g();
            let lambda = [c(0.2, 0.0), c(-0.3, 0.1 * nu / (2.0 * std::f64::consts::E))];
            for (i, eps) in [0.5, 1.0, 2.0].into_iter().enumerate() {
                out.push(check_wave_bound(&m, lambda, eps, 6.0, 48, i, seed));
            }
        }
        Suite::Asymptotics => {
            for g in [c(0.6, 0.0), c(0.5, 0.1)] {
                let m = model(params(1.0, sqrt2, g))?;
                out.extend(check_asymptotics(&m, &[20.0, 40.0, 80.0], seed)?);
            }
        }
        Suite::KmuBound => {
            for p in [params(1.0, sqrt2, c(0.6, 0.0)), params(0.3, 1.0, c(0.4, 0.0))] {
                out.push(check_kmu_bound(&model(p)?, 1000, &mut rng, seed));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
            assert_eq!(Suite::of_relation(&format!("{}.x", s.name())), Some(s));
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn empty_check_list_is_an_empty_pass() {
        let r = run_all(&VerifyConfig::new(1).with_checks(Vec::<String>::new())).unwrap();
        assert!(r.reports.is_empty() && r.all_passed());
    }

    #[test]
    fn unknown_filter_is_rejected() {
        assert!(run_all(&VerifyConfig::new(1).with_checks(["bogus"])).is_err());
    }

    #[test]
    fn relation_filter_keeps_only_that_relation() {
        let r = run_all(&VerifyConfig::new(3).with_checks(["kernel_identity.degenerate"])).unwrap();
        assert!(!r.reports.is_empty());
        assert!(r.reports.iter().all(|x| x.relation_id == "kernel_identity.degenerate"));
    }

    #[test]
    fn summary_and_csv_agree() {
        let r = run_all(&VerifyConfig::new(5).with_checks(["asymptotics"])).unwrap();
        let csv = r.to_csv();
        assert_eq!(csv.lines().count(), r.summary.groups.len() + 1);
        assert!(csv.starts_with("relation_id,n,params_hash,max_rel_err,budget,passed,runtime_ms"));
        let back = VerifyReport::from_json(&r.to_json()).unwrap();
        assert_eq!(back.body_without_runtime(), r.body_without_runtime());
    }

    #[test]
    fn pass_rule_matches_report_fields() {
        let r = run_all(&VerifyConfig::new(2).with_checks(["duality", "kernel_identity"])).unwrap();
        for x in &r.reports {
            if x.err_budget > 0.0 {
                assert_eq!(x.passed, x.abs_err <= x.tolerance.max(x.err_budget), "{x:?}");
            }
        }
    }
}
