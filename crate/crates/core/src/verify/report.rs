use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Error;
use crate::model::{ComplexTuple, ModelParams};
use crate::quadrature::Estimate;
use crate::special_functions::Periods;

/// Parameters a check ran under; `g` is absent for pure double-sine checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSnapshot {
    pub omega1: Complex64,
    pub omega2: Complex64,
    pub g: Option<Complex64>,
}

impl ParamSnapshot {
    pub fn periods(p: &Periods) -> Self {
        Self { omega1: p.omega1, omega2: p.omega2, g: None }
    }

    /// First 16 hex digits of SHA-256 over the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("snapshot serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

impl From<&ModelParams> for ParamSnapshot {
    fn from(p: &ModelParams) -> Self {
        Self { omega1: p.periods.omega1, omega2: p.periods.omega2, g: Some(p.g) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub relation_id: String,
    pub n: usize,
    pub index: usize,
    pub params: ParamSnapshot,
    pub sample: serde_json::Value,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub abs_err: f64,
    pub rel_err: f64,
    /// Absolute: the relative floor times the size of the compared values.
    pub tolerance: f64,
    /// Three times the summed quadrature error estimates.
    pub err_budget: f64,
    pub passed: bool,
    pub runtime_ms: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Safety factor applied to quadrature error estimates.
pub const BUDGET_FACTOR: f64 = 3.0;

pub(crate) struct Pending {
    pub relation_id: String,
    pub n: usize,
    pub index: usize,
    pub params: ParamSnapshot,
    pub sample: serde_json::Value,
    pub rel_floor: f64,
    pub seed: u64,
    pub started: Instant,
}

impl Pending {
    pub fn new(relation_id: impl Into<String>, n: usize, index: usize, params: ParamSnapshot, seed: u64) -> Self {
        Self {
            relation_id: relation_id.into(),
            n,
            index,
            params,
            sample: serde_json::Value::Null,
            rel_floor: 0.0,
            seed,
            started: Instant::now(),
        }
    }

    pub fn sample(mut self, sample: serde_json::Value) -> Self {
        self.sample = sample;
        self
    }

    pub fn rel_floor(mut self, f: f64) -> Self {
        self.rel_floor = f;
        self
    }

    /// Compare two estimates: passed ⇔ |lhs − rhs| ≤ max(rel_floor·scale, 3·Σerr).
    pub fn compare(self, r: Result<(Estimate, Estimate), Error>) -> CheckReport {
        match r {
            Ok((l, rr)) => {
                let abs_err = (l.value - rr.value).norm();
                let scale = l.value.norm().max(rr.value.norm());
                let rel_err = if scale > 0.0 { abs_err / scale } else { abs_err };
                let tolerance = self.rel_floor * if scale > 0.0 { scale } else { 1.0 };
                let err_budget = BUDGET_FACTOR * (l.err + rr.err);
                let passed = abs_err.is_finite() && abs_err <= tolerance.max(err_budget);
                self.finish(l.value, rr.value, abs_err, rel_err, tolerance, err_budget, passed, None)
            }
            Err(e) => self.failed(e.to_string()),
        }
    }

    /// A check whose outcome is an absolute quantity (residual, violation count) against a bound.
    pub fn absolute(self, lhs: Complex64, rhs: Complex64, abs_err: f64, rel_err: f64, tolerance: f64) -> CheckReport {
        let passed = abs_err <= tolerance;
        self.finish(lhs, rhs, abs_err, rel_err, tolerance, 0.0, passed, None)
    }

    pub fn failed(self, message: String) -> CheckReport {
        let tol = self.rel_floor;
        let zero = Complex64::new(0.0, 0.0);
        self.finish(zero, zero, f64::MAX, f64::MAX, tol, 0.0, false, Some(message))
    }

    #[allow(clippy::too_many_arguments)]
    fn finish(
        self,
        lhs: Complex64,
        rhs: Complex64,
        abs_err: f64,
        rel_err: f64,
        tolerance: f64,
        err_budget: f64,
        passed: bool,
        error: Option<String>,
    ) -> CheckReport {
        CheckReport {
            relation_id: self.relation_id,
            n: self.n,
            index: self.index,
            params: self.params,
            sample: self.sample,
            lhs,
            rhs,
            abs_err,
            rel_err,
            tolerance,
            err_budget,
            passed,
            runtime_ms: self.started.elapsed().as_secs_f64() * 1e3,
            seed: self.seed,
            error,
        }
    }
}

pub(crate) fn tuple_json(t: &ComplexTuple) -> serde_json::Value {
    serde_json::to_value(t).expect("tuple serializes")
}

pub(crate) fn c_json(z: Complex64) -> serde_json::Value {
    serde_json::to_value(z).expect("complex serializes")
}
