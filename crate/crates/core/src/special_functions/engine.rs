use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;

use super::line_table::LineTable;
use super::strip::{in_strip, strip_estimate, StripTol};
use super::{bernoulli_b22, lattice, Periods};
use crate::error::{Error, Result};
use crate::quadrature::QuadratureSpec;

/// Exponent e^{−x} of the neglected corrections when using the B₂₂ asymptotics.
const ASYMPTOTIC_EXPONENT: f64 = 40.0;

/// Which period drives the shift ladder back into the strip.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderPeriod {
    /// The period with the smaller real part; points already inside the strip are not moved.
    Auto,
    Omega1,
    Omega2,
}

type TableKey = [u64; 5];
type TableSlot = Arc<OnceLock<Result<Arc<LineTable>>>>;

/// Tables depend only on the periods and the line, so they are shared process-wide.
fn table_cache() -> &'static RwLock<HashMap<TableKey, TableSlot>> {
    static CACHE: OnceLock<RwLock<HashMap<TableKey, TableSlot>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Evaluator for S₂(·|ω) at fixed periods.
///
/// [`DoubleSine::ln_s2`] always integrates directly. [`DoubleSine::ln_s2_fast`]
/// serves points from per-line Chebyshev tables; which path a caller uses is a
/// fixed property of the call site, so results never depend on cache history.
#[derive(Debug, Clone)]
pub struct DoubleSine {
    periods: Periods,
    direct: StripTolSpec,
    radius: f64,
}

#[derive(Debug, Clone, Copy)]
struct StripTolSpec {
    abs_tol: f64,
    rel_tol: f64,
    margin: f64,
    max_panels: usize,
}

impl StripTolSpec {
    fn strict(&self) -> StripTol {
        StripTol {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            margin: self.margin,
            max_panels: self.max_panels,
            strict: true,
        }
    }
}

/// Tolerance used for table nodes, independent of any caller spec.
const TABLE_TOL: StripTol = StripTol {
    abs_tol: 1e-14,
    rel_tol: 1e-15,
    margin: 0.05,
    max_panels: 20_000,
    strict: false,
};

impl DoubleSine {
    pub fn new(periods: Periods, spec: &QuadratureSpec) -> Self {
        Self {
            periods,
            direct: StripTolSpec {
                abs_tol: spec.abs_tol.max(1e-15),
                rel_tol: spec.rel_tol.min(1e-12),
                margin: spec.strip_margin,
                max_panels: spec.max_subdivisions.max(1000),
            },
            radius: spec
                .singularity_radius
                .unwrap_or_else(|| periods.default_singularity_radius()),
        }
    }

    pub fn periods(&self) -> &Periods {
        &self.periods
    }

    pub fn singularity_radius(&self) -> f64 {
        self.radius
    }

    pub fn s2(&self, z: Complex64) -> Result<Complex64> {
        self.ln_s2(z).map(Complex64::exp)
    }

    pub fn ln_s2(&self, z: Complex64) -> Result<Complex64> {
        self.ln_s2_via(z, LadderPeriod::Auto)
    }

    /// Direct evaluation with an explicit choice of shift period.
    pub fn ln_s2_via(&self, z: Complex64, ladder: LadderPeriod) -> Result<Complex64> {
        if self.check_lattice(z)? {
            return Ok(neg_infinity());
        }
        if ladder == LadderPeriod::Auto {
            if let Some(v) = self.asymptotic(z) {
                return Ok(v);
            }
        }
        let (zs, logfac) = self.ladder(z, ladder);
        if ladder == LadderPeriod::Auto {
            if let Some(v) = self.asymptotic(zs) {
                return Ok(v + logfac);
            }
        }
        let v = strip_estimate(zs, &self.periods, &self.direct.strict())?;
        Ok(v.value + logfac)
    }

    /// Table-backed evaluation, accurate to ~1e-13 relative in S₂.
    pub fn ln_s2_fast(&self, z: Complex64) -> Result<Complex64> {
        if self.check_lattice(z)? {
            return Ok(neg_infinity());
        }
        if let Some(v) = self.asymptotic(z) {
            return Ok(v);
        }
        let (zs, logfac) = self.ladder(z, LadderPeriod::Auto);
        let table = self.table(zs.re)?;
        if table.contains(zs.im) {
            Ok(table.eval(zs.im) + logfac)
        } else {
            Ok(self.asymptotic_signed(zs, zs.im.signum()) + logfac)
        }
    }

    /// Error when `z` is within the singularity radius of a zero, for callers that
    /// divide by S₂(z) (a zero there is a pole of the quotient).
    pub fn check_not_near_zero(&self, z: Complex64, context: &str) -> Result<()> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite(format!("{context}: S₂ argument {z}")));
        }
        match lattice::nearest_zero(z, &self.periods, self.radius) {
            None => Ok(()),
            Some((m, k, d)) => Err(Error::NearPole {
                z,
                radius: self.radius,
                info: super::SingularityInfo {
                    is_zero: true,
                    is_pole: false,
                    lattice_indices: (m, k),
                    distance: d,
                },
                context: context.into(),
            }),
        }
    }

    /// `Ok(true)` at a lattice zero, `Err(NearPole)` near a pole.
    fn check_lattice(&self, z: Complex64) -> Result<bool> {
        let p = &self.periods;
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite(format!("S₂ argument {z}")));
        }
        if let Some((m, k, d)) = lattice::nearest_pole(z, p, self.radius) {
            return Err(Error::NearPole {
                z,
                radius: self.radius,
                info: super::SingularityInfo {
                    is_zero: false,
                    is_pole: true,
                    lattice_indices: (m, k),
                    distance: d,
                },
                context: "S₂".into(),
            });
        }
        let exact = 8.0 * f64::EPSILON * (p.sum().norm() + z.norm());
        Ok(lattice::nearest_zero(z, p, exact).is_some())
    }

    fn threshold() -> f64 {
        ASYMPTOTIC_EXPONENT / TAU
    }

    fn asymptotic(&self, z: Complex64) -> Option<Complex64> {
        let q1 = (z / self.periods.omega1).im;
        let q2 = (z / self.periods.omega2).im;
        let t = Self::threshold();
        if q1 >= t && q2 >= t {
            Some(self.asymptotic_signed(z, 1.0))
        } else if q1 <= -t && q2 <= -t {
            Some(self.asymptotic_signed(z, -1.0))
        } else {
            None
        }
    }

    /// ln S₂(z) ≈ ±(πi/2)·B₂₂(z) for Im z → ±∞.
    fn asymptotic_signed(&self, z: Complex64, sign: f64) -> Complex64 {
        Complex64::new(0.0, sign * PI / 2.0) * bernoulli_b22(z, &self.periods)
    }

    /// Move `z` into the strip. Returns the shifted point and ln of the accumulated factor.
    fn ladder(&self, z: Complex64, which: LadderPeriod) -> (Complex64, Complex64) {
        let p = &self.periods;
        let (ws, wo) = match which {
            LadderPeriod::Auto => {
                if in_strip(z, p, self.direct.margin) {
                    return (z, Complex64::new(0.0, 0.0));
                }
                if p.omega1.re <= p.omega2.re {
                    (p.omega1, p.omega2)
                } else {
                    (p.omega2, p.omega1)
                }
            }
            LadderPeriod::Omega1 => (p.omega1, p.omega2),
            LadderPeriod::Omega2 => (p.omega2, p.omega1),
        };
        // window [w/2 − Re ω_s/2, w/2 + Re ω_s/2) is inside the strip with margin Re ω_o/2
        let lo = 0.5 * (p.sum().re - ws.re);
        let k = ((z.re - lo) / ws.re).floor() as i64;
        let mut acc = Complex64::new(0.0, 0.0);
        if k < 0 {
            // S₂(z) = ∏_{j<|k|} 2 sin(π(z + jω_s)/ω_o) · S₂(z + |k|ω_s)
            for j in 0..(-k) {
                acc += ln_2sin(PI * (z + ws * j as f64) / wo);
            }
        } else {
            // S₂(z) = S₂(z − kω_s) / ∏_{1≤j≤k} 2 sin(π(z − jω_s)/ω_o)
            for j in 1..=k {
                acc -= ln_2sin(PI * (z - ws * j as f64) / wo);
            }
        }
        (z - ws * k as f64, acc)
    }

    fn table(&self, c: f64) -> Result<Arc<LineTable>> {
        let p = &self.periods;
        let key = [
            p.omega1.re.to_bits(),
            p.omega1.im.to_bits(),
            p.omega2.re.to_bits(),
            p.omega2.im.to_bits(),
            c.to_bits(),
        ];
        let slot = {
            let read = table_cache().read().unwrap_or_else(|e| e.into_inner());
            read.get(&key).cloned()
        };
        let slot = match slot {
            Some(s) => s,
            None => {
                let mut w = table_cache().write().unwrap_or_else(|e| e.into_inner());
                w.entry(key).or_default().clone()
            }
        };
        slot.get_or_init(|| self.build_table(c).map(Arc::new)).clone()
    }

    fn build_table(&self, c: f64) -> Result<LineTable> {
        let p = self.periods;
        let t = Self::threshold();
        let mut y_max: f64 = 1.0;
        for w in [p.omega1, p.omega2] {
            let n2 = w.norm_sqr();
            y_max = y_max
                .max((t * n2 + c * w.im) / w.re)
                .max((t * n2 - c * w.im) / w.re);
        }
        LineTable::build(
            y_max,
            |y| lattice::distance(Complex64::new(c, y), &p),
            |y| strip_estimate(Complex64::new(c, y), &p, &TABLE_TOL).map(|e| e.value),
        )
    }
}

fn neg_infinity() -> Complex64 {
    Complex64::new(f64::NEG_INFINITY, 0.0)
}

/// ln(2 sin u), computed without overflow for large |Im u|.
pub(crate) fn ln_2sin(u: Complex64) -> Complex64 {
    let i = Complex64::i();
    if u.im > 1.0 {
        // 2 sin u = i e^{−iu} (1 − e^{2iu})
        i * (PI / 2.0) - i * u + (Complex64::new(1.0, 0.0) - (2.0 * i * u).exp()).ln()
    } else if u.im < -1.0 {
        // 2 sin u = −i e^{iu} (1 − e^{−2iu})
        -i * (PI / 2.0) + i * u + (Complex64::new(1.0, 0.0) - (-2.0 * i * u).exp()).ln()
    } else {
        (2.0 * u.sin()).ln()
    }
}
