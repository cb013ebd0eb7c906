//! The double sine function S₂(z|ω) and its relatives.

mod engine;
mod lattice;
pub(crate) mod line_table;
mod strip;

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::QuadratureSpec;

pub use engine::{DoubleSine, LadderPeriod};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Periods {
    pub omega1: Complex64,
    pub omega2: Complex64,
}

impl Periods {
    pub fn new(omega1: Complex64, omega2: Complex64) -> Result<Self> {
        let ok = |w: Complex64| w.re > 0.0 && w.re.is_finite() && w.im.is_finite();
        if !ok(omega1) || !ok(omega2) {
            return Err(Error::parameter(format!(
                "periods need positive real parts, got ω₁ = {omega1}, ω₂ = {omega2}"
            )));
        }
        Ok(Self { omega1, omega2 })
    }

    pub fn real(omega1: f64, omega2: f64) -> Result<Self> {
        Self::new(Complex64::new(omega1, 0.0), Complex64::new(omega2, 0.0))
    }

    pub fn sum(&self) -> Complex64 {
        self.omega1 + self.omega2
    }

    pub fn product(&self) -> Complex64 {
        self.omega1 * self.omega2
    }

    pub fn sigma1(&self) -> f64 {
        self.omega1.arg()
    }

    pub fn sigma2(&self) -> f64 {
        self.omega2.arg()
    }

    pub fn is_real(&self) -> bool {
        self.omega1.im == 0.0 && self.omega2.im == 0.0
    }

    pub fn swapped(&self) -> Self {
        Self {
            omega1: self.omega2,
            omega2: self.omega1,
        }
    }

    /// `γω` for real γ > 0 (the only scaling under which S₂ is homogeneous).
    pub fn scaled(&self, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) {
            return Err(Error::parameter(format!("scale must be positive, got {gamma}")));
        }
        Self::new(self.omega1 * gamma, self.omega2 * gamma)
    }

    pub fn default_singularity_radius(&self) -> f64 {
        1e-6 * self.sum().norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularityInfo {
    pub is_zero: bool,
    pub is_pole: bool,
    /// `(m, k)` of the nearest lattice point: `−mω₁−kω₂` for zeros, `mω₁+kω₂` for poles.
    pub lattice_indices: (u32, u32),
    pub distance: f64,
}

impl fmt::Display for SingularityInfo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match (self.is_zero, self.is_pole) {
            (true, _) => "zero",
            (_, true) => "pole",
            _ => "regular",
        };
        let (m, k) = self.lattice_indices;
        write!(f, "{kind}, nearest lattice point (m, k) = ({m}, {k}) at distance {:.3e}", self.distance)
    }
}

/// Classify `z` against the zero and pole lattices using the default radius.
pub fn classify_point(z: Complex64, periods: &Periods) -> SingularityInfo {
    lattice::classify(z, periods, periods.default_singularity_radius())
}

pub fn classify_point_with_radius(z: Complex64, periods: &Periods, radius: f64) -> SingularityInfo {
    lattice::classify(z, periods, radius)
}

/// ln S₂(z) straight from the integral representation; `z` must lie inside the strip.
pub fn log_s2_strip(z: Complex64, periods: &Periods, spec: &QuadratureSpec) -> Result<Complex64> {
    let tol = strip::StripTol {
        abs_tol: spec.abs_tol,
        rel_tol: spec.rel_tol.min(1e-12),
        margin: spec.strip_margin,
        max_panels: spec.max_subdivisions,
        strict: true,
    };
    strip::strip_estimate(z, periods, &tol).map(|e| e.value)
}

/// S₂(z|ω) anywhere off the pole lattice; exact zeros give 0.
pub fn s2(z: Complex64, periods: &Periods, spec: &QuadratureSpec) -> Result<Complex64> {
    DoubleSine::new(*periods, spec).s2(z)
}

/// ln S₂(z|ω), continuous along the shift ladder; −∞ at lattice zeros.
pub fn ln_s2(z: Complex64, periods: &Periods, spec: &QuadratureSpec) -> Result<Complex64> {
    DoubleSine::new(*periods, spec).ln_s2(z)
}

/// G(z|ω) = S₂(iz + (ω₁+ω₂)/2 | ω).
pub fn hyperbolic_gamma(z: Complex64, periods: &Periods, spec: &QuadratureSpec) -> Result<Complex64> {
    s2(Complex64::i() * z + periods.sum() * 0.5, periods, spec)
}

/// Leading asymptotic exponent: the multiple Bernoulli polynomial B₂₂(z|ω).
pub fn bernoulli_b22(z: Complex64, p: &Periods) -> Complex64 {
    let (w1, w2) = (p.omega1, p.omega2);
    let pr = w1 * w2;
    z * z / pr - z * (w1 + w2) / pr + (w1 * w1 + w2 * w2 + 3.0 * pr) / (6.0 * pr)
}
