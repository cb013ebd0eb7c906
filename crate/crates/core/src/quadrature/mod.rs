//! Adaptive integration over ℝ and ℝ^d for exponentially decaying, oscillatory integrands.
//!
//! Integrands return an [`Estimate`] rather than a bare value so that errors of
//! nested integrals propagate outward into the reported `err`.

mod adaptive;
pub(crate) mod gauss_kronrod;
mod multi;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use adaptive::integrate_interval;
pub(crate) use adaptive::adapt as adapt_raw;

pub(crate) fn adaptive_opts(
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
    parallel: bool,
    strict: bool,
) -> adaptive::Opts {
    adaptive::Opts {
        abs_tol,
        rel_tol,
        max_panels,
        parallel,
        strict,
    }
}
pub use multi::{integrate_multi, integrate_multi_ordered};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiDimStrategy {
    NestedAdaptive,
    TensorFixed,
    QuasiMonteCarlo,
}

impl std::str::FromStr for MultiDimStrategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nested_adaptive" => Ok(Self::NestedAdaptive),
            "tensor_fixed" => Ok(Self::TensorFixed),
            "quasi_monte_carlo" | "qmc" => Ok(Self::QuasiMonteCarlo),
            other => Err(Error::parameter(format!("unknown strategy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum number of panels per one-dimensional integral.
    pub max_subdivisions: usize,
    /// Fraction of the nominal decay rate *not* trusted when truncating.
    pub truncation_safety: f64,
    /// Initial panel width is `osc_panel_factor` times the shortest oscillation period.
    pub osc_panel_factor: f64,
    pub multi_dim_strategy: MultiDimStrategy,
    pub qmc_samples: usize,
    /// Exclusion radius around the S₂ pole lattice; `None` means `1e-6·|ω₁+ω₂|`.
    pub singularity_radius: Option<f64>,
    /// Relative margin kept from the edges of the strip `0 < Re z < Re(ω₁+ω₂)`.
    pub strip_margin: f64,
    pub qmc_seed: u32,
    /// Evaluate panels on the rayon pool. Inner levels of nested integrals never do.
    pub parallel: bool,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_subdivisions: 4000,
            truncation_safety: 0.2,
            osc_panel_factor: 0.25,
            multi_dim_strategy: MultiDimStrategy::NestedAdaptive,
            qmc_samples: 1 << 16,
            singularity_radius: None,
            strip_margin: 0.05,
            qmc_seed: 0x5eed,
            parallel: true,
        }
    }
}

impl QuadratureSpec {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.max_subdivisions > 0
            && self.truncation_safety > 0.0
            && self.truncation_safety < 1.0
            && self.osc_panel_factor > 0.0
            && self.qmc_samples >= 2
            && (0.0..0.5).contains(&self.strip_margin);
        if ok {
            Ok(())
        } else {
            Err(Error::parameter(format!("invalid quadrature spec: {self:?}")))
        }
    }

    /// Spec for an integral evaluated inside another integrand.
    pub fn nested(&self) -> Self {
        Self {
            parallel: false,
            ..self.clone()
        }
    }
}

/// Exponential envelope `|f(y)| ≲ C·e^{−rate·|y − center|}` plus the angular
/// frequencies of the oscillating factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    pub rate: f64,
    pub osc_freqs: Vec<f64>,
    pub center: f64,
}

impl DecayProfile {
    pub fn new(rate: f64) -> Self {
        Self {
            rate,
            osc_freqs: Vec::new(),
            center: 0.0,
        }
    }

    pub fn with_freqs(mut self, freqs: impl IntoIterator<Item = f64>) -> Self {
        self.osc_freqs = freqs.into_iter().map(f64::abs).collect();
        self
    }

    pub fn centered(mut self, center: f64) -> Self {
        self.center = center;
        self
    }

    pub(crate) fn initial_width(&self, spec: &QuadratureSpec) -> f64 {
        let fmax = self.osc_freqs.iter().copied().fold(0.0, f64::max);
        if fmax > 0.0 {
            (spec.osc_panel_factor * std::f64::consts::TAU / fmax).min(1.0)
        } else {
            1.0
        }
    }
}

/// A value together with an estimate of its absolute error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: Complex64,
    pub err: f64,
}

impl Estimate {
    pub fn new(value: Complex64, err: f64) -> Self {
        Self { value, err }
    }

    pub fn exact(value: Complex64) -> Self {
        Self { value, err: 0.0 }
    }

    pub fn scale(self, c: Complex64) -> Self {
        Self {
            value: self.value * c,
            err: self.err * c.norm(),
        }
    }
}

/// `r.scale(c)` that also rescales the partial value of a tolerance error.
pub fn scaled(r: Result<Estimate>, c: Complex64) -> Result<Estimate> {
    r.map(|e| e.scale(c)).map_err(|e| e.scale_value(c))
}

impl std::ops::Mul for Estimate {
    type Output = Estimate;
    fn mul(self, o: Estimate) -> Estimate {
        Estimate {
            value: self.value * o.value,
            err: self.err * o.value.norm() + o.err * self.value.norm() + self.err * o.err,
        }
    }
}

/// Integrate over ℝ, truncating at a radius derived from the decay profile.
pub fn integrate_line<F>(f: F, profile: &DecayProfile, spec: &QuadratureSpec) -> Result<Estimate>
where
    F: Fn(f64) -> Result<Estimate> + Sync,
{
    let trunc = truncate(&f, profile, spec, spec.abs_tol)?;
    let width = profile.initial_width(spec);
    let body = adaptive::adapt(
        &f,
        trunc.lo,
        trunc.hi,
        width,
        &adaptive::Opts::top_level(spec),
    )?;
    Ok(Estimate::new(body.value, body.err + trunc.tail_err))
}

pub(crate) struct Truncation {
    pub lo: f64,
    pub hi: f64,
    pub tail_err: f64,
}

/// Choose `[c − R, c + R]` so that the envelope tails stay below `tol/10`.
///
/// The envelope constant is measured by probing rather than trusted blindly; the
/// probe is repeated at the chosen radius and the radius grown if the integrand
/// decays slower than the profile claims.
pub(crate) fn truncate<F>(
    f: &F,
    profile: &DecayProfile,
    spec: &QuadratureSpec,
    tol: f64,
) -> Result<Truncation>
where
    F: Fn(f64) -> Result<Estimate> + ?Sized,
{
    if !(profile.rate > 0.0) || !profile.rate.is_finite() {
        return Err(Error::domain(format!(
            "decay rate must be positive, got {}",
            profile.rate
        )));
    }
    let c = profile.center;
    let rate = profile.rate * (1.0 - spec.truncation_safety);
    let envelope = |y: f64| -> Result<f64> {
        let v = f(y)?.value.norm();
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("probe at {y:e}")));
        }
        Ok(v * (rate * (y - c).abs()).exp())
    };
    // Dense probes near the center, then geometric ones to catch mass that sits
    // off-center (e.g. when the true center moves with an outer variable).
    let step = 0.5 / rate;
    let mut big_c = envelope(c)?;
    let mut d = 0.0;
    while d < 40.0 / rate {
        d = if d < 8.0 / rate { d + step } else { d * 1.2 };
        big_c = big_c.max(envelope(c - d)?).max(envelope(c + d)?);
    }
    let target = 0.1 * tol;
    let mut r = 8.0 / rate;
    for _ in 0..6 {
        if big_c > 0.0 {
            r = r.max((2.0 * big_c / (target * rate)).ln() / rate);
        }
        let at_edge = envelope(c - r)?.max(envelope(c + r)?);
        if at_edge <= big_c * 1.0001 {
            break;
        }
        big_c = at_edge;
    }
    let tail_err = 2.0 * big_c * (-rate * r).exp() / rate;
    Ok(Truncation {
        lo: c - r,
        hi: c + r,
        tail_err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn real(f: impl Fn(f64) -> f64 + Sync) -> impl Fn(f64) -> Result<Estimate> + Sync {
        move |x| Ok(Estimate::exact(Complex64::new(f(x), 0.0)))
    }

    #[test]
    fn scaling_reaches_partial_values_of_tolerance_errors() {
        let c = Complex64::new(0.0, -2.0);
        let e = Error::Tolerance { message: "x".into(), value: Complex64::new(1.0, 1.0), err_est: 0.5 };
        match scaled(Err(e), c) {
            Err(Error::Tolerance { value, err_est, .. }) => {
                assert_eq!(value, Complex64::new(2.0, -2.0));
                assert_eq!(err_est, 1.0);
            }
            other => panic!("{other:?}"),
        }
        let ok = scaled(Ok(Estimate::new(Complex64::new(1.0, 0.0), 0.1)), c).unwrap();
        assert_eq!((ok.value, ok.err), (c, 0.2));
    }

    #[test]
    fn two_sided_exponential() {
        let spec = QuadratureSpec::default();
        let r = integrate_line(real(|y| (-PI * y.abs()).exp()), &DecayProfile::new(PI), &spec)
            .unwrap();
        assert!((r.value.re - 2.0 / PI).abs() < 1e-11, "{r:?}");
        assert!(r.err < 1e-9);
    }

    #[test]
    fn gaussian_with_loose_profile() {
        let spec = QuadratureSpec::default();
        let r = integrate_line(real(|y| (-y * y).exp()), &DecayProfile::new(1.0), &spec).unwrap();
        assert!((r.value.re - PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn oscillatory_fourier_of_sech() {
        // ∫ e^{2πiλy} sech(πy) dy = sech(πλ)
        let spec = QuadratureSpec::default();
        for lambda in [0.3, 1.2, 4.8] {
            let f = move |y: f64| {
                let ph = Complex64::new(0.0, 2.0 * PI * lambda * y).exp();
                Ok(Estimate::exact(ph / (PI * y).cosh()))
            };
            let prof = DecayProfile::new(PI).with_freqs([2.0 * PI * lambda]);
            let r = integrate_line(f, &prof, &spec).unwrap();
            let exact = 1.0 / (PI * lambda).cosh();
            assert!((r.value - exact).norm() < 1e-10, "λ={lambda}: {r:?}");
        }
    }

    #[test]
    fn shifted_center() {
        let spec = QuadratureSpec::default();
        let prof = DecayProfile::new(2.0).centered(30.0);
        let r = integrate_line(real(|y| (-2.0 * (y - 30.0).abs()).exp()), &prof, &spec).unwrap();
        assert!((r.value.re - 1.0).abs() < 1e-11);
    }

    #[test]
    fn slower_decay_than_claimed_is_detected() {
        // True rate 0.5 while the profile claims 2: the edge probe must widen the window.
        let spec = QuadratureSpec::default();
        let r = integrate_line(real(|y| (-0.5 * y.abs()).exp()), &DecayProfile::new(2.0), &spec)
            .unwrap();
        assert!((r.value.re - 4.0).abs() <= r.err.max(1e-8), "{r:?}");
    }

    #[test]
    fn rejects_nonpositive_rate() {
        let spec = QuadratureSpec::default();
        let r = integrate_line(real(|_| 1.0), &DecayProfile::new(0.0), &spec);
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::default().validate().is_ok());
        let bad = QuadratureSpec {
            truncation_safety: 1.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
