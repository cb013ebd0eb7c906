//! Integral operators Q_n, Λ_n, their duals, composed kernels and the Macdonald operators.

mod kernel_identity;
mod macdonald;

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ComplexTuple, Model};
use crate::quadrature::{integrate_multi, scaled, DecayProfile, Estimate, QuadratureSpec};

pub use kernel_identity::{kernel_identity_residual, kernel_identity_sides};
pub use macdonald::{elementary_symmetric, macdonald_apply};

pub(crate) fn phase(c: Complex64) -> Complex64 {
    (Complex64::new(0.0, 2.0 * PI) * c).exp()
}

/// Q(x_n, y_n; λ) = e^{2πiλ(x̄−ȳ)} K(x_n, y_n) μ(y_n).
pub fn q_kernel(x: &ComplexTuple, y: &ComplexTuple, lambda: Complex64, model: &Model) -> Result<Complex64> {
    if x.len() != y.len() {
        return Err(Error::domain(format!("Q kernel needs |x| = |y|, got {} and {}", x.len(), y.len())));
    }
    let mu = model.muprod(y)?;
    if mu == Complex64::new(0.0, 0.0) {
        return Ok(mu);
    }
    Ok(phase(lambda * (x.sum() - y.sum())) * model.kprod(x, y)? * mu)
}

/// Λ(x_n, y_{n−1}; λ) = e^{2πiλ(x̄−ȳ)} K(x_n, y_{n−1}) μ(y_{n−1}).
pub fn lambda_kernel(x: &ComplexTuple, y: &ComplexTuple, lambda: Complex64, model: &Model) -> Result<Complex64> {
    if y.len() + 1 != x.len() {
        return Err(Error::domain(format!("Λ kernel needs |y| = |x| − 1, got {} and {}", x.len(), y.len())));
    }
    let mu = model.muprod(y)?;
    if mu == Complex64::new(0.0, 0.0) {
        return Ok(mu);
    }
    Ok(phase(lambda * (x.sum() - y.sum())) * model.kprod(x, y)? * mu)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    Q,
    Lambda,
    QDual,
    LambdaDual,
}

impl OperatorKind {
    pub fn is_dual(self) -> bool {
        matches!(self, Self::QDual | Self::LambdaDual)
    }

    fn is_q(self) -> bool {
        matches!(self, Self::Q | Self::QDual)
    }
}

/// A realized operator: Q_n(λ), Λ_n(λ), Q̂_n(x) or Λ̂_n(x).
#[derive(Debug, Clone)]
pub struct OperatorHandle {
    pub kind: OperatorKind,
    pub n: usize,
    /// λ for Q/Λ, x for the duals.
    pub spectral: Complex64,
    pub spec: QuadratureSpec,
    model: Model,
}

impl OperatorHandle {
    pub fn new(kind: OperatorKind, n: usize, spectral: Complex64, model: &Model, spec: QuadratureSpec) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("operator size n must be ≥ 1"));
        }
        spec.validate()?;
        let model = if kind.is_dual() { model.dual()?.clone() } else { model.clone() };
        Ok(Self { kind, n, spectral, spec, model })
    }

    /// The model whose μ, K enter the kernel (the dual model for Q̂, Λ̂).
    pub fn kernel_model(&self) -> &Model {
        &self.model
    }

    pub fn arity(&self) -> usize {
        if self.kind.is_q() {
            self.n
        } else {
            self.n - 1
        }
    }

    pub fn constant(&self) -> Result<Complex64> {
        self.model.d_n(self.arity())
    }

    pub fn kernel(&self, x: &ComplexTuple, y: &ComplexTuple) -> Result<Complex64> {
        if self.kind.is_q() {
            q_kernel(x, y, self.spectral, &self.model)
        } else {
            lambda_kernel(x, y, self.spectral, &self.model)
        }
    }

    /// Per-coordinate decay of |K·μ| along one integration variable, in units of πν:
    /// n K-factors against 2(d−1) μ-factors.
    fn kernel_rate(&self) -> f64 {
        let nu = self.model.params().nu_g();
        let n = self.n as f64;
        if self.kind.is_q() {
            PI * nu * (2.0 - n)
        } else {
            PI * nu * (4.0 - n)
        }
    }
}

impl fmt::Display for OperatorHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}_{}({})", self.kind, self.n, self.spectral)
    }
}

type Evaluator<'a> = dyn Fn(&ComplexTuple) -> Result<Estimate> + Sync + 'a;

/// A function of `arity` coordinates with honest hints about its growth and oscillation.
pub struct FunctionOnTuples<'a> {
    evaluator: Box<Evaluator<'a>>,
    pub arity: usize,
    /// Decay per coordinate, excluding the plane-wave factors named in `spectral`.
    pub decay_rate_hint: f64,
    /// Angular frequencies present beyond the plane waves.
    pub osc_freqs_hint: Vec<f64>,
    /// Spectral labels λ_j of the plane-wave behaviour e^{2πiλ_j y}; used for strip checks.
    pub spectral: Vec<Complex64>,
}

impl<'a> FunctionOnTuples<'a> {
    pub fn new(arity: usize, f: impl Fn(&ComplexTuple) -> Result<Estimate> + Sync + 'a) -> Self {
        Self {
            evaluator: Box::new(f),
            arity,
            decay_rate_hint: 0.0,
            osc_freqs_hint: Vec::new(),
            spectral: Vec::new(),
        }
    }

    pub fn with_decay(mut self, rate: f64) -> Self {
        self.decay_rate_hint = rate;
        self
    }

    pub fn with_freqs(mut self, freqs: Vec<f64>) -> Self {
        self.osc_freqs_hint = freqs;
        self
    }

    pub fn with_spectral(mut self, labels: Vec<Complex64>) -> Self {
        self.spectral = labels;
        self
    }

    /// e^{2πi Σ λ_j y_j}.
    pub fn plane_wave(lambda: &ComplexTuple) -> FunctionOnTuples<'static> {
        let l = lambda.clone();
        let labels = l.0.clone();
        FunctionOnTuples::new(l.len(), move |y: &ComplexTuple| {
            let s: Complex64 = l.0.iter().zip(y.0.iter()).map(|(a, b)| a * b).sum();
            Ok(Estimate::exact(phase(s)))
        })
        .with_spectral(labels)
    }

    pub fn constant(c: Complex64) -> FunctionOnTuples<'static> {
        FunctionOnTuples::new(0, move |_| Ok(Estimate::exact(c)))
    }

    pub fn eval(&self, x: &ComplexTuple) -> Result<Estimate> {
        (self.evaluator)(x)
    }
}

/// Apply the operator to `f` and evaluate at `x` (coordinates, or spectral values for duals).
pub fn apply(op: &OperatorHandle, f: &FunctionOnTuples<'_>, x: &ComplexTuple) -> Result<Estimate> {
    let d = op.arity();
    if x.len() != op.n || f.arity != d {
        return Err(Error::domain(format!(
            "{op}: expected a point of length {} and a function of {d} variables, got {} and {}",
            op.n,
            x.len(),
            f.arity
        )));
    }
    let nu = op.model.params().nu_g();
    let lam = op.spectral;
    let growth = if f.spectral.is_empty() {
        2.0 * PI * lam.im.abs()
    } else {
        f.spectral.iter().map(|l| 2.0 * PI * (lam - l).im.abs()).fold(0.0, f64::max)
    };
    if op.kind.is_q() {
        if let Some(l) = f.spectral.iter().find(|l| (lam - *l).im.abs() >= nu / 2.0) {
            return Err(Error::domain(format!(
                "{op}: |Im(λ − {l})| must be < ν/2 = {}",
                nu / 2.0
            )));
        }
    }
    let c = op.constant()?;
    if d == 0 {
        let k = op.kernel(x, &ComplexTuple::default())?;
        return Ok(f.eval(&ComplexTuple::default())?.scale(k * c));
    }
    let rate = op.kernel_rate() + f.decay_rate_hint - growth;
    if !(rate > 0.0) {
        return Err(Error::domain(format!(
            "{op}: integrand has no net decay (rate {rate:.3e}); check the strip conditions"
        )));
    }
    let center = x.0.iter().map(|v| v.re).sum::<f64>() / x.len() as f64;
    let mut freqs = f.osc_freqs_hint.clone();
    freqs.push(2.0 * PI * lam.re.abs());
    freqs.extend(f.spectral.iter().map(|l| 2.0 * PI * (lam - l).re.abs()));
    let profiles = vec![DecayProfile::new(rate).with_freqs(freqs).centered(center); d];
    let r = integrate_multi(
        |y: &[f64]| {
            let yt = ComplexTuple::real(y);
            let k = op.kernel(x, &yt)?;
            if k == Complex64::new(0.0, 0.0) {
                return Ok(Estimate::exact(k));
            }
            Ok(f.eval(&yt)?.scale(k))
        },
        &profiles,
        &op.spec,
    );
    scaled(r, c)
}

fn composed(
    x: &ComplexTuple,
    z: &ComplexTuple,
    dim: usize,
    rate: f64,
    freq: f64,
    spec: &QuadratureSpec,
    f: impl Fn(&ComplexTuple) -> Result<Complex64> + Sync,
) -> Result<Estimate> {
    let pts: Vec<f64> = x.0.iter().chain(z.0.iter()).map(|v| v.re).collect();
    let center = pts.iter().sum::<f64>() / pts.len().max(1) as f64;
    let profiles = vec![DecayProfile::new(rate).with_freqs([freq]).centered(center); dim];
    integrate_multi(|y: &[f64]| Ok(Estimate::exact(f(&ComplexTuple::real(y))?)), &profiles, spec)
}

/// Kernel of Q_n(λ)Q_n(ρ): d_n² ∫ Q(x,y;λ) Q(y,z;ρ) dⁿy.
pub fn composed_qq_kernel(
    x: &ComplexTuple,
    z: &ComplexTuple,
    lambda: Complex64,
    rho: Complex64,
    model: &Model,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    let n = x.len();
    let nu = model.params().nu_g();
    let dl = lambda - rho;
    if dl.im.abs() >= nu {
        return Err(Error::domain(format!("|Im(λ − ρ)| = {} must be < ν = {nu}", dl.im.abs())));
    }
    let rate = 2.0 * PI * (nu - dl.im.abs());
    let r = composed(x, z, n, rate, 2.0 * PI * dl.re.abs(), spec, |y| {
        let a = q_kernel(x, y, lambda, model)?;
        if a == Complex64::new(0.0, 0.0) {
            return Ok(a);
        }
        Ok(a * q_kernel(y, z, rho, model)?)
    });
    let d = model.d_n(n)?;
    scaled(r, d * d)
}

/// Kernel of Q_n(λ)Λ_n(ρ): d_n d_{n−1} ∫ Q(x,y;λ) Λ(y,z;ρ) dⁿy, with |z| = n − 1.
pub fn composed_ql_kernel(
    x: &ComplexTuple,
    z: &ComplexTuple,
    lambda: Complex64,
    rho: Complex64,
    model: &Model,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    let n = x.len();
    let nu = model.params().nu_g();
    let dl = lambda - rho;
    if dl.im.abs() >= nu / 2.0 {
        return Err(Error::domain(format!("|Im(λ − ρ)| = {} must be < ν/2 = {}", dl.im.abs(), nu / 2.0)));
    }
    let rate = PI * (nu - 2.0 * dl.im.abs());
    let r = composed(x, z, n, rate, 2.0 * PI * dl.re.abs(), spec, |y| {
        let a = q_kernel(x, y, lambda, model)?;
        if a == Complex64::new(0.0, 0.0) {
            return Ok(a);
        }
        Ok(a * lambda_kernel(y, z, rho, model)?)
    });
    scaled(r, model.d_n(n)? * model.d_n(n - 1)?)
}

/// Kernel of Λ_n(ρ)Q_{n−1}(λ): d_{n−1}² ∫ Λ(x,t;ρ) Q(t,z;λ) d^{n−1}t, with |z| = n − 1.
pub fn composed_lq_kernel(
    x: &ComplexTuple,
    z: &ComplexTuple,
    lambda: Complex64,
    rho: Complex64,
    model: &Model,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    let n = x.len();
    let nu = model.params().nu_g();
    let dl = lambda - rho;
    let rate = PI * (3.0 * nu - 2.0 * dl.im.abs());
    let r = composed(x, z, n - 1, rate, 2.0 * PI * dl.re.abs(), spec, |t| {
        let a = lambda_kernel(x, t, rho, model)?;
        if a == Complex64::new(0.0, 0.0) {
            return Ok(a);
        }
        Ok(a * q_kernel(t, z, lambda, model)?)
    });
    let d = model.d_n(n - 1)?;
    scaled(r, d * d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn model() -> Model {
        Model::new(ModelParams::real(1.0, 2f64.sqrt(), 0.6).unwrap()).unwrap()
    }

    #[test]
    fn one_dimensional_kernels() {
        let m = model();
        let x = ComplexTuple::real(&[0.4]);
        assert!((q_kernel(&x, &x, c(0.3, 0.1), &m).unwrap() - m.kfun(c(0.0, 0.0)).unwrap()).norm() < 1e-15);
        let l = lambda_kernel(&x, &ComplexTuple::default(), c(0.3, 0.0), &m).unwrap();
        assert!((l - phase(c(0.12, 0.0))).norm() < 1e-15);
    }

    #[test]
    fn lambda_kernel_factorizes_through_q() {
        let m = model();
        let x = ComplexTuple::real(&[0.3, -0.4, 1.2]);
        let y = ComplexTuple::real(&[0.7, -0.9]);
        let lam = c(0.25, 0.02);
        let lhs = lambda_kernel(&x, &y, lam, &m).unwrap();
        let xn = x.last();
        let kk: Complex64 = y.0.iter().map(|yj| m.kfun(xn - yj).unwrap()).product();
        let rhs = phase(lam * xn) * q_kernel(&x.head(2), &y, lam, &m).unwrap() * kk;
        assert!((lhs - rhs).norm() < 1e-12 * lhs.norm());
    }

    #[test]
    fn kernel_permutation_symmetry() {
        let m = model();
        let x = ComplexTuple::real(&[0.3, -0.4]);
        let y = ComplexTuple::real(&[0.9, 0.1]);
        let a = q_kernel(&x, &y, c(0.2, 0.0), &m).unwrap();
        let b = q_kernel(&x.swapped(0, 1), &y.swapped(0, 1), c(0.2, 0.0), &m).unwrap();
        assert!((a - b).norm() < 1e-13 * a.norm());
        let x3 = ComplexTuple::real(&[0.3, -0.4, 0.8]);
        let a = lambda_kernel(&x3, &y, c(0.2, 0.0), &m).unwrap();
        let b = lambda_kernel(&x3.permuted(&[2, 0, 1]), &y.swapped(0, 1), c(0.2, 0.0), &m).unwrap();
        assert!((a - b).norm() < 1e-13 * a.norm());
    }

    #[test]
    fn q1_on_plane_wave_is_fourier_transform() {
        let m = model();
        let spec = QuadratureSpec::with_tolerances(1e-11, 1e-13);
        let (lam, lam1) = (c(0.2, 0.0), c(-0.15, 0.0));
        let op = OperatorHandle::new(OperatorKind::Q, 1, lam, &m, spec).unwrap();
        let f = FunctionOnTuples::plane_wave(&ComplexTuple::new(vec![lam1]));
        let x = ComplexTuple::real(&[0.35]);
        let got = apply(&op, &f, &x).unwrap();
        let want = m.k_hat(lam - lam1).unwrap() * phase(lam1 * x[0]);
        assert!((got.value - want).norm() < 1e-9 * want.norm(), "{got:?} {want}");
    }

    #[test]
    fn lambda1_on_constant_is_plane_wave() {
        let m = model();
        let op = OperatorHandle::new(OperatorKind::Lambda, 1, c(0.3, 0.0), &m, QuadratureSpec::default()).unwrap();
        let x = ComplexTuple::real(&[0.7]);
        let got = apply(&op, &FunctionOnTuples::constant(c(1.0, 0.0)), &x).unwrap();
        assert!((got.value - phase(c(0.21, 0.0))).norm() < 1e-15);
    }

    #[test]
    fn q_strip_violation_is_rejected() {
        let m = model();
        let nu = m.params().nu_g();
        let op = OperatorHandle::new(OperatorKind::Q, 1, c(0.0, 0.6 * nu), &m, QuadratureSpec::default()).unwrap();
        let f = FunctionOnTuples::plane_wave(&ComplexTuple::real(&[0.1]));
        assert!(matches!(apply(&op, &f, &ComplexTuple::real(&[0.0])), Err(Error::Domain(_))));
    }

    #[test]
    fn composed_qq_n1_commutes() {
        let m = model();
        let spec = QuadratureSpec::with_tolerances(1e-10, 1e-13);
        let (x, z) = (ComplexTuple::real(&[0.3]), ComplexTuple::real(&[-0.5]));
        let a = composed_qq_kernel(&x, &z, c(0.2, 0.0), c(-0.1, 0.0), &m, &spec).unwrap();
        let b = composed_qq_kernel(&x, &z, c(-0.1, 0.0), c(0.2, 0.0), &m, &spec).unwrap();
        assert!((a.value - b.value).norm() <= 3.0 * (a.err + b.err) + 1e-12, "{a:?} {b:?}");
    }
}
