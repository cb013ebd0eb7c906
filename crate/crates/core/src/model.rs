//! Model parameters and the scalar building blocks μ, K, their duals and products.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::QuadratureSpec;
use crate::special_functions::{DoubleSine, Periods};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub periods: Periods,
    pub g: Complex64,
}

impl ModelParams {
    pub fn new(periods: Periods, g: Complex64) -> Result<Self> {
        let p = Self { periods, g };
        p.validate()?;
        Ok(p)
    }

    pub fn real(omega1: f64, omega2: f64, g: f64) -> Result<Self> {
        Self::new(Periods::real(omega1, omega2)?, Complex64::new(g, 0.0))
    }

    pub fn validate(&self) -> Result<()> {
        Periods::new(self.periods.omega1, self.periods.omega2)?;
        let w = self.periods.sum().re;
        if !(self.g.re > 0.0 && self.g.re < w) {
            return Err(Error::parameter(format!(
                "coupling needs 0 < Re g < Re(ω₁+ω₂) = {w}, got g = {}",
                self.g
            )));
        }
        if !(self.nu_g() > 0.0) {
            return Err(Error::parameter(format!(
                "decay rate ν_g = Re(g/(ω₁ω₂)) = {} must be positive",
                self.nu_g()
            )));
        }
        Ok(())
    }

    /// Both coupling conditions hold, so the dual model is admissible too.
    pub fn validate_dual(&self) -> Result<()> {
        self.validate()?;
        if !(self.nu_g_star() > 0.0) {
            return Err(Error::parameter(format!(
                "dual decay rate ν_g* = Re(g*/(ω₁ω₂)) = {} must be positive",
                self.nu_g_star()
            )));
        }
        Ok(())
    }

    pub fn omega1(&self) -> Complex64 {
        self.periods.omega1
    }

    pub fn omega2(&self) -> Complex64 {
        self.periods.omega2
    }

    pub fn g_star(&self) -> Complex64 {
        self.periods.sum() - self.g
    }

    pub fn g_hat(&self) -> Complex64 {
        self.g / self.periods.product()
    }

    pub fn g_hat_star(&self) -> Complex64 {
        self.g_star() / self.periods.product()
    }

    pub fn omega_hat(&self) -> Periods {
        Periods {
            omega1: 1.0 / self.periods.omega2,
            omega2: 1.0 / self.periods.omega1,
        }
    }

    pub fn nu_g(&self) -> f64 {
        self.g_hat().re
    }

    pub fn nu_g_star(&self) -> f64 {
        self.g_hat_star().re
    }

    /// The dual model `(ĝ*, ω̂)`. Applying it twice returns the original parameters.
    pub fn dual(&self) -> ModelParams {
        ModelParams {
            periods: self.omega_hat(),
            g: self.g_hat_star(),
        }
    }

    pub fn decay_rates(&self) -> (f64, f64) {
        (self.nu_g(), self.nu_g_star())
    }
}

/// Ordered tuple of complex numbers: coordinates, spectral parameters or integration points.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComplexTuple(pub Vec<Complex64>);

impl ComplexTuple {
    pub fn new(values: Vec<Complex64>) -> Self {
        Self(values)
    }

    pub fn real(values: &[f64]) -> Self {
        Self(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.0
    }

    pub fn sum(&self) -> Complex64 {
        self.0.iter().sum()
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self(perm.iter().map(|&i| self.0[i]).collect())
    }

    pub fn swapped(&self, i: usize, j: usize) -> Self {
        let mut v = self.0.clone();
        v.swap(i, j);
        Self(v)
    }

    pub fn concat(&self, other: &ComplexTuple) -> Self {
        Self(self.0.iter().chain(other.0.iter()).copied().collect())
    }

    pub fn shifted(&self, c: Complex64) -> Self {
        Self(self.0.iter().map(|v| v + c).collect())
    }

    pub fn head(&self, n: usize) -> Self {
        Self(self.0[..n].to_vec())
    }

    pub fn last(&self) -> Complex64 {
        *self.0.last().expect("non-empty tuple")
    }
}

impl std::ops::Index<usize> for ComplexTuple {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl From<Vec<Complex64>> for ComplexTuple {
    fn from(v: Vec<Complex64>) -> Self {
        Self(v)
    }
}

/// A parameter set bound to its S₂ evaluator.
///
/// Cheap to clone. μ and K go through the tabulated S₂ path; constants
/// such as S₂(g) use direct integration.
#[derive(Debug, Clone)]
pub struct Model(Arc<Inner>);

#[derive(Debug)]
struct Inner {
    params: ModelParams,
    ds: DoubleSine,
    s2_g: OnceLock<Result<Complex64>>,
    dual: OnceLock<Result<Model>>,
}

impl Model {
    pub fn new(params: ModelParams) -> Result<Self> {
        params.validate()?;
        Ok(Self(Arc::new(Inner {
            params,
            ds: DoubleSine::new(params.periods, &QuadratureSpec::default()),
            s2_g: OnceLock::new(),
            dual: OnceLock::new(),
        })))
    }

    pub fn params(&self) -> &ModelParams {
        &self.0.params
    }

    pub fn double_sine(&self) -> &DoubleSine {
        &self.0.ds
    }

    /// The model at `(ĝ*, ω̂)`; needs ν_g* > 0.
    pub fn dual(&self) -> Result<&Model> {
        self.0
            .dual
            .get_or_init(|| {
                self.0.params.validate_dual()?;
                Model::new(self.0.params.dual())
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    fn ln_s2(&self, z: Complex64) -> Result<Complex64> {
        self.0.ds.ln_s2_fast(z)
    }

    /// ln S₂(z) for a factor in a denominator: a zero there is a pole of the result.
    fn ln_s2_denominator(&self, z: Complex64, what: &str) -> Result<Complex64> {
        self.0.ds.check_not_near_zero(z, what)?;
        self.ln_s2(z)
    }

    /// μ(x) = S₂(ix) / S₂(ix + g).
    pub fn mu(&self, x: Complex64) -> Result<Complex64> {
        let ix = Complex64::i() * x;
        let num = self.ln_s2(ix).map_err(|e| e.with_context(|| format!("μ({x})")))?;
        let den = self.ln_s2_denominator(ix + self.0.params.g, "μ denominator")?;
        Ok((num - den).exp())
    }

    /// K(x) = 1 / (S₂(ix + g*/2) S₂(−ix + g*/2)).
    pub fn kfun(&self, x: Complex64) -> Result<Complex64> {
        let h = self.0.params.g_star() * 0.5;
        let ix = Complex64::i() * x;
        let a = self.ln_s2_denominator(ix + h, "K")?;
        let b = self.ln_s2_denominator(-ix + h, "K")?;
        Ok((-(a + b)).exp())
    }

    /// μ̂(λ): μ of the dual model.
    pub fn mu_hat(&self, lambda: Complex64) -> Result<Complex64> {
        self.dual()?.mu(lambda)
    }

    /// K̂(λ): K of the dual model.
    pub fn k_hat(&self, lambda: Complex64) -> Result<Complex64> {
        self.dual()?.kfun(lambda)
    }

    /// K(x_n, y_m) = ∏_{i,j} K(x_i − y_j).
    pub fn kprod(&self, x: &ComplexTuple, y: &ComplexTuple) -> Result<Complex64> {
        let mut acc = Complex64::new(1.0, 0.0);
        for (i, xi) in x.0.iter().enumerate() {
            for (j, yj) in y.0.iter().enumerate() {
                acc *= self
                    .kfun(xi - yj)
                    .map_err(|e| e.with_context(|| format!("K(x_{} − y_{})", i + 1, j + 1)))?;
            }
        }
        Ok(acc)
    }

    /// μ(y_n) = ∏_{i≠j} μ(y_i − y_j).
    pub fn muprod(&self, y: &ComplexTuple) -> Result<Complex64> {
        let mut acc = Complex64::new(1.0, 0.0);
        for (i, yi) in y.0.iter().enumerate() {
            for (j, yj) in y.0.iter().enumerate() {
                if i != j {
                    acc *= self
                        .mu(yi - yj)
                        .map_err(|e| e.with_context(|| format!("μ(y_{} − y_{})", i + 1, j + 1)))?;
                }
            }
        }
        Ok(acc)
    }

    /// μ'(x_n) = ∏_{i<j} μ(x_i − x_j).
    pub fn muprime(&self, x: &ComplexTuple) -> Result<Complex64> {
        let mut acc = Complex64::new(1.0, 0.0);
        for i in 0..x.len() {
            for j in i + 1..x.len() {
                acc *= self
                    .mu(x[i] - x[j])
                    .map_err(|e| e.with_context(|| format!("μ(x_{} − x_{})", i + 1, j + 1)))?;
            }
        }
        Ok(acc)
    }

    /// S₂(g|ω), evaluated once by direct integration.
    pub fn s2_g(&self) -> Result<Complex64> {
        self.0
            .s2_g
            .get_or_init(|| {
                let v = self.0.ds.s2(self.0.params.g)?;
                if v == Complex64::new(0.0, 0.0) {
                    return Err(Error::SingularCoefficient("S₂(g) = 0".into()));
                }
                Ok(v)
            })
            .clone()
    }

    /// d_n = (1/n!)·[√(ω₁ω₂)·S₂(g)]^{−n}.
    pub fn d_n(&self, n: usize) -> Result<Complex64> {
        let base = self.0.params.periods.product().sqrt() * self.s2_g()?;
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        Ok(base.powi(-(n as i32)) / fact)
    }

    /// d_n of the dual model.
    pub fn d_n_dual(&self, n: usize) -> Result<Complex64> {
        self.dual()?.d_n(n)
    }

    /// `C` such that |K(x)| ≤ C e^{−πν|x|} and |μ(x)| ≤ C e^{πν|x|} on the real line:
    /// 1.2 × the largest ratio seen on a grid over |x| ≤ 40/ν.
    pub fn calibrate_bound_constant(&self) -> Result<f64> {
        let nu = self.0.params.nu_g();
        let r = 40.0 / nu;
        let mut worst: f64 = 0.0;
        for i in 0..=400 {
            let x = -r + 2.0 * r * i as f64 / 400.0;
            let e = (PI * nu * x.abs()).exp();
            worst = worst.max(self.kfun(Complex64::new(x, 0.0))?.norm() * e);
            worst = worst.max(self.mu(Complex64::new(x, 0.0))?.norm() / e);
        }
        Ok(1.2 * worst)
    }
}

pub fn mu(x: Complex64, params: &ModelParams) -> Result<Complex64> {
    Model::new(*params)?.mu(x)
}

pub fn kfun(x: Complex64, params: &ModelParams) -> Result<Complex64> {
    Model::new(*params)?.kfun(x)
}

pub fn mu_hat(lambda: Complex64, params: &ModelParams) -> Result<Complex64> {
    Model::new(*params)?.mu_hat(lambda)
}

pub fn k_hat(lambda: Complex64, params: &ModelParams) -> Result<Complex64> {
    Model::new(*params)?.k_hat(lambda)
}

pub fn d_n(n: usize, params: &ModelParams) -> Result<Complex64> {
    Model::new(*params)?.d_n(n)
}

pub fn d_n_dual(n: usize, params: &ModelParams) -> Result<Complex64> {
    Model::new(*params)?.d_n_dual(n)
}

pub fn decay_rates(params: &ModelParams) -> (f64, f64) {
    params.decay_rates()
}
