//! Macdonald difference operators M_r and elementary symmetric functions.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::kernel_identity::subsets;
use crate::error::{Error, Result};
use crate::model::{ComplexTuple, ModelParams};
use crate::quadrature::Estimate;

/// e_r(z₁, …, z_n), via the recurrence e_r(z_n) = e_r(z_{n−1}) + z_n·e_{r−1}(z_{n−1}).
pub fn elementary_symmetric(r: usize, z: &ComplexTuple) -> Complex64 {
    let mut e = vec![Complex64::new(0.0, 0.0); r + 1];
    e[0] = Complex64::new(1.0, 0.0);
    for zk in z.values() {
        for k in (1..=r).rev() {
            e[k] = e[k] + zk * e[k - 1];
        }
    }
    e[r]
}

/// Coefficient sh(π/ω₂·(x_i − x_j − ig)) / sh(π/ω₂·(x_i − x_j)).
fn coefficient(d: Complex64, params: &ModelParams) -> Result<Complex64> {
    let w2 = params.omega2();
    if d.norm() < 1e-9 * w2.norm() {
        return Err(Error::SingularCoefficient(format!(
            "coinciding coordinates (difference {d})"
        )));
    }
    let k = Complex64::new(PI, 0.0) / w2;
    let num = (k * (d - Complex64::i() * params.g)).sinh();
    let den = (k * d).sinh();
    if den.norm() < 1e-300 {
        return Err(Error::SingularCoefficient(format!("sh vanishes at {d}")));
    }
    Ok(num / den)
}

/// (M_r f)(x) = Σ_{|I|=r} ∏_{i∈I, j∉I} coefficient(x_i − x_j) · f(x − iω₁·e_I).
pub fn macdonald_apply<F>(r: usize, f: F, x: &ComplexTuple, params: &ModelParams) -> Result<Estimate>
where
    F: Fn(&ComplexTuple) -> Result<Estimate>,
{
    let n = x.len();
    if r == 0 || r > n {
        return Err(Error::domain(format!("need 1 ≤ r ≤ n, got r = {r}, n = {n}")));
    }
    let shift = -Complex64::i() * params.omega1();
    let mut value = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    for set in subsets(n, r) {
        let mut coef = Complex64::new(1.0, 0.0);
        for &i in &set {
            for j in (0..n).filter(|j| !set.contains(j)) {
                coef *= coefficient(x[i] - x[j], params)?;
            }
        }
        let mut xs = x.clone();
        for &i in &set {
            xs.0[i] += shift;
        }
        let fv = f(&xs)?;
        value += coef * fv.value;
        err += coef.norm() * fv.err;
    }
    Ok(Estimate::new(value, err))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn elementary_symmetric_small_cases() {
        let z = ComplexTuple::new(vec![c(1.0, 1.0), c(2.0, 0.0), c(0.0, -3.0)]);
        assert_eq!(elementary_symmetric(0, &z), c(1.0, 0.0));
        let e2 = z[0] * z[1] + z[0] * z[2] + z[1] * z[2];
        assert!((elementary_symmetric(2, &z) - e2).norm() < 1e-14);
        assert!((elementary_symmetric(3, &z) - z[0] * z[1] * z[2]).norm() < 1e-14);
        assert_eq!(elementary_symmetric(4, &z), c(0.0, 0.0));
    }

    #[test]
    fn single_coordinate_is_a_shift() {
        let p = ModelParams::real(0.3, 1.0, 0.4).unwrap();
        let lam = 0.37;
        let f = |x: &ComplexTuple| {
            Ok(Estimate::exact((Complex64::i() * 2.0 * PI * lam * x[0]).exp()))
        };
        let x = ComplexTuple::real(&[0.8]);
        let got = macdonald_apply(1, f, &x, &p).unwrap().value;
        let want = (2.0 * PI * lam * 0.3).exp() * f(&x).unwrap().value;
        assert!((got - want).norm() < 1e-13 * want.norm());
    }

    #[test]
    fn full_shift_has_unit_coefficient() {
        let p = ModelParams::real(0.3, 1.0, 0.4).unwrap();
        let f = |x: &ComplexTuple| Ok(Estimate::exact(x.sum()));
        let x = ComplexTuple::real(&[0.1, 0.9]);
        let got = macdonald_apply(2, f, &x, &p).unwrap().value;
        assert!((got - (x.sum() - 2.0 * Complex64::i() * 0.3)).norm() < 1e-14);
    }

    #[test]
    fn coinciding_coordinates_are_rejected() {
        let p = ModelParams::real(0.3, 1.0, 0.4).unwrap();
        let f = |_: &ComplexTuple| Ok(Estimate::exact(c(1.0, 0.0)));
        let x = ComplexTuple::real(&[0.5, 0.5]);
        assert!(matches!(
            macdonald_apply(1, f, &x, &p),
            Err(Error::SingularCoefficient(_))
        ));
    }
}
