//! The trigonometric kernel-function identity and its degenerate form.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::ComplexTuple;

/// All r-element subsets of `0..n` in lexicographic order.
pub(crate) fn subsets(n: usize, r: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < r - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if r <= n {
        rec(0, n, r, &mut Vec::with_capacity(r), &mut out);
    }
    out
}

const SIN_EPS: f64 = 1e-12;

fn ratio(u: Complex64, alpha: Complex64) -> Result<Complex64> {
    let den = u.sin();
    if den.norm() < SIN_EPS {
        return Err(Error::SingularCoefficient(format!("sin({u}) vanishes")));
    }
    Ok((u + alpha).sin() / den)
}

/// Σ_{|I|=r} ∏_{i∈I} [∏_{j∉I} sin(u_i−u_j+s·α)/sin(u_i−u_j)] [∏_a sin(c_i−v_a+α)/sin(c_i−v_a)],
/// where the inner product runs over the `other` tuple with the given orientation.
fn side(
    own: &[Complex64],
    r: usize,
    self_alpha: Complex64,
    cross: impl Fn(usize) -> Result<Complex64>,
) -> Result<Complex64> {
    let n = own.len();
    let mut total = Complex64::new(0.0, 0.0);
    for set in subsets(n, r) {
        let mut term = Complex64::new(1.0, 0.0);
        for &i in &set {
            for j in (0..n).filter(|j| !set.contains(j)) {
                term *= ratio(own[i] - own[j], self_alpha)?;
            }
            term *= cross(i)?;
        }
        total += term;
    }
    Ok(total)
}

/// LHS − RHS of the kernel identity (|y| = |x|) or of its degenerate form (|y| = |x| − 1).
pub fn kernel_identity_residual(
    x: &ComplexTuple,
    y: &ComplexTuple,
    alpha: Complex64,
    r: usize,
) -> Result<Complex64> {
    let (lhs, rhs) = kernel_identity_sides(x, y, alpha, r)?;
    Ok(lhs - rhs)
}

/// Both sides of the identity, for scale-aware comparisons.
pub fn kernel_identity_sides(
    x: &ComplexTuple,
    y: &ComplexTuple,
    alpha: Complex64,
    r: usize,
) -> Result<(Complex64, Complex64)> {
    let (n, m) = (x.len(), y.len());
    if r > n || !(m == n || m + 1 == n) {
        return Err(Error::domain(format!(
            "kernel identity needs |y| ∈ {{|x|, |x|−1}} and r ≤ |x|; got |x| = {n}, |y| = {m}, r = {r}"
        )));
    }
    let (xs, ys) = (x.values(), y.values());
    let x_cross = |i: usize| -> Result<Complex64> {
        let mut p = Complex64::new(1.0, 0.0);
        for ya in ys {
            p *= ratio(xs[i] - ya, alpha)?;
        }
        Ok(p)
    };
    let y_cross = |a: usize| -> Result<Complex64> {
        let mut p = Complex64::new(1.0, 0.0);
        for xi in xs {
            p *= ratio(xi - ys[a], alpha)?;
        }
        Ok(p)
    };
    let lhs = side(xs, r, -alpha, x_cross)?;
    let mut rhs = side(ys, r, alpha, y_cross)?;
    if m + 1 == n && r >= 1 {
        rhs += side(ys, r - 1, alpha, y_cross)?;
    }
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subset_counts() {
        assert_eq!(subsets(4, 2).len(), 6);
        assert_eq!(subsets(3, 0), vec![Vec::<usize>::new()]);
        assert!(subsets(2, 3).is_empty());
    }

    #[test]
    fn single_term_identity() {
        let x = ComplexTuple::new(vec![Complex64::new(0.4, 0.1)]);
        let y = ComplexTuple::new(vec![Complex64::new(-0.3, 0.2)]);
        let r = kernel_identity_residual(&x, &y, Complex64::new(0.7, -0.2), 1).unwrap();
        assert!(r.norm() < 1e-14);
    }

    #[test]
    fn degenerate_form_is_the_limit() {
        // Push y_n → i∞ in the full identity and compare against the degenerate form's sides.
        let x = ComplexTuple::new(vec![
            Complex64::new(0.3, 0.1),
            Complex64::new(-0.7, 0.2),
            Complex64::new(1.1, -0.3),
        ]);
        let y2 = ComplexTuple::new(vec![Complex64::new(0.2, -0.1), Complex64::new(-0.5, 0.3)]);
        let alpha = Complex64::new(0.4, 0.15);
        let res = kernel_identity_residual(&x, &y2, alpha, 2).unwrap();
        assert!(res.norm() < 1e-12, "{res}");
        let far = y2.concat(&ComplexTuple::new(vec![Complex64::new(0.1, 30.0)]));
        assert!(kernel_identity_residual(&x, &far, alpha, 2).unwrap().norm() < 1e-10);
    }

    #[test]
    fn coinciding_points_are_singular() {
        let x = ComplexTuple::real(&[0.5, 0.5]);
        let y = ComplexTuple::real(&[0.1, 0.2]);
        let r = kernel_identity_residual(&x, &y, Complex64::new(0.3, 0.0), 1);
        assert!(matches!(r, Err(Error::SingularCoefficient(_))));
    }
}
