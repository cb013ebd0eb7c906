use num_complex::Complex64;
use rayon::prelude::*;

use super::adaptive::{adapt, Opts};
use super::gauss_kronrod::{WG, WGK, XGK};
use super::{truncate, DecayProfile, Estimate, MultiDimStrategy, QuadratureSpec};
use crate::error::{Error, Result};

pub const MAX_DIM: usize = 6;

/// Integrate over ℝ^d (`d = profiles.len()`), last coordinate innermost.
pub fn integrate_multi<F>(f: F, profiles: &[DecayProfile], spec: &QuadratureSpec) -> Result<Estimate>
where
    F: Fn(&[f64]) -> Result<Estimate> + Sync,
{
    let order: Vec<usize> = (0..profiles.len()).collect();
    integrate_multi_ordered(f, profiles, &order, spec)
}

/// As [`integrate_multi`] with an explicit nesting order: `order[0]` is the
/// outermost coordinate. Only the nested strategy depends on the order.
pub fn integrate_multi_ordered<F>(
    f: F,
    profiles: &[DecayProfile],
    order: &[usize],
    spec: &QuadratureSpec,
) -> Result<Estimate>
where
    F: Fn(&[f64]) -> Result<Estimate> + Sync,
{
    let d = profiles.len();
    if d == 0 {
        return f(&[]);
    }
    if d > MAX_DIM {
        return Err(Error::Strategy(format!("dimension {d} exceeds {MAX_DIM}")));
    }
    let mut seen = [false; MAX_DIM];
    if order.len() != d || order.iter().any(|&i| i >= d || std::mem::replace(&mut seen[i], true)) {
        return Err(Error::Strategy(format!("{order:?} is not a permutation of 0..{d}")));
    }
    match spec.multi_dim_strategy {
        MultiDimStrategy::NestedAdaptive if d > 3 => Err(Error::Strategy(format!(
            "nested adaptive integration is limited to d ≤ 3, got d = {d}"
        ))),
        MultiDimStrategy::NestedAdaptive => {
            let ctx = Nested { f: &f, profiles, order, spec };
            ctx.level(&[0.0; MAX_DIM], 0, spec.abs_tol, spec.rel_tol)
        }
        MultiDimStrategy::TensorFixed => tensor(&f, profiles, spec),
        MultiDimStrategy::QuasiMonteCarlo => qmc(&f, profiles, spec),
    }
}

struct Nested<'a, F> {
    f: &'a F,
    profiles: &'a [DecayProfile],
    order: &'a [usize],
    spec: &'a QuadratureSpec,
}

impl<F> Nested<'_, F>
where
    F: Fn(&[f64]) -> Result<Estimate> + Sync,
{
    fn level(&self, fixed: &[f64; MAX_DIM], lvl: usize, abs_tol: f64, rel_tol: f64) -> Result<Estimate> {
        let d = self.profiles.len();
        let dim = self.order[lvl];
        let prof = &self.profiles[dim];
        let rate_eff = prof.rate * (1.0 - self.spec.truncation_safety);
        let (inner_abs, inner_rel) = (abs_tol * 0.25 * rate_eff, rel_tol * 0.5);
        let g = |t: f64| -> Result<Estimate> {
            let mut p = *fixed;
            p[dim] = t;
            if lvl + 1 == d {
                (self.f)(&p[..d])
            } else {
                self.level(&p, lvl + 1, inner_abs, inner_rel)
            }
        };
        let trunc = truncate(&g, prof, self.spec, abs_tol)?;
        let opts = Opts {
            abs_tol,
            rel_tol,
            max_panels: self.spec.max_subdivisions,
            parallel: lvl == 0 && self.spec.parallel,
            strict: lvl == 0,
        };
        let body = adapt(&g, trunc.lo, trunc.hi, prof.initial_width(self.spec), &opts)?;
        Ok(Estimate::new(body.value, body.err + trunc.tail_err))
    }
}

/// Box radius from the profile alone (no probing), assuming an O(1) envelope constant.
fn box_radius(p: &DecayProfile, spec: &QuadratureSpec) -> f64 {
    let rate = p.rate * (1.0 - spec.truncation_safety);
    ((20.0 / (spec.abs_tol * rate)).ln() / rate).max(8.0 / rate)
}

fn check_rates(profiles: &[DecayProfile]) -> Result<()> {
    match profiles.iter().find(|p| !(p.rate > 0.0 && p.rate.is_finite())) {
        Some(p) => Err(Error::domain(format!("decay rate must be positive, got {}", p.rate))),
        None => Ok(()),
    }
}

/// Tensor product of composite GK21 rules; the error estimate compares against the
/// embedded tensor Gauss rule evaluated on the same function values.
fn tensor<F>(f: &F, profiles: &[DecayProfile], spec: &QuadratureSpec) -> Result<Estimate>
where
    F: Fn(&[f64]) -> Result<Estimate> + Sync,
{
    check_rates(profiles)?;
    let d = profiles.len();
    // Per dimension: (node, kronrod weight, gauss weight).
    let axes: Vec<Vec<(f64, f64, f64)>> = profiles
        .iter()
        .map(|p| {
            let r = box_radius(p, spec);
            let n = ((2.0 * r / p.initial_width(spec)).ceil() as usize).max(1);
            let h = r / n as f64;
            let mut nodes = Vec::with_capacity(21 * n);
            for i in 0..n {
                let c = p.center - r + h * (2 * i + 1) as f64;
                for j in 0..21 {
                    let (x, wk, wg) = if j < 10 {
                        (-XGK[j], WGK[j], if j % 2 == 1 { WG[j / 2] } else { 0.0 })
                    } else if j == 10 {
                        (0.0, WGK[10], 0.0)
                    } else {
                        let k = 20 - j;
                        (XGK[k], WGK[k], if k % 2 == 1 { WG[k / 2] } else { 0.0 })
                    };
                    nodes.push((c + h * x, h * wk, h * wg));
                }
            }
            nodes
        })
        .collect();
    let total: usize = axes.iter().map(Vec::len).product();
    if total > 50_000_000 {
        return Err(Error::Strategy(format!("tensor grid of {total} points is too large")));
    }
    let outer = &axes[0];
    let row = |&(x0, wk0, wg0): &(f64, f64, f64)| -> Result<(Complex64, Complex64, f64)> {
        let mut sk = Complex64::new(0.0, 0.0);
        let mut sg = Complex64::new(0.0, 0.0);
        let mut se = 0.0;
        let mut idx = vec![0usize; d];
        let mut p = [0.0; MAX_DIM];
        p[0] = x0;
        loop {
            let (mut wk, mut wg) = (wk0, wg0);
            for k in 1..d {
                let (x, a, b) = axes[k][idx[k]];
                p[k] = x;
                wk *= a;
                wg *= b;
            }
            let e = f(&p[..d])?;
            if !(e.value.re.is_finite() && e.value.im.is_finite()) {
                return Err(Error::NonFinite(format!("{:?}", &p[..d])));
            }
            sk += e.value * wk;
            sg += e.value * wg;
            se += e.err * wk.abs();
            // odometer over the inner dimensions
            let mut k = d;
            loop {
                k -= 1;
                if k == 0 {
                    return Ok((sk, sg, se));
                }
                idx[k] += 1;
                if idx[k] < axes[k].len() {
                    break;
                }
                idx[k] = 0;
            }
        }
    };
    let rows: Vec<(Complex64, Complex64, f64)> = if spec.parallel {
        outer.par_iter().map(row).collect::<Result<_>>()?
    } else {
        outer.iter().map(row).collect::<Result<_>>()?
    };
    let (mut k, mut g, mut e) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), 0.0);
    for (a, b, c) in rows {
        k += a;
        g += b;
        e += c;
    }
    Ok(Estimate::new(k, (k - g).norm() + e))
}

/// Scrambled Sobol' points pushed through a logistic map matched to each decay
/// rate and restricted to the truncation box. The error estimate is the change
/// between the first N/2 points and all N.
fn qmc<F>(f: &F, profiles: &[DecayProfile], spec: &QuadratureSpec) -> Result<Estimate>
where
    F: Fn(&[f64]) -> Result<Estimate> + Sync,
{
    check_rates(profiles)?;
    let d = profiles.len();
    let n = spec.qmc_samples.next_power_of_two().max(2);
    if n > u32::MAX as usize {
        return Err(Error::Strategy("too many QMC samples".into()));
    }
    // Logistic CDF with scale 1/ρ, restricted to [c − R, c + R].
    let maps: Vec<(f64, f64, f64, f64)> = profiles
        .iter()
        .map(|p| {
            let rho = p.rate * (1.0 - spec.truncation_safety);
            let r = box_radius(p, spec);
            let lo = 1.0 / (1.0 + (rho * r).exp());
            (p.center, rho, lo, 1.0 - 2.0 * lo)
        })
        .collect();
    let sample = |i: usize| -> Result<Estimate> {
        let mut p = [0.0; MAX_DIM];
        let mut jac = 1.0;
        for (k, &(c, rho, lo, span)) in maps.iter().enumerate() {
            let u0 = sobol_burley::sample(i as u32, k as u32, spec.qmc_seed) as f64;
            // keep away from the endpoints: f32 output has 24 bits
            let u0 = u0.clamp(1e-9, 1.0 - 1e-9);
            let u = lo + span * u0;
            p[k] = c + (u / (1.0 - u)).ln() / rho;
            jac *= span / (rho * u * (1.0 - u));
        }
        let e = f(&p[..d])?;
        if !(e.value.re.is_finite() && e.value.im.is_finite()) {
            return Err(Error::NonFinite(format!("{:?}", &p[..d])));
        }
        Ok(Estimate::new(e.value * jac, e.err * jac))
    };
    const CHUNK: usize = 1024;
    let chunk_sum = |c: usize| -> Result<(Complex64, f64)> {
        let mut s = Complex64::new(0.0, 0.0);
        let mut e = 0.0;
        for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
            let v = sample(i)?;
            s += v.value;
            e += v.err;
        }
        Ok((s, e))
    };
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<(Complex64, f64)> = if spec.parallel {
        (0..chunks).into_par_iter().map(chunk_sum).collect::<Result<_>>()?
    } else {
        (0..chunks).map(chunk_sum).collect::<Result<_>>()?
    };
    let half_chunks = (n / 2).div_ceil(CHUNK);
    let mut s_half = Complex64::new(0.0, 0.0);
    let mut s_all = Complex64::new(0.0, 0.0);
    let mut e_all = 0.0;
    for (i, (s, e)) in parts.into_iter().enumerate() {
        if i < half_chunks {
            s_half += s;
        }
        s_all += s;
        e_all += e;
    }
    let half = if n / 2 >= CHUNK {
        s_half / (n / 2) as f64
    } else {
        // tiny runs: recompute the half sum directly
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..n / 2 {
            s += sample(i)?.value;
        }
        s / (n / 2) as f64
    };
    let all = s_all / n as f64;
    Ok(Estimate::new(all, (all - half).norm() + e_all / n as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn prod_exp(p: &[f64]) -> Result<Estimate> {
        let s: f64 = p.iter().map(|y| y.abs()).sum();
        Ok(Estimate::exact(Complex64::new((-PI * s).exp(), 0.0)))
    }

    #[test]
    fn nested_product_of_exponentials() {
        let spec = QuadratureSpec::with_tolerances(1e-8, 1e-10);
        let profs = vec![DecayProfile::new(PI); 3];
        let r = integrate_multi(prod_exp, &profs, &spec).unwrap();
        let exact = (2.0 / PI).powi(3);
        assert!((r.value.re - exact).abs() < 1e-8, "{r:?}");
    }

    #[test]
    fn nesting_order_does_not_matter() {
        let spec = QuadratureSpec::with_tolerances(1e-9, 1e-11);
        let f = |p: &[f64]| {
            let ph = Complex64::new(0.0, 2.0 * PI * (0.3 * p[0] - 0.2 * p[1])).exp();
            Ok(Estimate::exact(ph / ((PI * (p[0] - p[1])).cosh() * (PI * p[1]).cosh())))
        };
        let profs = vec![
            DecayProfile::new(PI).with_freqs([0.6 * PI]),
            DecayProfile::new(PI).with_freqs([0.4 * PI]),
        ];
        let a = integrate_multi_ordered(f, &profs, &[0, 1], &spec).unwrap();
        let b = integrate_multi_ordered(f, &profs, &[1, 0], &spec).unwrap();
        assert!((a.value - b.value).norm() <= 2.0 * (a.err + b.err) + 1e-12, "{a:?} {b:?}");
        // ∫∫ = sech(π·0.3)·sech(π·0.1)
        let exact = 1.0 / ((0.3 * PI).cosh() * (0.1 * PI).cosh());
        assert!((a.value - exact).norm() < 1e-9, "{a:?}");
    }

    #[test]
    fn nested_rejects_four_dimensions() {
        let spec = QuadratureSpec::default();
        let r = integrate_multi(prod_exp, &vec![DecayProfile::new(PI); 4], &spec);
        assert!(matches!(r, Err(Error::Strategy(_))));
    }

    #[test]
    fn qmc_four_dimensions() {
        let spec = QuadratureSpec {
            multi_dim_strategy: MultiDimStrategy::QuasiMonteCarlo,
            ..QuadratureSpec::with_tolerances(1e-3, 1e-6)
        };
        let r = integrate_multi(prod_exp, &vec![DecayProfile::new(PI); 4], &spec).unwrap();
        let exact = (2.0 / PI).powi(4);
        assert!((r.value.re - exact).abs() / exact < 1e-2, "{r:?}");
        assert!(r.err < 1e-2 * exact);
    }

    #[test]
    fn tensor_two_dimensions() {
        let spec = QuadratureSpec {
            multi_dim_strategy: MultiDimStrategy::TensorFixed,
            ..QuadratureSpec::with_tolerances(1e-6, 1e-8)
        };
        let g = |p: &[f64]| Ok(Estimate::exact(Complex64::new((-(p[0] * p[0]) - p[1] * p[1]).exp(), 0.0)));
        let r = integrate_multi(g, &vec![DecayProfile::new(1.0); 2], &spec).unwrap();
        assert!((r.value.re - PI).abs() < 1e-8, "{r:?}");
    }

    #[test]
    fn zero_dimensional_integral_is_the_value() {
        let spec = QuadratureSpec::default();
        let r = integrate_multi(|_| Ok(Estimate::exact(Complex64::new(2.0, 1.0))), &[], &spec).unwrap();
        assert_eq!(r.value, Complex64::new(2.0, 1.0));
    }
}
