//! ln S₂(z) from its integral representation on the fundamental strip.

use num_complex::Complex64;

use super::Periods;
use crate::error::{Error, Result};
use crate::quadrature::{adaptive_opts, Estimate};

/// Coefficients of u/sinh u = Σ r_k u^{2k}, r_k = (2 − 2^{2k}) B_{2k} / (2k)!.
const R_COEF: [f64; 9] = [
    1.0,
    -1.0 / 6.0,
    7.0 / 360.0,
    -31.0 / 15_120.0,
    127.0 / 604_800.0,
    -73.0 / 3_421_440.0,
    1_414_477.0 / 653_837_184_000.0,
    -8_191.0 / 37_362_124_800.0,
    16_931_177.0 / 762_187_345_920_000.0,
];

/// Coefficients of sinh u / u = Σ s_k u^{2k}, s_k = 1/(2k+1)!.
const S_COEF: [f64; 9] = [
    1.0,
    1.0 / 6.0,
    1.0 / 120.0,
    1.0 / 5_040.0,
    1.0 / 362_880.0,
    1.0 / 39_916_800.0,
    1.0 / 6_227_020_800.0,
    1.0 / 1_307_674_368_000.0,
    1.0 / 355_687_428_096_000.0,
];

/// The bracketed integrand `(1/2t)[sinh(at)/(sinh ω₁t sinh ω₂t) − a/(ω₁ω₂t)]`
/// with its removable singularity at t = 0 handled by a Taylor series.
pub(crate) struct StripIntegrand {
    a: Complex64,
    w1: Complex64,
    w2: Complex64,
    pref: Complex64,
    /// Taylor coefficients of the integrand in powers of t².
    series: [Complex64; 8],
    t_series: f64,
    t_stable: f64,
}

impl StripIntegrand {
    pub fn new(z: Complex64, p: &Periods) -> Self {
        let (w1, w2) = (p.omega1, p.omega2);
        let a = 2.0 * z - w1 - w2;
        let pow = |x: Complex64, c: &[f64; 9]| -> [Complex64; 9] {
            let x2 = x * x;
            let mut out = [Complex64::new(0.0, 0.0); 9];
            let mut acc = Complex64::new(1.0, 0.0);
            for k in 0..9 {
                out[k] = acc * c[k];
                acc *= x2;
            }
            out
        };
        let (sa, r1, r2) = (pow(a, &S_COEF), pow(w1, &R_COEF), pow(w2, &R_COEF));
        let mut prod = [Complex64::new(0.0, 0.0); 9];
        for i in 0..9 {
            for j in 0..9 - i {
                for k in 0..9 - i - j {
                    prod[i + j + k] += sa[i] * r1[j] * r2[k];
                }
            }
        }
        let pref = a / (2.0 * w1 * w2);
        let mut series = [Complex64::new(0.0, 0.0); 8];
        for k in 0..8 {
            series[k] = pref * prod[k + 1];
        }
        let scale = a.norm().max(w1.norm()).max(w2.norm());
        Self {
            a,
            w1,
            w2,
            pref,
            series,
            t_series: 0.25 / scale,
            t_stable: 1.0 / w1.re.min(w2.re),
        }
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        if t < self.t_series {
            let t2 = t * t;
            let mut acc = Complex64::new(0.0, 0.0);
            for c in self.series.iter().rev() {
                acc = acc * t2 + c;
            }
            return acc;
        }
        let w = self.w1 + self.w2;
        let ratio = if t < self.t_stable {
            (self.a * t).sinh() / ((self.w1 * t).sinh() * (self.w2 * t).sinh())
        } else {
            let num = ((self.a - w) * t).exp() - ((-self.a - w) * t).exp();
            let den = (Complex64::new(1.0, 0.0) - (-2.0 * self.w1 * t).exp())
                * (Complex64::new(1.0, 0.0) - (-2.0 * self.w2 * t).exp());
            2.0 * num / den
        };
        (ratio - 2.0 * self.pref / t) / (2.0 * t)
    }
}

pub(crate) struct StripTol {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub margin: f64,
    pub max_panels: usize,
    /// Fail when the tolerance is not met instead of returning the best estimate.
    pub strict: bool,
}

pub(crate) fn in_strip(z: Complex64, p: &Periods, margin: f64) -> bool {
    let w = p.sum().re;
    z.re > margin * w && z.re < (1.0 - margin) * w
}

pub(crate) fn strip_estimate(z: Complex64, p: &Periods, tol: &StripTol) -> Result<Estimate> {
    if !in_strip(z, p, tol.margin) {
        return Err(Error::domain(format!(
            "Re z = {} outside the strip ({:.4}, {:.4}) required by the integral representation",
            z.re,
            tol.margin * p.sum().re,
            (1.0 - tol.margin) * p.sum().re
        )));
    }
    let f = StripIntegrand::new(z, p);
    if f.a == Complex64::new(0.0, 0.0) {
        return Ok(Estimate::exact(Complex64::new(0.0, 0.0)));
    }
    let wre = p.sum().re;
    let rate = wre - f.a.re.abs();
    let m = p.omega1.re.min(p.omega2.re);
    // First-term tail ≤ e^{−rate·T} / (rate·T·(1−e^{−2mT})²); solve for < tol/10.
    let target = 0.1 * tol.abs_tol;
    let mut t_max = (2.0 / m).max(1.0 / rate);
    for _ in 0..50 {
        let den = rate * t_max * (1.0 - (-2.0 * m * t_max).exp()).powi(2);
        let next = (1.0 / (target * den)).ln().max(0.0) / rate;
        if (next - t_max).abs() < 1e-9 * t_max {
            break;
        }
        t_max = next.max(2.0 / m);
    }
    let den = rate * t_max * (1.0 - (-2.0 * m * t_max).exp()).powi(2);
    let tail_bound = (-rate * t_max).exp() / den;

    let freq = f.a.im.abs() + p.omega1.im.abs() + p.omega2.im.abs();
    let mut width = (t_max / 16.0).min(1.0 / wre);
    if freq > 0.0 {
        width = width.min(0.25 * std::f64::consts::TAU / freq);
    }
    let opts = adaptive_opts(0.5 * tol.abs_tol, tol.rel_tol, tol.max_panels, false, tol.strict);
    let g = |t: f64| Ok(Estimate::exact(f.eval(t)));
    let body = crate::quadrature::adapt_raw(&g, 0.0, t_max, width, &opts)?;
    // Analytic tail of the subtracted term: ∫_T^∞ −a/(2ω₁ω₂t²) dt.
    let tail = -f.pref / t_max;
    let out = Estimate::new(body.value + tail, body.err + tail_bound);
    if tol.strict && out.err > tol.abs_tol.max(tol.rel_tol * out.value.norm()) {
        return Err(Error::Tolerance {
            message: format!("ln S₂({z}) strip integral"),
            value: out.value,
            err_est: out.err,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_matches_direct_formula_at_switchover() {
        let p = Periods::new(Complex64::new(1.0, 0.1), Complex64::new(1.4, -0.2)).unwrap();
        let z = Complex64::new(0.7, 0.9);
        let f = StripIntegrand::new(z, &p);
        let t = f.t_series;
        let series = {
            let t2 = t * t;
            f.series.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * t2 + c)
        };
        let direct = ((f.a * t).sinh() / ((f.w1 * t).sinh() * (f.w2 * t).sinh()) - 2.0 * f.pref / t)
            / (2.0 * t);
        assert!((series - direct).norm() < 1e-12 * series.norm().max(1.0), "{series} {direct}");
    }

    #[test]
    fn stable_form_matches_sinh_form() {
        let p = Periods::new(Complex64::new(1.0, 0.0), Complex64::new(2f64.sqrt(), 0.0)).unwrap();
        let f = StripIntegrand::new(Complex64::new(0.9, 0.3), &p);
        let t = f.t_stable * 1.0000001;
        let direct = ((f.a * t).sinh() / ((f.w1 * t).sinh() * (f.w2 * t).sinh()) - 2.0 * f.pref / t)
            / (2.0 * t);
        assert!((f.eval(t) - direct).norm() < 1e-14);
    }
}
