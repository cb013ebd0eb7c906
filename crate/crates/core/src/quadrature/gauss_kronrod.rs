//! 10-point Gauss / 21-point Kronrod panel rule (QUADPACK `qk21` nodes and weights).

use num_complex::Complex64;

use super::Estimate;
use crate::error::{Error, Result};

pub(crate) const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

pub(crate) const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_370_334,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Gauss weights for the nodes `XGK[1], XGK[3], ..., XGK[9]`.
pub(crate) const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Result of one panel: Kronrod value and error estimate.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Panel {
    pub a: f64,
    pub b: f64,
    pub value: Complex64,
    /// Discretization error of this panel.
    pub err: f64,
    /// Integrated error carried in by the integrand values.
    pub inner: f64,
    /// The error estimate is at the rounding floor; splitting cannot reduce it.
    pub floor: bool,
}

pub(crate) fn gk21<F>(f: &F, a: f64, b: f64) -> Result<Panel>
where
    F: Fn(f64) -> Result<Estimate> + ?Sized,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut fv = [Complex64::new(0.0, 0.0); 21];
    let mut inner = 0.0;
    let eval = |x: f64| -> Result<Estimate> {
        let e = f(x)?;
        if !(e.value.re.is_finite() && e.value.im.is_finite() && e.err.is_finite()) {
            return Err(Error::NonFinite(format!("x = {x:e}")));
        }
        Ok(e)
    };

    let e0 = eval(c)?;
    fv[10] = e0.value;
    inner += WGK[10] * e0.err;
    for j in 0..10 {
        let dx = h * XGK[j];
        let lo = eval(c - dx)?;
        let hi = eval(c + dx)?;
        fv[j] = lo.value;
        fv[20 - j] = hi.value;
        inner += WGK[j] * (lo.err + hi.err);
    }

    let mut kron = fv[10] * WGK[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    for j in 0..10 {
        kron += (fv[j] + fv[20 - j]) * WGK[j];
        if j % 2 == 1 {
            gauss += (fv[j] + fv[20 - j]) * WG[j / 2];
        }
    }

    // QUADPACK error heuristic, applied to the complex difference.
    let mean = kron * 0.5;
    let mut resabs = WGK[10] * fv[10].norm();
    let mut resasc = WGK[10] * (fv[10] - mean).norm();
    for j in 0..10 {
        resabs += WGK[j] * (fv[j].norm() + fv[20 - j].norm());
        resasc += WGK[j] * ((fv[j] - mean).norm() + (fv[20 - j] - mean).norm());
    }
    let hh = h.abs();
    let resabs = resabs * hh;
    let resasc = resasc * hh;
    let diff = ((kron - gauss) * h).norm();
    let mut err = diff;
    if resasc != 0.0 && diff != 0.0 {
        err = resasc * (200.0 * diff / resasc).powf(1.5).min(1.0);
    }
    let roundoff = 50.0 * f64::EPSILON * resabs;
    let floor = roundoff >= err;
    if floor {
        err = roundoff;
    }

    Ok(Panel {
        a,
        b,
        value: kron * h,
        err,
        inner: inner * hh,
        floor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plain(f: impl Fn(f64) -> f64) -> impl Fn(f64) -> Result<Estimate> {
        move |x| Ok(Estimate::exact(Complex64::new(f(x), 0.0)))
    }

    #[test]
    fn weights_sum_to_two() {
        let k: f64 = WGK[10] + 2.0 * WGK[..10].iter().sum::<f64>();
        let g: f64 = 2.0 * WG.iter().sum::<f64>();
        assert!((k - 2.0).abs() < 1e-15);
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn kronrod_exact_for_degree_31() {
        for deg in [0, 5, 19, 30, 31] {
            let p = gk21(&plain(|x| x.powi(deg)), -1.0, 1.0).unwrap();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((p.value.re - exact).abs() < 1e-14, "deg {deg}");
        }
    }

    #[test]
    fn error_estimate_tracks_smoothness() {
        let smooth = gk21(&plain(f64::exp), 0.0, 1.0).unwrap();
        let rough = gk21(&plain(|x| (40.0 * x).sin()), 0.0, 1.0).unwrap();
        assert!(smooth.err < 1e-13);
        assert!(rough.err > 1e-6);
    }

    #[test]
    fn nonfinite_is_reported() {
        let r = gk21(&plain(|x| 1.0 / x), 0.0, 1.0);
        assert!(r.is_ok() || matches!(r, Err(Error::NonFinite(_))));
        let r = gk21(&plain(|_| f64::NAN), 0.0, 1.0);
        assert!(matches!(r, Err(Error::NonFinite(_))));
    }
}
