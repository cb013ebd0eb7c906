//! Wave function Ψ_λ(x) by the Λ-recursion, its dual, and the mixed Q·Q̂ representation.

use std::f64::consts::{E, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ComplexTuple, Model, ModelParams};
use crate::operators::{phase, FunctionOnTuples};
use crate::special_functions::line_table::LineTable;
use crate::quadrature::{
    integrate_line, integrate_multi, integrate_multi_ordered, scaled, DecayProfile, Estimate, MultiDimStrategy,
    QuadratureSpec,
};

pub const DEFAULT_EPSILON: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveSpec {
    pub n: usize,
    pub lambda: ComplexTuple,
    pub x: ComplexTuple,
    pub params: ModelParams,
    #[serde(default)]
    pub spec: QuadratureSpec,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

impl WaveSpec {
    pub fn new(lambda: ComplexTuple, x: ComplexTuple, params: ModelParams, spec: QuadratureSpec) -> Self {
        Self { n: lambda.len(), lambda, x, params, spec, epsilon: DEFAULT_EPSILON }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    fn shape(&self) -> Result<()> {
        if !(1..=3).contains(&self.n) || self.lambda.len() != self.n || self.x.len() != self.n {
            return Err(Error::domain(format!(
                "wave function needs n ∈ {{1,2,3}} with |λ| = |x| = n (n = {}, |λ| = {}, |x| = {})",
                self.n,
                self.lambda.len(),
                self.x.len()
            )));
        }
        if !(0.0..1.0).contains(&self.epsilon) || self.epsilon == 0.0 {
            return Err(Error::parameter(format!("ε must lie in (0, 1), got {}", self.epsilon)));
        }
        Ok(())
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// θ(ε) = ν_g ε / (4 (n−1)! e): admissible width of the spectral strip.
pub fn theta(eps: f64, n: usize, params: &ModelParams) -> f64 {
    params.nu_g() * eps / (4.0 * factorial(n.saturating_sub(1)) * E)
}

/// Guards for Ψ_λ(x; g|ω): |Im x_j| < Re g*/2 and |Im(λ_j − λ_k)| < θ(ε).
pub fn check_strips(params: &ModelParams, lambda: &ComplexTuple, x: &ComplexTuple, eps: f64) -> Result<()> {
    let half = params.g_star().re / 2.0;
    if let Some(v) = x.values().iter().find(|v| v.im.abs() >= half) {
        return Err(Error::domain(format!("coordinate {v} outside the analyticity strip |Im x| < Re g*/2 = {half}")));
    }
    let th = theta(eps, lambda.len(), params);
    let l = lambda.values();
    for i in 0..l.len() {
        for j in i + 1..l.len() {
            let d = (l[i] - l[j]).im.abs();
            if d >= th {
                return Err(Error::domain(format!(
                    "|Im(λ_{} − λ_{})| = {d:.4e} violates the strip θ(ε) = {th:.4e} (ε = {eps})",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    Ok(())
}

fn tighter(spec: &QuadratureSpec, factor: f64) -> QuadratureSpec {
    QuadratureSpec {
        rel_tol: spec.rel_tol * factor,
        abs_tol: spec.abs_tol * factor,
        ..spec.nested()
    }
}

fn mean_re(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.re).sum::<f64>() / x.len() as f64
}

fn net_rate(rate: f64, what: &str) -> Result<f64> {
    if rate > 0.0 {
        Ok(rate)
    } else {
        Err(Error::domain(format!("{what}: no net decay (rate {rate:.3e})")))
    }
}

/// Ψ_{λ₁λ₂}(x₁,x₂) = d₁ ∫ e^{2πiλ₂(x₁+x₂−t)} K(x₁−t) K(x₂−t) e^{2πiλ₁t} dt.
fn psi2(m: &Model, l: &[Complex64], x: &[Complex64], spec: &QuadratureSpec) -> Result<Estimate> {
    let nu = m.params().nu_g();
    let dl = l[0] - l[1];
    let rate = net_rate(2.0 * PI * (nu - dl.im.abs()), "Ψ₂ integrand")?;
    let profile = DecayProfile::new(rate).with_freqs([2.0 * PI * dl.re.abs()]).centered(mean_re(x));
    let pre = phase(l[1] * (x[0] + x[1]));
    let r = integrate_line(
        |t| {
            let tc = Complex64::new(t, 0.0);
            Ok(Estimate::exact(m.kfun(x[0] - tc)? * m.kfun(x[1] - tc)? * phase(dl * t)))
        },
        &profile,
        spec,
    );
    scaled(r, pre * m.d_n(1)?)
}

/// Ψ_{λ₁λ₂} at real points. Shifting t by the centroid gives
/// Ψ(y₁,y₂) = e^{πi(λ₁+λ₂)(y₁+y₂)} G(y₁−y₂) with
/// G(u) = d₁ ∫ K(u/2−s) K(u/2+s) e^{2πi(λ₁−λ₂)s} ds, even in u;
/// G is tabulated once on [0, u_max] and evaluated directly beyond.
pub struct Psi2Table<'a> {
    m: &'a Model,
    l: [Complex64; 2],
    spec: QuadratureSpec,
    table: LineTable,
    node_err: f64,
}

impl<'a> Psi2Table<'a> {
    pub fn new(m: &'a Model, l: [Complex64; 2], u_max: f64, spec: &QuadratureSpec) -> Result<Self> {
        let spec = spec.nested();
        let width = (0.4 * m.params().g_star().re).min(1.0);
        let node_err = std::sync::Mutex::new(0.0f64);
        let table = LineTable::build_range(0.0, u_max, |_| width, |u| {
            let g = Self::g_direct(m, l, u, &spec)?;
            let mut e = node_err.lock().unwrap();
            *e = e.max(g.err);
            Ok(g.value)
        })?;
        let node_err = node_err.into_inner().unwrap();
        Ok(Self { m, l, spec, table, node_err })
    }

    fn g_direct(m: &Model, l: [Complex64; 2], u: f64, spec: &QuadratureSpec) -> Result<Estimate> {
        let nu = m.params().nu_g();
        let dl = l[0] - l[1];
        let rate = net_rate(2.0 * PI * (nu - dl.im.abs()), "Ψ₂ integrand")?;
        let profile = DecayProfile::new(rate).with_freqs([2.0 * PI * dl.re.abs()]);
        let h = Complex64::new(0.5 * u, 0.0);
        let r = integrate_line(
            |s| {
                let sc = Complex64::new(s, 0.0);
                Ok(Estimate::exact(m.kfun(h - sc)? * m.kfun(h + sc)? * phase(dl * s)))
            },
            &profile,
            spec,
        );
        scaled(r, m.d_n(1)?)
    }

    pub fn eval(&self, y1: f64, y2: f64) -> Result<Estimate> {
        let u = (y1 - y2).abs();
        let pre = phase(0.5 * (self.l[0] + self.l[1]) * (y1 + y2));
        let g = if self.table.contains(u) {
            Estimate::new(self.table.eval(u), self.table.tail(u) + self.node_err)
        } else {
            Self::g_direct(self.m, self.l, u, &self.spec)?
        };
        Ok(g.scale(pre))
    }
}

/// Radius beyond which the Ψ₂ integrand has decayed by e^{−40}.
fn psi2_u_max(m: &Model, l: &[Complex64]) -> f64 {
    let rate = 2.0 * PI * (m.params().nu_g() - (l[0] - l[1]).im.abs()).max(1e-3);
    40.0 / rate
}

/// Ψ₃ = d₂ ∫ d²y e^{2πiλ₃(x̄−ȳ)} K(x,y) μ(y) Ψ_{λ₁λ₂}(y).
fn psi3(m: &Model, l: &[Complex64], x: &[Complex64], spec: &QuadratureSpec) -> Result<Estimate> {
    let nu = m.params().nu_g();
    let (d32, d21) = (l[2] - l[1], l[1] - l[0]);
    let rate = net_rate(2.0 * PI * (nu - d32.im.abs() - d21.im.abs()), "Ψ₃ integrand")?;
    let profile = DecayProfile::new(rate)
        .with_freqs([2.0 * PI * d32.re.abs(), 2.0 * PI * d21.re.abs()])
        .centered(mean_re(x));
    let xt = ComplexTuple::new(x.to_vec());
    let inner = Psi2Table::new(m, [l[0], l[1]], 2.0 * (40.0 / rate + 1.0), &tighter(spec, 0.05))?;
    let xs: Complex64 = x.iter().sum();
    let r = integrate_multi(
        |y: &[f64]| {
            let yt = ComplexTuple::real(y);
            let mu = m.muprod(&yt)?;
            if mu == Complex64::new(0.0, 0.0) {
                return Ok(Estimate::exact(mu));
            }
            let k = phase(l[2] * (xs - yt.sum())) * m.kprod(&xt, &yt)? * mu;
            Ok(inner.eval(y[0], y[1])?.scale(k))
        },
        &[profile.clone(), profile],
        spec,
    );
    scaled(r, m.d_n(2)?)
}

fn psi_core(m: &Model, l: &[Complex64], x: &[Complex64], spec: &QuadratureSpec) -> Result<Estimate> {
    match l.len() {
        1 => Ok(Estimate::exact(phase(l[0] * x[0]))),
        2 => psi2(m, l, x, spec),
        3 => psi3(m, l, x, spec),
        n => Err(Error::domain(format!("wave function implemented for n ≤ 3, got {n}"))),
    }
}

/// Ψ_{λ}(x; g|ω) by the recursion Ψ_n = Λ_n(λ_n) Ψ_{n−1}.
pub fn psi(w: &WaveSpec) -> Result<Estimate> {
    psi_with(&Model::new(w.params.clone())?, w)
}

/// Strip guards of `w` for Ψ (`dual = false`) or Ψ̂ (`dual = true`).
pub fn check_wave_strips(w: &WaveSpec, dual: bool) -> Result<()> {
    w.shape()?;
    if dual {
        w.params.validate_dual()?;
        check_strips(&w.params.dual(), &w.x, &w.lambda, w.epsilon)
    } else {
        check_strips(&w.params, &w.lambda, &w.x, w.epsilon)
    }
}

/// As [`psi`] with a prepared model (whose parameters override `w.params`).
pub fn psi_with(m: &Model, w: &WaveSpec) -> Result<Estimate> {
    w.shape()?;
    w.spec.validate()?;
    check_strips(m.params(), &w.lambda, &w.x, w.epsilon)?;
    psi_core(m, w.lambda.values(), w.x.values(), &w.spec)
}

/// Ψ̂_x(λ) = Ψ_x(λ; ĝ*|ω̂): the same recursion on the dual model with x and λ exchanged.
pub fn psi_dual(w: &WaveSpec) -> Result<Estimate> {
    psi_dual_with(&Model::new(w.params.clone())?, w)
}

pub fn psi_dual_with(m: &Model, w: &WaveSpec) -> Result<Estimate> {
    w.shape()?;
    w.spec.validate()?;
    let dm = m.dual()?;
    check_strips(dm.params(), &w.x, &w.lambda, w.epsilon)?;
    psi_core(dm, w.x.values(), w.lambda.values(), &w.spec)
}

/// The integrand of Ψ₃ with all three integrations flattened, for order-exchange checks.
/// Coordinates are (y₁, y₂, t); `order[0]` is the outermost.
pub fn psi3_ordered(w: &WaveSpec, order: &[usize]) -> Result<Estimate> {
    w.shape()?;
    if w.n != 3 {
        return Err(Error::domain("psi3_ordered needs n = 3"));
    }
    let m = Model::new(w.params.clone())?;
    check_strips(m.params(), &w.lambda, &w.x, w.epsilon)?;
    let (l, x) = (w.lambda.values(), w.x.values());
    let nu = m.params().nu_g();
    let (d32, d21) = (l[2] - l[1], l[1] - l[0]);
    let ry = net_rate(2.0 * PI * (nu - d32.im.abs() - d21.im.abs()), "Ψ₃ integrand")?;
    let rt = net_rate(2.0 * PI * (nu - d21.im.abs()), "Ψ₃ integrand")?;
    let c = mean_re(x);
    let fy = [2.0 * PI * d32.re.abs(), 2.0 * PI * d21.re.abs()];
    let profiles = [
        DecayProfile::new(ry).with_freqs(fy).centered(c),
        DecayProfile::new(ry).with_freqs(fy).centered(c),
        DecayProfile::new(rt).with_freqs([2.0 * PI * d21.re.abs()]).centered(c),
    ];
    let xs: Complex64 = x.iter().sum();
    let r = integrate_multi_ordered(
        |v: &[f64]| {
            let yt = ComplexTuple::real(&v[..2]);
            let mu = m.muprod(&yt)?;
            if mu == Complex64::new(0.0, 0.0) {
                return Ok(Estimate::exact(mu));
            }
            let t = Complex64::new(v[2], 0.0);
            let outer = phase(l[2] * (xs - yt.sum())) * m.kprod(&w.x, &yt)? * mu;
            let inner = phase(l[1] * (yt.sum() - t) + l[0] * t) * m.kfun(yt[0] - t)? * m.kfun(yt[1] - t)?;
            Ok(Estimate::exact(outer * inner))
        },
        &profiles,
        order,
        &w.spec,
    );
    scaled(r, m.d_n(2)? * m.d_n(1)?)
}

/// Ψ_n(x) = e^{2πiλ_n x_n} Q_{n−1}(λ_n) Q̂_{n−1}(x_n) Ψ_{λ_{n−1}}(x_{n−1}); real periods only.
pub fn psi_mixed(w: &WaveSpec) -> Result<Estimate> {
    w.shape()?;
    w.spec.validate()?;
    if !w.params.periods.is_real() {
        return Err(Error::domain("the mixed representation requires real positive periods"));
    }
    let m = Model::new(w.params.clone())?;
    check_strips(m.params(), &w.lambda, &w.x, w.epsilon)?;
    let dm = m.dual()?;
    let (l, x) = (w.lambda.values(), w.x.values());
    match w.n {
        2 => psi_mixed2(&m, dm, l, x, &w.spec),
        3 => psi_mixed3(&m, dm, l, x, &w.spec),
        n => Err(Error::domain(format!("the mixed representation needs n ∈ {{2,3}}, got {n}"))),
    }
}

fn psi_mixed2(m: &Model, dm: &Model, l: &[Complex64], x: &[Complex64], spec: &QuadratureSpec) -> Result<Estimate> {
    let (nu, nuh) = (m.params().nu_g(), dm.params().nu_g());
    let ry = net_rate(PI * nu - 2.0 * PI * l[1].im.abs(), "mixed Ψ₂, y")?;
    let rg = net_rate(PI * nuh - 2.0 * PI * x[1].im.abs(), "mixed Ψ₂, γ")?;
    let inner = tighter(spec, 0.05);
    let outer = DecayProfile::new(ry).with_freqs([2.0 * PI * l[1].re.abs()]).centered(x[0].re);
    let r = integrate_line(
        |y| {
            let yc = Complex64::new(y, 0.0);
            let k = phase(l[1] * (x[0] - yc)) * m.kfun(x[0] - yc)?;
            // e^{2πiγ(y−x₂)} oscillates at a rate set by the outer point
            let prof = DecayProfile::new(rg)
                .with_freqs([2.0 * PI * (yc - x[1]).re.abs()])
                .centered(l[0].re);
            let g = integrate_line(
                |gm| {
                    let gc = Complex64::new(gm, 0.0);
                    Ok(Estimate::exact(dm.kfun(l[0] - gc)? * phase(x[1] * (l[0] - gc) + gc * yc)))
                },
                &prof,
                &inner,
            )?;
            Ok(g.scale(k))
        },
        &outer,
        spec,
    );
    scaled(r, phase(l[1] * x[1]) * m.d_n(1)? * dm.d_n(1)?)
}

fn psi_mixed3(m: &Model, dm: &Model, l: &[Complex64], x: &[Complex64], spec: &QuadratureSpec) -> Result<Estimate> {
    let (nu, nuh) = (m.params().nu_g(), dm.params().nu_g());
    let ry = net_rate(PI * nu - 2.0 * PI * l[2].im.abs(), "mixed Ψ₃, y")?;
    let rg = net_rate(PI * nuh - 2.0 * PI * x[2].im.abs(), "mixed Ψ₃, γ")?;
    let (xh, lh) = (ComplexTuple::new(x[..2].to_vec()), ComplexTuple::new(l[..2].to_vec()));
    let inner = QuadratureSpec { multi_dim_strategy: MultiDimStrategy::NestedAdaptive, ..tighter(spec, 0.1) };
    let outer_spec = QuadratureSpec { multi_dim_strategy: MultiDimStrategy::QuasiMonteCarlo, ..spec.clone() };
    let py = DecayProfile::new(ry).centered(mean_re(&x[..2]));
    let pg = DecayProfile::new(rg).centered(mean_re(&l[..2]));
    let r = integrate_multi(
        |v: &[f64]| {
            let y = ComplexTuple::real(&v[..2]);
            let gm = ComplexTuple::real(&v[2..]);
            let mu = m.muprod(&y)? * dm.muprod(&gm)?;
            if mu == Complex64::new(0.0, 0.0) {
                return Ok(Estimate::exact(mu));
            }
            let k = phase(l[2] * (xh.sum() - y.sum()) + x[2] * (lh.sum() - gm.sum()))
                * m.kprod(&xh, &y)?
                * dm.kprod(&lh, &gm)?
                * mu;
            Ok(psi2(m, gm.values(), y.values(), &inner)?.scale(k))
        },
        &[py.clone(), py, pg.clone(), pg],
        &outer_spec,
    );
    scaled(r, phase(l[2] * x[2]) * m.d_n(2)? * dm.d_n(2)?)
}

/// Ψ_λ as a function of x, with hints suitable for [`crate::operators::apply`].
/// For n = 2 real points go through a [`Psi2Table`].
pub fn psi_function<'a>(m: &'a Model, lambda: &ComplexTuple, spec: &QuadratureSpec) -> Result<FunctionOnTuples<'a>> {
    let l = lambda.clone();
    // evaluated inside an outer integral, so its own error must sit well below the outer target
    let inner = tighter(spec, 0.01);
    let nu = m.params().nu_g();
    let n = l.len();
    let table = if n == 2 {
        let lv = l.values();
        Some(Psi2Table::new(m, [lv[0], lv[1]], 2.0 * (psi2_u_max(m, lv) + 1.0), &inner)?)
    } else {
        None
    };
    let freqs = l.values().iter().map(|v| 2.0 * PI * v.re.abs()).collect();
    let labels = l.values().to_vec();
    Ok(FunctionOnTuples::new(n, move |x: &ComplexTuple| match &table {
        Some(t) if x.values().iter().all(|v| v.im == 0.0) => t.eval(x[0].re, x[1].re),
        _ => psi_core(m, l.values(), x.values(), &inner),
    })
    .with_decay(if n >= 2 { PI * nu } else { 0.0 })
    .with_freqs(freqs)
    .with_spectral(labels))
}

/// Ψ̂_x as a function of λ (dual model), for the dual operators.
pub fn psi_dual_function<'a>(m: &'a Model, x: &ComplexTuple, spec: &QuadratureSpec) -> Result<FunctionOnTuples<'a>> {
    psi_function(m.dual()?, x, spec)
}
