//! Combinatorial exponents S_n, T_n, the c_n recurrence, randomized checks of the
//! absolute-value inequalities, and the per-level decay rates they imply.

use std::f64::consts::{E, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;

const SLACK: f64 = 1e-12;

/// c_n = (n−1)(c_{n−1} + 1), c₁ = 0.
pub fn c_n(n: usize) -> u64 {
    (2..=n as u64).fold(0, |c, k| (k - 1) * (c + 1))
}

/// Vectors y₁…y_n with dim y_k = k, plus an optional t of dimension n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelTuples {
    pub levels: Vec<Vec<f64>>,
    pub t: Option<Vec<f64>>,
}

impl LevelTuples {
    pub fn new(levels: Vec<Vec<f64>>) -> Result<Self> {
        let l = Self { levels, t: None };
        l.validate()?;
        Ok(l)
    }

    pub fn with_t(mut self, t: Vec<f64>) -> Result<Self> {
        self.t = Some(t);
        self.validate()?;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.levels.len()
    }

    pub fn validate(&self) -> Result<()> {
        for (k, y) in self.levels.iter().enumerate() {
            if y.len() != k + 1 {
                return Err(Error::parameter(format!("level {} has {} components, expected {}", k + 1, y.len(), k + 1)));
            }
            if y.iter().any(|v| !v.is_finite()) {
                return Err(Error::parameter(format!("level {} has non-finite components", k + 1)));
            }
        }
        if let Some(t) = &self.t {
            if t.len() != self.n() || t.iter().any(|v| !v.is_finite()) {
                return Err(Error::parameter("t must be a finite vector with n components"));
            }
        }
        Ok(())
    }

    /// ‖y_k‖ (L¹), k one-based.
    pub fn norm(&self, k: usize) -> f64 {
        l1(&self.levels[k - 1])
    }

    fn norms_below(&self, k: usize) -> f64 {
        (1..k).map(|j| self.norm(j)).sum()
    }

    fn scale(&self) -> f64 {
        let n = self.n().max(1) as f64;
        let s: f64 = (1..=self.n()).map(|k| self.norm(k)).sum::<f64>() + self.t.as_deref().map_or(0.0, l1);
        n * n * s
    }
}

fn l1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

fn pair_sum(a: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            s += (a[i] - a[j]).abs();
        }
    }
    2.0 * s
}

fn cross_sum(a: &[f64], b: &[f64]) -> f64 {
    a.iter().map(|x| b.iter().map(|y| (x - y).abs()).sum::<f64>()).sum()
}

/// S_n by its recurrence over levels.
pub fn s_fn(levels: &LevelTuples) -> f64 {
    s_upto(&levels.levels)
}

fn s_upto(levels: &[Vec<f64>]) -> f64 {
    let mut s = 0.0;
    for k in 1..levels.len() {
        s += pair_sum(&levels[k]) - cross_sum(&levels[k], &levels[k - 1]);
    }
    s
}

/// T_n = Σ_{i≠j}|t_i − t_j| − Σ_{i,j}|t_i − y_j^{(n)}| + S_n.
pub fn t_fn(levels: &LevelTuples) -> Result<f64> {
    let t = levels.t.as_deref().ok_or_else(|| Error::parameter("T_n needs the t vector"))?;
    let top = levels.levels.last().ok_or_else(|| Error::parameter("T_n needs n ≥ 1"))?;
    Ok(pair_sum(t) - cross_sum(t, top) + s_fn(levels))
}

fn holds(lhs: f64, rhs: f64, scale: f64) -> bool {
    lhs <= rhs + SLACK * scale.max(lhs.abs()).max(rhs.abs())
}

/// Outcome of one inequality evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sides {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// |y₁−y₂| − |y₁−y| − |y₂−y| ≤ ε(|y₁|+|y₂|−|y|) for ε ∈ [0, 2].
pub fn check_lemma_b1(y1: f64, y2: f64, y: f64, eps: f64) -> Result<Sides> {
    if !(0.0..=2.0).contains(&eps) {
        return Err(Error::parameter(format!("ε must lie in [0, 2], got {eps}")));
    }
    let lhs = (y1 - y2).abs() - (y1 - y).abs() - (y2 - y).abs();
    let rhs = eps * (y1.abs() + y2.abs() - y.abs());
    Ok(Sides { lhs, rhs, holds: holds(lhs, rhs, 4.0 * (y1.abs() + y2.abs() + y.abs())) })
}

fn need_n2(levels: &LevelTuples) -> Result<usize> {
    levels.validate()?;
    let n = levels.n();
    if n < 2 {
        return Err(Error::parameter("inequality needs n ≥ 2 (c₁ = 0)"));
    }
    Ok(n)
}

/// S_n ≤ ½Σ_{i≠j}|y_i^{(n)} − y_j^{(n)}| + c_n ε‖y_n‖ − ε Σ_{k<n}‖y_k‖ for ε ∈ [0, 2(n−1)/c_n].
pub fn check_sest(levels: &LevelTuples, eps: f64) -> Result<Sides> {
    let n = need_n2(levels)?;
    let c = c_n(n) as f64;
    let max = 2.0 * (n - 1) as f64 / c;
    if !(0.0..=max).contains(&eps) {
        return Err(Error::parameter(format!("ε must lie in [0, {max}], got {eps}")));
    }
    let lhs = s_fn(levels);
    let rhs = 0.5 * pair_sum(&levels.levels[n - 1]) + c * eps * levels.norm(n) - eps * levels.norms_below(n);
    Ok(Sides { lhs, rhs, holds: holds(lhs, rhs, levels.scale()) })
}

/// S_n ≤ (n−1+ε)‖y_n‖ − (ε/c_n) Σ_{k<n}‖y_k‖ for ε ∈ [0, 2(n−1)].
pub fn check_sest2(levels: &LevelTuples, eps: f64) -> Result<Sides> {
    let n = need_n2(levels)?;
    let max = 2.0 * (n - 1) as f64;
    if !(0.0..=max).contains(&eps) {
        return Err(Error::parameter(format!("ε must lie in [0, {max}], got {eps}")));
    }
    let lhs = s_fn(levels);
    let rhs = (n as f64 - 1.0 + eps) * levels.norm(n) - eps / c_n(n) as f64 * levels.norms_below(n);
    Ok(Sides { lhs, rhs, holds: holds(lhs, rhs, levels.scale()) })
}

/// T_n ≤ (n+r)‖t‖ − (1−r)/(2n c_n) Σ_{k≤n}‖y_k‖ − r|Σ_j(t_j − y_j^{(n)})| for r ∈ [0, 1].
pub fn check_test(levels: &LevelTuples, r: f64) -> Result<Sides> {
    let n = need_n2(levels)?;
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::parameter(format!("r must lie in [0, 1], got {r}")));
    }
    let t = levels.t.as_deref().ok_or_else(|| Error::parameter("T_n needs the t vector"))?;
    let lhs = t_fn(levels)?;
    let drift: f64 = t.iter().zip(&levels.levels[n - 1]).map(|(a, b)| a - b).sum();
    let rhs = (n as f64 + r) * l1(t) - (1.0 - r) / (2.0 * n as f64 * c_n(n) as f64) * levels.norms_below(n + 1)
        - r * drift.abs();
    Ok(Sides { lhs, rhs, holds: holds(lhs, rhs, levels.scale()) })
}

fn check_kh4(n: usize, delta_q: f64, delta_l: f64, eps: f64) -> Result<()> {
    let bound = eps / (factorial(n.saturating_sub(1)) * E);
    if !(delta_q < 1.0 - eps) {
        return Err(Error::parameter(format!("δ_Q = {delta_q} must be < 1 − ε = {}", 1.0 - eps)));
    }
    if !(delta_l < bound) {
        return Err(Error::parameter(format!("δ_Λ = {delta_l} must be < ε/((n−1)!e) = {bound}")));
    }
    Ok(())
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn inner_rate(n: usize, delta_l: f64, eps: f64) -> f64 {
    let c = c_n(n).max(1) as f64;
    eps / c - delta_l
}

/// Decay rate per unit ‖y_level‖ of the Q_n Ψ integrand bound: the outermost level
/// (level = n) decays at πν(1 − δ_Q − ε), inner levels at πν(ε/c_n − δ_Λ).
pub fn net_decay_rate(n: usize, level: usize, delta_q: f64, delta_l: f64, eps: f64, params: &ModelParams) -> Result<f64> {
    if n == 0 || level == 0 || level > n {
        return Err(Error::parameter(format!("level {level} outside 1..={n}")));
    }
    check_kh4(n, delta_q, delta_l, eps)?;
    let coef = if level == n { 1.0 - delta_q - eps } else { inner_rate(n, delta_l, eps) };
    Ok(PI * params.nu_g() * coef)
}

/// Same for the Ψ integrand alone: outermost πν(2 − δ_Λ − ε), inner πν(ε/c_n − δ_Λ).
pub fn psi_decay_rate(n: usize, level: usize, delta_l: f64, eps: f64, params: &ModelParams) -> Result<f64> {
    if n == 0 || level == 0 || level > n {
        return Err(Error::parameter(format!("level {level} outside 1..={n}")));
    }
    let bound = eps / (factorial(n.saturating_sub(1)) * E);
    if !(delta_l < bound && delta_l < 2.0 - eps) {
        return Err(Error::parameter(format!("δ_Λ = {delta_l} must be < min(2 − ε, ε/((n−1)!e) = {bound})")));
    }
    let coef = if level == n { 2.0 - delta_l - eps } else { inner_rate(n, delta_l, eps) };
    Ok(PI * params.nu_g() * coef)
}

/// Draw families used to probe the inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    Uniform,
    HeavyTailed,
    Clustered,
}

impl Sampler {
    pub const ALL: [Sampler; 3] = [Sampler::Uniform, Sampler::HeavyTailed, Sampler::Clustered];
}

/// Seeded generator of real draws and level tuples.
pub struct Draws {
    rng: ChaCha8Rng,
    anchors: Vec<f64>,
}

impl Draws {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed), anchors: Vec::new() }
    }

    fn refresh_anchors(&mut self) {
        let k = self.rng.gen_range(1..=3);
        self.anchors = (0..k).map(|_| if self.rng.gen_bool(0.3) { 0.0 } else { self.rng.gen_range(-5.0..5.0) }).collect();
    }

    pub fn real(&mut self, s: Sampler) -> f64 {
        match s {
            Sampler::Uniform => self.rng.gen_range(-10.0..10.0),
            Sampler::HeavyTailed => {
                let u: f64 = self.rng.gen_range(-0.5..0.5);
                (PI * u * 0.999).tan()
            }
            Sampler::Clustered => {
                let a = self.anchors[self.rng.gen_range(0..self.anchors.len())];
                match self.rng.gen_range(0..3) {
                    0 => a,
                    1 => -a,
                    _ => a + self.rng.gen_range(-1e-9..1e-9),
                }
            }
        }
    }

    /// Levels y₁…y_n (and t when `with_t`) from one sampler family.
    pub fn levels(&mut self, n: usize, with_t: bool, s: Sampler) -> LevelTuples {
        self.refresh_anchors();
        let levels = (1..=n).map(|k| (0..k).map(|_| self.real(s)).collect()).collect();
        let t = with_t.then(|| (0..n).map(|_| self.real(s)).collect());
        LevelTuples { levels, t }
    }

    pub fn unit(&mut self, hi: f64) -> f64 {
        // hit the endpoints now and then, where the bounds are tightest
        match self.rng.gen_range(0..10) {
            0 => 0.0,
            1 => hi,
            _ => self.rng.gen_range(0.0..=hi),
        }
    }

    pub fn sampler(&mut self) -> Sampler {
        Sampler::ALL[self.rng.gen_range(0..3)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FuzzReport {
    pub draws: usize,
    pub violations: usize,
    /// max over draws of (lhs − rhs) / max(1, scale)
    pub worst_margin: f64,
}

impl FuzzReport {
    fn push(&mut self, s: Sides) {
        self.draws += 1;
        if !s.holds {
            self.violations += 1;
        }
        let m = (s.lhs - s.rhs) / s.lhs.abs().max(s.rhs.abs()).max(1.0);
        if m > self.worst_margin || self.draws == 1 {
            self.worst_margin = m;
        }
    }
}

pub fn fuzz_lemma_b1(draws: usize, seed: u64) -> FuzzReport {
    let mut d = Draws::new(seed);
    let mut rep = FuzzReport { draws: 0, violations: 0, worst_margin: f64::NEG_INFINITY };
    for _ in 0..draws {
        let s = d.sampler();
        d.refresh_anchors();
        let (a, b, c) = (d.real(s), d.real(s), d.real(s));
        let eps = d.unit(2.0);
        rep.push(check_lemma_b1(a, b, c, eps).expect("ε in range"));
    }
    rep
}

pub fn fuzz_sest2(n: usize, draws: usize, seed: u64) -> Result<FuzzReport> {
    let mut d = Draws::new(seed);
    let mut rep = FuzzReport { draws: 0, violations: 0, worst_margin: f64::NEG_INFINITY };
    for _ in 0..draws {
        let s = d.sampler();
        let l = d.levels(n, false, s);
        let eps = d.unit(2.0 * (n - 1) as f64);
        rep.push(check_sest2(&l, eps)?);
    }
    Ok(rep)
}

pub fn fuzz_sest(n: usize, draws: usize, seed: u64) -> Result<FuzzReport> {
    let mut d = Draws::new(seed);
    let mut rep = FuzzReport { draws: 0, violations: 0, worst_margin: f64::NEG_INFINITY };
    let max = 2.0 * (n - 1) as f64 / c_n(n) as f64;
    for _ in 0..draws {
        let s = d.sampler();
        let l = d.levels(n, false, s);
        let eps = d.unit(max);
        rep.push(check_sest(&l, eps)?);
    }
    Ok(rep)
}

pub fn fuzz_test(n: usize, draws: usize, seed: u64) -> Result<FuzzReport> {
    let mut d = Draws::new(seed);
    let mut rep = FuzzReport { draws: 0, violations: 0, worst_margin: f64::NEG_INFINITY };
    for _ in 0..draws {
        let s = d.sampler();
        let l = d.levels(n, true, s);
        let r = d.unit(1.0);
        rep.push(check_test(&l, r)?);
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn flat_s(levels: &[Vec<f64>]) -> f64 {
        let mut s = 0.0;
        for k in 1..levels.len() {
            for (i, a) in levels[k].iter().enumerate() {
                for (j, b) in levels[k].iter().enumerate() {
                    if i != j {
                        s += (a - b).abs();
                    }
                }
                for b in &levels[k - 1] {
                    s -= (a - b).abs();
                }
            }
        }
        s
    }

    #[test]
    fn c_n_values_and_sandwich() {
        assert_eq!([c_n(1), c_n(2), c_n(3), c_n(4)], [0, 1, 4, 15]);
        let mut fact: u64 = 1;
        for n in 2..=12u64 {
            fact *= n - 1;
            let c = c_n(n as usize);
            assert!(fact <= c, "n={n}");
            // c_n < (n−1)!·e ⇔ c_n − (n−1)!·Σ_{k≤n−1} 1/k! < (n−1)!·Σ_{k≥n} 1/k!; c_n = Σ_{k=1}^{n−1} (n−1)!/k!
            let exact: u64 = (1..n).map(|k| (k..n).product::<u64>()).sum();
            assert_eq!(c, exact, "closed form at n={n}");
            assert!((c as f64) < fact as f64 * E);
        }
    }

    #[test]
    fn s_and_t_small_cases() {
        let one = LevelTuples::new(vec![vec![3.0]]).unwrap();
        assert_eq!(s_fn(&one), 0.0);
        assert_eq!(t_fn(&one.clone().with_t(vec![1.0]).unwrap()).unwrap(), -2.0);
        let two = LevelTuples::new(vec![vec![0.5], vec![2.0, 2.0]]).unwrap();
        assert_eq!(s_fn(&two), -3.0);
        let diag = LevelTuples::new(vec![vec![0.3], vec![1.0, -1.5]]).unwrap();
        let t = diag.clone().with_t(vec![1.0, -1.5]).unwrap();
        assert!((t_fn(&t).unwrap() - s_fn(&diag)).abs() < 1e-15);
    }

    #[test]
    fn hand_instances() {
        let l = LevelTuples::new(vec![vec![0.0], vec![1.0, -1.0]]).unwrap();
        let s = check_sest2(&l, 1.0).unwrap();
        assert_eq!((s.lhs, s.rhs, s.holds), (2.0, 4.0, true));
        let z = LevelTuples::new(vec![vec![0.0], vec![0.0, 0.0], vec![0.0; 3]]).unwrap();
        assert!(check_sest2(&z, 0.7).unwrap().holds);
        assert!(check_test(&z.clone().with_t(vec![0.0; 3]).unwrap(), 0.2).unwrap().holds);
        assert!(check_lemma_b1(1.0, -3.0, 0.0, 2.0).unwrap().holds);
        assert!(check_lemma_b1(0.0, 0.0, 5.0, 2.0).unwrap().holds);
        assert!(matches!(check_sest2(&l, 2.5), Err(Error::Parameter(_))));
        assert!(matches!(check_test(&l, 0.5), Err(Error::Parameter(_))));
        assert!(matches!(check_lemma_b1(0.0, 0.0, 0.0, 2.1), Err(Error::Parameter(_))));
    }

    #[test]
    fn decay_rates() {
        let p = ModelParams::real(1.0, 1.0, 0.6).unwrap();
        let r = net_decay_rate(2, 2, 0.0, 0.0, 0.5, &p).unwrap();
        assert!((r - 0.5 * PI * 0.6).abs() < 1e-15);
        let edge = 0.5 / E;
        assert!(matches!(net_decay_rate(2, 1, 0.0, edge, 0.5, &p), Err(Error::Parameter(_))));
        for n in 1..=3 {
            for level in 1..=n {
                assert!(net_decay_rate(n, level, 0.0, 0.0, 0.5, &p).unwrap() > 0.0);
                assert!(psi_decay_rate(n, level, 0.0, 0.5, &p).unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn fuzz_smoke() {
        assert_eq!(fuzz_lemma_b1(20_000, 1).violations, 0);
        for n in 2..=4 {
            assert_eq!(fuzz_sest(n, 5_000, n as u64).unwrap().violations, 0);
            assert_eq!(fuzz_sest2(n, 5_000, n as u64).unwrap().violations, 0);
            assert_eq!(fuzz_test(n, 5_000, n as u64).unwrap().violations, 0);
        }
    }

    fn levels_strategy(n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
        (1..=n).map(|k| prop::collection::vec(-50.0..50.0f64, k)).collect::<Vec<_>>()
    }

    proptest! {
        #[test]
        fn s_matches_flat_sum(levels in levels_strategy(4)) {
            let l = LevelTuples::new(levels.clone()).unwrap();
            prop_assert!((s_fn(&l) - flat_s(&levels)).abs() <= 1e-9 * (1.0 + l.scale()));
        }

        #[test]
        fn s_and_t_permutation_invariant(levels in levels_strategy(3), t in prop::collection::vec(-50.0..50.0f64, 3), rot in 0usize..3) {
            let l = LevelTuples::new(levels.clone()).unwrap().with_t(t.clone()).unwrap();
            let mut p = levels.clone();
            p[2].rotate_left(rot);
            p[1].reverse();
            let mut tp = t.clone();
            tp.rotate_right(rot);
            let q = LevelTuples::new(p).unwrap().with_t(tp).unwrap();
            prop_assert!((s_fn(&l) - s_fn(&q)).abs() <= 1e-9 * (1.0 + l.scale()));
            prop_assert!((t_fn(&l).unwrap() - t_fn(&q).unwrap()).abs() <= 1e-9 * (1.0 + l.scale()));
        }

        #[test]
        fn sest2_and_test_hold(levels in levels_strategy(3), t in prop::collection::vec(-50.0..50.0f64, 3), eps in 0.0..=4.0f64, r in 0.0..=1.0f64) {
            let l = LevelTuples::new(levels).unwrap().with_t(t).unwrap();
            prop_assert!(check_sest2(&l, eps).unwrap().holds);
            prop_assert!(check_test(&l, r).unwrap().holds);
        }

        #[test]
        fn lemma_b1_holds(a in -1e3..1e3f64, b in -1e3..1e3f64, y in -1e3..1e3f64, eps in 0.0..=2.0f64) {
            prop_assert!(check_lemma_b1(a, b, y, eps).unwrap().holds);
        }
    }
}
