//! Piecewise Chebyshev interpolants on an interval, used for y ↦ ln S₂(c + iy)
//! along vertical lines and for smooth one-variable profiles elsewhere.
//!
//! For ln S₂ the panels are sized relative to the distance to the nearest
//! zero/pole, so each interpolant is analytic well beyond its Bernstein
//! ellipse and a fixed number of nodes gives close to machine precision.

use num_complex::Complex64;

use crate::error::Result;

pub(crate) const NODES: usize = 20;

#[derive(Debug)]
pub(crate) struct LineTable {
    /// Lower endpoint of each panel, plus the final upper endpoint.
    edges: Vec<f64>,
    coeffs: Vec<[Complex64; NODES]>,
}

impl LineTable {
    /// Symmetric table on [−y_max, y_max]; `dist(y)` is the distance from
    /// the sample point to the nearest singularity of `eval`.
    pub fn build(
        y_max: f64,
        dist: impl Fn(f64) -> f64,
        eval: impl Fn(f64) -> Result<Complex64>,
    ) -> Result<Self> {
        Self::build_range(-y_max, y_max, |y| (0.4 * dist(y)).min(2.0), eval)
    }

    pub fn build_range(
        lo: f64,
        hi: f64,
        width: impl Fn(f64) -> f64,
        eval: impl Fn(f64) -> Result<Complex64>,
    ) -> Result<Self> {
        let mut edges = vec![lo];
        let mut y = lo;
        while y < hi {
            let width = width(y);
            let next = if y + 1.2 * width >= hi { hi } else { y + width };
            edges.push(next);
            y = next;
        }
        let mut coeffs = Vec::with_capacity(edges.len() - 1);
        for w in edges.windows(2) {
            let (mid, half) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
            let mut f = [Complex64::new(0.0, 0.0); NODES];
            for (j, fj) in f.iter_mut().enumerate() {
                let x = (std::f64::consts::PI * (j as f64 + 0.5) / NODES as f64).cos();
                *fj = eval(mid + half * x)?;
            }
            let mut a = [Complex64::new(0.0, 0.0); NODES];
            for (k, ak) in a.iter_mut().enumerate() {
                let mut s = Complex64::new(0.0, 0.0);
                for (j, fj) in f.iter().enumerate() {
                    let th = std::f64::consts::PI * k as f64 * (j as f64 + 0.5) / NODES as f64;
                    s += fj * th.cos();
                }
                *ak = s * (2.0 / NODES as f64);
            }
            a[0] *= 0.5;
            coeffs.push(a);
        }
        Ok(Self { edges, coeffs })
    }

    pub fn y_max(&self) -> f64 {
        *self.edges.last().unwrap()
    }

    pub fn contains(&self, y: f64) -> bool {
        y >= self.edges[0] && y <= self.y_max()
    }

    #[cfg(test)]
    pub fn panels(&self) -> usize {
        self.coeffs.len()
    }

    fn panel(&self, y: f64) -> usize {
        self.edges.partition_point(|&e| e <= y).clamp(1, self.coeffs.len()) - 1
    }

    /// Size of the two highest coefficients on the panel holding `y`: a
    /// practical bound on the interpolation error there.
    pub fn tail(&self, y: f64) -> f64 {
        let a = &self.coeffs[self.panel(y)];
        a[NODES - 1].norm() + a[NODES - 2].norm()
    }

    pub fn eval(&self, y: f64) -> Complex64 {
        let i = self.panel(y);
        let (lo, hi) = (self.edges[i], self.edges[i + 1]);
        let x = (2.0 * y - lo - hi) / (hi - lo);
        let a = &self.coeffs[i];
        let (mut b1, mut b2) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for ak in a.iter().skip(1).rev() {
            let b0 = ak + b1 * (2.0 * x) - b2;
            b2 = b1;
            b1 = b0;
        }
        a[0] + b1 * x - b2
    }
}
