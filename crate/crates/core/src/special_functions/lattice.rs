use num_complex::Complex64;

use super::{Periods, SingularityInfo};

/// Nearest point `m·ω₁ + k·ω₂` with `m, k ≥ min` to `u`, provided it lies closer than `bound`.
fn nearest_in(u: Complex64, p: &Periods, min: u32, bound: f64) -> Option<(u32, u32, f64)> {
    if !(u.re.is_finite() && u.im.is_finite()) {
        return None;
    }
    let (a1, a2) = (p.omega1.re, p.omega2.re);
    let mut best = bound;
    let mut hit = None;
    let mut m = min;
    loop {
        let base = m as f64 * a1 + min as f64 * a2;
        if base > u.re + best {
            break;
        }
        let k_lo = ((u.re - best - m as f64 * a1) / a2).ceil().max(min as f64) as u32;
        let k_hi = ((u.re + best - m as f64 * a1) / a2).floor();
        if k_hi >= k_lo as f64 {
            let mut k = k_lo;
            while k as f64 <= k_hi {
                let q = p.omega1 * m as f64 + p.omega2 * k as f64;
                let d = (u - q).norm();
                if d < best || (d == best && hit.is_none()) {
                    best = d;
                    hit = Some((m, k, d));
                }
                k += 1;
            }
        }
        m += 1;
    }
    hit
}

/// Nearest zero (`−mω₁−kω₂`, m,k ≥ 0) and nearest pole (`mω₁+kω₂`, m,k ≥ 1).
pub(crate) fn nearest_zero(z: Complex64, p: &Periods, bound: f64) -> Option<(u32, u32, f64)> {
    nearest_in(-z, p, 0, bound)
}

pub(crate) fn nearest_pole(z: Complex64, p: &Periods, bound: f64) -> Option<(u32, u32, f64)> {
    nearest_in(z, p, 1, bound)
}

pub(crate) fn classify(z: Complex64, p: &Periods, radius: f64) -> SingularityInfo {
    // Seed the search bound with the two lattice corners so the scan terminates.
    let seed_zero = z.norm() * (1.0 + 1e-12) + radius;
    let seed_pole = (z - p.sum()).norm() * (1.0 + 1e-12) + radius;
    let zero = nearest_zero(z, p, seed_zero);
    let pole = nearest_pole(z, p, seed_pole);
    let (dz, dp) = (
        zero.map_or(f64::INFINITY, |t| t.2),
        pole.map_or(f64::INFINITY, |t| t.2),
    );
    let (m, k, distance) = if dz <= dp {
        zero.unwrap_or((0, 0, dz))
    } else {
        pole.unwrap_or((1, 1, dp))
    };
    SingularityInfo {
        is_zero: dz <= radius,
        is_pole: dp <= radius,
        lattice_indices: (m, k),
        distance,
    }
}

/// Distance from `z` to the nearest lattice point of either type.
pub(crate) fn distance(z: Complex64, p: &Periods) -> f64 {
    classify(z, p, 0.0).distance
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(z: Complex64, p: &Periods) -> f64 {
        let mut best = f64::INFINITY;
        for m in 0..60 {
            for k in 0..60 {
                let q = p.omega1 * m as f64 + p.omega2 * k as f64;
                best = best.min((z + q).norm());
                if m >= 1 && k >= 1 {
                    best = best.min((z - q).norm());
                }
            }
        }
        best
    }

    #[test]
    fn matches_brute_force() {
        let ps = [
            Periods::new(Complex64::new(1.0, 0.0), Complex64::new(2f64.sqrt(), 0.0)).unwrap(),
            Periods::new(Complex64::new(1.0, 0.2), Complex64::new(1.3, -0.1)).unwrap(),
            Periods::new(Complex64::new(0.3, 0.0), Complex64::new(1.0, 0.0)).unwrap(),
        ];
        let zs = [
            Complex64::new(0.37, 0.11),
            Complex64::new(-2.4, 0.7),
            Complex64::new(3.1, -1.3),
            Complex64::new(-0.9, -5.0),
            Complex64::new(6.5, 0.02),
        ];
        for p in &ps {
            for &z in &zs {
                let d = distance(z, p);
                assert!((d - brute(z, p)).abs() < 1e-12, "{z} {p:?}");
            }
        }
    }
}
