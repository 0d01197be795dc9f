//! The boundary polynomial in `c = cos(√2 x)`.
//!
//! Writing `cos 2q = 2(1 − c²)/I² − 2 − c` and squaring the ratio relation
//! `sin² 2q = R² (1 − c²)` yields a quartic in `c` with the spurious root
//! `c = −1`. Dividing it out leaves, with `ε = I² − 1` and
//! `Q = I⁴ (1 − R²)/4`,
//!
//! ```text
//! c³ + ε c² + (ε + Q) c + ε² − Q = 0.
//! ```
//!
//! A root is physical when `c ∈ [−1, 1]` and `cos 2q ≥ 0`. The pinned
//! boundary is where the physical root merges with another and the
//! discriminant changes sign.

use std::f64::consts::PI;

/// Monic cubic `c³ + a c² + b c + d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cubic {
    pub a: f64,
    pub b: f64,
    pub d: f64,
}

impl Cubic {
    pub fn eval(&self, c: f64) -> f64 {
        ((c + self.a) * c + self.b) * c + self.d
    }

    fn derivative(&self, c: f64) -> f64 {
        (3.0 * c + 2.0 * self.a) * c + self.b
    }

    /// `18abd − 4a³d + a²b² − 4b³ − 27d²`; positive for three distinct
    /// real roots, negative for one.
    pub fn discriminant(&self) -> f64 {
        let Cubic { a, b, d } = *self;
        18.0 * a * b * d - 4.0 * a.powi(3) * d + a * a * b * b - 4.0 * b.powi(3) - 27.0 * d * d
    }

    /// Real roots, ascending, each polished by Newton steps.
    pub fn real_roots(&self) -> Vec<f64> {
        let Cubic { a, b, d } = *self;
        let shift = a / 3.0;
        let p = b - a * a / 3.0;
        let q = 2.0 * a.powi(3) / 27.0 - a * b / 3.0 + d;
        let mut roots = if p < 0.0 && q * q / 4.0 + p.powi(3) / 27.0 <= 0.0 {
            let m = 2.0 * (-p / 3.0).sqrt();
            let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
            let theta = arg.acos() / 3.0;
            (0..3).map(|k| m * (theta - 2.0 * PI * k as f64 / 3.0).cos() - shift).collect::<Vec<_>>()
        } else {
            let s = (q * q / 4.0 + p.powi(3) / 27.0).max(0.0).sqrt();
            vec![(-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt() - shift]
        };
        for r in roots.iter_mut() {
            for _ in 0..3 {
                let dv = self.derivative(*r);
                if dv.abs() < 1e-300 {
                    break;
                }
                let step = self.eval(*r) / dv;
                if !step.is_finite() || step.abs() > 1e-6 * (1.0 + r.abs()) {
                    break;
                }
                *r -= step;
            }
        }
        roots.sort_by(f64::total_cmp);
        roots
    }

    /// The repeated root when the discriminant vanishes.
    pub fn double_root(&self) -> f64 {
        let Cubic { a, b, d } = *self;
        let den = 2.0 * (a * a - 3.0 * b);
        if den.abs() > 1e-12 {
            (9.0 * d - a * b) / den
        } else {
            -a / 3.0
        }
    }
}

/// The boundary cubic at current `i` (the `x` component) and ratio `r`.
pub fn boundary_cubic(i: f64, r: f64) -> Cubic {
    let e = i * i - 1.0;
    let q = i.powi(4) * (1.0 - r * r) / 4.0;
    Cubic { a: e, b: e + q, d: e * e - q }
}

/// `cos 2q` implied by a root `c` at current `i`.
pub fn cos_2q(c: f64, i: f64) -> f64 {
    2.0 * (1.0 - c * c) / (i * i) - 2.0 - c
}

/// Whether `c` is a physical root at current `i`.
pub fn is_physical(c: f64, i: f64, tol: f64) -> bool {
    (-1.0 - tol..=1.0 + tol).contains(&c) && cos_2q(c, i) >= -tol && cos_2q(c, i) <= 1.0 + tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    #[test]
    fn critical_uniaxial_root() {
        let ic = (12.0 - 8.0 * SQRT_2).sqrt();
        let cub = boundary_cubic(ic, 0.0);
        assert!(cub.eval(2.0 * SQRT_2 - 3.0).abs() < 1e-10);
        assert!(cub.discriminant().abs() < 1e-12);
        assert!((cub.double_root() - (2.0 * SQRT_2 - 3.0)).abs() < 1e-8);
    }

    #[test]
    fn diagonal_triple_root() {
        let cub = boundary_cubic(1.0, 1.0);
        assert_eq!((cub.a, cub.b, cub.d), (0.0, 0.0, 0.0));
        assert_eq!(cub.double_root(), 0.0);
        // Discriminant behaves like −4ε³ nearby.
        let e: f64 = 1e-4;
        let cub = boundary_cubic((1.0 + e).sqrt(), 1.0);
        assert!((cub.discriminant() / (-4.0 * e.powi(3)) - 1.0).abs() < 1e-2);
    }

    #[test]
    fn roots_solve_cubic() {
        for (a, b, d) in [(1.0, -4.0, 0.5), (-0.3, 0.1, 0.02), (0.0, 1.0, 1.0), (2.0, 1.0, 0.0)] {
            let cub = Cubic { a, b, d };
            let roots = cub.real_roots();
            let expected = if cub.discriminant() > 0.0 { 3 } else { 1 };
            assert_eq!(roots.len(), expected, "{cub:?}");
            for r in roots {
                assert!(cub.eval(r).abs() < 1e-12, "{cub:?} {r}");
            }
        }
    }

    #[test]
    fn single_sign_change_per_ratio() {
        for r in [0.0, 0.25, 0.5, 0.75, 0.95] {
            let signs: Vec<bool> = (0..=900)
                .map(|k| 0.3 + 0.001 * k as f64)
                .map(|i| boundary_cubic(i, r).discriminant() > 0.0)
                .collect();
            let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
            assert_eq!(changes, 1, "R = {r}");
        }
    }

    #[test]
    fn physical_root_gives_stationary_point() {
        use crate::stationary::half::stationary_residuals;
        let (i, r) = (0.7, 0.4);
        let roots = boundary_cubic(i, r).real_roots();
        let c = *roots.iter().find(|c| is_physical(**c, i, 1e-12)).unwrap();
        let p = c.acos() / 2.0;
        let q = (r * (2.0 * p).sin()).asin() / 2.0;
        assert!(((2.0 * q).cos() - cos_2q(c, i)).abs() < 1e-10);
        let norm = (p.cos().powi(2) + q.cos().powi(2)).sqrt();
        let z = 2.0 * (-p.cos() / norm).atan2(q.cos() / norm);
        let res = stationary_residuals(&[p * SQRT_2, q * SQRT_2, z], i, r * i);
        assert!(res.iter().all(|v| v.abs() < 1e-10), "{res:?}");
    }
}
