//! Stationary points of the tilted potential: damped Newton on `∇U = 0`,
//! a descent minimizer, Hessian classification, and the f = 1/2 analysis
//! of critical currents and the pinned-phase boundary.

pub mod boundary;
pub mod cubic;
pub mod half;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::potential::TiltedPotential;

pub use boundary::{pinned_boundary, pinned_boundary_continuation, BoundaryMethod, BoundarySample, PinnedBoundaryCurve};
pub use half::{critical_current_uniaxial, stationary_residuals, CriticalCurrent};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Minimum,
    Saddle,
    Maximum,
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub x: Vec<f64>,
    pub classification: Classification,
    /// Hessian eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// `‖∇U(x)‖_∞`.
    pub residual: f64,
    pub energy: f64,
    pub iterations: usize,
}

impl FixedPoint {
    /// Number of negative Hessian eigenvalues.
    pub fn index(&self) -> usize {
        self.eigenvalues.iter().filter(|l| **l < 0.0).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    /// Backtracking gives up below this step length.
    pub min_step: f64,
    /// `|λ_min|` below this classifies as degenerate.
    pub degeneracy: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { tol: 1e-10, max_iter: 200, armijo: 1e-4, min_step: 1e-8, degeneracy: 1e-6 }
    }
}

pub fn classify(eigenvalues: &[f64], degeneracy: f64) -> Classification {
    let min_abs = eigenvalues.iter().fold(f64::INFINITY, |m, l| m.min(l.abs()));
    if min_abs < degeneracy {
        Classification::Degenerate
    } else if eigenvalues.iter().all(|l| *l > 0.0) {
        Classification::Minimum
    } else if eigenvalues.iter().all(|l| *l < 0.0) {
        Classification::Maximum
    } else {
        Classification::Saddle
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn finish(p: &TiltedPotential, x: Vec<f64>, residual: f64, iterations: usize, opts: &NewtonOptions) -> Result<FixedPoint> {
    let eigenvalues = linalg::sym_eigenvalues(&p.hessian(&x)?);
    Ok(FixedPoint {
        classification: classify(&eigenvalues, opts.degeneracy),
        energy: p.energy_unchecked(&x),
        x,
        eigenvalues,
        residual,
        iterations,
    })
}

pub fn find_fixed_point(p: &TiltedPotential, seed: &[f64]) -> Result<FixedPoint> {
    find_fixed_point_with(p, seed, &NewtonOptions::default())
}

/// Damped Newton on `∇U = 0` with merit `½‖∇U‖²`. Converges to fixed
/// points of any type.
pub fn find_fixed_point_with(p: &TiltedPotential, seed: &[f64], opts: &NewtonOptions) -> Result<FixedPoint> {
    let n = p.n_vars();
    let mut x = seed.to_vec();
    let mut g = p.gradient(&x)?;
    let merit = |g: &[f64]| 0.5 * g.iter().map(|v| v * v).sum::<f64>();
    let mut trial = vec![0.0; n];
    let mut gt = vec![0.0; n];

    for iter in 0..opts.max_iter {
        let res = inf_norm(&g);
        if res < opts.tol {
            return finish(p, x, res, iter, opts);
        }
        let h = p.hessian(&x)?;
        let gv = DVector::from_column_slice(&g);
        let newton = h.clone().lu().solve(&(-&gv)).filter(|d| d.iter().all(|v| v.is_finite()));
        // Steepest descent on the merit when H is singular.
        let mut directions = Vec::with_capacity(2);
        if let Some(d) = newton {
            directions.push(d);
        }
        directions.push(-(&h * &gv));

        let m0 = merit(&g);
        let mut accepted = false;
        for d in directions {
            // Directional derivative of the merit along d.
            let slope = (&h * &gv).dot(&d);
            if slope >= 0.0 {
                continue;
            }
            let mut t = 1.0;
            while t >= opts.min_step {
                for i in 0..n {
                    trial[i] = x[i] + t * d[i];
                }
                p.gradient_into(&trial, &mut gt);
                if merit(&gt) <= m0 + opts.armijo * t * slope {
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if accepted {
                break;
            }
        }
        if !accepted {
            return Err(Error::NoConvergence { iterations: iter, residual: res });
        }
        std::mem::swap(&mut x, &mut trial);
        std::mem::swap(&mut g, &mut gt);
    }
    let res = inf_norm(&g);
    if res < opts.tol {
        return finish(p, x, res, opts.max_iter, opts);
    }
    Err(Error::NoConvergence { iterations: opts.max_iter, residual: res })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizeOptions {
    pub newton: NewtonOptions,
    /// Runaway cutoff: `‖x − seed‖_∞` beyond this many largest periods
    /// counts as sliding down the washboard.
    pub max_displacement_periods: f64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            newton: NewtonOptions { max_iter: 500, ..NewtonOptions::default() },
            max_displacement_periods: 2.0,
        }
    }
}

pub fn find_minimum(p: &TiltedPotential, seed: &[f64]) -> Result<FixedPoint> {
    find_minimum_with(p, seed, &MinimizeOptions::default())
}

/// Descent on `U` with a shifted-Hessian Newton direction. Fails with
/// `NoConvergence` when the iterate slides away, which is what happens
/// when the tilt has removed every local minimum.
pub fn find_minimum_with(p: &TiltedPotential, seed: &[f64], opts: &MinimizeOptions) -> Result<FixedPoint> {
    let n = p.n_vars();
    let o = &opts.newton;
    let limit = opts.max_displacement_periods * p.period.iter().fold(0.0f64, |m, a| m.max(*a));
    let mut x = seed.to_vec();
    let mut u = p.energy(&x)?;
    let mut g = p.gradient(&x)?;
    let mut trial = vec![0.0; n];
    let mut gt = vec![0.0; n];

    for iter in 0..o.max_iter {
        let res = inf_norm(&g);
        if res < o.tol {
            return finish(p, x, res, iter, o);
        }
        let h = p.hessian(&x)?;
        let lmin = linalg::sym_eigenvalues(&h)[0];
        let shift = if lmin > 1e-8 { 0.0 } else { 1e-3 - lmin };
        let shifted = h + DMatrix::identity(n, n) * shift;
        let gv = DVector::from_column_slice(&g);
        let d = match shifted.cholesky() {
            Some(c) => c.solve(&(-&gv)),
            None => -gv.clone(),
        };
        let slope = gv.dot(&d);
        let g2 = gv.norm_squared();
        let mut t = 1.0;
        let mut accepted = false;
        while t >= o.min_step {
            for i in 0..n {
                trial[i] = x[i] + t * d[i];
            }
            let ut = p.energy_unchecked(&trial);
            // Close to a convex minimum the decrease of U drops below its
            // rounding, so a plain Newton step is also accepted when it
            // shrinks the gradient.
            let newton_ok = shift == 0.0 && {
                p.gradient_into(&trial, &mut gt);
                gt.iter().map(|v| v * v).sum::<f64>() <= (1.0 - 2.0 * o.armijo * t) * g2
            };
            if ut <= u + o.armijo * t * slope || newton_ok {
                u = ut;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            return Err(Error::NoConvergence { iterations: iter, residual: res });
        }
        std::mem::swap(&mut x, &mut trial);
        p.gradient_into(&x, &mut g);
        if x.iter().zip(seed).any(|(a, b)| (a - b).abs() > limit) {
            return Err(Error::NoConvergence { iterations: iter + 1, residual: inf_norm(&g) });
        }
    }
    Err(Error::NoConvergence { iterations: o.max_iter, residual: inf_norm(&g) })
}

/// `k^n` seeds on a regular grid covering one period cell `[−a/2, a/2)`.
pub fn seed_grid(p: &TiltedPotential, per_axis: usize) -> Vec<Vec<f64>> {
    let n = p.n_vars();
    let total = per_axis.pow(n as u32);
    (0..total)
        .map(|mut idx| {
            (0..n)
                .map(|i| {
                    let k = idx % per_axis;
                    idx /= per_axis;
                    let a = p.period[i];
                    -a / 2.0 + a * (k as f64 + 0.5) / per_axis as f64
                })
                .collect()
        })
        .collect()
}

/// Lattice image of `x` in `[−a/2, a/2)`.
pub fn wrap_to_cell(p: &TiltedPotential, x: &[f64]) -> Vec<f64> {
    x.iter()
        .zip(p.period.iter())
        .map(|(v, a)| v - a * ((v + a / 2.0) / a).floor())
        .collect()
}

/// Fixed points reached from every seed, wrapped into the home cell and
/// deduplicated. Seeds that do not converge are skipped.
pub fn scan_fixed_points(p: &TiltedPotential, seeds: &[Vec<f64>], opts: &NewtonOptions) -> Vec<FixedPoint> {
    use rayon::prelude::*;
    let found: Vec<FixedPoint> = seeds
        .par_iter()
        .filter_map(|s| find_fixed_point_with(p, s, opts).ok())
        .collect();
    let mut unique: Vec<FixedPoint> = Vec::new();
    for mut fp in found {
        fp.x = wrap_to_cell(p, &fp.x);
        fp.energy = p.energy_unchecked(&fp.x);
        let same = |other: &FixedPoint| {
            other.x.iter().zip(&fp.x).zip(p.period.iter()).all(|((a, b), per)| {
                let d = (a - b).abs();
                d < 1e-6 || (per - d).abs() < 1e-6
            })
        };
        if !unique.iter().any(same) {
            unique.push(fp);
        }
    }
    unique.sort_by(|a, b| a.energy.total_cmp(&b.energy).then(a.x.partial_cmp(&b.x).unwrap_or(std::cmp::Ordering::Equal)));
    unique
}

/// Escape barrier of `minimum`: the lowest `U(s) − U(m')` over index-1
/// saddles `s` whose unstable direction descends into a lattice image `m'`
/// of the minimum. Saddles connected only to other basins, or whose descent
/// runs away under the tilt, are ignored.
pub fn barrier_height(p: &TiltedPotential, minimum: &FixedPoint, points: &[FixedPoint]) -> Option<f64> {
    points
        .iter()
        .filter(|s| s.classification == Classification::Saddle && s.index() == 1)
        .filter_map(|s| {
            let eig = p.hessian(&s.x).ok()?.symmetric_eigen();
            let k = (0..eig.eigenvalues.len()).min_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]))?;
            let v = eig.eigenvectors.column(k);
            [-1.0, 1.0]
                .into_iter()
                .filter_map(|sign| {
                    let start: Vec<f64> = s.x.iter().zip(v.iter()).map(|(x, d)| x + sign * BARRIER_KICK * d).collect();
                    let end = find_minimum(p, &start).ok()?;
                    let offset: Vec<f64> = end.x.iter().zip(&minimum.x).map(|(a, b)| a - b).collect();
                    let same = wrap_to_cell(p, &offset).iter().all(|d| d.abs() < 1e-6);
                    same.then(|| s.energy - end.energy)
                })
                .min_by(f64::total_cmp)
        })
        .min_by(f64::total_cmp)
}

const BARRIER_KICK: f64 = 1e-2;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::{builtin_cell, CellId};
    use crate::potential::build_potential;
    use crate::transform::derive_transform;
    use std::f64::consts::PI;

    fn half(ix: f64, iy: f64) -> TiltedPotential {
        let cell = builtin_cell(CellId::Half);
        let (_, t) = derive_transform(&cell).unwrap();
        build_potential(&cell, &t, ix, iy, 0.0).unwrap()
    }

    #[test]
    fn ground_state_from_nearby_seed() {
        let p = half(0.0, 0.0);
        let fp = find_fixed_point(&p, &[0.1, -0.1, -1.4]).unwrap();
        assert!(fp.x[0].abs() < 1e-10 && fp.x[1].abs() < 1e-10 && (fp.x[2] + PI / 2.0).abs() < 1e-10);
        assert_eq!(fp.classification, Classification::Minimum);
        assert!(fp.residual < 1e-10);
        assert!((fp.energy + 2.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn driven_minimum_sits_on_y_zero() {
        let p = half(0.4142, 0.0);
        let fp = find_fixed_point(&p, &[0.05, 0.05, -1.5]).unwrap();
        assert_eq!(fp.classification, Classification::Minimum);
        assert!(fp.x[1].abs() < 1e-10);
        let m = find_minimum(&p, &[0.3, -0.2, -1.0]).unwrap();
        assert!(m.x.iter().zip(&fp.x).all(|(a, b)| (a - b).abs() < 1e-8));
    }

    #[test]
    fn saddle_is_classified() {
        let p = half(0.0, 0.0);
        let fp = find_fixed_point(&p, &[0.3, 0.2, 1.2]).unwrap();
        assert!(fp.residual < 1e-10);
        assert_eq!(fp.classification, classify(&fp.eigenvalues, 1e-6));
        assert_ne!(fp.classification, Classification::Minimum);
    }

    #[test]
    fn classification_rules() {
        assert_eq!(classify(&[1.0, 2.0], 1e-6), Classification::Minimum);
        assert_eq!(classify(&[-1.0, 2.0], 1e-6), Classification::Saddle);
        assert_eq!(classify(&[-1.0, -2.0], 1e-6), Classification::Maximum);
        assert_eq!(classify(&[1e-9, 2.0], 1e-6), Classification::Degenerate);
    }

    #[test]
    fn minimizer_slides_above_critical_current() {
        let p = half(0.9, 0.0);
        for seed in seed_grid(&p, 3) {
            assert!(matches!(find_minimum(&p, &seed), Err(Error::NoConvergence { .. })));
        }
    }

    #[test]
    fn wrapping_and_scan() {
        let p = half(0.0, 0.0);
        let w = wrap_to_cell(&p, &[p.period[0] * 1.25, -p.period[1] * 0.75, 0.0]);
        assert!((w[0] - p.period[0] * 0.25).abs() < 1e-12);
        assert!((w[1] - p.period[1] * 0.25).abs() < 1e-12);
        let mut seeds = seed_grid(&p, 4);
        // Near the saddle at (π/√2, 0, 0).
        seeds.push(vec![2.1, 0.1, 0.1]);
        let pts = scan_fixed_points(&p, &seeds, &NewtonOptions::default());
        assert!(pts.iter().any(|f| f.classification == Classification::Saddle));
        let m = &pts[0];
        assert_eq!(m.classification, Classification::Minimum);
        assert!((m.energy + 2.0 * 2f64.sqrt()).abs() < 1e-10);
        // Untilted, the barrier through (π/√2, 0, 0) is 2√2 − 2.
        let du = barrier_height(&p, m, &pts).unwrap();
        assert!((du - (2.0 * 2f64.sqrt() - 2.0)).abs() < 1e-10, "{du}");
    }

    #[test]
    fn seed_grid_covers_cell() {
        let p = half(0.0, 0.0);
        let s = seed_grid(&p, 5);
        assert_eq!(s.len(), 125);
        assert!(s.iter().flatten().zip(std::iter::repeat(())).count() == 375);
        for x in &s {
            for (v, a) in x.iter().zip(p.period.iter()) {
                assert!(v.abs() < a / 2.0);
            }
        }
    }
}
