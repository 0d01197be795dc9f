//! Pinned-phase boundary of the f = 1/2 cell in the `(I_χ, I_υ)` plane,
//! parametrized by `R = I_υ/I_χ ∈ [0, 1]`.
//!
//! Two independent routes: the discriminant of the boundary cubic, tracked
//! from the closed-form root at `R = 1` toward `R = 0`, and continuation of
//! the local minimum along the ray `(I, R I)` until it disappears.

use std::f64::consts::SQRT_2;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cubic::{boundary_cubic, cos_2q, is_physical};
use super::{find_minimum_with, Classification, FixedPoint, MinimizeOptions};
use crate::cell::{builtin_cell, CellId};
use crate::error::{Error, Result};
use crate::potential::{build_potential, TiltedPotential};
use crate::transform::derive_transform;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMethod {
    Discriminant,
    Continuation,
}

impl std::fmt::Display for BoundaryMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BoundaryMethod::Discriminant => "discriminant",
            BoundaryMethod::Continuation => "continuation",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySample {
    pub r: f64,
    pub i_max: f64,
    /// `‖∇U‖_∞` at `point` and currents `(I_max, R I_max)`.
    pub residual: f64,
    /// Stationary point on the boundary.
    pub point: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PinnedBoundaryCurve {
    pub method: BoundaryMethod,
    /// Sorted by `r`.
    pub samples: Vec<BoundarySample>,
}

impl PinnedBoundaryCurve {
    pub fn is_monotone(&self, slack: f64) -> bool {
        self.samples.windows(2).all(|w| w[1].i_max >= w[0].i_max - slack)
    }

    pub fn i_max_at(&self, r: f64) -> Option<f64> {
        self.samples.iter().find(|s| s.r == r).map(|s| s.i_max)
    }

    /// Rows `R,I_max,method,residual`; writes a header when asked.
    pub fn write_csv<W: Write>(&self, mut w: W, header: bool) -> io::Result<()> {
        if header {
            writeln!(w, "R,I_max,method,residual")?;
        }
        for s in &self.samples {
            writeln!(w, "{:.16e},{:.16e},{},{:.16e}", s.r, s.i_max, self.method, s.residual)?;
        }
        Ok(())
    }
}

/// `n` uniform points on `[0, 1]`.
pub fn uniform_r_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|k| if k + 1 == n { 1.0 } else { k as f64 / (n - 1) as f64 }).collect(),
    }
}

fn half_potential() -> Result<TiltedPotential> {
    let cell = builtin_cell(CellId::Half);
    let (_, t) = derive_transform(&cell)?;
    build_potential(&cell, &t, 0.0, 0.0, 0.0)
}

fn check_grid(r_grid: &[f64]) -> Result<()> {
    match r_grid.iter().find(|r| !(0.0..=1.0).contains(*r)) {
        Some(r) => Err(Error::InvalidArgument(format!("R = {r} outside [0, 1]"))),
        None => Ok(()),
    }
}

/// Stationary point on the boundary from the physical double root `c`.
fn point_from_root(c: f64, r: f64) -> Vec<f64> {
    let p = c.clamp(-1.0, 1.0).acos() / 2.0;
    let q = (r * (2.0 * p).sin()).clamp(-1.0, 1.0).asin() / 2.0;
    let norm = (p.cos().powi(2) + q.cos().powi(2)).sqrt();
    let z = 2.0 * (-p.cos() / norm).atan2(q.cos() / norm);
    vec![p * SQRT_2, q * SQRT_2, z]
}

const SEARCH_LO: f64 = 0.3;
const SEARCH_HI: f64 = 1.2;

fn has_physical_root(i: f64, r: f64) -> bool {
    boundary_cubic(i, r).real_roots().iter().any(|c| is_physical(*c, i, 1e-9))
}

/// Boundary by locating the discriminant sign change of the boundary cubic
/// to `1e−10` in `I_χ`. Ratios are processed from large to small so each
/// bracket starts at the previous boundary value.
pub fn pinned_boundary(r_grid: &[f64]) -> Result<PinnedBoundaryCurve> {
    check_grid(r_grid)?;
    let p = half_potential()?;
    let mut order: Vec<usize> = (0..r_grid.len()).collect();
    order.sort_by(|a, b| r_grid[*b].total_cmp(&r_grid[*a]));

    let disc = |i: f64, r: f64| boundary_cubic(i, r).discriminant();
    let mut samples = Vec::with_capacity(r_grid.len());
    let mut previous = 1.0;
    for idx in order {
        let r = r_grid[idx];
        let lost = || Error::RootBranchLost { r };
        let (mut lo, mut hi) = ((previous - 0.02f64).max(SEARCH_LO), (previous + 1e-3f64).min(SEARCH_HI));
        while disc(lo, r) <= 0.0 {
            if lo <= SEARCH_LO {
                return Err(lost());
            }
            lo = (lo - 0.05).max(SEARCH_LO);
        }
        while disc(hi, r) > 0.0 {
            if hi >= SEARCH_HI {
                return Err(lost());
            }
            hi = (hi + 0.05).min(SEARCH_HI);
        }
        if !has_physical_root(lo, r) {
            return Err(lost());
        }
        while hi - lo > 1e-10 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if disc(mid, r) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let i_max = 0.5 * (lo + hi);
        let c = boundary_cubic(i_max, r).double_root();
        if !((-1.0..=1.0).contains(&c) && cos_2q(c, i_max) >= -1e-6) {
            return Err(lost());
        }
        let point = point_from_root(c, r);
        let residual = p
            .with_currents(i_max, r * i_max)
            .gradient(&point)?
            .iter()
            .fold(0.0f64, |m, g| m.max(g.abs()));
        samples.push(BoundarySample { r, i_max, residual, point });
        previous = i_max;
    }
    samples.sort_by(|a, b| a.r.total_cmp(&b.r));
    Ok(PinnedBoundaryCurve { method: BoundaryMethod::Discriminant, samples })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuationOptions {
    /// Current increment along the ray before bisection starts.
    pub step: f64,
    /// Final bracket width in `I_χ`.
    pub tol: f64,
    /// Give up beyond this current.
    pub max_current: f64,
    pub minimize: MinimizeOptions,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        ContinuationOptions { step: 0.01, tol: 1e-6, max_current: 2.0, minimize: MinimizeOptions::default() }
    }
}

fn stable(p: &TiltedPotential, seed: &[f64], opts: &MinimizeOptions) -> Option<FixedPoint> {
    find_minimum_with(p, seed, opts)
        .ok()
        .filter(|m| matches!(m.classification, Classification::Minimum | Classification::Degenerate))
}

fn continue_along_ray(p: &TiltedPotential, r: f64, opts: &ContinuationOptions) -> Result<BoundarySample> {
    let ground = vec![0.0, 0.0, -std::f64::consts::FRAC_PI_2];
    let mut best = stable(&p.with_currents(0.0, 0.0), &ground, &opts.minimize).ok_or(Error::NoConvergence {
        iterations: opts.minimize.newton.max_iter,
        residual: f64::NAN,
    })?;
    let mut lo = 0.0;
    let mut hi = None;
    while lo < opts.max_current {
        let i = lo + opts.step;
        match stable(&p.with_currents(i, r * i), &best.x, &opts.minimize) {
            Some(m) => {
                best = m;
                lo = i;
            }
            None => {
                hi = Some(i);
                break;
            }
        }
    }
    let mut hi = hi.ok_or_else(|| Error::InvalidArgument(format!("no loss of stability below I = {} at R = {r}", opts.max_current)))?;
    while hi - lo > opts.tol {
        let mid = 0.5 * (lo + hi);
        match stable(&p.with_currents(mid, r * mid), &best.x, &opts.minimize) {
            Some(m) => {
                best = m;
                lo = mid;
            }
            None => hi = mid,
        }
    }
    Ok(BoundarySample { r, i_max: lo, residual: best.residual, point: best.x })
}

/// Boundary as the largest current on each ray `(I, R I)` at which a
/// local minimum still exists, followed from the zero-current ground
/// state.
pub fn pinned_boundary_continuation(r_grid: &[f64]) -> Result<PinnedBoundaryCurve> {
    pinned_boundary_continuation_with(r_grid, &ContinuationOptions::default())
}

pub fn pinned_boundary_continuation_with(r_grid: &[f64], opts: &ContinuationOptions) -> Result<PinnedBoundaryCurve> {
    check_grid(r_grid)?;
    let p = half_potential()?;
    let mut samples = r_grid
        .par_iter()
        .map(|&r| continue_along_ray(&p, r, opts))
        .collect::<Result<Vec<_>>>()?;
    samples.sort_by(|a, b| a.r.total_cmp(&b.r));
    Ok(PinnedBoundaryCurve { method: BoundaryMethod::Continuation, samples })
}
