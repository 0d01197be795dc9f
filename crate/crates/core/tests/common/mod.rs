#![allow(dead_code)]

use nalgebra::DMatrix;
use washboard_core::dynamics::Trajectory;
use washboard_core::{build_potential, builtin_cell, derive_transform, CellId, TiltedPotential};

pub fn potential(id: CellId, ix: f64, iy: f64, omega: f64) -> TiltedPotential {
    let cell = builtin_cell(id);
    let (_, t) = derive_transform(&cell).unwrap();
    build_potential(&cell, &t, ix, iy, omega).unwrap()
}

/// Central differences of `U`.
pub fn fd_gradient(p: &TiltedPotential, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let mut a = x.to_vec();
            let mut b = x.to_vec();
            a[i] += h;
            b[i] -= h;
            (p.energy(&a).unwrap() - p.energy(&b).unwrap()) / (2.0 * h)
        })
        .collect()
}

/// Central second differences of `U`.
pub fn fd_hessian(p: &TiltedPotential, x: &[f64], h: f64) -> DMatrix<f64> {
    let n = x.len();
    let u = |d: &[(usize, f64)]| {
        let mut y = x.to_vec();
        for &(i, s) in d {
            y[i] += s;
        }
        p.energy(&y).unwrap()
    };
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            (u(&[(i, h)]) - 2.0 * u(&[]) + u(&[(i, -h)])) / (h * h)
        } else {
            (u(&[(i, h), (j, h)]) - u(&[(i, h), (j, -h)]) - u(&[(i, -h), (j, h)]) + u(&[(i, -h), (j, -h)])) / (4.0 * h * h)
        }
    })
}

/// Sample covariance of a list of vectors.
pub fn covariance(samples: &[Vec<f64>]) -> DMatrix<f64> {
    let n = samples[0].len();
    let m = samples.len() as f64;
    let mean: Vec<f64> = (0..n).map(|i| samples.iter().map(|s| s[i]).sum::<f64>() / m).collect();
    DMatrix::from_fn(n, n, |i, j| {
        samples.iter().map(|s| (s[i] - mean[i]) * (s[j] - mean[j])).sum::<f64>() / (m - 1.0)
    })
}

/// Frame-to-frame increments of a trajectory.
pub fn increments(traj: &Trajectory) -> Vec<Vec<f64>> {
    traj.positions
        .windows(2)
        .map(|w| w[1].iter().zip(&w[0]).map(|(a, b)| a - b).collect())
        .collect()
}

/// Worst entrywise mismatch, each entry scaled by `sqrt(E_ii E_jj)`.
pub fn scaled_mismatch(sample: &DMatrix<f64>, expected: &DMatrix<f64>) -> f64 {
    let n = expected.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let scale = (expected[(i, i)] * expected[(j, j)]).sqrt();
            worst = worst.max((sample[(i, j)] - expected[(i, j)]).abs() / scale);
        }
    }
    worst
}

pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
