use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use super::{FluxIdentity, FrustrationCell};
use crate::error::Error;

/// Cells shipped with the library.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellId {
    /// `f = 1/2`, 2×2 checkerboard ground state; three variables, four phases.
    Half,
    /// `f = 1/3`, 3×3 staircase ground state; four variables, six phases.
    Third,
    /// One junction, `U = -cos x - I x`.
    SingleJunction,
}

impl FromStr for CellId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim() {
            "1/2" | "half" => Ok(CellId::Half),
            "1/3" | "third" => Ok(CellId::Third),
            "single_junction" | "single" | "0" | "0/1" => Ok(CellId::SingleJunction),
            other => Err(Error::UnsupportedFrustration(other.to_string())),
        }
    }
}

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CellId::Half => "1/2",
            CellId::Third => "1/3",
            CellId::SingleJunction => "single_junction",
        })
    }
}

pub fn builtin_cell(id: CellId) -> FrustrationCell {
    match id {
        CellId::Half => half(),
        CellId::Third => third(),
        CellId::SingleJunction => single_junction(),
    }
}

fn strings(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Noise incidence with coefficient 1/2 on consecutive blocks of junction
/// noises, one block per variable.
fn block_noise(block_sizes: &[usize]) -> DMatrix<f64> {
    let total: usize = block_sizes.iter().sum();
    let mut n = DMatrix::zeros(block_sizes.len(), total);
    let mut col = 0;
    for (row, &size) in block_sizes.iter().enumerate() {
        for _ in 0..size {
            n[(row, col)] = 0.5;
            col += 1;
        }
    }
    n
}

fn half() -> FrustrationCell {
    let s2 = 2f64.sqrt();
    // Phases (α, β, γ, κ); y = ((γ-α)/2, (κ-β)/2, -(β+κ)).
    FrustrationCell {
        name: "f=1/2".into(),
        f_num: 1,
        f_den: 2,
        coupling: 0.5,
        omega: DMatrix::from_row_slice(3, 4, &[
            -1.0, 0.0, 1.0, 0.0,
            0.0, -1.0, 0.0, 1.0,
            1.0, -1.0, 1.0, -1.0,
        ]),
        phi_dy: DMatrix::from_row_slice(3, 4, &[
            -1.0, 0.0, 1.0, 0.0,
            0.0, -1.0, 0.0, 1.0,
            0.5, -0.5, 0.5, -0.5,
        ]),
        phase_offsets_y: vec![PI / 2.0, 0.0, PI / 2.0, 0.0],
        flux_identities: vec![FluxIdentity { coefficients: vec![1.0; 4], constant: PI }],
        drive_index_x: 0,
        drive_index_y: Some(1),
        noise_incidence: block_noise(&[2, 2, 4]),
        canonical_d: Some(DMatrix::from_row_slice(3, 3, &[
            s2, 0.0, 0.0,
            0.0, s2, 0.0,
            0.0, 0.0, 1.0,
        ])),
        labels: strings(&["alpha", "beta", "gamma", "kappa"]),
        axis_names: strings(&["x", "y", "z"]),
    }
}

fn third() -> FrustrationCell {
    let s3 = 3f64.sqrt();
    let (a, b) = (2.0 / 3.0, 1.0 / 3.0);
    // Phases (α, β, β0, γ, λ, δ); y = (x, y, z, u).
    FrustrationCell {
        name: "f=1/3".into(),
        f_num: 1,
        f_den: 3,
        coupling: 0.5,
        omega: DMatrix::from_row_slice(4, 6, &[
            -1.0, 0.0, 0.0, 1.0, 0.0, -1.0,
            0.0, 1.0, -1.0, 0.0, 1.0, 0.0,
            -1.0, 1.0, 0.0, 0.0, -1.0, 1.0,
            1.0, -1.0, -1.0, 1.0, 0.0, 0.0,
        ]),
        phi_dy: DMatrix::from_row_slice(4, 6, &[
            -a, 0.0, 0.0, a, 0.0, -a,
            0.0, a, -a, 0.0, a, 0.0,
            -b, b, -b, b, -a, a,
            b, -b, -a, a, -b, b,
        ]),
        phase_offsets_y: vec![PI / 3.0, PI / 3.0, PI / 3.0, PI / 3.0, 0.0, 0.0],
        flux_identities: vec![
            // λ + γ + β0 + δ = 2π/3
            FluxIdentity { coefficients: vec![0.0, 0.0, 1.0, 1.0, 1.0, 1.0], constant: 2.0 * PI / 3.0 },
            // α + β - δ - λ = 2π/3
            FluxIdentity { coefficients: vec![1.0, 1.0, 0.0, 0.0, -1.0, -1.0], constant: 2.0 * PI / 3.0 },
        ],
        drive_index_x: 0,
        drive_index_y: Some(1),
        noise_incidence: block_noise(&[3, 3, 4, 4]),
        canonical_d: Some(DMatrix::from_row_slice(4, 4, &[
            2.0 / s3, 0.0, 0.0, 0.0,
            0.0, 2.0 / s3, 0.0, 0.0,
            0.0, 0.0, 1.0, 1.0,
            0.0, 0.0, 1.0 / s3, -1.0 / s3,
        ])),
        labels: strings(&["alpha", "beta", "beta0", "gamma", "lambda", "delta"]),
        axis_names: strings(&["x1", "x2", "x3", "x4"]),
    }
}

fn single_junction() -> FrustrationCell {
    FrustrationCell {
        name: "single_junction".into(),
        f_num: 0,
        f_den: 1,
        coupling: 1.0,
        omega: DMatrix::from_element(1, 1, 1.0),
        phi_dy: DMatrix::from_element(1, 1, 1.0),
        phase_offsets_y: vec![0.0],
        flux_identities: Vec::new(),
        drive_index_x: 0,
        drive_index_y: None,
        noise_incidence: DMatrix::from_element(1, 1, 1.0),
        canonical_d: Some(DMatrix::from_element(1, 1, 1.0)),
        labels: strings(&["phi"]),
        axis_names: strings(&["x"]),
    }
}
