//! Frustration unit cells: incidence data that fully determines the
//! washboard potential of a current-biased array.
//!
//! A cell is pure data. The phases `Φ_k` of the cell are affine in the
//! independent variables `y_j`:
//!
//! ```text
//! Φ_k(y) = c_k + Σ_j (phi_dy)_{jk} y_j
//! ```
//!
//! and the equations of motion are
//! `β_c y_j'' + y_j' + κ Σ_k ω_{jk} sin Φ_k − κ I_χ δ_{j,jx} − κ I_υ δ_{j,jy} + noise = 0`
//! with coupling `κ = 1/2` for array cells.

mod builtin;
mod text;
mod validate;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use builtin::{builtin_cell, CellId};
pub use text::{parse_cell, write_cell};
pub use validate::{validate_cell, CheckResult, ValidationReport};

/// `Σ_k w_k Φ_k ≡ constant`, identically in the cell variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxIdentity {
    pub coefficients: Vec<f64>,
    pub constant: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrustrationCell {
    pub name: String,
    /// Frustration `f = f_num / f_den`; the single junction uses `0/1`.
    pub f_num: u32,
    pub f_den: u32,
    /// Prefactor κ of the `sin Φ` sums and of the drive currents.
    pub coupling: f64,
    /// `n_vars × n_phases`, entries in {-1, 0, 1}.
    pub omega: DMatrix<f64>,
    /// `n_vars × n_phases`, `(phi_dy)_{jk} = ∂Φ_k/∂y_j`.
    pub phi_dy: DMatrix<f64>,
    pub phase_offsets_y: Vec<f64>,
    pub flux_identities: Vec<FluxIdentity>,
    pub drive_index_x: usize,
    pub drive_index_y: Option<usize>,
    /// `n_vars × n_noise`; maps independent unit junction noises onto the
    /// y-equations.
    pub noise_incidence: DMatrix<f64>,
    pub canonical_d: Option<DMatrix<f64>>,
    /// Phase names, one per column of `omega`.
    pub labels: Vec<String>,
    /// Names of the transformed variables `x_i`, used for slicing and export.
    pub axis_names: Vec<String>,
}

impl FrustrationCell {
    pub fn n_vars(&self) -> usize {
        self.omega.nrows()
    }

    pub fn n_phases(&self) -> usize {
        self.omega.ncols()
    }

    pub fn frustration(&self) -> (u32, u32) {
        (self.f_num, self.f_den)
    }

    /// Resolve an axis by name or by 1-based index.
    pub fn axis_index(&self, name: &str) -> Option<usize> {
        let name = name.trim();
        if let Some(i) = self.axis_names.iter().position(|a| a == name) {
            return Some(i);
        }
        match name.parse::<usize>() {
            Ok(i) if (1..=self.n_vars()).contains(&i) => Some(i - 1),
            _ => None,
        }
    }
}

/// `v ↦ offsets + jacobian · v`, mapping cell variables to the phases.
/// `jacobian` is `n_phases × n_vars`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    pub jacobian: DMatrix<f64>,
    pub offsets: DVector<f64>,
}

impl AffineMap {
    pub fn n_inputs(&self) -> usize {
        self.jacobian.ncols()
    }

    pub fn n_outputs(&self) -> usize {
        self.jacobian.nrows()
    }

    /// Evaluate the map. Panics if `v` has the wrong length.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n_inputs(), "affine map input dimension");
        (0..self.n_outputs())
            .map(|k| self.offsets[k] + (0..v.len()).map(|i| self.jacobian[(k, i)] * v[i]).sum::<f64>())
            .collect()
    }

    /// Same map expressed in variables `w` with `v = m · w`.
    pub fn compose(&self, m: &DMatrix<f64>) -> AffineMap {
        AffineMap { jacobian: &self.jacobian * m, offsets: self.offsets.clone() }
    }
}

/// Phases as a function of the cell variables `y`.
pub fn phase_map_y(cell: &FrustrationCell) -> AffineMap {
    AffineMap {
        jacobian: cell.phi_dy.transpose(),
        offsets: DVector::from_column_slice(&cell.phase_offsets_y),
    }
}
