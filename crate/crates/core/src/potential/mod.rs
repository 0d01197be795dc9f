//! The deterministic tilted washboard potential in the transformed
//! variables `x`:
//!
//! ```text
//! U(x) = −Σ_k cos Φ_k(x) − g·x = U_0(x) − g·x
//! ```
//!
//! with `Φ` affine in `x`, tilt `g = κ (I_χ D e_jx + I_υ D e_jy)` and `U_0`
//! periodic on the lattice spanned by the axis periods `a_i`. Energies are
//! in units of `E_J`, currents in units of the junction critical current.
//!
//! The stochastic forcing is not part of `U`; it is carried as the
//! covariance `noise_cov` of the white-noise force in `x` and applied by
//! the dynamics.

mod reduced;
mod slice;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::cell::{AffineMap, FrustrationCell};
use crate::error::{Error, Result};
use crate::transform::{phase_map_x, TransformMatrix};

pub use reduced::{reduced_potential_y0, ReducedPotential};
pub use slice::{slice_grid, SliceAxis, SliceGrid, SliceMetadata, SliceSpec};

/// How the white-noise covariance in `x` is assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    /// `Ω² (D N)(D N)ᵀ` from the cell's noise incidence `N`.
    #[default]
    AsWritten,
    /// `Ω² I`, the covariance that balances the isotropic unit damping.
    Isotropic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TiltedPotential {
    pub cell_name: String,
    pub axis_names: Vec<String>,
    /// `x ↦ Φ`.
    pub phase_map: AffineMap,
    /// Tilt vector `g`.
    pub drive: DVector<f64>,
    /// Axis periods `a_i` of `U_0`.
    pub period: DVector<f64>,
    pub noise_cov: DMatrix<f64>,
    /// `(I_χ, I_υ)` in units of the junction critical current.
    pub currents: (f64, f64),
    /// `Ω = sqrt(2 k_B T / E_J)`.
    pub omega_noise: f64,
    pub noise_model: NoiseModel,
    /// `∂g/∂I_χ` and `∂g/∂I_υ`.
    drive_basis: [DVector<f64>; 2],
}

/// `U = U_0 − g·x` split into its tilt and period.
#[derive(Debug, Clone, PartialEq)]
pub struct TiltDecomposition {
    pub drive: DVector<f64>,
    pub period: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSample {
    pub x: Vec<f64>,
    pub energy: f64,
    pub gradient: Vec<f64>,
    pub hessian: DMatrix<f64>,
}

/// Smallest positive `t` such that `t · c ∈ 2πℤ` for every coefficient `c`
/// in the column.
fn axis_period(coefficients: impl Iterator<Item = f64>) -> Option<f64> {
    let c: Vec<f64> = coefficients.map(f64::abs).filter(|v| *v > 1e-14).collect();
    let cmin = c.iter().copied().fold(f64::INFINITY, f64::min);
    if !cmin.is_finite() {
        return None;
    }
    (1..=240).find_map(|n| {
        let unit = cmin / n as f64;
        c.iter()
            .all(|v| {
                let q = v / unit;
                (q - q.round()).abs() < 1e-9 * q.max(1.0)
            })
            .then(|| 2.0 * std::f64::consts::PI / unit)
    })
}

pub fn build_potential(cell: &FrustrationCell, t: &TransformMatrix, i_x: f64, i_y: f64, omega_noise: f64) -> Result<TiltedPotential> {
    build_potential_with(cell, t, i_x, i_y, omega_noise, NoiseModel::AsWritten)
}

pub fn build_potential_with(
    cell: &FrustrationCell,
    t: &TransformMatrix,
    i_x: f64,
    i_y: f64,
    omega_noise: f64,
    noise_model: NoiseModel,
) -> Result<TiltedPotential> {
    let n = cell.n_vars();
    if t.d.nrows() != n {
        return Err(Error::DimensionMismatch { expected: n, found: t.d.nrows() });
    }
    let phase_map = phase_map_x(cell, t);
    let period = (0..n)
        .map(|i| axis_period(phase_map.jacobian.column(i).iter().copied()).ok_or(Error::Incommensurate { axis: i }))
        .collect::<Result<Vec<_>>>()?;

    let bx = t.d.column(cell.drive_index_x) * cell.coupling;
    let by = match cell.drive_index_y {
        Some(j) => t.d.column(j) * cell.coupling,
        None => DVector::zeros(n),
    };
    let drive_basis = [bx.into_owned(), by.into_owned()];

    let noise_cov = match noise_model {
        NoiseModel::AsWritten => {
            let dn = &t.d * &cell.noise_incidence;
            &dn * dn.transpose() * (omega_noise * omega_noise)
        }
        NoiseModel::Isotropic => DMatrix::identity(n, n) * (omega_noise * omega_noise),
    };

    Ok(TiltedPotential {
        cell_name: cell.name.clone(),
        axis_names: cell.axis_names.clone(),
        phase_map,
        drive: &drive_basis[0] * i_x + &drive_basis[1] * i_y,
        period: DVector::from_vec(period),
        noise_cov,
        currents: (i_x, i_y),
        omega_noise,
        noise_model,
        drive_basis,
    })
}

impl TiltedPotential {
    pub fn n_vars(&self) -> usize {
        self.phase_map.n_inputs()
    }

    pub fn n_phases(&self) -> usize {
        self.phase_map.n_outputs()
    }

    /// Same landscape at different bias currents.
    pub fn with_currents(&self, i_x: f64, i_y: f64) -> TiltedPotential {
        let mut p = self.clone();
        p.drive = &self.drive_basis[0] * i_x + &self.drive_basis[1] * i_y;
        p.currents = (i_x, i_y);
        p
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_vars() {
            return Err(Error::DimensionMismatch { expected: self.n_vars(), found: x.len() });
        }
        Ok(())
    }

    #[inline]
    fn phase(&self, k: usize, x: &[f64]) -> f64 {
        let jac = &self.phase_map.jacobian;
        self.phase_map.offsets[k] + x.iter().enumerate().map(|(i, xi)| jac[(k, i)] * xi).sum::<f64>()
    }

    /// `U_0(x) = −Σ cos Φ_k(x)`; no dimension check.
    pub fn periodic_part_unchecked(&self, x: &[f64]) -> f64 {
        -(0..self.n_phases()).map(|k| self.phase(k, x).cos()).sum::<f64>()
    }

    /// `U(x)`; no dimension check.
    pub fn energy_unchecked(&self, x: &[f64]) -> f64 {
        self.periodic_part_unchecked(x) - self.drive.iter().zip(x).map(|(g, xi)| g * xi).sum::<f64>()
    }

    /// `∇U(x)` written into `out`; no dimension check.
    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, g) in out.iter_mut().zip(self.drive.iter()) {
            *o = -g;
        }
        let jac = &self.phase_map.jacobian;
        for k in 0..self.n_phases() {
            let s = self.phase(k, x).sin();
            for (i, o) in out.iter_mut().enumerate() {
                *o += jac[(k, i)] * s;
            }
        }
    }

    pub fn energy(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.energy_unchecked(x))
    }

    pub fn periodic_part(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.periodic_part_unchecked(x))
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let mut out = vec![0.0; x.len()];
        self.gradient_into(x, &mut out);
        Ok(out)
    }

    /// `H = A diag(cos Φ) Aᵀ` with `A_ik = ∂Φ_k/∂x_i`; exactly symmetric.
    pub fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_dim(x)?;
        let n = self.n_vars();
        let jac = &self.phase_map.jacobian;
        let mut h = DMatrix::zeros(n, n);
        for k in 0..self.n_phases() {
            let c = self.phase(k, x).cos();
            for i in 0..n {
                for j in i..n {
                    h[(i, j)] += jac[(k, i)] * c * jac[(k, j)];
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                h[(i, j)] = h[(j, i)];
            }
        }
        Ok(h)
    }

    pub fn sample(&self, x: &[f64]) -> Result<PotentialSample> {
        Ok(PotentialSample {
            x: x.to_vec(),
            energy: self.energy(x)?,
            gradient: self.gradient(x)?,
            hessian: self.hessian(x)?,
        })
    }

    pub fn tilt_decompose(&self) -> TiltDecomposition {
        TiltDecomposition { drive: self.drive.clone(), period: self.period.clone() }
    }

    /// Period vector `a = Σ a_i e_i`.
    pub fn period_vector(&self) -> Vec<f64> {
        self.period.iter().copied().collect()
    }

    pub fn phases(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        Ok(self.phase_map.apply(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::{builtin_cell, CellId};
    use crate::linalg;
    use crate::transform::derive_transform;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn potential(id: CellId, ix: f64, iy: f64, omega: f64) -> TiltedPotential {
        let cell = builtin_cell(id);
        let (_, t) = derive_transform(&cell).unwrap();
        build_potential(&cell, &t, ix, iy, omega).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn half_period_and_drive() {
        let p = potential(CellId::Half, 0.3, -0.2, 0.0);
        let s2 = 2f64.sqrt();
        assert!(close(&p.period_vector(), &[4.0 * PI / s2, 4.0 * PI / s2, 4.0 * PI], 1e-12));
        assert!(close(p.drive.as_slice(), &[0.3 / s2, -0.2 / s2, 0.0], 1e-15));
    }

    #[test]
    fn third_period_from_phase_map() {
        // Lattice of the x phase map; the third period is 4π.
        let p = potential(CellId::Third, 0.0, 0.0, 0.0);
        let k = 2.0 * PI / 3f64.sqrt();
        assert!(close(&p.period_vector(), &[3.0 * k, 3.0 * k, 2.0 * 3f64.sqrt() * k, 6.0 * k], 1e-12));
        let p = potential(CellId::Third, 0.5, 0.25, 0.0);
        let s3 = 3f64.sqrt();
        assert!(close(p.drive.as_slice(), &[0.5 / s3, 0.25 / s3, 0.0, 0.0], 1e-15));
    }

    #[test]
    fn zero_current_means_no_tilt() {
        let p = potential(CellId::Half, 0.0, 0.0, 0.0);
        assert!(p.drive.iter().all(|g| *g == 0.0));
        let x = [0.4, -1.0, 2.0];
        assert_eq!(p.energy(&x).unwrap(), p.periodic_part(&x).unwrap());
    }

    #[test]
    fn noise_covariances() {
        let p = potential(CellId::Half, 0.0, 0.0, 0.2);
        let expect = DMatrix::identity(3, 3) * 0.04;
        assert!(linalg::max_abs(&(&p.noise_cov - &expect)) < 1e-15);

        let p = potential(CellId::Third, 0.0, 0.0, 1.0);
        let expect = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 2.0, 2.0 / 3.0]));
        assert!(linalg::max_abs(&(&p.noise_cov - &expect)) < 1e-14);

        let cell = builtin_cell(CellId::Third);
        let (_, t) = derive_transform(&cell).unwrap();
        let p = build_potential_with(&cell, &t, 0.0, 0.0, 0.5, NoiseModel::Isotropic).unwrap();
        assert!(linalg::max_abs(&(&p.noise_cov - DMatrix::identity(4, 4) * 0.25)) < 1e-15);
    }

    #[test]
    fn half_energy_values() {
        let p = potential(CellId::Half, 0.0, 0.0, 0.0);
        assert!((p.energy(&[0.0, 0.0, 0.0]).unwrap() + 2.0).abs() < 1e-15);
        assert!((p.energy(&[0.0, 0.0, -PI / 2.0]).unwrap() + 2.0 * 2f64.sqrt()).abs() < 1e-15);

        let p = potential(CellId::Half, 0.5, 0.0, 0.0);
        let u = p.energy(&[2.0 * PI * 2f64.sqrt(), 0.0, 0.0]).unwrap();
        assert!((u - (-2.0 - 2.0 * PI * 0.5)).abs() < 1e-12);
    }

    #[test]
    fn half_gradient_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s2 = 2f64.sqrt();
        for _ in 0..50 {
            let (ix, iy) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let p = potential(CellId::Half, ix, iy, 0.0);
            let (x, y, z): (f64, f64, f64) = (rng.random_range(-6.0..6.0), rng.random_range(-6.0..6.0), rng.random_range(-6.0..6.0));
            let expect = [
                -s2 * (z / 2.0).sin() * (x / s2).sin() - ix / s2,
                s2 * (z / 2.0).cos() * (y / s2).sin() - iy / s2,
                (z / 2.0).cos() * (x / s2).cos() + (z / 2.0).sin() * (y / s2).cos(),
            ];
            assert!(close(&p.gradient(&[x, y, z]).unwrap(), &expect, 1e-13));
        }
        let p = potential(CellId::Half, 0.0, 0.0, 0.0);
        assert!(close(&p.gradient(&[0.0, 0.0, -PI / 2.0]).unwrap(), &[0.0; 3], 1e-15));
    }

    #[test]
    fn third_gradient_vanishes_at_origin() {
        let p = potential(CellId::Third, 0.0, 0.0, 0.0);
        assert!(close(&p.gradient(&[0.0; 4]).unwrap(), &[0.0; 4], 1e-15));
    }

    #[test]
    fn hessian_is_symmetric_and_positive_at_ground_state() {
        let p = potential(CellId::Half, 0.0, 0.0, 0.0);
        let h = p.hessian(&[0.0, 0.0, -PI / 2.0]).unwrap();
        assert_eq!(h, h.transpose());
        assert!(linalg::sym_eigenvalues(&h)[0] > 0.0);
        let h = p.hessian(&[1.3, -0.4, 2.2]).unwrap();
        assert_eq!(h, h.transpose());
    }

    #[test]
    fn dimension_is_checked() {
        let p = potential(CellId::Half, 0.0, 0.0, 0.0);
        assert_eq!(p.energy(&[0.0; 2]), Err(Error::DimensionMismatch { expected: 3, found: 2 }));
        assert!(p.gradient(&[0.0; 4]).is_err());
        assert!(p.hessian(&[]).is_err());
    }

    #[test]
    fn with_currents_rebuilds_tilt() {
        let a = potential(CellId::Third, 0.2, 0.7, 0.1);
        let b = potential(CellId::Third, 0.0, 0.0, 0.1).with_currents(0.2, 0.7);
        assert!(close(a.drive.as_slice(), b.drive.as_slice(), 1e-16));
        assert_eq!(a.currents, b.currents);
    }

    #[test]
    fn single_junction_is_textbook_washboard() {
        let p = potential(CellId::SingleJunction, 0.4, 0.0, 0.0);
        for x in [-2.0, 0.1, 3.3] {
            assert!((p.energy(&[x]).unwrap() - (-x.cos() - 0.4 * x)).abs() < 1e-15);
        }
        assert!(close(&p.period_vector(), &[2.0 * PI], 1e-14));
    }

    #[test]
    fn axis_period_detects_incommensurate() {
        assert!(axis_period([1.0, 2f64.sqrt()].into_iter()).is_none());
        assert!(axis_period([0.0, 0.0].into_iter()).is_none());
        let a = axis_period([0.5, 1.0 / 3.0].into_iter()).unwrap();
        assert!((a - 12.0 * PI).abs() < 1e-12);
    }
}
