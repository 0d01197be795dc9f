//! The change of variables `x = D y` that turns the cell's drift into an
//! exact gradient.
//!
//! Requiring equal mixed partials of the transformed drift gives
//! `κ DᵀD = S` with `S = Φ_∂y ωᵀ (ωωᵀ)⁻¹`; for array cells `κ = 1/2`, i.e.
//! `DᵀD = 2S`. `D` is fixed only up to a left orthogonal factor: if `D`
//! solves the equation so does `Q D` for any orthogonal `Q`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cell::{phase_map_y, AffineMap, FrustrationCell};
use crate::error::{Error, Result};
use crate::linalg;

const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Symmetry of `S`, and `a_ik` vs `∂Φ_k/∂x_i`.
    pub algebraic: f64,
    /// Symmetry of the drift Jacobian.
    pub jacobian: f64,
    /// Acceptance of a supplied canonical `D`.
    pub canonical: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { algebraic: 1e-12, jacobian: 1e-10, canonical: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetMatrix {
    pub s: DMatrix<f64>,
    /// κ of the originating cell.
    pub coupling: f64,
}

impl TargetMatrix {
    /// Right-hand side `S/κ` that `DᵀD` must equal.
    pub fn gram(&self) -> DMatrix<f64> {
        &self.s / self.coupling
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformSource {
    Canonical,
    Cholesky,
    Supplied,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformMatrix {
    pub d: DMatrix<f64>,
    pub d_inv: DMatrix<f64>,
    pub source: TransformSource,
}

impl TransformMatrix {
    /// Wrap an arbitrary invertible matrix without checking it against a
    /// target. Useful for testing the exactness verifier.
    pub fn from_matrix(d: DMatrix<f64>) -> Result<Self> {
        if !d.is_square() {
            return Err(Error::DimensionMismatch { expected: d.nrows(), found: d.ncols() });
        }
        let d_inv = d.clone().try_inverse().ok_or(Error::NotPositiveDefinite)?;
        Ok(Self { d, d_inv, source: TransformSource::Supplied })
    }

    /// `max |DᵀD − S/κ|`.
    pub fn target_residual(&self, target: &TargetMatrix) -> f64 {
        linalg::max_abs(&(self.d.transpose() * &self.d - target.gram()))
    }

    /// `max |D D⁻¹ − I|`.
    pub fn inverse_residual(&self) -> f64 {
        let n = self.d.nrows();
        linalg::max_abs(&(&self.d * &self.d_inv - DMatrix::identity(n, n)))
    }
}

pub fn compute_target(cell: &FrustrationCell) -> Result<TargetMatrix> {
    compute_target_with(cell, &Tolerances::default())
}

pub fn compute_target_with(cell: &FrustrationCell, tol: &Tolerances) -> Result<TargetMatrix> {
    let omega = &cell.omega;
    if cell.phi_dy.shape() != omega.shape() {
        return Err(Error::DimensionMismatch { expected: omega.ncols(), found: cell.phi_dy.ncols() });
    }
    let gram = omega * omega.transpose();
    let condition = linalg::spd_condition(&gram);
    if condition > MAX_CONDITION {
        return Err(Error::SingularIncidence { condition });
    }
    let gram_inv = gram.try_inverse().ok_or(Error::SingularIncidence { condition })?;
    let s = &cell.phi_dy * omega.transpose() * gram_inv;
    let asymmetry = linalg::asymmetry(&s);
    if asymmetry > tol.algebraic {
        return Err(Error::AsymmetricTarget { asymmetry });
    }
    // Symmetrize away rounding so downstream factorizations see an exact
    // symmetric matrix.
    let s = (&s + s.transpose()) * 0.5;
    Ok(TargetMatrix { s, coupling: cell.coupling })
}

/// Solve `DᵀD = S/κ`.
///
/// A supplied `canonical` matrix is verified and returned as is. Otherwise
/// `D = Lᵀ` with `L Lᵀ = S/κ` the Cholesky factor, one representative of
/// the orthogonal family of solutions.
pub fn factor_transform(target: &TargetMatrix, canonical: Option<&DMatrix<f64>>) -> Result<TransformMatrix> {
    factor_transform_with(target, canonical, &Tolerances::default())
}

pub fn factor_transform_with(
    target: &TargetMatrix,
    canonical: Option<&DMatrix<f64>>,
    tol: &Tolerances,
) -> Result<TransformMatrix> {
    let gram = target.gram();
    match canonical {
        Some(d) => {
            if d.shape() != gram.shape() {
                return Err(Error::DimensionMismatch { expected: gram.nrows(), found: d.nrows() });
            }
            let residual = linalg::max_abs(&(d.transpose() * d - &gram));
            if residual > tol.canonical {
                return Err(Error::CanonicalMismatch { residual });
            }
            let d_inv = d.clone().try_inverse().ok_or(Error::CanonicalMismatch { residual })?;
            Ok(TransformMatrix { d: d.clone(), d_inv, source: TransformSource::Canonical })
        }
        None => {
            let l = linalg::cholesky(&gram)?;
            let d = l.transpose();
            let d_inv = d.clone().try_inverse().ok_or(Error::NotPositiveDefinite)?;
            Ok(TransformMatrix { d, d_inv, source: TransformSource::Cholesky })
        }
    }
}

/// Target and transform for a cell, preferring its canonical `D`.
pub fn derive_transform(cell: &FrustrationCell) -> Result<(TargetMatrix, TransformMatrix)> {
    let target = compute_target(cell)?;
    let t = factor_transform(&target, cell.canonical_d.as_ref())?;
    Ok((target, t))
}

/// Phases as a function of `x = D y`: `Φ(x) = c + Φ_y D⁻¹ x`.
pub fn phase_map_x(cell: &FrustrationCell, t: &TransformMatrix) -> AffineMap {
    phase_map_y(cell).compose(&t.d_inv)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactnessReport {
    /// `max_{i,k} |a_ik − ∂Φ_k/∂x_i|` with `a = κ D ω`.
    pub coefficient_mismatch: f64,
    /// Largest `|∂f_i/∂x_m − ∂f_m/∂x_i|` over the sample points.
    pub x_jacobian_asymmetry: f64,
    /// Same for the untransformed drift `g_j(y)`.
    pub y_jacobian_asymmetry: f64,
    pub points: usize,
    pub passed: bool,
}

/// Drift Jacobian `J_im = Σ_k a_ik cos Φ_k B_mk`.
fn drift_jacobian(a: &DMatrix<f64>, b: &DMatrix<f64>, cos_phi: &[f64]) -> DMatrix<f64> {
    let n = a.nrows();
    DMatrix::from_fn(n, n, |i, m| (0..cos_phi.len()).map(|k| a[(i, k)] * cos_phi[k] * b[(m, k)]).sum())
}

/// Check that the transformed drift is a gradient.
///
/// The drift is evaluated at 20 pseudo-random points. The bias currents
/// are constants in the drift and drop out of its Jacobian, so the
/// Jacobians are computed in closed form from the affine phase maps.
pub fn verify_exactness(cell: &FrustrationCell, t: &TransformMatrix) -> ExactnessReport {
    verify_exactness_with(cell, t, &Tolerances::default(), 20, 0x5eed_0001)
}

pub fn verify_exactness_with(
    cell: &FrustrationCell,
    t: &TransformMatrix,
    tol: &Tolerances,
    points: usize,
    seed: u64,
) -> ExactnessReport {
    let a = &t.d * &cell.omega * cell.coupling;
    let map_x = phase_map_x(cell, t);
    let dphi_dx = map_x.jacobian.transpose();
    let coefficient_mismatch = linalg::max_abs(&(&a - &dphi_dx));

    let y_coef = &cell.omega * cell.coupling;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x_asym: f64 = 0.0;
    let mut y_asym: f64 = 0.0;
    for _ in 0..points {
        let x: Vec<f64> = (0..cell.n_vars()).map(|_| rng.random_range(-10.0..10.0)).collect();
        let cos_phi: Vec<f64> = map_x.apply(&x).iter().map(|p| p.cos()).collect();
        x_asym = x_asym.max(linalg::asymmetry(&drift_jacobian(&a, &dphi_dx, &cos_phi)));
        y_asym = y_asym.max(linalg::asymmetry(&drift_jacobian(&y_coef, &cell.phi_dy, &cos_phi)));
    }
    ExactnessReport {
        coefficient_mismatch,
        x_jacobian_asymmetry: x_asym,
        y_jacobian_asymmetry: y_asym,
        points,
        passed: coefficient_mismatch < tol.algebraic && x_asym < tol.jacobian,
    }
}
