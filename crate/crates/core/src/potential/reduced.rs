//! Two-variable reduction of the f = 1/2 potential on the invariant plane
//! `y = 0` under uniaxial drive `I_υ = 0`.
//!
//! With `ξ = (π + z)/√2` and `η = −x/√2`,
//!
//! ```text
//! U(ξ, η) = −cos(ξ/√2) cos η − sin(ξ/√2) + (I/2) η,     U_full(x, 0, z) = 2 U(ξ, η).
//! ```
//!
//! The plane `y = 0` is invariant for any current, but it only attracts
//! nearby trajectories while the transverse curvature `∂²U/∂y²` is
//! positive, which fails above the uniaxial critical current. Past that
//! point the reduced landscape is still well defined; it just no longer
//! describes the motion of the full array.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use super::TiltedPotential;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedPotential {
    pub current: f64,
}

pub fn reduced_potential_y0(current: f64) -> ReducedPotential {
    ReducedPotential { current }
}

impl ReducedPotential {
    pub fn energy(&self, xi: f64, eta: f64) -> f64 {
        let s = xi * FRAC_1_SQRT_2;
        -s.cos() * eta.cos() - s.sin() + 0.5 * self.current * eta
    }

    /// `(∂U/∂ξ, ∂U/∂η)`.
    pub fn gradient(&self, xi: f64, eta: f64) -> [f64; 2] {
        let s = xi * FRAC_1_SQRT_2;
        [
            FRAC_1_SQRT_2 * (s.sin() * eta.cos() - s.cos()),
            s.cos() * eta.sin() + 0.5 * self.current,
        ]
    }

    /// `(x, z) ↦ (ξ, η)`.
    pub fn coordinates(x: f64, z: f64) -> (f64, f64) {
        ((PI + z) * FRAC_1_SQRT_2, -x * FRAC_1_SQRT_2)
    }

    /// `(ξ, η) ↦ (x, z)`.
    pub fn full_coordinates(xi: f64, eta: f64) -> (f64, f64) {
        (-eta * SQRT_2, xi * SQRT_2 - PI)
    }

    /// Whether the plane `y = 0` still attracts, i.e. the drive is below
    /// the uniaxial critical current `2(√2 − 1)`.
    pub fn embedding_attracting(&self) -> bool {
        self.current.abs() < 2.0 * (SQRT_2 - 1.0)
    }

    /// `|U_full(x, 0, z) − 2 U(ξ, η)|`. The full potential must be the
    /// f = 1/2 landscape at currents `(I, 0)`.
    pub fn embedding_residual(&self, full: &TiltedPotential, x: f64, z: f64) -> Result<f64> {
        if full.n_vars() != 3 {
            return Err(Error::DimensionMismatch { expected: 3, found: full.n_vars() });
        }
        if full.currents != (self.current, 0.0) {
            return Err(Error::InvalidArgument(format!(
                "reduced potential at I = {} needs the full potential at currents ({}, 0), got {:?}",
                self.current, self.current, full.currents
            )));
        }
        let (xi, eta) = Self::coordinates(x, z);
        Ok((full.energy(&[x, 0.0, z])? - 2.0 * self.energy(xi, eta)).abs())
    }
}
