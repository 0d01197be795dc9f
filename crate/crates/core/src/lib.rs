//! Construction and analysis of the multidimensional tilted washboard
//! potential of frustrated two-dimensional Josephson-junction arrays.
//!
//! The pipeline runs cell → transform → potential, after which the
//! stationary and dynamics modules analyse the landscape.

pub mod cell;
pub mod dynamics;
pub mod error;
pub mod expr;
pub mod linalg;
pub mod potential;
pub mod stationary;
pub mod transform;

pub use cell::{builtin_cell, AffineMap, CellId, FrustrationCell};
pub use error::{Error, Result};
pub use potential::{build_potential, build_potential_with, NoiseModel, TiltedPotential};
pub use transform::{derive_transform, TargetMatrix, TransformMatrix};
