//! Stationarity of the f = 1/2 potential. With `p = x/√2`, `q = y/√2`
//! the gradient components are
//!
//! ```text
//! −√2 sin(z/2) sin p − I_χ/√2,
//!  √2 cos(z/2) sin q − I_υ/√2,
//!     cos(z/2) cos p + sin(z/2) cos q.
//! ```
//!
//! Eliminating `z` gives `I_υ sin 2p = I_χ sin 2q` and the current
//! relation
//!
//! ```text
//! I_χ = sin 2p / sqrt(½(1 + sqrt(1 − R² sin² 2p)) + cos² p),   R = I_υ/I_χ,
//! ```
//!
//! on the branch `cos 2q ≥ 0`. At `R = 0` it reduces to
//! `sin(√2 x)/sqrt(1 + cos²(x/√2))`, whose maximum is the uniaxial
//! critical current.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use serde::{Deserialize, Serialize};

/// Gradient of the f = 1/2 potential at `x = (x, y, z)`, written out.
pub fn stationary_residuals(x: &[f64; 3], i_x: f64, i_y: f64) -> [f64; 3] {
    let (p, q, h) = (x[0] * FRAC_1_SQRT_2, x[1] * FRAC_1_SQRT_2, x[2] / 2.0);
    [
        -SQRT_2 * h.sin() * p.sin() - i_x * FRAC_1_SQRT_2,
        SQRT_2 * h.cos() * q.sin() - i_y * FRAC_1_SQRT_2,
        h.cos() * p.cos() + h.sin() * q.cos(),
    ]
}

/// Residuals of the algebraic relations that any stationary point should
/// satisfy, evaluated at a candidate point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuxiliaryCheck {
    /// `sin(z/2) cos q + cos(z/2) cos p`, the cleared form of
    /// `tan(z/2) = −cos p / cos q`.
    pub tan_relation: f64,
    /// `I_υ sin 2p − I_χ sin 2q`, implied by the stationarity equations.
    pub current_ratio: f64,
    /// `sin p / sin q − (I_υ/I_χ)²`. This squared-ratio form does not
    /// follow from stationarity; it is kept so the mismatch can be shown.
    pub squared_ratio_form: f64,
    /// `I(p, R) − I_χ` from the current relation; `None` off the branch
    /// `cos 2q ≥ 0` or at `I_χ = 0`.
    pub current_relation: Option<f64>,
}

pub fn auxiliary_check(x: &[f64; 3], i_x: f64, i_y: f64) -> AuxiliaryCheck {
    let (p, q, h) = (x[0] * FRAC_1_SQRT_2, x[1] * FRAC_1_SQRT_2, x[2] / 2.0);
    let current_relation = if i_x != 0.0 && (2.0 * q).cos() >= -1e-12 {
        relation_current(p, i_y / i_x).map(|i| i - i_x)
    } else {
        None
    };
    AuxiliaryCheck {
        tan_relation: h.sin() * q.cos() + h.cos() * p.cos(),
        current_ratio: i_y * (2.0 * p).sin() - i_x * (2.0 * q).sin(),
        squared_ratio_form: p.sin() / q.sin() - (i_y / i_x).powi(2),
        current_relation,
    }
}

/// `I_χ` as a function of `p = x/√2` at fixed ratio `R`; `None` where
/// `R² sin² 2p > 1`.
pub fn relation_current(p: f64, r: f64) -> Option<f64> {
    let s = (2.0 * p).sin();
    let disc = 1.0 - r * r * s * s;
    if disc < 0.0 {
        return None;
    }
    Some(s / (0.5 * (1.0 + disc.sqrt()) + p.cos().powi(2)).sqrt())
}

/// Uniaxial relation `sin(√2 x)/sqrt(1 + cos²(x/√2))`.
pub fn uniaxial_relation(x: f64) -> f64 {
    let p = x * FRAC_1_SQRT_2;
    (2.0 * p).sin() / (1.0 + p.cos().powi(2)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalCurrent {
    pub x_crit: f64,
    pub z_crit: f64,
    pub i_crit: f64,
    /// Maximizer of the uniaxial relation, found numerically.
    pub x_crit_numeric: f64,
    pub z_crit_numeric: f64,
    pub i_crit_numeric: f64,
}

impl CriticalCurrent {
    pub fn point(&self) -> [f64; 3] {
        [self.x_crit, 0.0, self.z_crit]
    }

    /// Largest gap between closed form and numeric maximization.
    pub fn discrepancy(&self) -> f64 {
        (self.x_crit - self.x_crit_numeric)
            .abs()
            .max((self.z_crit - self.z_crit_numeric).abs())
            .max((self.i_crit - self.i_crit_numeric).abs())
    }
}

/// `I_crit = sqrt(2√2)·sqrt(3√2 − 4)`.
pub fn critical_current_closed_form() -> f64 {
    (2.0 * SQRT_2).sqrt() * (3.0 * SQRT_2 - 4.0).sqrt()
}

/// Critical point of the f = 1/2 cell under drive along `x` only, in
/// closed form and by maximizing the uniaxial relation.
pub fn critical_current_uniaxial() -> CriticalCurrent {
    let x_crit = (2.0 * SQRT_2 - 3.0).acos() * FRAC_1_SQRT_2;
    let z_crit = -2.0 * ((2.0 - SQRT_2) / 2.0).sqrt().asin();

    // The derivative of sin 2p / sqrt(1 + cos² p) has the sign of
    // 2 cos 2p (1 + cos² p) + ½ sin² 2p, positive at 0 and negative at π/2.
    let slope = |p: f64| 2.0 * (2.0 * p).cos() * (1.0 + p.cos().powi(2)) + 0.5 * (2.0 * p).sin().powi(2);
    let (mut lo, mut hi) = (0.0, std::f64::consts::FRAC_PI_2);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slope(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p = 0.5 * (lo + hi);
    let x_num = p * SQRT_2;
    CriticalCurrent {
        x_crit,
        z_crit,
        i_crit: critical_current_closed_form(),
        x_crit_numeric: x_num,
        z_crit_numeric: -2.0 * p.cos().atan(),
        i_crit_numeric: uniaxial_relation(x_num),
    }
}
