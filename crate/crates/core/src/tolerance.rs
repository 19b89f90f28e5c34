//! Numerical tolerances shared by every layer.

use serde::{Deserialize, Serialize};

/// Tolerance set used for feasibility, tightness and degeneracy decisions.
///
/// `tight` and `face` are relative to `1 + max |c|`; `gap` is relative to
/// `1 + |primal cost|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub mass: f64,
    pub tight: f64,
    pub gap: f64,
    pub face: f64,
    pub geom: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            mass: 1e-9,
            tight: 1e-7,
            gap: 1e-7,
            face: 1e-6,
            geom: 1e-12,
        }
    }
}

impl Tolerances {
    /// Absolute tightness threshold for a cost table with the given maximum.
    pub fn tight_abs(&self, max_cost: f64) -> f64 {
        self.tight * (1.0 + max_cost.abs())
    }

    /// Absolute threshold for dual-face interval widths.
    pub fn face_abs(&self, max_cost: f64) -> f64 {
        self.face * (1.0 + max_cost.abs())
    }

    /// Absolute duality-gap threshold at the given primal cost.
    pub fn gap_abs(&self, primal: f64) -> f64 {
        self.gap * (1.0 + primal.abs())
    }
}
