//! Regions of dominated cost and their limits along escaping targets.

use serde::{Deserialize, Serialize};

use crate::cost::ClosedFormCost;
use crate::error::RegularityError;

/// Grid points `x'` with `c(x', y) <= c(x, y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominatedCostRegion {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `c(x, y)`.
    pub level: f64,
    pub members: Vec<bool>,
}

impl DominatedCostRegion {
    pub fn count(&self) -> usize {
        self.members.iter().filter(|&&b| b).count()
    }
}

fn dominated(cost: &ClosedFormCost, level: f64, y: &[f64], p: &[f64]) -> bool {
    cost.eval(p, y) <= level
}

/// Exact pointwise membership in `C(x, y)` over `grid`.
pub fn dominated_region(x: &[f64], y: &[f64], cost: &ClosedFormCost, grid: &[Vec<f64>]) -> DominatedCostRegion {
    let level = cost.eval(x, y);
    DominatedCostRegion {
        x: x.to_vec(),
        y: y.to_vec(),
        level,
        members: grid.iter().map(|p| dominated(cost, level, y, p)).collect(),
    }
}

/// Membership frequencies of `C(x~_n, y_n)` with `y_n = x + r_n u`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticRegion {
    pub x: Vec<f64>,
    pub direction: Vec<f64>,
    pub radii: Vec<f64>,
    /// Offsets `t_n` with `x~_n = x + t_n u`.
    pub perturbations: Vec<f64>,
    /// Number of radii counted as the tail (the last half, rounded up).
    pub tail_len: usize,
    /// Fraction of all radii whose region contains the grid point.
    pub frequency: Vec<f64>,
    /// Fraction of tail radii whose region contains the grid point.
    pub tail_frequency: Vec<f64>,
}

impl AsymptoticRegion {
    /// Grid points in every tail region: the finite stand-in for the limsup.
    pub fn limit_members(&self) -> Vec<bool> {
        self.tail_frequency.iter().map(|&f| f >= 1.0).collect()
    }
}

fn perturbation(cost: &ClosedFormCost, r: f64) -> f64 {
    match cost {
        ClosedFormCost::LpNormPower { q, p } if *q == 2.0 && *p == 2.0 => r.powf(-0.5),
        _ => {
            let g = cost.superlinearity_bound(r - 1.0);
            if g > 0.0 {
                g.powf(-0.5).min(1.0)
            } else {
                1.0
            }
        }
    }
}

/// Approximates the limsup of dominated-cost regions along `y_n = x + r_n u`.
///
/// The perturbed anchors move towards `y_n` by `r^{-1/2}` for squared
/// Euclidean cost and by `min(1, g(r - 1)^{-1/2})` otherwise, where `g` is the
/// lower envelope of the profile derivative.
pub fn asymptotic_region(
    x: &[f64],
    u: &[f64],
    cost: &ClosedFormCost,
    radii: &[f64],
    grid: &[Vec<f64>],
) -> Result<AsymptoticRegion, RegularityError> {
    if !cost.is_nondecreasing() {
        return Err(RegularityError::ProfileNotMonotone);
    }
    if u.len() != x.len() {
        return Err(RegularityError::DimensionMismatch(format!(
            "direction has dimension {}, anchor {}",
            u.len(),
            x.len()
        )));
    }
    if let Some(p) = grid.iter().find(|p| p.len() != x.len()) {
        return Err(RegularityError::DimensionMismatch(format!(
            "grid point has dimension {}, anchor {}",
            p.len(),
            x.len()
        )));
    }
    let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !norm.is_finite() || (norm - 1.0).abs() > 1e-9 {
        return Err(RegularityError::InvalidDirection);
    }
    if radii.len() < 3 {
        return Err(RegularityError::ScheduleTooShort(radii.len()));
    }
    if radii[0] <= 0.0 || radii.windows(2).any(|w| !(w[1] > w[0])) || radii.iter().any(|r| !r.is_finite()) {
        return Err(RegularityError::InvalidSchedule);
    }

    let shift = |s: f64| -> Vec<f64> { x.iter().zip(u).map(|(a, b)| a + s * b).collect() };
    let perturbations: Vec<f64> = radii.iter().map(|&r| perturbation(cost, r)).collect();
    let tail_len = radii.len().div_ceil(2);
    let tail_start = radii.len() - tail_len;
    let mut hits = vec![0usize; grid.len()];
    let mut tail_hits = vec![0usize; grid.len()];
    for (n, (&r, &t)) in radii.iter().zip(&perturbations).enumerate() {
        let y = shift(r);
        let level = cost.eval(&shift(t), &y);
        for (k, p) in grid.iter().enumerate() {
            if dominated(cost, level, &y, p) {
                hits[k] += 1;
                if n >= tail_start {
                    tail_hits[k] += 1;
                }
            }
        }
    }
    let total = radii.len() as f64;
    Ok(AsymptoticRegion {
        x: x.to_vec(),
        direction: u.to_vec(),
        radii: radii.to_vec(),
        perturbations,
        tail_len,
        frequency: hits.iter().map(|&h| h as f64 / total).collect(),
        tail_frequency: tail_hits.iter().map(|&h| h as f64 / tail_len as f64).collect(),
    })
}
