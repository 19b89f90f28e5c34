//! Escape of transported mass under growing target truncations.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cost::CostSpec;
use crate::error::RegularityError;
use crate::measure::{euclidean, DiscreteMeasure};
use crate::problem::Problem;
use crate::regularity::detect_grid;
use crate::solver::solve;

/// Per-source escape scores over a truncation schedule.
///
/// A heuristic finite stand-in for the set of points that do not induce
/// regularity. It never feeds a uniqueness verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EscapeDiagnostic {
    pub radii: Vec<f64>,
    /// `distances[k][i]`: largest distance from source `i` to a plan partner at radius `k`.
    pub distances: Vec<Vec<f64>>,
    /// Max of the partner distance over the whole schedule.
    pub scores: Vec<f64>,
    pub support_diameter: f64,
    pub flagged: Vec<bool>,
    /// Support points without a full finite-difference stencil when the
    /// support is a grid; every support point otherwise.
    pub boundary_candidates: Vec<bool>,
}

impl EscapeDiagnostic {
    /// Whether every flagged point is a boundary candidate.
    pub fn flagged_on_boundary(&self) -> bool {
        self.flagged.iter().zip(&self.boundary_candidates).all(|(&f, &b)| !f || b)
    }
}

/// Solves each truncated problem and flags sources whose partners run away.
///
/// Source `x` is flagged when some schedule index `k >= 2` has
/// `d_k(x) >= 2 d_{k/2}(x)` and `d_k(x) > diam(supp mu)`. Extending the
/// schedule never unflags a point.
pub fn escape_diagnostic(
    mu: &DiscreteMeasure,
    schedule: &[(f64, DiscreteMeasure)],
    cost: &CostSpec,
) -> Result<EscapeDiagnostic, RegularityError> {
    if schedule.len() < 3 {
        return Err(RegularityError::ScheduleTooShort(schedule.len()));
    }
    let radii: Vec<f64> = schedule.iter().map(|(r, _)| *r).collect();
    if radii.iter().any(|r| !r.is_finite()) || radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(RegularityError::InvalidSchedule);
    }
    let distances = schedule
        .par_iter()
        .map(|(_, nu)| {
            let problem = Problem::new(mu.clone(), nu.clone(), cost.clone())?;
            let result = solve(&problem)?;
            let mut d = vec![0.0f64; mu.len()];
            for e in result.plan.entries() {
                d[e.i] = d[e.i].max(euclidean(mu.point(e.i), nu.point(e.j)));
            }
            Ok(d)
        })
        .collect::<Result<Vec<_>, RegularityError>>()?;

    let n = mu.len();
    let diam = mu.support_diameter();
    let scores: Vec<f64> = (0..n)
        .map(|i| distances.iter().map(|d| d[i]).fold(0.0, f64::max))
        .collect();
    let flagged = (0..n)
        .map(|i| (2..distances.len()).any(|k| distances[k][i] >= 2.0 * distances[k / 2][i] && distances[k][i] > diam))
        .collect();

    let support = mu.support();
    let mut boundary_candidates = vec![false; n];
    let support_points: Vec<Vec<f64>> = support.iter().map(|&i| mu.point(i).to_vec()).collect();
    match detect_grid(&support_points) {
        Some(grid) => {
            for (k, interior) in grid.interior().into_iter().enumerate() {
                boundary_candidates[support[k]] = !interior;
            }
        }
        None => support.iter().for_each(|&i| boundary_candidates[i] = true),
    }

    Ok(EscapeDiagnostic { radii, distances, scores, support_diameter: diam, flagged, boundary_candidates })
}
