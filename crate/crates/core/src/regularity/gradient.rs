//! Finite-difference check of `grad f(x) = grad_x c(x, y)` on grid supports.

use serde::{Deserialize, Serialize};

use crate::error::{CostError, RegularityError};
use crate::problem::Problem;
use crate::regularity::detect_grid;
use crate::solver::SolveResult;

/// One interior support point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientSample {
    pub source: usize,
    /// Central difference of `f` at the point.
    pub finite_difference: Vec<f64>,
    /// Coordinate-wise midpoint of the extreme plan partners.
    pub partner: Vec<f64>,
    pub cost_gradient: Vec<f64>,
    pub deviation: f64,
}

/// All deviations are reported; nothing is thresholded here.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientCheckReport {
    pub spacing: Vec<f64>,
    pub samples: Vec<GradientSample>,
    pub max_deviation: f64,
    pub median_deviation: f64,
}

/// Compares central differences of `f` with the cost gradient at plan partners.
///
/// Only support points whose full stencil lies in the support (and that pass
/// `mask`, when given) are checked.
pub fn gradient_identity_check(
    problem: &Problem,
    result: &SolveResult,
    mask: Option<&[bool]>,
) -> Result<GradientCheckReport, RegularityError> {
    let cost = problem.closed_form().ok_or(CostError::NotClosedForm)?;
    let source = problem.source();
    if let Some(mask) = mask {
        if mask.len() != source.len() {
            return Err(RegularityError::DimensionMismatch(format!(
                "mask has {} entries, source has {} points",
                mask.len(),
                source.len()
            )));
        }
    }
    let support = source.support();
    let points: Vec<Vec<f64>> = support.iter().map(|&i| source.point(i).to_vec()).collect();
    let grid = detect_grid(&points).ok_or(RegularityError::NotAGrid)?;
    let interior = grid.interior();
    let f = &result.pair.f;
    let d = source.dim();

    let mut samples = Vec::new();
    for (k, &i) in support.iter().enumerate() {
        if !interior[k] || mask.is_some_and(|m| !m[i]) {
            continue;
        }
        let partners = result.plan.partners_of_source(i);
        if partners.is_empty() {
            continue;
        }
        let finite_difference: Vec<f64> = (0..d)
            .map(|a| match grid.neighbours(k, a) {
                Some((lo, hi)) => (f[support[hi]] - f[support[lo]]) / (2.0 * grid.spacing[a]),
                None => 0.0,
            })
            .collect();
        let partner: Vec<f64> = (0..d)
            .map(|a| {
                let (lo, hi) = partners.iter().map(|&j| problem.target().point(j)[a]).fold(
                    (f64::INFINITY, f64::NEG_INFINITY),
                    |(lo, hi), v| (lo.min(v), hi.max(v)),
                );
                0.5 * (lo + hi)
            })
            .collect();
        let cost_gradient = cost.grad_x(source.point(i), &partner);
        let deviation = finite_difference
            .iter()
            .zip(&cost_gradient)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        samples.push(GradientSample { source: i, finite_difference, partner, cost_gradient, deviation });
    }

    let mut devs: Vec<f64> = samples.iter().map(|s| s.deviation).collect();
    devs.sort_by(f64::total_cmp);
    let max_deviation = devs.last().copied().unwrap_or(0.0);
    let median_deviation = if devs.is_empty() {
        0.0
    } else if devs.len() % 2 == 1 {
        devs[devs.len() / 2]
    } else {
        0.5 * (devs[devs.len() / 2 - 1] + devs[devs.len() / 2])
    };
    Ok(GradientCheckReport { spacing: grid.spacing, samples, max_deviation, median_deviation })
}
