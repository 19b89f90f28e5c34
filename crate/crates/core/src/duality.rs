//! Kantorovich potentials, c-transforms and duality verification.
//!
//! Potentials take values in `R ∪ {-inf}`, represented by
//! `f64::NEG_INFINITY`. In dual values the convention `0 * (-inf) = 0`
//! applies to zero-mass points.

use serde::{Deserialize, Serialize};

use crate::error::DualityError;
use crate::plan::TransportPlan;
use crate::problem::Problem;

/// Potentials `f` on the source points and `g` on the target points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialPair {
    pub f: Vec<f64>,
    pub g: Vec<f64>,
}

/// Which side a c-transform produces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `g` on targets to `g^c(x) = min_y c(x, y) - g(y)` on sources.
    ToSource,
    /// `f` on sources to `f^c(y) = min_x c(x, y) - f(x)` on targets.
    ToTarget,
}

impl PotentialPair {
    pub fn dual_value(&self, problem: &Problem) -> f64 {
        weighted(&self.f, problem.source().weights()) + weighted(&self.g, problem.target().weights())
    }

    /// Shifts by a constant so that `f[anchor] = 0`.
    pub fn normalized(&self, anchor: usize) -> PotentialPair {
        let s = self.f[anchor];
        PotentialPair {
            f: self.f.iter().map(|v| v - s).collect(),
            g: self.g.iter().map(|v| v + s).collect(),
        }
    }
}

fn weighted(values: &[f64], weights: &[f64]) -> f64 {
    values
        .iter()
        .zip(weights)
        .filter(|(_, w)| **w > 0.0)
        .map(|(v, w)| v * w)
        .sum()
}

fn check_values(values: &[f64], expected: usize, what: &str) -> Result<(), DualityError> {
    if values.len() != expected {
        return Err(DualityError::DimensionMismatch(format!(
            "{what} has {} values, expected {expected}",
            values.len()
        )));
    }
    if let Some(index) = values.iter().position(|v| v.is_nan() || *v == f64::INFINITY) {
        return Err(DualityError::InvalidValue { index });
    }
    Ok(())
}

/// Discrete c-transform.
pub fn c_transform(values: &[f64], problem: &Problem, direction: Direction) -> Result<Vec<f64>, DualityError> {
    let (n, m) = (problem.n(), problem.m());
    match direction {
        Direction::ToSource => {
            check_values(values, m, "target values")?;
            Ok((0..n)
                .map(|i| {
                    (0..m)
                        .filter(|&j| values[j] > f64::NEG_INFINITY)
                        .map(|j| problem.cost(i, j) - values[j])
                        .fold(f64::INFINITY, f64::min)
                })
                .collect())
        }
        Direction::ToTarget => {
            check_values(values, n, "source values")?;
            Ok((0..m)
                .map(|j| {
                    (0..n)
                        .filter(|&i| values[i] > f64::NEG_INFINITY)
                        .map(|i| problem.cost(i, j) - values[i])
                        .fold(f64::INFINITY, f64::min)
                })
                .collect())
        }
    }
}

/// `max |f^cc - f|` over the source points.
pub fn double_transform_residual(f: &[f64], problem: &Problem) -> Result<f64, DualityError> {
    let fc = c_transform(f, problem, Direction::ToTarget)?;
    if fc.iter().all(|v| *v == f64::INFINITY) {
        return Ok(0.0);
    }
    let fcc = c_transform(&fc, problem, Direction::ToSource)?;
    Ok(f.iter().zip(&fcc).map(|(a, b)| gap(*a, *b)).fold(0.0, f64::max))
}

fn gap(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs()
    }
}

/// Tight pairs of a feasible potential pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Subdifferential {
    pub edges: Vec<(usize, usize)>,
    pub threshold: f64,
}

impl Subdifferential {
    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.edges.binary_search(&(i, j)).is_ok()
    }
}

fn slack(problem: &Problem, pair: &PotentialPair, i: usize, j: usize) -> f64 {
    let (f, g) = (pair.f[i], pair.g[j]);
    if f == f64::NEG_INFINITY || g == f64::NEG_INFINITY {
        f64::INFINITY
    } else {
        problem.cost(i, j) - f - g
    }
}

fn check_pair(pair: &PotentialPair, problem: &Problem) -> Result<(), DualityError> {
    check_values(&pair.f, problem.n(), "f")?;
    check_values(&pair.g, problem.m(), "g")
}

/// The c-subdifferential `{(i, j) : |f_i + g_j - c_ij| <= tau_tight}`.
pub fn subdifferential_of(pair: &PotentialPair, problem: &Problem) -> Result<Subdifferential, DualityError> {
    check_pair(pair, problem)?;
    let tol = problem.tight_tol();
    let mut edges = Vec::new();
    for i in 0..problem.n() {
        for j in 0..problem.m() {
            let s = slack(problem, pair, i, j);
            if s < -tol {
                return Err(DualityError::InfeasiblePair { i, j, violation: -s });
            }
            if s <= tol {
                edges.push((i, j));
            }
        }
    }
    Ok(Subdifferential { edges, threshold: tol })
}

/// Primal-dual consistency of a plan and a potential pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    pub primal_cost: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub max_violation: f64,
    pub max_support_slack: f64,
    pub marginal_error: f64,
    pub feasible: bool,
    pub optimal: bool,
}

pub fn verify_duality(
    plan: &TransportPlan,
    pair: &PotentialPair,
    problem: &Problem,
) -> Result<DualityReport, DualityError> {
    check_pair(pair, problem)?;
    if plan.n() != problem.n() || plan.m() != problem.m() {
        return Err(DualityError::DimensionMismatch(format!(
            "plan is {}x{}, problem is {}x{}",
            plan.n(),
            plan.m(),
            problem.n(),
            problem.m()
        )));
    }
    let tol = problem.tolerances();
    let tight = problem.tight_tol();
    let mut max_violation: f64 = 0.0;
    for i in 0..problem.n() {
        for j in 0..problem.m() {
            max_violation = max_violation.max(-slack(problem, pair, i, j));
        }
    }
    let max_support_slack = plan
        .entries()
        .iter()
        .map(|e| slack(problem, pair, e.i, e.j))
        .fold(0.0, f64::max);
    let primal_cost = plan.total_cost(problem);
    let dual_value = pair.dual_value(problem);
    let gap = primal_cost - dual_value;
    let marginal_error = plan.marginal_error(problem);
    let feasible = max_violation <= tight;
    let optimal = feasible
        && gap.abs() <= tol.gap_abs(primal_cost)
        && max_support_slack <= tight
        && marginal_error <= tol.mass;
    Ok(DualityReport {
        primal_cost,
        dual_value,
        gap,
        max_violation,
        max_support_slack,
        marginal_error,
        feasible,
        optimal,
    })
}
