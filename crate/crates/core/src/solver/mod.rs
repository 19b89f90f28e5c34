//! Primal-dual solver and the two independent uniqueness oracles.

pub mod exact;
pub mod face;
pub mod lp;
pub mod network_simplex;
pub mod tight_graph;

use serde::{Deserialize, Serialize};

use crate::duality::{c_transform, Direction, PotentialPair};
use crate::error::SolveError;
use crate::plan::{PlanEntry, TransportPlan};
use crate::problem::Problem;

pub use exact::{exact_cost_matrix, solve_exact, ExactSolution};
pub use face::{dual_face_oracle, DualFaceReport};
pub use network_simplex::{network_simplex, BasisSolution, Scalar};
pub use tight_graph::{tight_graph_connectivity_oracle, TightGraphReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub max_iterations: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { max_iterations: 1_000_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisCell {
    pub i: usize,
    pub j: usize,
    pub flow: f64,
}

/// Optimal plan and potential pair, normalized so that `f[anchor] = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub plan: TransportPlan,
    pub pair: PotentialPair,
    pub basis: Vec<BasisCell>,
    pub anchor: usize,
    pub cost: f64,
    pub iterations: usize,
}

/// Lowest-index source point with positive mass.
pub fn anchor_index(problem: &Problem) -> usize {
    problem
        .source()
        .weights()
        .iter()
        .position(|&w| w > 0.0)
        .expect("normalized measure has positive mass")
}

pub fn check_balance(source_total: f64, target_total: f64, mass_tol: f64) -> Result<(), SolveError> {
    if (source_total - target_total).abs() > mass_tol {
        return Err(SolveError::Unbalanced { source_total, target_total });
    }
    Ok(())
}

pub fn solve(problem: &Problem) -> Result<SolveResult, SolveError> {
    solve_with(problem, &SolveOptions::default())
}

pub fn solve_with(problem: &Problem, options: &SolveOptions) -> Result<SolveResult, SolveError> {
    let tol = problem.tolerances();
    check_balance(problem.source().total_mass(), problem.target().total_mass(), tol.mass)?;
    let eps = 1e-12 * (1.0 + problem.max_cost());
    let cost = |i: usize, j: usize| problem.cost(i, j);
    let sol = network_simplex(
        problem.source().weights(),
        problem.target().weights(),
        &cost,
        &eps,
        options.max_iterations,
    )?;
    log::debug!("network simplex finished after {} pivots", sol.iterations);
    let basis: Vec<BasisCell> = sol
        .cells
        .iter()
        .zip(&sol.flows)
        .map(|(&(i, j), &flow)| BasisCell { i, j, flow })
        .collect();
    let plan = TransportPlan::from_entries(
        problem.n(),
        problem.m(),
        basis.iter().map(|b| PlanEntry { i: b.i, j: b.j, mass: b.flow }),
        tol.mass,
    );
    let pair = c_concave_pair(&sol.u, problem);
    let anchor = anchor_index(problem);
    let pair = pair.normalized(anchor);
    let cost = plan.total_cost(problem);
    Ok(SolveResult { plan, pair, basis, anchor, cost, iterations: sol.iterations })
}

/// `(f^cc, f^c)`: dominates any feasible pair with the same `f`.
pub fn c_concave_pair(f: &[f64], problem: &Problem) -> PotentialPair {
    let g = c_transform(f, problem, Direction::ToTarget).expect("finite potentials");
    let f = c_transform(&g, problem, Direction::ToSource).expect("finite potentials");
    PotentialPair { f, g }
}
