//! Dual-face oracle: per-coordinate extent of the optimal dual face.
//!
//! With `f[i0] = 0` fixed, `max s f_k` over the optimal face equals the
//! optimum of the homogenized transport LP
//!
//! ```text
//! min  sum c_ij pi_ij - T tau
//! s.t. sum_j pi_ij - mu_i tau = s [i = k]   (i != i0)
//!      sum_i pi_ij - nu_j tau = 0
//!      pi, tau >= 0
//! ```
//!
//! where `T` is the optimal transport cost. Only positive-mass points take
//! part; zero-mass coordinates are not constrained by the face.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lp::{solve_standard, LpStatus, StandardLp};
use crate::duality::PotentialPair;
use crate::error::SolveError;
use crate::problem::Problem;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualFaceReport {
    pub anchor: usize,
    /// `[min f_k, max f_k]`; `None` for zero-mass source points.
    pub intervals: Vec<Option<(f64, f64)>>,
    pub max_spread: f64,
    pub threshold: f64,
    pub optimum: f64,
    pub unique: bool,
}

struct Layout {
    sources: Vec<usize>,
    targets: Vec<usize>,
    row_of_source: Vec<Option<usize>>,
    rows: usize,
}

fn layout(problem: &Problem, anchor: usize) -> Layout {
    let sources = problem.source().support();
    let targets = problem.target().support();
    let mut row_of_source = vec![None; problem.n()];
    let mut rows = 0;
    for &i in &sources {
        if i != anchor {
            row_of_source[i] = Some(rows);
            rows += 1;
        }
    }
    Layout { sources, targets, row_of_source, rows: rows + problem.target().support().len() }
}

impl Layout {
    fn target_row(&self, t: usize) -> usize {
        self.rows - self.targets.len() + t
    }

    fn transport_columns(&self, problem: &Problem, lp: &mut StandardLp) {
        for &i in &self.sources {
            for (t, &j) in self.targets.iter().enumerate() {
                let mut col = Vec::with_capacity(2);
                if let Some(r) = self.row_of_source[i] {
                    col.push((r, 1.0));
                }
                col.push((self.target_row(t), 1.0));
                lp.add_column(col, problem.cost(i, j));
            }
        }
    }
}

fn optimum(problem: &Problem, lay: &Layout) -> Result<f64, SolveError> {
    let mut lp = StandardLp { rows: lay.rows, rhs: vec![0.0; lay.rows], ..Default::default() };
    for &i in &lay.sources {
        if let Some(r) = lay.row_of_source[i] {
            lp.rhs[r] = problem.source().weight(i);
        }
    }
    for (t, &j) in lay.targets.iter().enumerate() {
        lp.rhs[lay.target_row(t)] = problem.target().weight(j);
    }
    lay.transport_columns(problem, &mut lp);
    let s = solve_standard(&lp, 200_000)?;
    match s.status {
        LpStatus::Optimal => Ok(s.value),
        other => Err(SolveError::Lp(format!("transport LP is {other:?}"))),
    }
}

/// Bound on `sign * f_k` over the face, from the homogenized dual at a
/// slightly relaxed level.
///
/// The relaxation keeps the LP bounded under rounding in `T*`. Any feasible
/// `(pi, tau)` bounds the exact problem by `c.pi - T* tau`, so the relaxed
/// optimum is re-evaluated at `T*`; otherwise near-collisions of masses
/// (large `tau`) would inflate the interval by `(T* - level) tau`.
fn extreme(problem: &Problem, lay: &Layout, k: usize, sign: f64, t_star: f64, level: f64) -> Result<f64, SolveError> {
    let mut lp = StandardLp { rows: lay.rows, rhs: vec![0.0; lay.rows], ..Default::default() };
    lp.rhs[lay.row_of_source[k].expect("k is not the anchor")] = sign;
    lay.transport_columns(problem, &mut lp);
    let mut tau = Vec::with_capacity(lay.rows);
    for &i in &lay.sources {
        if let Some(r) = lay.row_of_source[i] {
            tau.push((r, -problem.source().weight(i)));
        }
    }
    for (t, &j) in lay.targets.iter().enumerate() {
        tau.push((lay.target_row(t), -problem.target().weight(j)));
    }
    let tau_col = lp.add_column(tau, -level);
    let s = solve_standard(&lp, 200_000)?;
    match s.status {
        LpStatus::Optimal => Ok(s.value - (t_star - level) * s.x[tau_col]),
        LpStatus::Infeasible => Ok(f64::INFINITY),
        LpStatus::Unbounded => Err(SolveError::Lp("optimal dual face is empty".into())),
    }
}

/// Solves one LP per positive-mass coordinate and direction.
pub fn dual_face_oracle(problem: &Problem, pair: &PotentialPair) -> Result<DualFaceReport, SolveError> {
    let anchor = super::anchor_index(problem);
    let lay = layout(problem, anchor);
    let tol = problem.tolerances();
    let t_star = optimum(problem, &lay)?;
    let dual = pair.dual_value(problem);
    if (dual - t_star).abs() > tol.gap_abs(t_star) {
        return Err(SolveError::InfeasibleOptimum { dual, optimum: t_star });
    }
    let level = t_star - 1e-11 * (1.0 + t_star.abs());
    let coords: Vec<usize> = lay.sources.iter().copied().filter(|&i| i != anchor).collect();
    let bounds: Vec<Result<(usize, f64, f64), SolveError>> = coords
        .par_iter()
        .map(|&k| {
            let hi = extreme(problem, &lay, k, 1.0, t_star, level)?;
            let lo = -extreme(problem, &lay, k, -1.0, t_star, level)?;
            Ok((k, lo, hi))
        })
        .collect();
    let mut intervals = vec![None; problem.n()];
    intervals[anchor] = Some((0.0, 0.0));
    let mut max_spread: f64 = 0.0;
    for b in bounds {
        let (k, lo, hi) = b?;
        max_spread = max_spread.max(hi - lo);
        intervals[k] = Some((lo, hi));
    }
    let threshold = tol.face_abs(problem.max_cost());
    Ok(DualFaceReport {
        anchor,
        intervals,
        max_spread,
        threshold,
        optimum: t_star,
        unique: max_spread <= threshold,
    })
}
