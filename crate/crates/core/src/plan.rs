//! Sparse transport plans.

use serde::{Deserialize, Serialize};

use crate::problem::Problem;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanEntry {
    pub i: usize,
    pub j: usize,
    pub mass: f64,
}

/// A coupling stored as positive entries sorted by `(i, j)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportPlan {
    n: usize,
    m: usize,
    entries: Vec<PlanEntry>,
}

impl TransportPlan {
    /// Builds a plan, merging duplicate cells and dropping entries at or below `prune`.
    pub fn from_entries(n: usize, m: usize, entries: impl IntoIterator<Item = PlanEntry>, prune: f64) -> Self {
        let mut v: Vec<PlanEntry> = entries.into_iter().collect();
        v.sort_by_key(|e| (e.i, e.j));
        let mut merged: Vec<PlanEntry> = Vec::with_capacity(v.len());
        for e in v {
            assert!(e.i < n && e.j < m, "plan entry out of range");
            match merged.last_mut() {
                Some(last) if last.i == e.i && last.j == e.j => last.mass += e.mass,
                _ => merged.push(e),
            }
        }
        merged.retain(|e| e.mass > prune);
        Self { n, m, entries: merged }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn entries(&self) -> &[PlanEntry] {
        &self.entries
    }

    pub fn mass(&self, i: usize, j: usize) -> f64 {
        self.entries
            .binary_search_by_key(&(i, j), |e| (e.i, e.j))
            .map_or(0.0, |k| self.entries[k].mass)
    }

    pub fn row_sums(&self) -> Vec<f64> {
        let mut r = vec![0.0; self.n];
        for e in &self.entries {
            r[e.i] += e.mass;
        }
        r
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.m];
        for e in &self.entries {
            c[e.j] += e.mass;
        }
        c
    }

    pub fn total_cost(&self, problem: &Problem) -> f64 {
        self.entries.iter().map(|e| e.mass * problem.cost(e.i, e.j)).sum()
    }

    /// Largest deviation of either marginal from the problem's weights.
    pub fn marginal_error(&self, problem: &Problem) -> f64 {
        let rows = self.row_sums();
        let cols = self.col_sums();
        let a = rows.iter().zip(problem.source().weights()).map(|(x, w)| (x - w).abs());
        let b = cols.iter().zip(problem.target().weights()).map(|(x, w)| (x - w).abs());
        a.chain(b).fold(0.0, f64::max)
    }

    /// Target indices receiving mass from source `i`.
    pub fn partners_of_source(&self, i: usize) -> Vec<usize> {
        self.entries.iter().filter(|e| e.i == i).map(|e| e.j).collect()
    }
}
