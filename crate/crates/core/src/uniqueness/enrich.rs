//! Enlarging the support of an optimal plan along tight cycles.
//!
//! A tight edge is carried by some optimal plan iff it lies on a directed
//! cycle of the residual graph (tight edges forward, plan edges backward).
//! Pushing a small amount of mass around one such cycle per edge yields an
//! optimal plan whose support contains every usable tight edge.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::duality::PotentialPair;
use crate::plan::{PlanEntry, TransportPlan};
use crate::problem::Problem;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnrichedPlan {
    pub plan: TransportPlan,
    pub added: Vec<(usize, usize)>,
    pub epsilon: f64,
}

pub fn enrich_plan(problem: &Problem, plan: &TransportPlan, pair: &PotentialPair) -> EnrichedPlan {
    let (n, m) = (problem.n(), problem.m());
    let tol = problem.tight_tol();
    let mu = problem.source().weights();
    let nu = problem.target().weights();
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n + m];
    let mut candidates = Vec::new();
    for i in (0..n).filter(|&i| mu[i] > 0.0) {
        for j in (0..m).filter(|&j| nu[j] > 0.0) {
            let slack = problem.cost(i, j) - pair.f[i] - pair.g[j];
            if slack.abs() <= tol {
                out[i].push(n + j);
                if plan.mass(i, j) <= 0.0 {
                    candidates.push((i, j));
                }
            }
        }
    }
    for e in plan.entries() {
        out[n + e.j].push(e.i);
    }
    let scc = strongly_connected(&out);

    let mut delta: BTreeMap<(usize, usize), i64> = BTreeMap::new();
    let mut cycles = 0i64;
    for &(i, j) in &candidates {
        if scc[i] != scc[n + j] || delta.get(&(i, j)).is_some_and(|d| *d > 0) {
            continue;
        }
        let path = bfs_path(&out, &scc, n + j, i);
        *delta.entry((i, j)).or_default() += 1;
        for w in path.windows(2) {
            let (a, b) = (w[0], w[1]);
            if a < n {
                *delta.entry((a, b - n)).or_default() += 1;
            } else {
                *delta.entry((b, a - n)).or_default() -= 1;
            }
        }
        cycles += 1;
    }
    if cycles == 0 {
        return EnrichedPlan { plan: plan.clone(), added: Vec::new(), epsilon: 0.0 };
    }
    let min_mass = plan.entries().iter().map(|e| e.mass).fold(f64::INFINITY, f64::min);
    let epsilon = min_mass / (2.0 * cycles as f64);
    let added: Vec<(usize, usize)> = delta
        .iter()
        .filter(|(&(i, j), &d)| d > 0 && plan.mass(i, j) <= 0.0)
        .map(|(&k, _)| k)
        .collect();
    let entries = plan
        .entries()
        .iter()
        .copied()
        .chain(delta.iter().map(|(&(i, j), &d)| PlanEntry { i, j, mass: epsilon * d as f64 }));
    EnrichedPlan { plan: TransportPlan::from_entries(n, m, entries, 0.0), added, epsilon }
}

/// Shortest path from `from` to `to` inside one strongly connected component.
fn bfs_path(out: &[Vec<usize>], scc: &[usize], from: usize, to: usize) -> Vec<usize> {
    let mut parent = vec![usize::MAX; out.len()];
    parent[from] = from;
    let mut q = VecDeque::from([from]);
    while let Some(a) = q.pop_front() {
        if a == to {
            break;
        }
        for &b in &out[a] {
            if parent[b] == usize::MAX && scc[b] == scc[from] {
                parent[b] = a;
                q.push_back(b);
            }
        }
    }
    let mut path = vec![to];
    let mut x = to;
    while x != from {
        x = parent[x];
        path.push(x);
    }
    path.reverse();
    path
}

/// Component ids by Kosaraju's algorithm, iteratively.
pub(crate) fn strongly_connected(out: &[Vec<usize>]) -> Vec<usize> {
    let n = out.len();
    let mut rev = vec![Vec::new(); n];
    for (a, list) in out.iter().enumerate() {
        for &b in list {
            rev[b].push(a);
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut stack = vec![(s, 0usize)];
        while let Some(&mut (v, ref mut k)) = stack.last_mut() {
            if *k < out[v].len() {
                let w = out[v][*k];
                *k += 1;
                if !seen[w] {
                    seen[w] = true;
                    stack.push((w, 0));
                }
            } else {
                order.push(v);
                stack.pop();
            }
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut c = 0;
    for &s in order.iter().rev() {
        if comp[s] != usize::MAX {
            continue;
        }
        comp[s] = c;
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for &w in &rev[v] {
                if comp[w] == usize::MAX {
                    comp[w] = c;
                    stack.push(w);
                }
            }
        }
        c += 1;
    }
    comp
}
