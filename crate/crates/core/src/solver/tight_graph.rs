//! Tight-graph oracle: dual uniqueness via the edges usable by some
//! optimal plan.
//!
//! An edge of the c-subdifferential carries mass in some optimal plan iff
//! it carries mass in a fixed feasible flow or closes a directed cycle in
//! that flow's residual graph. The potentials are unique up to a constant
//! iff the usable edges connect all positive-mass points.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::duality::PotentialPair;
use crate::problem::Problem;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TightGraphReport {
    pub tight_edges: usize,
    pub usable_edges: Vec<(usize, usize)>,
    /// Connected components of the usable graph, as source index lists.
    pub components: Vec<Vec<usize>>,
    /// Mass moved by the max-flow; 1 for an optimal pair.
    pub flow_value: f64,
    pub unique: bool,
}

struct FlowNetwork {
    head: Vec<usize>,
    cap: Vec<f64>,
    adj: Vec<Vec<usize>>,
}

impl FlowNetwork {
    fn new(nodes: usize) -> Self {
        Self { head: Vec::new(), cap: Vec::new(), adj: vec![Vec::new(); nodes] }
    }

    fn add_edge(&mut self, a: usize, b: usize, c: f64) -> usize {
        let e = self.head.len();
        self.head.push(b);
        self.cap.push(c);
        self.adj[a].push(e);
        self.head.push(a);
        self.cap.push(0.0);
        self.adj[b].push(e + 1);
        e
    }

    /// Dinic's algorithm with an absolute residual threshold.
    fn max_flow(&mut self, s: usize, t: usize, eps: f64) -> f64 {
        let n = self.adj.len();
        let mut total = 0.0;
        loop {
            let mut level = vec![usize::MAX; n];
            level[s] = 0;
            let mut q = VecDeque::from([s]);
            while let Some(a) = q.pop_front() {
                for &e in &self.adj[a] {
                    let b = self.head[e];
                    if self.cap[e] > eps && level[b] == usize::MAX {
                        level[b] = level[a] + 1;
                        q.push_back(b);
                    }
                }
            }
            if level[t] == usize::MAX {
                return total;
            }
            let mut next = vec![0usize; n];
            loop {
                let pushed = self.augment(s, t, f64::INFINITY, &level, &mut next, eps);
                if pushed <= eps {
                    break;
                }
                total += pushed;
            }
        }
    }

    fn augment(&mut self, a: usize, t: usize, limit: f64, level: &[usize], next: &mut [usize], eps: f64) -> f64 {
        if a == t {
            return limit;
        }
        while next[a] < self.adj[a].len() {
            let e = self.adj[a][next[a]];
            let b = self.head[e];
            if self.cap[e] > eps && level[b] == level[a] + 1 {
                let got = self.augment(b, t, limit.min(self.cap[e]), level, next, eps);
                if got > eps {
                    self.cap[e] -= got;
                    self.cap[e ^ 1] += got;
                    return got;
                }
            }
            next[a] += 1;
        }
        0.0
    }
}

pub fn tight_graph_connectivity_oracle(problem: &Problem, pair: &PotentialPair) -> TightGraphReport {
    let (n, m) = (problem.n(), problem.m());
    let tol = problem.tight_tol();
    let mu = problem.source().weights();
    let nu = problem.target().weights();
    let mut tight = Vec::new();
    for i in (0..n).filter(|&i| mu[i] > 0.0) {
        for j in (0..m).filter(|&j| nu[j] > 0.0) {
            if (pair.f[i] + pair.g[j] - problem.cost(i, j)).abs() <= tol {
                tight.push((i, j));
            }
        }
    }
    // Nodes: sources 0..n, targets n..n+m, then s and t.
    let (s, t) = (n + m, n + m + 1);
    let mut net = FlowNetwork::new(n + m + 2);
    for i in 0..n {
        net.add_edge(s, i, mu[i]);
    }
    for j in 0..m {
        net.add_edge(n + j, t, nu[j]);
    }
    let edge_ids: Vec<usize> = tight.iter().map(|&(i, j)| net.add_edge(i, n + j, 2.0)).collect();
    let flow_value = net.max_flow(s, t, 1e-15);
    let flow_eps = 1e-13;
    let flows: Vec<f64> = edge_ids.iter().map(|&e| net.cap[e ^ 1]).collect();

    // Residual graph: x -> y on every tight edge, y -> x where flow is positive.
    let mut out = vec![Vec::new(); n + m];
    for (k, &(i, j)) in tight.iter().enumerate() {
        out[i].push(n + j);
        if flows[k] > flow_eps {
            out[n + j].push(i);
        }
    }
    let mut reach_cache: Vec<Option<Vec<bool>>> = vec![None; m];
    let mut usable = Vec::new();
    for (k, &(i, j)) in tight.iter().enumerate() {
        let ok = flows[k] > flow_eps || {
            let r = reach_cache[j].get_or_insert_with(|| reachable(&out, n + j));
            r[i]
        };
        if ok {
            usable.push((i, j));
        }
    }

    let mut dsu = crate::decompose::Dsu::new(n + m);
    for &(i, j) in &usable {
        dsu.union(i, n + j);
    }
    let positive: Vec<usize> = (0..n)
        .filter(|&i| mu[i] > 0.0)
        .chain((0..m).filter(|&j| nu[j] > 0.0).map(|j| n + j))
        .collect();
    let roots: std::collections::BTreeSet<usize> = positive.iter().map(|&v| dsu.find(v)).collect();
    let mut components: Vec<Vec<usize>> = Vec::new();
    let mut index_of = std::collections::BTreeMap::new();
    for i in (0..n).filter(|&i| mu[i] > 0.0) {
        let r = dsu.find(i);
        let k = *index_of.entry(r).or_insert_with(|| {
            components.push(Vec::new());
            components.len() - 1
        });
        components[k].push(i);
    }
    TightGraphReport {
        tight_edges: tight.len(),
        usable_edges: usable,
        components,
        flow_value,
        unique: roots.len() == 1,
    }
}

fn reachable(out: &[Vec<usize>], start: usize) -> Vec<bool> {
    let mut seen = vec![false; out.len()];
    seen[start] = true;
    let mut stack = vec![start];
    while let Some(a) = stack.pop() {
        for &b in &out[a] {
            if !seen[b] {
                seen[b] = true;
                stack.push(b);
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::CostSpec;
    use crate::measure::DiscreteMeasure;
    use crate::solver::solve;

    #[test]
    fn two_atoms_disconnected() {
        let mu = DiscreteMeasure::uniform(vec![vec![0.0], vec![1.0]]).unwrap();
        let p = Problem::new(mu.clone(), mu, CostSpec::squared_euclidean()).unwrap();
        let r = solve(&p).unwrap();
        let rep = tight_graph_connectivity_oracle(&p, &r.pair);
        assert!(!rep.unique);
        assert_eq!(rep.components, vec![vec![0], vec![1]]);
        assert!((rep.flow_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tight_edge_outside_every_plan_is_not_usable() {
        // f = (0, 1), g = (0, -1) makes (1, 0) tight, but no optimal plan uses it.
        let mu = DiscreteMeasure::uniform(vec![vec![0.0], vec![1.0]]).unwrap();
        let p = Problem::new(mu.clone(), mu, CostSpec::squared_euclidean()).unwrap();
        let pair = PotentialPair { f: vec![0.0, 1.0], g: vec![0.0, -1.0] };
        let rep = tight_graph_connectivity_oracle(&p, &pair);
        assert_eq!(rep.tight_edges, 3);
        assert_eq!(rep.usable_edges, vec![(0, 0), (1, 1)]);
        assert!(!rep.unique);
    }

    #[test]
    fn single_target_connects_everything() {
        let mu = DiscreteMeasure::uniform(vec![vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let nu = DiscreteMeasure::new(vec![vec![0.5]], vec![1.0]).unwrap();
        let p = Problem::new(mu, nu, CostSpec::squared_euclidean()).unwrap();
        let r = solve(&p).unwrap();
        assert!(tight_graph_connectivity_oracle(&p, &r.pair).unique);
    }
}
