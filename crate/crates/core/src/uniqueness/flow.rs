//! Component flow graph and the two degeneracy tests.

use serde::{Deserialize, Serialize};

use crate::decompose::{ComponentDecomposition, Dsu};
use crate::error::UniquenessError;
use crate::plan::TransportPlan;
use crate::problem::Problem;

/// Largest `|I| + |J|` accepted by the subset-sum collision search.
pub const MARGINAL_CAP: usize = 26;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowEdge {
    pub source: usize,
    pub target: usize,
    pub mass: f64,
}

/// Bipartite graph of mass flowing between source and target components.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentFlowGraph {
    pub source_mass: Vec<f64>,
    pub target_mass: Vec<f64>,
    pub edges: Vec<FlowEdge>,
}

impl ComponentFlowGraph {
    pub fn from_plan(plan: &TransportPlan, decomposition: &ComponentDecomposition, problem: &Problem) -> Self {
        let (ks, kt) = (decomposition.source.len(), decomposition.target.len());
        let mut flow = vec![0.0; ks * kt];
        for e in plan.entries() {
            let a = decomposition.source.membership[e.i];
            let b = decomposition.target.membership[e.j];
            flow[a * kt + b] += e.mass;
        }
        let edges = (0..ks * kt)
            .filter(|&k| flow[k] > 0.0)
            .map(|k| FlowEdge { source: k / kt, target: k % kt, mass: flow[k] })
            .collect();
        Self {
            source_mass: decomposition.source.masses(problem.source().weights()),
            target_mass: decomposition.target.masses(problem.target().weights()),
            edges,
        }
    }

    /// Connected components over positive-mass nodes, each as
    /// (source components, target components), ordered by first member.
    pub fn connected_components(&self) -> Vec<(Vec<usize>, Vec<usize>)> {
        let (ks, kt) = (self.source_mass.len(), self.target_mass.len());
        let mut dsu = Dsu::new(ks + kt);
        for e in &self.edges {
            dsu.union(e.source, ks + e.target);
        }
        let mut out: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
        let mut slot = vec![usize::MAX; ks + kt];
        let nodes = (0..ks)
            .filter(|&a| self.source_mass[a] > 0.0)
            .chain((0..kt).filter(|&b| self.target_mass[b] > 0.0).map(|b| ks + b));
        for v in nodes {
            let r = dsu.find(v);
            if slot[r] == usize::MAX {
                slot[r] = out.len();
                out.push((Vec::new(), Vec::new()));
            }
            if v < ks {
                out[slot[r]].0.push(v);
            } else {
                out[slot[r]].1.push(v - ks);
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PlanDegeneracy {
    Nondegenerate,
    /// `mu(I') = pi(I' x J') = nu(J')` with `0 < mu(I') < 1`.
    Degenerate { sources: Vec<usize>, targets: Vec<usize>, mass: f64 },
}

impl PlanDegeneracy {
    pub fn is_degenerate(&self) -> bool {
        matches!(self, PlanDegeneracy::Degenerate { .. })
    }
}

/// Degenerate iff the flow graph on positive-mass nodes is disconnected.
pub fn plan_degeneracy_check(graph: &ComponentFlowGraph) -> PlanDegeneracy {
    let comps = graph.connected_components();
    if comps.len() <= 1 {
        return PlanDegeneracy::Nondegenerate;
    }
    let (sources, targets) = comps[0].clone();
    let mass = sources.iter().map(|&a| graph.source_mass[a]).sum();
    PlanDegeneracy::Degenerate { sources, targets, mass }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum MarginalDegeneracy {
    /// No collision; `min_gap` is the smallest `|mu(I') - nu(J')|`.
    Nondegenerate { min_gap: f64 },
    Colliding { sources: Vec<usize>, targets: Vec<usize>, gap: f64 },
}

impl MarginalDegeneracy {
    pub fn min_gap(&self) -> f64 {
        match self {
            MarginalDegeneracy::Nondegenerate { min_gap } => *min_gap,
            MarginalDegeneracy::Colliding { gap, .. } => *gap,
        }
    }

    /// A gap that is neither a clean collision nor clearly separated.
    pub fn is_knife_edge(&self, mass_tol: f64) -> bool {
        let g = self.min_gap();
        g > 1e-3 * mass_tol && g <= 10.0 * mass_tol
    }
}

/// Searches nonempty proper subsets `I'`, `J'` of positive-mass components
/// with `|mu(I') - nu(J')| <= mass_tol`, meeting in the middle: the smaller
/// side's subset sums are sorted, the larger side is streamed in Gray-code
/// order.
pub fn marginal_degeneracy_check(
    source_mass: &[f64],
    target_mass: &[f64],
    mass_tol: f64,
) -> Result<MarginalDegeneracy, UniquenessError> {
    let a: Vec<usize> = (0..source_mass.len()).filter(|&k| source_mass[k] > 0.0).collect();
    let b: Vec<usize> = (0..target_mass.len()).filter(|&k| target_mass[k] > 0.0).collect();
    let count = a.len() + b.len();
    if count > MARGINAL_CAP {
        return Err(UniquenessError::TooManyComponents { count, cap: MARGINAL_CAP });
    }
    if a.len() < 2 || b.len() < 2 {
        return Ok(MarginalDegeneracy::Nondegenerate { min_gap: f64::INFINITY });
    }
    let wa: Vec<f64> = a.iter().map(|&k| source_mass[k]).collect();
    let wb: Vec<f64> = b.iter().map(|&k| target_mass[k]).collect();
    let swap = wa.len() > wb.len();
    let (small, large) = if swap { (&wb, &wa) } else { (&wa, &wb) };

    let full_small = (1u64 << small.len()) - 1;
    let mut table: Vec<(f64, u64)> = (1..full_small).map(|mask| (subset_sum(small, mask), mask)).collect();
    table.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));

    let full_large = (1u64 << large.len()) - 1;
    let mut best: Option<(f64, u64, u64)> = None;
    let mut mask = 0u64;
    let mut sum = 0.0;
    for step in 1..=full_large {
        let bit = step.trailing_zeros() as usize;
        mask ^= 1 << bit;
        if step % 4096 == 0 {
            sum = subset_sum(large, mask);
        } else if mask & (1 << bit) != 0 {
            sum += large[bit];
        } else {
            sum -= large[bit];
        }
        if mask == full_large {
            continue;
        }
        let pos = table.partition_point(|e| e.0 < sum);
        for k in [pos.wrapping_sub(1), pos] {
            if let Some(&(s, m)) = table.get(k) {
                let gap = (s - sum).abs();
                if best.map_or(true, |(g, bm, bl)| gap < g || (gap == g && (m, mask) < (bm, bl))) {
                    best = Some((gap, m, mask));
                }
            }
        }
    }
    let (gap, ms, ml) = best.expect("both sides have proper subsets");
    if gap > mass_tol {
        return Ok(MarginalDegeneracy::Nondegenerate { min_gap: gap });
    }
    let (ma, mb) = if swap { (ml, ms) } else { (ms, ml) };
    Ok(MarginalDegeneracy::Colliding { sources: members(&a, ma), targets: members(&b, mb), gap })
}

fn subset_sum(w: &[f64], mask: u64) -> f64 {
    w.iter().enumerate().filter(|(k, _)| mask & (1 << k) != 0).map(|(_, v)| v).sum()
}

fn members(ids: &[usize], mask: u64) -> Vec<usize> {
    ids.iter().enumerate().filter(|(k, _)| mask & (1 << k) != 0).map(|(_, &v)| v).collect()
}
