//! Explicit pairs of distinct optimal potentials.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::enrich::strongly_connected;
use crate::decompose::ComponentDecomposition;
use crate::duality::{verify_duality, DualityReport, PotentialPair};
use crate::error::UniquenessError;
use crate::plan::{PlanEntry, TransportPlan};
use crate::problem::Problem;
use crate::solver::dual_face_oracle;

/// Two optimal pairs whose difference is not constant on the support.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessPair {
    pub first: PotentialPair,
    pub second: PotentialPair,
    pub shifted_sources: Vec<usize>,
    pub shifted_targets: Vec<usize>,
    pub shift: f64,
    pub first_report: DualityReport,
    pub second_report: DualityReport,
}

/// Shifts a sink block of the tight-edge block digraph.
///
/// `block_of_source[i]` is the block of each positive-mass source. The
/// chosen set `S` has no tight edge leaving it, so `f + s` on `S` and
/// `g - s` on its targets stays feasible for `s` up to the smallest slack
/// from `S` to the rest; the plan keeps `S` closed, so the dual value is
/// unchanged.
pub fn block_shift_witness(
    problem: &Problem,
    plan: &TransportPlan,
    pair: &PotentialPair,
    block_of_source: &[Option<usize>],
    blocks: usize,
) -> Option<WitnessPair> {
    if blocks < 2 {
        return None;
    }
    let (n, m) = (problem.n(), problem.m());
    let mu = problem.source().weights();
    let nu = problem.target().weights();
    let mut block_of_target = vec![None; m];
    for e in plan.entries() {
        block_of_target[e.j] = block_of_source[e.i];
    }
    let tol = problem.tight_tol();
    let mut out = vec![Vec::new(); blocks];
    for i in (0..n).filter(|&i| mu[i] > 0.0) {
        for j in (0..m).filter(|&j| nu[j] > 0.0) {
            let (Some(a), Some(b)) = (block_of_source[i], block_of_target[j]) else { continue };
            if a != b && problem.cost(i, j) - pair.f[i] - pair.g[j] <= tol {
                out[a].push(b);
            }
        }
    }
    let scc = strongly_connected(&out);
    let count = scc.iter().max().map_or(0, |c| c + 1);
    if count < 2 {
        return None;
    }
    let mut is_sink = vec![true; count];
    for (a, list) in out.iter().enumerate() {
        for &b in list {
            if scc[a] != scc[b] {
                is_sink[scc[a]] = false;
            }
        }
    }
    let anchor_block = block_of_source[crate::solver::anchor_index(problem)];
    let chosen = (0..count)
        .filter(|&c| is_sink[c])
        .min_by_key(|&c| (anchor_block.map(|b| scc[b]) == Some(c), c))?;
    let in_s = |b: Option<usize>| b.is_some_and(|b| scc[b] == chosen);

    let mut shift = f64::INFINITY;
    for i in (0..n).filter(|&i| mu[i] > 0.0 && in_s(block_of_source[i])) {
        for j in (0..m).filter(|&j| nu[j] > 0.0 && !in_s(block_of_target[j])) {
            shift = shift.min(problem.cost(i, j) - pair.f[i] - pair.g[j]);
        }
    }
    if !shift.is_finite() {
        shift = 1.0 + problem.max_cost();
    }
    if shift <= tol {
        return None;
    }
    let shifted_sources: Vec<usize> = (0..n).filter(|&i| mu[i] > 0.0 && in_s(block_of_source[i])).collect();
    let shifted_targets: Vec<usize> = (0..m).filter(|&j| nu[j] > 0.0 && in_s(block_of_target[j])).collect();
    let mut f: Vec<f64> = (0..n).map(|i| if mu[i] > 0.0 { pair.f[i] } else { f64::NEG_INFINITY }).collect();
    let mut g: Vec<f64> = pair.g.clone();
    for &i in &shifted_sources {
        f[i] += shift;
    }
    for &j in &shifted_targets {
        g[j] -= shift;
    }
    fill_zero_mass(problem, &mut f, &mut g);
    let second = PotentialPair { f, g }.normalized(crate::solver::anchor_index(problem));
    let first_report = verify_duality(plan, pair, problem).ok()?;
    let second_report = verify_duality(plan, &second, problem).ok()?;
    if !(first_report.optimal && second_report.optimal) {
        return None;
    }
    Some(WitnessPair {
        first: pair.clone(),
        second,
        shifted_sources,
        shifted_targets,
        shift,
        first_report,
        second_report,
    })
}

/// Recomputes zero-mass values by c-transforms against positive-mass points.
fn fill_zero_mass(problem: &Problem, f: &mut [f64], g: &mut [f64]) {
    let mu = problem.source().weights();
    let nu = problem.target().weights();
    for j in (0..problem.m()).filter(|&j| nu[j] <= 0.0) {
        g[j] = (0..problem.n())
            .filter(|&i| mu[i] > 0.0)
            .map(|i| problem.cost(i, j) - f[i])
            .fold(f64::INFINITY, f64::min);
    }
    for i in (0..problem.n()).filter(|&i| mu[i] <= 0.0) {
        f[i] = (0..problem.m()).map(|j| problem.cost(i, j) - g[j]).fold(f64::INFINITY, f64::min);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmbiguitySample {
    pub a: f64,
    pub b: f64,
    pub pair: PotentialPair,
    pub report: DualityReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmbiguityWitness {
    /// Smallest cost between the two clusters.
    pub delta: f64,
    pub samples: Vec<AmbiguitySample>,
    pub all_verified: bool,
    pub max_gap: f64,
    /// Largest dual-face interval width over the second cluster.
    pub oracle_spread: Option<f64>,
    pub matches_two_delta: Option<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmbiguityOptions {
    pub samples: usize,
    pub seed: Option<u64>,
    pub oracle: bool,
}

impl Default for AmbiguityOptions {
    fn default() -> Self {
        Self { samples: 25, seed: None, oracle: true }
    }
}

/// The family `f = a` on the first cluster, `b` on the second, `g = -f`,
/// for `|a - b| <= Delta`, on a self-coupled two-cluster instance.
pub fn ambiguity_witness(
    problem: &Problem,
    decomposition: &ComponentDecomposition,
    options: &AmbiguityOptions,
) -> Result<AmbiguityWitness, UniquenessError> {
    let groups = &decomposition.source.groups;
    if groups.len() != 2 {
        return Err(UniquenessError::NotTwoComponents(groups.len()));
    }
    let (mu, nu) = (problem.source(), problem.target());
    let tol = problem.tolerances();
    if mu.len() != nu.len()
        || mu.points().iter().zip(nu.points()).any(|(p, q)| p.iter().zip(q).any(|(a, b)| (a - b).abs() > tol.geom))
        || mu.weights().iter().zip(nu.weights()).any(|(a, b)| (a - b).abs() > tol.mass)
    {
        return Err(UniquenessError::NotSelfCoupled);
    }
    let n = mu.len();
    let tight = problem.tight_tol();
    for i in 0..n {
        if problem.cost(i, i).abs() > tight || (0..n).any(|j| (problem.cost(i, j) - problem.cost(j, i)).abs() > tight) {
            return Err(UniquenessError::NotSymmetric);
        }
    }
    let (first, second) = (&groups[0], &groups[1]);
    let delta = first
        .iter()
        .flat_map(|&i| second.iter().map(move |&j| (i, j)))
        .map(|(i, j)| problem.cost(i, j))
        .fold(f64::INFINITY, f64::min);
    let plan = TransportPlan::from_entries(n, n, (0..n).map(|i| PlanEntry { i, j: i, mass: mu.weight(i) }), 0.0);
    let mut rng = options.seed.map(ChaCha8Rng::seed_from_u64);
    let k = options.samples.max(2);
    let mut samples = Vec::with_capacity(k);
    for s in 0..k {
        let t = -1.0 + 2.0 * s as f64 / (k - 1) as f64;
        let a = match rng.as_mut() {
            Some(r) => r.gen_range(-delta..=delta),
            None => 0.0,
        };
        let b = a + t * delta;
        let mut f = vec![0.0; n];
        for &i in first {
            f[i] = a;
        }
        for &i in second {
            f[i] = b;
        }
        let pair = PotentialPair { g: f.iter().map(|v| -v).collect(), f };
        let report = verify_duality(&plan, &pair, problem)?;
        samples.push(AmbiguitySample { a, b, pair, report });
    }
    let all_verified = samples.iter().all(|s| s.report.optimal);
    let max_gap = samples.iter().map(|s| s.report.gap.abs()).fold(0.0, f64::max);
    let (oracle_spread, matches_two_delta) = if options.oracle {
        let zero = PotentialPair { f: vec![0.0; n], g: vec![0.0; n] };
        let face = dual_face_oracle(problem, &zero)?;
        let widths: Vec<f64> = second
            .iter()
            .filter_map(|&i| face.intervals[i].map(|(lo, hi)| hi - lo))
            .collect();
        let spread = widths.iter().copied().fold(0.0, f64::max);
        let thr = tol.face_abs(problem.max_cost());
        let matches = !widths.is_empty() && widths.iter().all(|w| (w - 2.0 * delta).abs() <= thr);
        (Some(spread), Some(matches))
    } else {
        (None, None)
    };
    Ok(AmbiguityWitness { delta, samples, all_verified, max_gap, oracle_spread, matches_two_delta })
}
