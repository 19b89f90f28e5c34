//! Restriction of problems, plans and potentials to parts of the support.

use serde::{Deserialize, Serialize};

use crate::duality::{c_transform, verify_duality, Direction, DualityReport, PotentialPair};
use crate::error::DecomposeError;
use crate::plan::{PlanEntry, TransportPlan};
use crate::problem::Problem;

use super::ComponentDecomposition;

/// A sub-problem together with the index maps back into the original.
#[derive(Clone, Debug)]
pub struct RestrictedProblem {
    pub problem: Problem,
    pub sources: Vec<usize>,
    pub targets: Vec<usize>,
    /// Mass of the original source measure on the kept sources.
    pub mass: f64,
    /// The original plan restricted and rescaled, if one was given.
    pub plan: Option<TransportPlan>,
}

impl RestrictedProblem {
    /// Restricts a potential pair on the original problem.
    pub fn restrict_pair(&self, pair: &PotentialPair) -> PotentialPair {
        PotentialPair {
            f: self.sources.iter().map(|&i| pair.f[i]).collect(),
            g: self.targets.iter().map(|&j| pair.g[j]).collect(),
        }
    }
}

fn check_indices(indices: &[usize], len: usize) -> Result<(), DecomposeError> {
    match indices.iter().find(|&&i| i >= len) {
        Some(&index) => Err(DecomposeError::IndexOutOfRange { index, len }),
        None => Ok(()),
    }
}

fn normalized(w: Vec<f64>) -> Vec<f64> {
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// Restriction to a set of sources and the target mass the plan sends from it.
pub fn restrict_partial(
    problem: &Problem,
    plan: &TransportPlan,
    component: &[usize],
) -> Result<RestrictedProblem, DecomposeError> {
    check_indices(component, problem.n())?;
    let mut sources = component.to_vec();
    sources.sort_unstable();
    sources.dedup();
    let mass: f64 = sources.iter().map(|&i| problem.source().weight(i)).sum();
    if mass <= problem.tolerances().mass {
        return Err(DecomposeError::ZeroMassComponent(sources.first().copied().unwrap_or(0)));
    }
    let mut in_comp = vec![false; problem.n()];
    for &i in &sources {
        in_comp[i] = true;
    }
    let mut induced = vec![0.0; problem.m()];
    for e in plan.entries().iter().filter(|e| in_comp[e.i]) {
        induced[e.j] += e.mass;
    }
    let targets: Vec<usize> = (0..problem.m()).filter(|&j| induced[j] > 0.0).collect();
    let sw = normalized(sources.iter().map(|&i| problem.source().weight(i)).collect());
    let tw = normalized(targets.iter().map(|&j| induced[j]).collect());
    let sub = problem.subproblem(&sources, &targets, sw, tw)?;
    let mut src_pos = vec![usize::MAX; problem.n()];
    for (k, &i) in sources.iter().enumerate() {
        src_pos[i] = k;
    }
    let mut tgt_pos = vec![usize::MAX; problem.m()];
    for (k, &j) in targets.iter().enumerate() {
        tgt_pos[j] = k;
    }
    let plan_mass: f64 = targets.iter().map(|&j| induced[j]).sum();
    let sub_plan = TransportPlan::from_entries(
        sources.len(),
        targets.len(),
        plan.entries()
            .iter()
            .filter(|e| in_comp[e.i])
            .map(|e| PlanEntry { i: src_pos[e.i], j: tgt_pos[e.j], mass: e.mass / plan_mass }),
        0.0,
    );
    Ok(RestrictedProblem { problem: sub, sources, targets, mass, plan: Some(sub_plan) })
}

/// Restriction that may only drop negligible mass on either side.
pub fn restrict_full_mass(
    problem: &Problem,
    keep_sources: &[usize],
    keep_targets: &[usize],
) -> Result<RestrictedProblem, DecomposeError> {
    check_indices(keep_sources, problem.n())?;
    check_indices(keep_targets, problem.m())?;
    let mut sources = keep_sources.to_vec();
    sources.sort_unstable();
    sources.dedup();
    let mut targets = keep_targets.to_vec();
    targets.sort_unstable();
    targets.dedup();
    let kept_mu: f64 = sources.iter().map(|&i| problem.source().weight(i)).sum();
    let kept_nu: f64 = targets.iter().map(|&j| problem.target().weight(j)).sum();
    let lost = (problem.source().total_mass() - kept_mu).max(problem.target().total_mass() - kept_nu);
    if lost > problem.tolerances().mass {
        return Err(DecomposeError::MassLoss(lost));
    }
    let sw = normalized(sources.iter().map(|&i| problem.source().weight(i)).collect());
    let tw = normalized(targets.iter().map(|&j| problem.target().weight(j)).collect());
    let sub = problem.subproblem(&sources, &targets, sw, tw)?;
    Ok(RestrictedProblem { problem: sub, sources, targets, mass: kept_mu, plan: None })
}

/// Extends a c-concave pair on a restricted problem to the whole point set.
pub fn extend_potential(restricted: &RestrictedProblem, pair: &PotentialPair, full: &Problem) -> PotentialPair {
    let mut f = vec![f64::NEG_INFINITY; full.n()];
    for (k, &i) in restricted.sources.iter().enumerate() {
        f[i] = pair.f[k];
    }
    let g = c_transform(&f, full, Direction::ToTarget).expect("finite values");
    let f = c_transform(&g, full, Direction::ToSource).expect("finite values");
    PotentialPair { f, g }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentPotential {
    pub component: usize,
    pub sources: Vec<usize>,
    pub targets: Vec<usize>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub duality: DualityReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialDecomposition {
    pub components: Vec<ComponentPotential>,
    /// Zero-mass source components that were skipped.
    pub skipped: Vec<usize>,
}

/// Restricts an optimal pair to every positive-mass source component and
/// verifies it is optimal for the restricted problem.
pub fn decompose_potential(
    pair: &PotentialPair,
    decomposition: &ComponentDecomposition,
    problem: &Problem,
    plan: &TransportPlan,
) -> Result<PotentialDecomposition, DecomposeError> {
    let mut components = Vec::new();
    let mut skipped = Vec::new();
    for (k, group) in decomposition.source.groups.iter().enumerate() {
        let r = match restrict_partial(problem, plan, group) {
            Ok(r) => r,
            Err(DecomposeError::ZeroMassComponent(_)) => {
                log::warn!("skipping zero-mass source component {k}");
                skipped.push(k);
                continue;
            }
            Err(e) => return Err(e),
        };
        let sub = r.restrict_pair(pair);
        let sub_plan = r.plan.as_ref().expect("partial restriction carries a plan");
        let duality = verify_duality(sub_plan, &sub, &r.problem)
            .expect("restricted shapes agree by construction");
        components.push(ComponentPotential {
            component: k,
            sources: r.sources,
            targets: r.targets,
            f: sub.f,
            g: sub.g,
            duality,
        });
    }
    Ok(PotentialDecomposition { components, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::CostSpec;
    use crate::decompose::{DecompositionMethod, Partition};
    use crate::measure::DiscreteMeasure;
    use crate::solver::solve;

    fn clusters() -> Problem {
        let mu = DiscreteMeasure::uniform(vec![vec![0.0], vec![0.2], vec![5.0], vec![5.3]]).unwrap();
        let nu = DiscreteMeasure::uniform(vec![vec![0.1], vec![0.3], vec![5.1], vec![5.2]]).unwrap();
        Problem::new(mu, nu, CostSpec::squared_euclidean()).unwrap()
    }

    #[test]
    fn full_component_reproduces_problem() {
        let p = clusters();
        let r = solve(&p).unwrap();
        let all: Vec<usize> = (0..4).collect();
        let sub = restrict_partial(&p, &r.plan, &all).unwrap();
        assert_eq!(sub.targets, all);
        assert_eq!(sub.problem.source().weights(), p.source().weights());
        for (a, b) in sub.problem.target().weights().iter().zip(p.target().weights()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn restriction_preserves_optimality() {
        let p = clusters();
        let r = solve(&p).unwrap();
        let d = crate::decompose::ComponentDecomposition::from_measures(
            p.source(),
            p.target(),
            DecompositionMethod::EpsilonGraph { epsilon: 1.0 },
        )
        .unwrap();
        let pd = decompose_potential(&r.pair, &d, &p, &r.plan).unwrap();
        assert_eq!(pd.components.len(), 2);
        for c in &pd.components {
            assert!(c.duality.optimal, "{c:?}");
        }
    }

    #[test]
    fn zero_mass_component_is_skipped() {
        let mu = DiscreteMeasure::new(vec![vec![0.0], vec![9.0]], vec![1.0, 0.0]).unwrap();
        let nu = DiscreteMeasure::new(vec![vec![1.0]], vec![1.0]).unwrap();
        let p = Problem::new(mu, nu, CostSpec::squared_euclidean()).unwrap();
        let r = solve(&p).unwrap();
        let d = crate::decompose::ComponentDecomposition::new(Partition::singletons(2), Partition::singletons(1));
        let pd = decompose_potential(&r.pair, &d, &p, &r.plan).unwrap();
        assert_eq!(pd.skipped, vec![1]);
    }

    #[test]
    fn full_mass_restriction_and_extension() {
        let mu = DiscreteMeasure::new(vec![vec![0.0], vec![1.0], vec![7.0]], vec![0.5, 0.5, 0.0]).unwrap();
        let nu = DiscreteMeasure::uniform(vec![vec![0.0], vec![1.0]]).unwrap();
        let p = Problem::new(mu, nu, CostSpec::squared_euclidean()).unwrap();
        assert!(matches!(restrict_full_mass(&p, &[0], &[0, 1]), Err(DecomposeError::MassLoss(_))));
        let sub = restrict_full_mass(&p, &[0, 1], &[0, 1]).unwrap();
        let r = solve(&sub.problem).unwrap();
        let ext = extend_potential(&sub, &r.pair, &p);
        assert_eq!(&ext.f[..2], &r.pair.f[..]);
        let full = solve(&p).unwrap();
        assert!(verify_duality(&full.plan, &ext, &p).unwrap().optimal);
    }
}
