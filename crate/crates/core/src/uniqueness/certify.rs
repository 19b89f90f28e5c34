//! Structural uniqueness certificate.
//!
//! The verdict is computed on a maximal-support optimal plan. Level A uses
//! the given decomposition: every component must carry unique potentials
//! (singletons, asserted-connected components, or components certified
//! recursively) and the contact links must connect all components. If that
//! fails, level B refines every non-asserted component into singletons, where
//! link connectivity is exact. A disconnected level B yields a verified
//! witness pair; if none can be built the verdict is inconclusive.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::enrich::enrich_plan;
use super::flow::{marginal_degeneracy_check, plan_degeneracy_check, ComponentFlowGraph, MarginalDegeneracy, PlanDegeneracy};
use super::links::{build_contact_links, glue, link_blocks, propagate_offsets, ContactLink, SpanningLink};
use super::witness::{block_shift_witness, WitnessPair};
use crate::decompose::{restrict_partial, ComponentDecomposition, Partition};
use crate::duality::PotentialPair;
use crate::error::{DecomposeError, UniquenessError};
use crate::problem::Problem;
use crate::solver::{solve, SolveResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Unique,
    NonUnique,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateLevel {
    GivenDecomposition,
    SingletonRefinement,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ComponentStatus {
    ZeroMass,
    Singleton,
    AssertedConnected,
    Certified { verdict: Verdict },
}

impl ComponentStatus {
    fn is_unique(&self) -> bool {
        !matches!(self, ComponentStatus::Certified { verdict } if *verdict != Verdict::Unique)
    }

    fn is_exact(&self) -> bool {
        matches!(self, ComponentStatus::Singleton | ComponentStatus::Certified { verdict: Verdict::Unique })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentVerdict {
    pub component: usize,
    pub mass: f64,
    pub points: usize,
    pub status: ComponentStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegeneracyEvidence {
    pub solver_plan: PlanDegeneracy,
    pub enriched_plan: PlanDegeneracy,
    /// `None` when the component count exceeds the enumeration cap.
    pub marginal: Option<MarginalDegeneracy>,
    pub knife_edge: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assumption {
    pub item: String,
    pub treatment: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniquenessCertificate {
    pub verdict: Verdict,
    pub level: CertificateLevel,
    pub cost: f64,
    pub pair: PotentialPair,
    pub degeneracy: DegeneracyEvidence,
    /// Components of the given decomposition.
    pub components: Vec<ComponentVerdict>,
    /// Source partition the verdict was reached on.
    pub source_partition: Partition,
    pub links: Vec<ContactLink>,
    pub spanning_links: Vec<SpanningLink>,
    pub offsets: Vec<Option<f64>>,
    pub free_blocks: Vec<Vec<usize>>,
    pub freedom_dim: usize,
    /// Largest gap between glued component potentials and the solver's `f`.
    pub glue_deviation: Option<f64>,
    pub cycle_discrepancy: f64,
    pub enrichment_added: usize,
    pub witness: Option<WitnessPair>,
    pub assumptions: Vec<Assumption>,
    pub warnings: Vec<String>,
}

/// Solves the problem and certifies the result.
pub fn certify(problem: &Problem, decomposition: &ComponentDecomposition) -> Result<UniquenessCertificate, UniquenessError> {
    let solution = solve(problem)?;
    certify_solution(problem, decomposition, &solution)
}

pub fn certify_solution(
    problem: &Problem,
    decomposition: &ComponentDecomposition,
    solution: &SolveResult,
) -> Result<UniquenessCertificate, UniquenessError> {
    check_shape(problem, decomposition)?;
    certify_at_depth(problem, decomposition, solution, 0)
}

fn check_shape(problem: &Problem, d: &ComponentDecomposition) -> Result<(), UniquenessError> {
    if d.source.membership.len() != problem.n() {
        return Err(DecomposeError::IndexOutOfRange { index: d.source.membership.len(), len: problem.n() }.into());
    }
    if d.target.membership.len() != problem.m() {
        return Err(DecomposeError::IndexOutOfRange { index: d.target.membership.len(), len: problem.m() }.into());
    }
    Ok(())
}

/// Per-component potential indexed by original source index, `NaN` elsewhere.
type Potential = Option<Vec<f64>>;

struct Level {
    partition: Partition,
    statuses: Vec<ComponentStatus>,
    potentials: Vec<Potential>,
    links: Vec<ContactLink>,
    blocks: Vec<Vec<usize>>,
}

fn certify_at_depth(
    problem: &Problem,
    decomposition: &ComponentDecomposition,
    solution: &SolveResult,
    depth: usize,
) -> Result<UniquenessCertificate, UniquenessError> {
    let tol = *problem.tolerances();
    let mu = problem.source().weights();
    let pair = &solution.pair;
    let enriched = enrich_plan(problem, &solution.plan, pair);
    let plan = &enriched.plan;
    let mut warnings = Vec::new();

    let graph = ComponentFlowGraph::from_plan(plan, decomposition, problem);
    let raw_graph = ComponentFlowGraph::from_plan(&solution.plan, decomposition, problem);
    let marginal = match marginal_degeneracy_check(&graph.source_mass, &graph.target_mass, tol.mass) {
        Ok(m) => Some(m),
        Err(UniquenessError::TooManyComponents { count, cap }) => {
            warnings.push(format!("marginal collision search skipped: {count} components exceed {cap}"));
            None
        }
        Err(e) => return Err(e),
    };
    let knife_edge = marginal.as_ref().is_some_and(|m| m.is_knife_edge(tol.mass));
    if knife_edge {
        warnings.push("component masses collide within 10x the mass tolerance".into());
    }
    let degeneracy = DegeneracyEvidence {
        solver_plan: plan_degeneracy_check(&raw_graph),
        enriched_plan: plan_degeneracy_check(&graph),
        marginal,
        knife_edge,
    };

    let groups = &decomposition.source.groups;
    let masses = decomposition.source.masses(mu);
    let statuses_a: Vec<Option<ComponentStatus>> = groups
        .iter()
        .enumerate()
        .map(|(c, g)| {
            let positive = g.iter().filter(|&&i| mu[i] > 0.0).count();
            if masses[c] <= tol.mass || positive == 0 {
                Some(ComponentStatus::ZeroMass)
            } else if positive == 1 {
                Some(ComponentStatus::Singleton)
            } else if decomposition.source_asserted[c] {
                Some(ComponentStatus::AssertedConnected)
            } else {
                None
            }
        })
        .collect();

    // Independent restricted solves (and recursive certificates) per component.
    let solved: Vec<Result<(Option<ComponentStatus>, Potential), UniquenessError>> = groups
        .par_iter()
        .enumerate()
        .map(|(c, g)| match statuses_a[c] {
            Some(ComponentStatus::ZeroMass) => Ok((Some(ComponentStatus::ZeroMass), None)),
            Some(ComponentStatus::Singleton) => Ok((Some(ComponentStatus::Singleton), Some(singleton_potential(problem, g)))),
            known => {
                let r = restrict_partial(problem, plan, g)?;
                let sub = solve(&r.problem)?;
                let mut f = vec![f64::NAN; problem.n()];
                for (k, &i) in r.sources.iter().enumerate() {
                    f[i] = sub.pair.f[k];
                }
                let status = match known {
                    Some(s) => s,
                    None => {
                        let sub_d = restricted_decomposition(decomposition, r.sources.len(), &r.targets);
                        let cert = certify_at_depth(&r.problem, &sub_d, &sub, depth + 1)?;
                        ComponentStatus::Certified { verdict: cert.verdict }
                    }
                };
                Ok((Some(status), Some(f)))
            }
        })
        .collect();
    let mut statuses = Vec::with_capacity(groups.len());
    let mut potentials = Vec::with_capacity(groups.len());
    for s in solved {
        let (status, pot) = s?;
        statuses.push(status.expect("status resolved"));
        potentials.push(pot);
    }
    let components: Vec<ComponentVerdict> = groups
        .iter()
        .enumerate()
        .map(|(c, g)| ComponentVerdict { component: c, mass: masses[c], points: g.len(), status: statuses[c] })
        .collect();

    let level_a = make_level(problem, plan, decomposition.clone(), statuses.clone(), potentials.clone());
    let a_ok = statuses.iter().all(|s| s.is_unique()) && level_a.blocks.len() == 1;
    let needs_refinement = statuses.iter().any(|s| matches!(s, ComponentStatus::Certified { .. }));
    let (level, chosen) = if a_ok || !needs_refinement {
        (CertificateLevel::GivenDecomposition, level_a)
    } else {
        let (d_b, st_b, pot_b) = refine(problem, decomposition, &statuses, &potentials);
        (CertificateLevel::SingletonRefinement, make_level(problem, plan, d_b, st_b, pot_b))
    };
    let all_unique = chosen.statuses.iter().all(|s| s.is_unique());

    let exact: Vec<bool> = chosen.statuses.iter().map(|s| s.is_exact()).collect();
    let (spanning_links, offsets, cycle_discrepancy, cycle_ok) =
        match propagate_offsets(problem, &chosen.links, &chosen.potentials, &exact) {
            Ok(p) => {
                if p.unchecked_discrepancy > problem.tight_tol() {
                    warnings.push(format!(
                        "approximate contacts disagree with restricted potentials by up to {:.3e}",
                        p.unchecked_discrepancy
                    ));
                }
                (p.spanning, p.offsets, p.cycle_discrepancy, true)
            }
            Err(UniquenessError::InconsistentCycle { first, second, discrepancy }) => {
                warnings.push(format!(
                    "offset cycle through components {first} and {second} is off by {discrepancy:.3e}"
                ));
                (Vec::new(), vec![None; chosen.partition.len()], discrepancy, false)
            }
            Err(e) => return Err(e),
        };

    let connected = chosen.blocks.len() == 1;
    let mut glue_deviation = None;
    let mut witness = None;
    let verdict = if connected && all_unique && cycle_ok {
        let glued = glue(&chosen.potentials, &offsets, &chosen.partition.membership);
        glue_deviation = Some(
            (0..problem.n())
                .filter(|&i| mu[i] > 0.0)
                .map(|i| (glued[i] - pair.f[i]).abs())
                .fold(0.0, f64::max),
        );
        Verdict::Unique
    } else if connected {
        Verdict::Inconclusive
    } else if depth > 0 {
        Verdict::NonUnique
    } else {
        let mut block_of_source = vec![None; problem.n()];
        for (b, block) in chosen.blocks.iter().enumerate() {
            for &c in block {
                for &i in &chosen.partition.groups[c] {
                    if mu[i] > 0.0 {
                        block_of_source[i] = Some(b);
                    }
                }
            }
        }
        // Verified against the vertex plan: enrichment may use edges that are only
        // tight within tolerance, which can push the enriched cost past the gap bound.
        witness = block_shift_witness(problem, &solution.plan, pair, &block_of_source, chosen.blocks.len());
        if witness.is_some() {
            Verdict::NonUnique
        } else {
            warnings.push("links are disconnected but no verified witness pair was found".into());
            Verdict::Inconclusive
        }
    };

    Ok(UniquenessCertificate {
        verdict,
        level,
        cost: solution.cost,
        pair: pair.clone(),
        degeneracy,
        components,
        freedom_dim: chosen.blocks.len().saturating_sub(1),
        free_blocks: if connected { Vec::new() } else { chosen.blocks.clone() },
        source_partition: chosen.partition,
        links: chosen.links,
        spanning_links,
        offsets,
        glue_deviation,
        cycle_discrepancy,
        enrichment_added: enriched.added.len(),
        witness,
        assumptions: assumptions(decomposition),
        warnings,
    })
}

fn singleton_potential(problem: &Problem, group: &[usize]) -> Vec<f64> {
    let mut f = vec![f64::NAN; problem.n()];
    for &i in group {
        if problem.source().weight(i) > 0.0 {
            f[i] = 0.0;
        }
    }
    f
}

fn make_level(
    problem: &Problem,
    plan: &crate::plan::TransportPlan,
    d: ComponentDecomposition,
    statuses: Vec<ComponentStatus>,
    potentials: Vec<Potential>,
) -> Level {
    let links = build_contact_links(problem, plan, &d);
    let positive: Vec<bool> = statuses.iter().map(|s| *s != ComponentStatus::ZeroMass).collect();
    let blocks = link_blocks(&links, &positive);
    Level { partition: d.source, statuses, potentials, links, blocks }
}

/// Splits every non-asserted component into singletons.
fn refine(
    problem: &Problem,
    d: &ComponentDecomposition,
    statuses: &[ComponentStatus],
    potentials: &[Potential],
) -> (ComponentDecomposition, Vec<ComponentStatus>, Vec<Potential>) {
    let mu = problem.source().weights();
    let mut parts: Vec<(Vec<usize>, bool, ComponentStatus, Potential)> = Vec::new();
    for (c, g) in d.source.groups.iter().enumerate() {
        if statuses[c] == ComponentStatus::AssertedConnected {
            parts.push((g.clone(), true, statuses[c], potentials[c].clone()));
            continue;
        }
        for &i in g {
            let (status, pot) = if mu[i] > 0.0 {
                (ComponentStatus::Singleton, Some(singleton_potential(problem, &[i])))
            } else {
                (ComponentStatus::ZeroMass, None)
            };
            parts.push((vec![i], false, status, pot));
        }
    }
    parts.sort_by_key(|p| p.0[0]);
    let source = Partition::from_groups(parts.iter().map(|p| p.0.clone()).collect(), problem.n());
    let mut refined = ComponentDecomposition::new(source, d.target.clone());
    refined.source_asserted = parts.iter().map(|p| p.1).collect();
    refined.target_asserted = d.target_asserted.clone();
    let statuses = parts.iter().map(|p| p.2).collect();
    let potentials = parts.into_iter().map(|p| p.3).collect();
    (refined, statuses, potentials)
}

/// Singleton sources and the original target components, on a restricted problem.
fn restricted_decomposition(d: &ComponentDecomposition, sources: usize, targets: &[usize]) -> ComponentDecomposition {
    let mut by_comp: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (k, &j) in targets.iter().enumerate() {
        by_comp.entry(d.target.membership[j]).or_default().push(k);
    }
    let asserted: Vec<bool> = by_comp.keys().map(|&c| d.target_asserted[c]).collect();
    let target = Partition::from_groups(by_comp.into_values().collect(), targets.len());
    let mut out = ComponentDecomposition::new(Partition::singletons(sources), target);
    out.target_asserted = asserted;
    out
}

fn assumptions(d: &ComponentDecomposition) -> Vec<Assumption> {
    let targets = if d.target_asserted.iter().any(|&a| a) {
        "finite-scale analogue: asserted by the caller for flagged target components, linked through nearest partner pairs"
    } else {
        "finite-scale analogue: components are linked only through shared target points"
    };
    let sources = if d.source_asserted.iter().any(|&a| a) {
        "finite-scale analogue: flagged source components are taken to carry unique potentials"
    } else {
        "not used: uniqueness inside source components is decided on the finite support"
    };
    vec![
        Assumption { item: "connectedness of target components".into(), treatment: targets.into() },
        Assumption { item: "connectedness of source components".into(), treatment: sources.into() },
        Assumption {
            item: "continuity of the c-transform".into(),
            treatment: "finite-scale analogue: discrete c-transform over the support".into(),
        },
    ]
}
