//! Contact links between source components and offset propagation.
//!
//! Two source components touching the same target point must have
//! potentials whose additive offsets differ by a fixed amount. Offsets are
//! propagated along a spanning forest of these links; every remaining link
//! closes a cycle and is checked for consistency.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::decompose::ComponentDecomposition;
use crate::error::UniquenessError;
use crate::measure::euclidean;
use crate::plan::TransportPlan;
use crate::problem::Problem;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Contact {
    /// Both components send mass to this target point.
    Point { target: usize },
    /// Nearest pair of partner points inside an asserted-connected target
    /// component; a finite stand-in for a shared closure point.
    Approximate { first_target: usize, second_target: usize, distance: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContactLink {
    pub first: usize,
    pub second: usize,
    pub target_component: usize,
    pub contact: Contact,
    /// Source point of `first` sending mass to the contact.
    pub first_source: usize,
    pub second_source: usize,
}

impl ContactLink {
    pub fn is_exact(&self) -> bool {
        matches!(self.contact, Contact::Point { .. })
    }

    fn targets(&self) -> (usize, usize) {
        match self.contact {
            Contact::Point { target } => (target, target),
            Contact::Approximate { first_target, second_target, .. } => (first_target, second_target),
        }
    }
}

/// Links between source components of `decomposition` under `plan`.
pub fn build_contact_links(
    problem: &Problem,
    plan: &TransportPlan,
    decomposition: &ComponentDecomposition,
) -> Vec<ContactLink> {
    let src = &decomposition.source.membership;
    let tgt = &decomposition.target.membership;
    // Per target point: component -> lowest source index sending mass.
    let mut senders: Vec<BTreeMap<usize, usize>> = vec![BTreeMap::new(); problem.m()];
    for e in plan.entries() {
        senders[e.j].entry(src[e.i]).or_insert(e.i);
    }
    let mut links = Vec::new();
    let mut linked: std::collections::BTreeSet<(usize, usize, usize)> = Default::default();
    for (j, s) in senders.iter().enumerate() {
        let comps: Vec<(usize, usize)> = s.iter().map(|(&c, &x)| (c, x)).collect();
        for a in 0..comps.len() {
            for b in a + 1..comps.len() {
                links.push(ContactLink {
                    first: comps[a].0,
                    second: comps[b].0,
                    target_component: tgt[j],
                    contact: Contact::Point { target: j },
                    first_source: comps[a].1,
                    second_source: comps[b].1,
                });
                linked.insert((comps[a].0, comps[b].0, tgt[j]));
            }
        }
    }
    for (tc, group) in decomposition.target.groups.iter().enumerate() {
        if !decomposition.target_asserted[tc] {
            continue;
        }
        // Partner targets of each source component inside this target component.
        let mut partners: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &j in group {
            for &c in senders[j].keys() {
                partners.entry(c).or_default().push(j);
            }
        }
        let comps: Vec<usize> = partners.keys().copied().collect();
        for a in 0..comps.len() {
            for b in a + 1..comps.len() {
                let (ca, cb) = (comps[a], comps[b]);
                if linked.contains(&(ca, cb, tc)) {
                    continue;
                }
                let mut best = (f64::INFINITY, 0, 0);
                for &ya in &partners[&ca] {
                    for &yb in &partners[&cb] {
                        let d = euclidean(problem.target().point(ya), problem.target().point(yb));
                        if d < best.0 {
                            best = (d, ya, yb);
                        }
                    }
                }
                let (distance, ya, yb) = best;
                links.push(ContactLink {
                    first: ca,
                    second: cb,
                    target_component: tc,
                    contact: Contact::Approximate { first_target: ya, second_target: yb, distance },
                    first_source: senders[ya][&ca],
                    second_source: senders[yb][&cb],
                });
            }
        }
    }
    links.sort_by(|x, y| {
        (x.first, x.second, x.target_component, !x.is_exact(), x.targets())
            .cmp(&(y.first, y.second, y.target_component, !y.is_exact(), y.targets()))
    });
    links
}

/// Blocks of positive components connected by links, ordered by first member.
pub fn link_blocks(links: &[ContactLink], positive: &[bool]) -> Vec<Vec<usize>> {
    let mut dsu = crate::decompose::Dsu::new(positive.len());
    for l in links {
        dsu.union(l.first, l.second);
    }
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; positive.len()];
    for c in (0..positive.len()).filter(|&c| positive[c]) {
        let r = dsu.find(c);
        if slot[r] == usize::MAX {
            slot[r] = blocks.len();
            blocks.push(Vec::new());
        }
        blocks[slot[r]].push(c);
    }
    blocks
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpanningLink {
    pub link: ContactLink,
    /// `a_first - a_second`.
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OffsetPropagation {
    /// Offset per source component; `None` where no potential is given.
    pub offsets: Vec<Option<f64>>,
    pub blocks: Vec<Vec<usize>>,
    pub spanning: Vec<SpanningLink>,
    /// Largest cycle mismatch over checked (exact, both-unique) links.
    pub cycle_discrepancy: f64,
    /// Largest cycle mismatch over links excluded from the check.
    pub unchecked_discrepancy: f64,
}

/// `a_i1 - a_i2 = (c(x, y) - f_i1(x)) - (c(x', y') - f_i2(x'))`.
fn link_delta(problem: &Problem, link: &ContactLink, potentials: &[Option<Vec<f64>>]) -> Option<f64> {
    let fa = potentials[link.first].as_ref()?;
    let fb = potentials[link.second].as_ref()?;
    let (ya, yb) = link.targets();
    let (xa, xb) = (link.first_source, link.second_source);
    Some((problem.cost(xa, ya) - fa[xa]) - (problem.cost(xb, yb) - fb[xb]))
}

/// Propagates offsets over a BFS spanning forest of the link graph.
///
/// `potentials[k]` holds component `k`'s restricted potential indexed by
/// original source index. `exact[k]` marks components whose potential is
/// known to be unique; only links between two such components with a point
/// contact take part in the cycle check.
pub fn propagate_offsets(
    problem: &Problem,
    links: &[ContactLink],
    potentials: &[Option<Vec<f64>>],
    exact: &[bool],
) -> Result<OffsetPropagation, UniquenessError> {
    let k = potentials.len();
    let positive: Vec<bool> = potentials.iter().map(|p| p.is_some()).collect();
    let usable: Vec<(usize, f64)> = links
        .iter()
        .enumerate()
        .filter_map(|(idx, l)| link_delta(problem, l, potentials).map(|d| (idx, d)))
        .collect();
    let mut adj: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); k];
    for &(idx, d) in &usable {
        let l = &links[idx];
        adj[l.first].push((l.second, idx, d));
        adj[l.second].push((l.first, idx, d));
    }
    let mut offsets: Vec<Option<f64>> = vec![None; k];
    let mut tree = vec![false; links.len()];
    let mut spanning = Vec::new();
    let mut blocks = Vec::new();
    for root in (0..k).filter(|&c| positive[c]) {
        if offsets[root].is_some() {
            continue;
        }
        offsets[root] = Some(0.0);
        let mut block = vec![root];
        let mut q = VecDeque::from([root]);
        while let Some(u) = q.pop_front() {
            let au = offsets[u].expect("visited");
            for &(v, idx, d) in &adj[u] {
                if offsets[v].is_some() {
                    continue;
                }
                let l = &links[idx];
                offsets[v] = Some(if l.first == u { au - d } else { au + d });
                tree[idx] = true;
                spanning.push(SpanningLink { link: *l, delta: d });
                block.push(v);
                q.push_back(v);
            }
        }
        block.sort_unstable();
        blocks.push(block);
    }
    let tol = problem.tight_tol();
    let mut cycle_discrepancy: f64 = 0.0;
    let mut unchecked_discrepancy: f64 = 0.0;
    for &(idx, d) in &usable {
        if tree[idx] {
            continue;
        }
        let l = &links[idx];
        let mismatch = ((offsets[l.first].unwrap() - offsets[l.second].unwrap()) - d).abs();
        if l.is_exact() && exact[l.first] && exact[l.second] {
            if mismatch > tol {
                return Err(UniquenessError::InconsistentCycle {
                    first: l.first,
                    second: l.second,
                    discrepancy: mismatch,
                });
            }
            cycle_discrepancy = cycle_discrepancy.max(mismatch);
        } else {
            unchecked_discrepancy = unchecked_discrepancy.max(mismatch);
        }
    }
    Ok(OffsetPropagation { offsets, blocks, spanning, cycle_discrepancy, unchecked_discrepancy })
}

/// `f = f_i + a_i` on each component; `NaN` where undefined.
pub fn glue(potentials: &[Option<Vec<f64>>], offsets: &[Option<f64>], membership: &[usize]) -> Vec<f64> {
    membership
        .iter()
        .enumerate()
        .map(|(x, &c)| match (&potentials[c], offsets[c]) {
            (Some(f), Some(a)) => f[x] + a,
            _ => f64::NAN,
        })
        .collect()
}
