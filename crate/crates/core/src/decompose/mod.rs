//! Decomposition of the supports into components, and restriction of
//! problems and potentials to them.

mod dsu;
mod restrict;

use serde::{Deserialize, Serialize};

pub use dsu::Dsu;
pub use restrict::{
    decompose_potential, extend_potential, restrict_full_mass, restrict_partial, ComponentPotential,
    PotentialDecomposition, RestrictedProblem,
};

use crate::error::DecomposeError;
use crate::measure::{euclidean, DiscreteMeasure};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum DecompositionMethod {
    ExplicitLabels,
    /// Connected components of the graph joining points within Euclidean distance `epsilon`.
    EpsilonGraph { epsilon: f64 },
    Singletons,
}

/// A partition of one point set, groups ordered by smallest member.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub groups: Vec<Vec<usize>>,
    pub membership: Vec<usize>,
}

impl Partition {
    pub fn from_groups(mut groups: Vec<Vec<usize>>, len: usize) -> Self {
        for g in &mut groups {
            g.sort_unstable();
        }
        groups.retain(|g| !g.is_empty());
        groups.sort_by_key(|g| g[0]);
        let mut membership = vec![usize::MAX; len];
        for (k, g) in groups.iter().enumerate() {
            for &i in g {
                membership[i] = k;
            }
        }
        assert!(membership.iter().all(|&k| k != usize::MAX), "groups must cover all points");
        Self { groups, membership }
    }

    pub fn singletons(len: usize) -> Self {
        Self::from_groups((0..len).map(|i| vec![i]).collect(), len)
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn masses(&self, weights: &[f64]) -> Vec<f64> {
        self.groups.iter().map(|g| g.iter().map(|&i| weights[i]).sum()).collect()
    }
}

/// Partition a measure's point set.
pub fn decompose(measure: &DiscreteMeasure, method: DecompositionMethod) -> Result<Partition, DecomposeError> {
    let n = measure.len();
    match method {
        DecompositionMethod::ExplicitLabels => {
            let labels = measure.labels().ok_or(DecomposeError::MissingLabels)?;
            let k = labels.iter().copied().max().map_or(0, |m| m + 1);
            let mut groups = vec![Vec::new(); k];
            for (i, &l) in labels.iter().enumerate() {
                groups[l].push(i);
            }
            Ok(Partition::from_groups(groups, n))
        }
        DecompositionMethod::EpsilonGraph { epsilon } => {
            if !(epsilon.is_finite() && epsilon > 0.0) {
                return Err(DecomposeError::InvalidEpsilon(epsilon));
            }
            let mut dsu = Dsu::new(n);
            for a in 0..n {
                for b in a + 1..n {
                    if euclidean(measure.point(a), measure.point(b)) <= epsilon {
                        dsu.union(a, b);
                    }
                }
            }
            Ok(Partition::from_groups(dsu.groups(), n))
        }
        DecompositionMethod::Singletons => Ok(Partition::singletons(n)),
    }
}

/// Source and target partitions together with continuum assertions.
///
/// A component flagged as asserted-connected stands in for a connected
/// continuum support: it is treated as carrying unique potentials and is
/// linked to neighbours through approximate contacts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentDecomposition {
    pub source: Partition,
    pub target: Partition,
    pub source_asserted: Vec<bool>,
    pub target_asserted: Vec<bool>,
}

impl ComponentDecomposition {
    pub fn new(source: Partition, target: Partition) -> Self {
        let (ks, kt) = (source.len(), target.len());
        Self { source, target, source_asserted: vec![false; ks], target_asserted: vec![false; kt] }
    }

    pub fn from_measures(
        mu: &DiscreteMeasure,
        nu: &DiscreteMeasure,
        method: DecompositionMethod,
    ) -> Result<Self, DecomposeError> {
        Ok(Self::new(decompose(mu, method)?, decompose(nu, method)?))
    }

    pub fn singletons(n: usize, m: usize) -> Self {
        Self::new(Partition::singletons(n), Partition::singletons(m))
    }

    pub fn assert_sources_connected(mut self) -> Self {
        self.source_asserted = vec![true; self.source.len()];
        self
    }

    pub fn assert_targets_connected(mut self) -> Self {
        self.target_asserted = vec![true; self.target.len()];
        self
    }

    pub fn has_assertions(&self) -> bool {
        self.source_asserted.iter().chain(&self.target_asserted).any(|&a| a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> DiscreteMeasure {
        DiscreteMeasure::uniform(xs.iter().map(|&x| vec![x]).collect()).unwrap()
    }

    #[test]
    fn epsilon_graph_clusters() {
        let m = line(&[0.0, 0.1, 5.0, 0.2, 5.05]);
        let p = decompose(&m, DecompositionMethod::EpsilonGraph { epsilon: 0.15 }).unwrap();
        assert_eq!(p.groups, vec![vec![0, 1, 3], vec![2, 4]]);
        assert_eq!(p.membership, vec![0, 0, 1, 0, 1]);
        assert!(matches!(
            decompose(&m, DecompositionMethod::EpsilonGraph { epsilon: -1.0 }),
            Err(DecomposeError::InvalidEpsilon(_))
        ));
    }

    #[test]
    fn labels() {
        let m = line(&[0.0, 1.0, 2.0]);
        assert_eq!(decompose(&m, DecompositionMethod::ExplicitLabels), Err(DecomposeError::MissingLabels));
        let m = m.with_labels(vec![1, 0, 1]).unwrap();
        let p = decompose(&m, DecompositionMethod::ExplicitLabels).unwrap();
        assert_eq!(p.groups, vec![vec![0, 2], vec![1]]);
    }

    #[test]
    fn masses() {
        let p = Partition::from_groups(vec![vec![2], vec![0, 1]], 3);
        assert_eq!(p.groups, vec![vec![0, 1], vec![2]]);
        assert_eq!(p.masses(&[0.25, 0.25, 0.5]), vec![0.5, 0.5]);
    }
}
