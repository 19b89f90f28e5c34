//! Certificates of uniqueness for Kantorovich potentials in finite
//! optimal transport.
//!
//! The crate solves discrete transport problems exactly (network simplex,
//! in `f64` or exact rationals), decides whether the optimal potential pair
//! is unique up to an additive constant, and produces either a structural
//! certificate or an explicit pair of distinct optimal potentials. Two
//! independent oracles (an LP over the optimal dual face and a max-flow
//! based tight-graph test) cross-check every verdict on finite inputs.

pub mod cost;
pub mod decompose;
pub mod duality;
pub mod error;
pub mod measure;
pub mod plan;
pub mod problem;
pub mod regularity;
pub mod solver;
pub mod tolerance;
pub mod uniqueness;

pub use cost::{ClosedFormCost, CostSpec, Profile};
pub use decompose::{ComponentDecomposition, DecompositionMethod, Partition};
pub use duality::{c_transform, double_transform_residual, subdifferential_of, verify_duality, Direction, PotentialPair};
pub use error::Error;
pub use measure::DiscreteMeasure;
pub use plan::{PlanEntry, TransportPlan};
pub use problem::Problem;
pub use solver::{solve, SolveResult};
pub use tolerance::Tolerances;
