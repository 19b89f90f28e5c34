//! Regularity diagnostics: regions of dominated cost, their limits along
//! escaping targets, escape of transported mass, and the gradient identity
//! between a potential and the cost at interior support points.

mod escape;
mod gradient;
mod grid;
mod region;

pub use escape::{escape_diagnostic, EscapeDiagnostic};
pub use gradient::{gradient_identity_check, GradientCheckReport, GradientSample};
pub use grid::{detect_grid, regular_grid, write_csv, Grid};
pub use region::{asymptotic_region, dominated_region, AsymptoticRegion, DominatedCostRegion};
