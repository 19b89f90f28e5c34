//! Uniqueness of potentials: degeneracy tests, contact links, structural
//! certificates and explicit non-uniqueness witnesses.

mod certify;
mod enrich;
mod flow;
mod links;
mod witness;

pub use certify::{
    certify, certify_solution, Assumption, CertificateLevel, ComponentStatus, ComponentVerdict, DegeneracyEvidence,
    UniquenessCertificate, Verdict,
};
pub use enrich::{enrich_plan, EnrichedPlan};
pub use flow::{
    marginal_degeneracy_check, plan_degeneracy_check, ComponentFlowGraph, FlowEdge, MarginalDegeneracy, PlanDegeneracy,
    MARGINAL_CAP,
};
pub use links::{build_contact_links, glue, link_blocks, propagate_offsets, Contact, ContactLink, OffsetPropagation, SpanningLink};
pub use witness::{ambiguity_witness, block_shift_witness, AmbiguityOptions, AmbiguitySample, AmbiguityWitness, WitnessPair};
