//! Exact discrete probability primitives, model specifications and identifiability.

mod dist;
mod spec;

pub use dist::{JointDist, LabeledMass, SignalDist, SignalSpace};
pub use spec::{
    check_technical_condition, coalition_refinement, is_source_identifiable, lookup_source,
    membership_index, shared_distributions, IdentifiabilityReport, ModelSpec, Prior,
    RelevanceViolation, SharedWitness, WitnessRecord,
};

#[cfg(test)]
mod tests;
