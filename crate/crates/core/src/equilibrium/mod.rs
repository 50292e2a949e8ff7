//! Exact expected payoffs, deviation analysis and the equilibrium-level analyses.

mod analyses;
mod deviation;
mod payoff;

pub use analyses::*;
pub use deviation::{
    canonical_deviations, check_equilibrium, deviation_gaps, off_spec_distributions, overall_verdict, Change,
    Deviation, DeviationSet, DeviationTag, EquilibriumReport, GapRow, Verdict, GAP_TOLERANCE,
};
pub use payoff::{conditional_payoffs, expected_payoffs, Expectation, Player};

use crate::error::{Error, Result};
use crate::model::{JointDist, ModelSpec};
use crate::rational::Q;
use crate::strategy::{ObserverStrategy, SourceAction, StrategyProfile, XRule};

/// Truthful profile: the source induces `choices[x]` at `x` and reports it, observers are truthful.
pub fn truthful_profile(spec: &ModelSpec, choices: &[JointDist], c: Q) -> Result<StrategyProfile> {
    if !spec.is_identifiable() {
        return Err(Error::NonIdentifiable(
            "the truthful lookup of the value is undefined without identifiability".into(),
        ));
    }
    truthful_profile_with(spec, choices, c, XRule::Lookup)
}

/// Like [`truthful_profile`] with a chosen value-reporting rule for the observers.
pub fn truthful_profile_with(spec: &ModelSpec, choices: &[JointDist], c: Q, x: XRule) -> Result<StrategyProfile> {
    if choices.len() != spec.values().len() {
        return Err(Error::Dimension { expected: spec.values().len(), got: choices.len() });
    }
    let source = choices
        .iter()
        .enumerate()
        .map(|(x, d)| SourceAction::truthful(x, d.clone()))
        .collect();
    let p = StrategyProfile {
        source,
        observers: vec![ObserverStrategy::truthful_with(x); spec.n()],
        c,
    };
    p.validate(spec)?;
    for (x, d) in choices.iter().enumerate() {
        if !spec.lset(x).contains(d) {
            return Err(Error::InvalidProfile(format!(
                "truthful choice at {} is outside its feasible set",
                spec.values()[x]
            )));
        }
    }
    Ok(p)
}

/// First distribution of every feasible set.
pub fn first_choices(spec: &ModelSpec) -> Vec<JointDist> {
    spec.lsets().iter().map(|l| l[0].clone()).collect()
}

#[cfg(test)]
mod tests;
