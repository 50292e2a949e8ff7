use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use num::{One, Signed, Zero};
use serde::Serialize;

use super::dist::{JointDist, SignalSpace};
use crate::error::{Error, Result};
use crate::rational::{fmt_q, Q};

/// Map from source values to finite sets of feasible joint signal distributions.
#[derive(Clone, Debug)]
pub struct ModelSpec {
    space: SignalSpace,
    values: Vec<String>,
    lsets: Vec<Vec<JointDist>>,
    characteristics: Vec<String>,
    identifiable: OnceLock<bool>,
}

impl PartialEq for ModelSpec {
    fn eq(&self, other: &Self) -> bool {
        self.space == other.space && self.values == other.values && self.lsets == other.lsets
    }
}

impl ModelSpec {
    /// Validates every distribution against `space` and merges duplicates within each set.
    pub fn new(space: SignalSpace, values: Vec<String>, lsets: Vec<Vec<JointDist>>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidSpec(format!(
                "source must take at least two values, got {}",
                values.len()
            )));
        }
        if values.iter().collect::<BTreeSet<_>>().len() != values.len() {
            return Err(Error::InvalidSpec("duplicate source value labels".into()));
        }
        if lsets.len() != values.len() {
            return Err(Error::InvalidSpec(format!(
                "{} feasible sets for {} source values",
                lsets.len(),
                values.len()
            )));
        }
        let mut merged = Vec::with_capacity(lsets.len());
        for (x, set) in lsets.into_iter().enumerate() {
            if set.is_empty() {
                return Err(Error::InvalidSpec(format!("feasible set of `{}` is empty", values[x])));
            }
            let mut seen = BTreeSet::new();
            let mut out = Vec::new();
            for d in set {
                d.validate(&space).map_err(|e| {
                    Error::InvalidSpec(format!("distribution for `{}`: {e}", values[x]))
                })?;
                if seen.insert(d.clone()) {
                    out.push(d);
                }
            }
            merged.push(out);
        }
        let n = space.n();
        Ok(ModelSpec {
            space,
            values,
            lsets: merged,
            characteristics: vec![String::new(); n],
            identifiable: OnceLock::new(),
        })
    }

    /// Attaches opaque per-observer metadata (e.g. positions); the model never interprets it.
    pub fn with_characteristics(mut self, c: Vec<String>) -> Result<Self> {
        if c.len() != self.space.n() {
            return Err(Error::Dimension { expected: self.space.n(), got: c.len() });
        }
        self.characteristics = c;
        Ok(self)
    }

    pub fn space(&self) -> &SignalSpace {
        &self.space
    }

    pub fn n(&self) -> usize {
        self.space.n()
    }

    pub fn values(&self) -> &[String] {
        &self.values
    }

    pub fn value_index(&self, label: &str) -> Option<usize> {
        self.values.iter().position(|v| v == label)
    }

    pub fn lset(&self, x: usize) -> &[JointDist] {
        &self.lsets[x]
    }

    pub fn lsets(&self) -> &[Vec<JointDist>] {
        &self.lsets
    }

    pub fn characteristics(&self) -> &[String] {
        &self.characteristics
    }

    /// All distinct distributions appearing anywhere in the spec.
    pub fn all_distributions(&self) -> Vec<JointDist> {
        let mut seen = BTreeSet::new();
        self.lsets.iter().flatten().filter(|d| seen.insert((*d).clone())).cloned().collect()
    }

    /// Every source value whose feasible set contains `d`.
    pub fn sources_of(&self, d: &JointDist) -> Vec<usize> {
        (0..self.values.len()).filter(|&x| self.lsets[x].contains(d)).collect()
    }

    /// Cached identifiability verdict.
    pub fn is_identifiable(&self) -> bool {
        *self.identifiable.get_or_init(|| is_source_identifiable(self).identifiable)
    }
}

/// Prior over source values, aligned with [`ModelSpec::values`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Prior {
    #[serde(serialize_with = "ser_qs")]
    probs: Vec<Q>,
}

fn ser_qs<S: serde::Serializer>(v: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for p in v {
        seq.serialize_element(&fmt_q(p))?;
    }
    seq.end()
}

impl Prior {
    pub fn new(probs: Vec<Q>) -> Result<Self> {
        if probs.iter().any(|p| p.is_negative()) {
            return Err(Error::InvalidDistribution("prior has a negative probability".into()));
        }
        let sum = probs.iter().fold(Q::zero(), |a, b| a + b);
        if !sum.is_one() {
            return Err(Error::Normalization { sum: fmt_q(&sum), deficit: fmt_q(&(Q::one() - sum)) });
        }
        Ok(Prior { probs })
    }

    pub fn uniform(k: usize) -> Self {
        Prior { probs: vec![Q::new(1.into(), (k as i64).into()); k] }
    }

    /// Checks the prior's support is a subset of the spec's value set.
    pub fn check_against(&self, m: &ModelSpec) -> Result<()> {
        if self.probs.len() != m.values().len() {
            return Err(Error::Dimension { expected: m.values().len(), got: self.probs.len() });
        }
        Ok(())
    }

    pub fn prob(&self, x: usize) -> &Q {
        &self.probs[x]
    }

    pub fn probs(&self) -> &[Q] {
        &self.probs
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.probs.iter().enumerate().filter(|(_, p)| p.is_positive()).map(|(x, _)| x)
    }
}

/// A pair of source values whose feasible sets share a distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct SharedWitness {
    pub x1: usize,
    pub x2: usize,
    pub dist: JointDist,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentifiabilityReport {
    pub identifiable: bool,
    pub witness: Option<SharedWitness>,
}

/// Pairwise-disjointness test of the feasible sets under exact distribution equality.
pub fn is_source_identifiable(m: &ModelSpec) -> IdentifiabilityReport {
    let witness = shared_distributions(m).into_iter().next();
    IdentifiabilityReport { identifiable: witness.is_none(), witness }
}

/// Every (x1 < x2, D) with D in both feasible sets, in lexicographic order.
pub fn shared_distributions(m: &ModelSpec) -> Vec<SharedWitness> {
    let sets: Vec<BTreeSet<&JointDist>> = m.lsets.iter().map(|s| s.iter().collect()).collect();
    let mut out = Vec::new();
    for x1 in 0..sets.len() {
        for x2 in x1 + 1..sets.len() {
            for d in &m.lsets[x1] {
                if sets[x2].contains(d) {
                    out.push(SharedWitness { x1, x2, dist: d.clone() });
                }
            }
        }
    }
    out
}

/// A violation of the stochastic-relevance condition: two in-support signals of one
/// observer inducing the same conditional on everyone else.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelevanceViolation {
    pub x: usize,
    pub dist_index: usize,
    pub observer: usize,
    pub signal: usize,
    pub other_signal: usize,
}

pub fn check_technical_condition(m: &ModelSpec) -> std::result::Result<(), RelevanceViolation> {
    for (x, set) in m.lsets.iter().enumerate() {
        for (k, d) in set.iter().enumerate() {
            for i in 0..m.n() {
                let marg = d.marginal(i).expect("validated arity");
                let conds: Vec<(usize, JointDist)> = marg
                    .keys()
                    .map(|&y| (y, d.conditional(i, y).expect("in support")))
                    .collect();
                for a in 0..conds.len() {
                    for b in a + 1..conds.len() {
                        if conds[a].1 == conds[b].1 {
                            return Err(RelevanceViolation {
                                x,
                                dist_index: k,
                                observer: i,
                                signal: conds[a].0,
                                other_signal: conds[b].0,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

/// Marginalizes every feasible set onto the observers outside `coalition`.
pub fn coalition_refinement(m: &ModelSpec, coalition: &BTreeSet<usize>) -> Result<ModelSpec> {
    if let Some(&bad) = coalition.iter().find(|&&i| i >= m.n()) {
        return Err(Error::ObserverOutOfRange { index: bad, n: m.n() });
    }
    let keep: Vec<usize> = (0..m.n()).filter(|i| !coalition.contains(i)).collect();
    if keep.is_empty() {
        return Err(Error::InvalidSpec("coalition covers every observer".into()));
    }
    if coalition.is_empty() {
        return Ok(m.clone());
    }
    let space = m.space.restrict(&keep)?;
    let lsets = m
        .lsets
        .iter()
        .map(|set| set.iter().map(|d| d.marginal_onto(&keep)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let chars = keep.iter().map(|&i| m.characteristics[i].clone()).collect();
    ModelSpec::new(space, m.values.clone(), lsets)?.with_characteristics(chars)
}

/// The unique source value whose feasible set contains `d`, or `None` (the sentinel).
pub fn lookup_source(m: &ModelSpec, d: &JointDist) -> Result<Option<usize>> {
    if !m.is_identifiable() {
        let w = is_source_identifiable(m).witness.expect("non-identifiable has witness");
        return Err(Error::NonIdentifiable(format!(
            "`{}` and `{}` share a distribution",
            m.values[w.x1], m.values[w.x2]
        )));
    }
    Ok(m.sources_of(d).into_iter().next())
}

/// Report-friendly view of a witness.
#[derive(Clone, Debug, Serialize)]
pub struct WitnessRecord {
    pub x1: String,
    pub x2: String,
    pub dist: Vec<super::dist::LabeledMass>,
}

impl SharedWitness {
    pub fn record(&self, m: &ModelSpec) -> WitnessRecord {
        WitnessRecord {
            x1: m.values[self.x1].clone(),
            x2: m.values[self.x2].clone(),
            dist: self.dist.to_labeled(m.space()),
        }
    }
}

/// Index from distribution to the source values containing it.
pub fn membership_index(m: &ModelSpec) -> BTreeMap<JointDist, Vec<usize>> {
    let mut idx: BTreeMap<JointDist, Vec<usize>> = BTreeMap::new();
    for (x, set) in m.lsets.iter().enumerate() {
        for d in set {
            idx.entry(d.clone()).or_default().push(x);
        }
    }
    idx
}
