use std::collections::BTreeMap;

use num::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{fmt_q, Q};

/// Per-observer finite ordered signal label sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SignalSpace {
    labels: Vec<Vec<String>>,
}

impl SignalSpace {
    /// A signal space for at least two observers.
    pub fn new(labels: Vec<Vec<String>>) -> Result<Self> {
        if labels.len() < 2 {
            return Err(Error::InvalidSpec(format!(
                "need at least 2 observers, got {}",
                labels.len()
            )));
        }
        Self::with_min_observers(labels, 2)
    }

    /// Signal space over the observers kept by a coalition refinement (may be a single observer).
    pub(crate) fn with_min_observers(labels: Vec<Vec<String>>, min: usize) -> Result<Self> {
        if labels.len() < min {
            return Err(Error::InvalidSpec(format!("need at least {min} observers")));
        }
        for (i, set) in labels.iter().enumerate() {
            if set.is_empty() {
                return Err(Error::InvalidSpec(format!("observer {i} has an empty signal set")));
            }
            let mut seen = std::collections::BTreeSet::new();
            for l in set {
                if !seen.insert(l) {
                    return Err(Error::InvalidSpec(format!(
                        "observer {i} has duplicate signal label `{l}`"
                    )));
                }
            }
        }
        Ok(SignalSpace { labels })
    }

    pub fn uniform_labels(n: usize, labels: &[&str]) -> Result<Self> {
        Self::new(vec![labels.iter().map(|s| s.to_string()).collect(); n])
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn size(&self, observer: usize) -> usize {
        self.labels[observer].len()
    }

    pub fn labels(&self, observer: usize) -> &[String] {
        &self.labels[observer]
    }

    pub fn all_labels(&self) -> &[Vec<String>] {
        &self.labels
    }

    pub fn index_of(&self, observer: usize, label: &str) -> Option<usize> {
        self.labels.get(observer)?.iter().position(|l| l == label)
    }

    pub fn label(&self, observer: usize, idx: usize) -> &str {
        &self.labels[observer][idx]
    }

    /// Every signal tuple of the space, in lexicographic order.
    pub fn tuples(&self) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for set in &self.labels {
            out = out
                .into_iter()
                .flat_map(|t| {
                    (0..set.len()).map(move |s| {
                        let mut t = t.clone();
                        t.push(s);
                        t
                    })
                })
                .collect();
        }
        out
    }

    pub fn restrict(&self, keep: &[usize]) -> Result<Self> {
        Self::with_min_observers(keep.iter().map(|&i| self.labels[i].clone()).collect(), 1)
    }

    pub fn render_tuple(&self, t: &[usize]) -> Vec<String> {
        t.iter().enumerate().map(|(i, &s)| self.labels[i][s].clone()).collect()
    }
}

/// Distribution over one observer's signal indices (absent entries have mass 0).
pub type SignalDist = BTreeMap<usize, Q>;

/// Exact discrete probability measure over n-tuples of signal indices.
///
/// Stored canonically: zero-mass entries are dropped and keys are sorted, so
/// structural equality is distribution equality.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JointDist {
    arity: usize,
    probs: BTreeMap<Vec<usize>, Q>,
}

impl JointDist {
    /// Builds a distribution without validating it. Duplicate tuples are merged,
    /// zero entries dropped; use [`JointDist::validate`] before trusting it.
    pub fn from_entries<I>(arity: usize, entries: I) -> Self
    where
        I: IntoIterator<Item = (Vec<usize>, Q)>,
    {
        let mut probs: BTreeMap<Vec<usize>, Q> = BTreeMap::new();
        for (t, p) in entries {
            *probs.entry(t).or_insert_with(Q::zero) += p;
        }
        probs.retain(|_, p| !p.is_zero());
        JointDist { arity, probs }
    }

    /// Validated constructor.
    pub fn new<I>(space: &SignalSpace, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, Q)>,
    {
        let d = Self::from_entries(space.n(), entries);
        d.validate(space)?;
        Ok(d)
    }

    pub fn point_mass(tuple: Vec<usize>) -> Self {
        JointDist { arity: tuple.len(), probs: BTreeMap::from([(tuple, Q::one())]) }
    }

    /// Uniform distribution over the given tuples.
    pub fn uniform(arity: usize, tuples: &[Vec<usize>]) -> Self {
        let w = Q::new(1.into(), (tuples.len() as i64).into());
        Self::from_entries(arity, tuples.iter().map(|t| (t.clone(), w.clone())))
    }

    /// Independent product of per-observer marginals.
    pub fn product(factors: &[SignalDist]) -> Self {
        let mut acc: Vec<(Vec<usize>, Q)> = vec![(vec![], Q::one())];
        for f in factors {
            acc = acc
                .into_iter()
                .flat_map(|(t, p)| {
                    f.iter().map(move |(s, ps)| {
                        let mut t = t.clone();
                        t.push(*s);
                        (t, &p * ps)
                    })
                })
                .collect();
        }
        Self::from_entries(factors.len(), acc)
    }

    /// Checks positivity, exact normalization and conformance to `space`.
    pub fn validate(&self, space: &SignalSpace) -> Result<()> {
        let mut sum = Q::zero();
        for (t, p) in &self.probs {
            if t.len() != space.n() {
                return Err(Error::NonConformingTuple {
                    tuple: t.clone(),
                    reason: format!("arity {} but space has {} observers", t.len(), space.n()),
                });
            }
            for (i, &s) in t.iter().enumerate() {
                if s >= space.size(i) {
                    return Err(Error::NonConformingTuple {
                        tuple: t.clone(),
                        reason: format!("observer {i} has no signal with index {s}"),
                    });
                }
            }
            if !p.is_positive() || p > &Q::one() {
                return Err(Error::InvalidDistribution(format!(
                    "tuple {t:?} has probability {} outside (0,1]",
                    fmt_q(p)
                )));
            }
            sum += p;
        }
        if self.arity != space.n() {
            return Err(Error::Dimension { expected: space.n(), got: self.arity });
        }
        if !sum.is_one() {
            return Err(Error::Normalization { sum: fmt_q(&sum), deficit: fmt_q(&(Q::one() - &sum)) });
        }
        Ok(())
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn prob(&self, tuple: &[usize]) -> Q {
        self.probs.get(tuple).cloned().unwrap_or_else(Q::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<usize>, &Q)> {
        self.probs.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.probs.keys()
    }

    pub fn support_len(&self) -> usize {
        self.probs.len()
    }

    /// Σ_z d(z)².
    pub fn sum_squares(&self) -> Q {
        self.probs.values().map(|p| p * p).fold(Q::zero(), |a, b| a + b)
    }

    /// Marginal distribution of observer `i`.
    pub fn marginal(&self, i: usize) -> Result<SignalDist> {
        if i >= self.arity {
            return Err(Error::ObserverOutOfRange { index: i, n: self.arity });
        }
        let mut m = SignalDist::new();
        for (t, p) in &self.probs {
            *m.entry(t[i]).or_insert_with(Q::zero) += p;
        }
        Ok(m)
    }

    /// Marginal onto the observers in `keep` (in that order).
    pub fn marginal_onto(&self, keep: &[usize]) -> Result<JointDist> {
        if let Some(&bad) = keep.iter().find(|&&i| i >= self.arity) {
            return Err(Error::ObserverOutOfRange { index: bad, n: self.arity });
        }
        Ok(Self::from_entries(
            keep.len(),
            self.probs.iter().map(|(t, p)| (keep.iter().map(|&i| t[i]).collect(), p.clone())),
        ))
    }

    /// Bayes conditional of the remaining coordinates given observer `i` saw `y`.
    pub fn conditional(&self, i: usize, y: usize) -> Result<JointDist> {
        let m = self.marginal(i)?;
        let py = m.get(&y).cloned().unwrap_or_else(Q::zero);
        if py.is_zero() {
            return Err(Error::ZeroProbabilityCondition { observer: i, signal: y });
        }
        Ok(Self::from_entries(
            self.arity - 1,
            self.probs.iter().filter(|(t, _)| t[i] == y).map(|(t, p)| {
                let mut rest = t.clone();
                rest.remove(i);
                (rest, p / &py)
            }),
        ))
    }

    /// Posterior on observer `j`'s signal given observer `i` saw `y`.
    pub fn pairwise_posterior(&self, i: usize, y: usize, j: usize) -> Result<SignalDist> {
        if j >= self.arity {
            return Err(Error::ObserverOutOfRange { index: j, n: self.arity });
        }
        let m = self.marginal(i)?;
        let py = m.get(&y).cloned().unwrap_or_else(Q::zero);
        if py.is_zero() {
            return Err(Error::ZeroProbabilityCondition { observer: i, signal: y });
        }
        let mut out = SignalDist::new();
        for (t, p) in self.probs.iter().filter(|(t, _)| t[i] == y) {
            *out.entry(t[j]).or_insert_with(Q::zero) += p / &py;
        }
        Ok(out)
    }

    /// True when the distribution equals the product of its marginals.
    pub fn is_product(&self) -> bool {
        let factors: Vec<SignalDist> =
            (0..self.arity).map(|i| self.marginal(i).expect("in range")).collect();
        Self::product(&factors) == *self
    }

    /// Labelled rendering used in reports.
    pub fn to_labeled(&self, space: &SignalSpace) -> Vec<LabeledMass> {
        self.probs
            .iter()
            .map(|(t, p)| LabeledMass { signals: space.render_tuple(t), p: fmt_q(p) })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LabeledMass {
    pub signals: Vec<String>,
    pub p: String,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn ab2() -> SignalSpace {
        SignalSpace::uniform_labels(2, &["a", "b"]).unwrap()
    }

    fn tri() -> JointDist {
        JointDist::new(
            &ab2(),
            [(vec![0, 0], q(1, 3)), (vec![0, 1], q(1, 3)), (vec![1, 1], q(1, 3))],
        )
        .unwrap()
    }

    #[test]
    fn validate_cases() {
        let s = ab2();
        assert!(JointDist::point_mass(vec![0, 1]).validate(&s).is_ok());
        let short = JointDist::from_entries(2, [(vec![0, 0], q(1, 2)), (vec![1, 1], q(1, 3))]);
        match short.validate(&s) {
            Err(Error::Normalization { sum, deficit }) => {
                assert_eq!(sum, "5/6");
                assert_eq!(deficit, "1/6");
            }
            other => panic!("unexpected {other:?}"),
        }
        let bad = JointDist::point_mass(vec![0, 2]);
        assert!(matches!(bad.validate(&s), Err(Error::NonConformingTuple { .. })));
        let neg = JointDist::from_entries(2, [(vec![0, 0], q(3, 2)), (vec![1, 1], q(-1, 2))]);
        assert!(matches!(neg.validate(&s), Err(Error::InvalidDistribution(_))));
    }

    #[test]
    fn marginals() {
        let coins = JointDist::product(&[
            SignalDist::from([(0, q(1, 2)), (1, q(1, 2))]),
            SignalDist::from([(0, q(1, 2)), (1, q(1, 2))]),
        ]);
        assert_eq!(coins.marginal(0).unwrap(), SignalDist::from([(0, q(1, 2)), (1, q(1, 2))]));
        assert_eq!(
            JointDist::point_mass(vec![0, 1]).marginal(1).unwrap(),
            SignalDist::from([(1, q(1, 1))])
        );
        assert_eq!(tri().marginal(0).unwrap(), SignalDist::from([(0, q(2, 3)), (1, q(1, 3))]));
        assert!(matches!(tri().marginal(2), Err(Error::ObserverOutOfRange { .. })));
    }

    #[test]
    fn conditionals() {
        let c = tri().conditional(0, 0).unwrap();
        assert_eq!(c, JointDist::from_entries(1, [(vec![0], q(1, 2)), (vec![1], q(1, 2))]));
        assert_eq!(tri().conditional(0, 1).unwrap(), JointDist::point_mass(vec![1]));
        let ind = JointDist::product(&[
            SignalDist::from([(0, q(1, 4)), (1, q(3, 4))]),
            SignalDist::from([(0, q(2, 5)), (1, q(3, 5))]),
        ]);
        for y in 0..2 {
            assert_eq!(
                ind.conditional(0, y).unwrap(),
                JointDist::from_entries(1, [(vec![0], q(2, 5)), (vec![1], q(3, 5))])
            );
        }
        assert!(matches!(
            JointDist::point_mass(vec![0, 0]).conditional(0, 1),
            Err(Error::ZeroProbabilityCondition { .. })
        ));
    }

    #[test]
    fn product_detection() {
        assert!(!tri().is_product());
        assert!(JointDist::point_mass(vec![1, 0]).is_product());
    }
}
