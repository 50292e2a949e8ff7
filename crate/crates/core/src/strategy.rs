//! Behavioral strategies for the source and the observers.
//!
//! Observer strategies are split along the mechanism's information order: the
//! signal report depends on the private signal only, while the probability,
//! value and belief reports may also read the source's report and the pairing.

use std::collections::BTreeMap;

use num::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{lookup_source, JointDist, ModelSpec, SignalDist};
use crate::rational::{fmt_q, parse_q, Q};

/// How an observer turns its signal into a signal report.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SignalRule {
    Truthful,
    /// Per-signal replacements; unmapped signals are reported truthfully.
    Map(BTreeMap<usize, usize>),
    Constant(usize),
    /// Uniformly random report over the observer's signal set.
    Uniform,
    /// Row `y` is the report distribution given signal `y`.
    Stochastic(Vec<SignalDist>),
}

impl SignalRule {
    /// Distribution of the report given signal `y` for an observer with `size` signals.
    pub fn report_dist(&self, y: usize, size: usize) -> Vec<(usize, Q)> {
        match self {
            SignalRule::Truthful => vec![(y, Q::one())],
            SignalRule::Map(m) => vec![(*m.get(&y).unwrap_or(&y), Q::one())],
            SignalRule::Constant(k) => vec![((*k).min(size - 1), Q::one())],
            SignalRule::Uniform => {
                let w = Q::new(1.into(), (size as i64).into());
                (0..size).map(|s| (s, w.clone())).collect()
            }
            SignalRule::Stochastic(rows) => rows
                .get(y)
                .map(|r| r.iter().map(|(s, p)| (*s, p.clone())).collect())
                .unwrap_or_else(|| vec![(y, Q::one())]),
        }
    }

    /// A rule that only relabels signals (a permutation of the signal set).
    pub fn is_permutation(&self, size: usize) -> bool {
        match self {
            SignalRule::Truthful => true,
            SignalRule::Map(_) => {
                let mut img: Vec<usize> = (0..size).map(|y| self.report_dist(y, size)[0].0).collect();
                img.sort_unstable();
                img.dedup();
                img.len() == size
            }
            SignalRule::Constant(_) => size == 1,
            SignalRule::Uniform => size == 1,
            SignalRule::Stochastic(rows) => {
                rows.iter().all(|r| r.len() == 1) && {
                    let mut img: Vec<usize> = rows.iter().filter_map(|r| r.keys().next().copied()).collect();
                    img.sort_unstable();
                    img.dedup();
                    img.len() == size
                }
            }
        }
    }
}

/// Which signal the probability and belief reports are computed from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BeliefBasis {
    TrueSignal,
    ReportedSignal,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PiRule {
    /// c times the reported-distribution marginal of the basis signal.
    Truthful,
    /// c times a fixed value, clamped into (0, 1].
    Scaled(Q),
    /// Truthful except for the fixed value `value` when the private signal is `signal`.
    Override { signal: usize, value: Q },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QRule {
    /// Posterior on the partner's signal given the basis signal, under the reported distribution.
    Truthful,
    Uniform,
    /// Point mass on the partner's signal index (clamped to the partner's set).
    PointMass(usize),
    /// Truthful blended toward a point mass on `target` with weight `t`, when the private signal is `signal`.
    Blend { signal: usize, t: Q, target: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum XRule {
    /// The unique value whose feasible set contains the reported distribution, else the sentinel.
    Lookup,
    /// The first value whose feasible set contains the reported distribution (non-identifiable specs).
    FirstMatch,
    /// The largest support point across the reported distribution's marginals, read as a value label.
    MaxSupport,
    Fixed(Option<usize>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObserverStrategy {
    pub signal: SignalRule,
    pub basis: BeliefBasis,
    pub pi: PiRule,
    pub q: QRule,
    pub x: XRule,
}

impl ObserverStrategy {
    /// The signal-truthful observer strategy.
    pub fn truthful() -> Self {
        Self::truthful_with(XRule::Lookup)
    }

    pub fn truthful_with(x: XRule) -> Self {
        ObserverStrategy {
            signal: SignalRule::Truthful,
            basis: BeliefBasis::TrueSignal,
            pi: PiRule::Truthful,
            q: QRule::Truthful,
            x,
        }
    }

    /// Always reports signal `k`, with beliefs that every partner does the same.
    pub fn pooling(k: usize) -> Self {
        ObserverStrategy {
            signal: SignalRule::Constant(k),
            basis: BeliefBasis::ReportedSignal,
            pi: PiRule::Scaled(Q::one()),
            q: QRule::PointMass(k),
            x: XRule::Lookup,
        }
    }

    /// Uniformly random signal reports, with beliefs that partners do the same.
    pub fn uniform_garbling(size: usize) -> Self {
        ObserverStrategy {
            signal: SignalRule::Uniform,
            basis: BeliefBasis::ReportedSignal,
            pi: PiRule::Scaled(Q::new(1.into(), (size as i64).into())),
            q: QRule::Uniform,
            x: XRule::Lookup,
        }
    }

    pub fn is_truthful(&self) -> bool {
        self.signal == SignalRule::Truthful
            && self.basis == BeliefBasis::TrueSignal
            && self.pi == PiRule::Truthful
            && self.q == QRule::Truthful
            && matches!(self.x, XRule::Lookup | XRule::FirstMatch | XRule::MaxSupport)
    }

    /// Reports submitted after the source's report and the pairing are revealed.
    #[allow(clippy::too_many_arguments)]
    pub fn later_reports(
        &self,
        spec: &ModelSpec,
        i: usize,
        signal: usize,
        reported_signal: usize,
        dhat: &JointDist,
        neighbors: &[usize],
        c: &Q,
    ) -> Result<ObserverReport> {
        let space = spec.space();
        let basis = match self.basis {
            BeliefBasis::TrueSignal => signal,
            BeliefBasis::ReportedSignal => reported_signal,
        };
        let marg = dhat.marginal(i)?;
        let basis_mass = marg.get(&basis).cloned().unwrap_or_else(Q::zero);
        let size = space.size(i);
        let truthful_pi = || {
            if basis_mass.is_zero() {
                c * Q::new(1.into(), (size as i64).into())
            } else {
                c * &basis_mass
            }
        };
        let pi = match &self.pi {
            PiRule::Truthful => truthful_pi(),
            PiRule::Scaled(v) => clamp_unit(c * v),
            PiRule::Override { signal: s, value } if *s == signal => clamp_unit(value.clone()),
            PiRule::Override { .. } => truthful_pi(),
        };
        let mut qhat = BTreeMap::new();
        for &k in neighbors {
            let truthful_q = || -> Result<SignalDist> {
                if basis_mass.is_zero() {
                    dhat.marginal(k)
                } else {
                    dhat.pairwise_posterior(i, basis, k)
                }
            };
            let ksize = space.size(k);
            let dist = match &self.q {
                QRule::Truthful => truthful_q()?,
                QRule::Uniform => {
                    let w = Q::new(1.into(), (ksize as i64).into());
                    (0..ksize).map(|s| (s, w.clone())).collect()
                }
                QRule::PointMass(t) => SignalDist::from([((*t).min(ksize - 1), Q::one())]),
                QRule::Blend { signal: s, t, target } if *s == signal => {
                    let mut d: SignalDist =
                        truthful_q()?.into_iter().map(|(y, p)| (y, p * (Q::one() - t))).collect();
                    *d.entry((*target).min(ksize - 1)).or_insert_with(Q::zero) += t;
                    d.retain(|_, p| !p.is_zero());
                    d
                }
                QRule::Blend { .. } => truthful_q()?,
            };
            qhat.insert(k, dist);
        }
        let xhat = match &self.x {
            XRule::Lookup => lookup_source(spec, dhat)?,
            XRule::FirstMatch => spec.sources_of(dhat).into_iter().next(),
            XRule::MaxSupport => max_support_value(spec, dhat)?,
            XRule::Fixed(v) => *v,
        };
        Ok(ObserverReport { pi, xhat, qhat })
    }

    /// Short description used in reports.
    pub fn describe(&self) -> String {
        let sig = match &self.signal {
            SignalRule::Truthful => "truthful".to_string(),
            SignalRule::Map(m) => format!(
                "map{{{}}}",
                m.iter().map(|(a, b)| format!("{a}->{b}")).collect::<Vec<_>>().join(",")
            ),
            SignalRule::Constant(k) => format!("constant({k})"),
            SignalRule::Uniform => "uniform".into(),
            SignalRule::Stochastic(_) => "stochastic".into(),
        };
        let pi = match &self.pi {
            PiRule::Truthful => "truthful".to_string(),
            PiRule::Scaled(v) => format!("c*{}", fmt_q(v)),
            PiRule::Override { signal, value } => format!("at {signal}: {}", fmt_q(value)),
        };
        let q = match &self.q {
            QRule::Truthful => "truthful".to_string(),
            QRule::Uniform => "uniform".into(),
            QRule::PointMass(k) => format!("point({k})"),
            QRule::Blend { signal, t, target } => format!("at {signal}: blend {} toward {target}", fmt_q(t)),
        };
        let x = match &self.x {
            XRule::Lookup => "lookup".to_string(),
            XRule::FirstMatch => "first-match".into(),
            XRule::MaxSupport => "max-support".into(),
            XRule::Fixed(v) => format!("fixed({v:?})"),
        };
        format!("signal={sig}; pi={pi}; q={q}; x={x}; basis={:?}", self.basis)
    }
}

fn clamp_unit(v: Q) -> Q {
    if v > Q::one() {
        Q::one()
    } else {
        v
    }
}

/// Maximum support point over the marginals of `dhat`, mapped to the source value with the same numeric label.
pub fn max_support_value(spec: &ModelSpec, dhat: &JointDist) -> Result<Option<usize>> {
    let space = spec.space();
    let mut best: Option<Q> = None;
    for i in 0..space.n() {
        for s in dhat.marginal(i)?.keys() {
            let v = parse_q(space.label(i, *s))?;
            if best.as_ref().is_none_or(|b| &v > b) {
                best = Some(v);
            }
        }
    }
    let Some(best) = best else { return Ok(None) };
    for (x, label) in spec.values().iter().enumerate() {
        if parse_q(label)? == best {
            return Ok(Some(x));
        }
    }
    Ok(None)
}

/// The observer's step-3/4 reports.
#[derive(Clone, Debug, PartialEq)]
pub struct ObserverReport {
    pub pi: Q,
    pub xhat: Option<usize>,
    pub qhat: BTreeMap<usize, SignalDist>,
}

/// What the source does for one private value.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceAction {
    /// Distribution the source induces on the observers' signals.
    pub choose: JointDist,
    pub xhat: usize,
    pub dhat: JointDist,
}

impl SourceAction {
    pub fn truthful(x: usize, d: JointDist) -> Self {
        SourceAction { choose: d.clone(), xhat: x, dhat: d }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StrategyProfile {
    /// One action per source value, indexed like the spec's values.
    pub source: Vec<SourceAction>,
    pub observers: Vec<ObserverStrategy>,
    /// Common rescale factor in (0, 1].
    pub c: Q,
}

impl StrategyProfile {
    /// Checks feasibility of the source's choices and the range of `c`.
    pub fn validate(&self, spec: &ModelSpec) -> Result<()> {
        if !self.c.is_positive() || self.c > Q::one() {
            return Err(Error::InvalidProfile(format!(
                "rescale factor c = {} outside (0,1]",
                fmt_q(&self.c)
            )));
        }
        if self.source.len() != spec.values().len() {
            return Err(Error::InvalidProfile(format!(
                "source strategy covers {} of {} values",
                self.source.len(),
                spec.values().len()
            )));
        }
        if self.observers.len() != spec.n() {
            return Err(Error::InvalidProfile(format!(
                "{} observer strategies for {} observers",
                self.observers.len(),
                spec.n()
            )));
        }
        for (x, a) in self.source.iter().enumerate() {
            a.choose.validate(spec.space())?;
            a.dhat.validate(spec.space())?;
            if a.xhat >= spec.values().len() {
                return Err(Error::InvalidProfile(format!("reported value index {} out of range", a.xhat)));
            }
            let feasible = spec.lset(x).contains(&a.choose) || spec.sources_of(&a.choose).is_empty();
            if !feasible {
                return Err(Error::InvalidProfile(format!(
                    "source with value `{}` chose a distribution feasible only for other values",
                    spec.values()[x]
                )));
            }
        }
        Ok(())
    }

    pub fn with_observer(&self, i: usize, s: ObserverStrategy) -> Self {
        let mut p = self.clone();
        p.observers[i] = s;
        p
    }

    pub fn with_source_action(&self, x: usize, a: SourceAction) -> Self {
        let mut p = self.clone();
        p.source[x] = a;
        p
    }
}
