use std::cmp::Ordering;
use std::collections::BTreeSet;

use num::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::deviation::{observer_deviations, GAP_TOLERANCE};
use super::payoff::{conditional_payoffs, expected_payoffs, Expectation};
use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::mechanism::{observer_reward, Pairing, ReportBundle, Setting};
use crate::model::{
    coalition_refinement, is_source_identifiable, shared_distributions, JointDist, LabeledMass, ModelSpec,
    WitnessRecord,
};
use crate::rational::{fmt_q, Q};
use crate::strategy::{BeliefBasis, ObserverStrategy, PiRule, QRule, SignalRule, SourceAction, StrategyProfile, XRule};

/// The unconditionally honest observer strategy for `spec`.
///
/// Lookup needs identifiability; otherwise the first matching value is reported.
pub fn honest_strategy(spec: &ModelSpec) -> ObserverStrategy {
    if spec.is_identifiable() {
        ObserverStrategy::truthful()
    } else {
        ObserverStrategy::truthful_with(XRule::FirstMatch)
    }
}

fn is_exact_zero(v: &ExtReal) -> bool {
    v.is_finite() && v.is_exact() && v.rational_part().is_zero() && v.log_part() == 0.0
}

/// Certificate that the source cannot be strictly truthful on a non-identifiable spec.
#[derive(Clone, Debug, Serialize)]
pub struct ImpossibilityWitness {
    pub x1: String,
    pub x2: String,
    pub dist: Vec<LabeledMass>,
    /// Source at `x1` telling the truth.
    pub truthful_at_x1: Expectation,
    /// Source at `x2` telling the truth.
    pub truthful_at_x2: Expectation,
    /// Source at `x2` claiming `(x1, D)`.
    pub rogue_at_x2: Expectation,
    /// Source at `x1` claiming `(x2, D)`.
    pub rogue_at_x1: Expectation,
    /// Score terms of `rogue_at_x2` and `truthful_at_x1` are identical.
    pub score_tie: bool,
    /// Indicator expectations of `rogue_at_x2` and `truthful_at_x1` are identical.
    pub indicator_tie: bool,
    pub mirror_tie: bool,
    /// Truthful minus rogue at `x2`, and at `x1`.
    pub gap_at_x2: ExtReal,
    pub gap_at_x1: ExtReal,
    /// At least one of the two gaps is not positive.
    pub not_strict: bool,
}

/// Builds the rogue source strategy from the first shared distribution, or `None` when identifiable.
pub fn impossibility_witness(setting: &Setting) -> Result<Option<ImpossibilityWitness>> {
    let Some(w) = shared_distributions(&setting.spec).into_iter().next() else {
        return Ok(None);
    };
    impossibility_witness_for(setting, w.x1, w.x2, &w.dist).map(Some)
}

/// Tie certificate for a specific pair `x1, x2` sharing `d`.
pub fn impossibility_witness_for(setting: &Setting, x1: usize, x2: usize, d: &JointDist) -> Result<ImpossibilityWitness> {
    let spec = &setting.spec;
    if !spec.lset(x1).contains(d) || !spec.lset(x2).contains(d) {
        return Err(Error::InvalidConfig("witness distribution is not shared by both values".into()));
    }
    let mut choices: Vec<JointDist> = spec.lsets().iter().map(|l| l[0].clone()).collect();
    choices[x1] = d.clone();
    choices[x2] = d.clone();
    let truthful = super::truthful_profile_with(spec, &choices, Q::one(), XRule::FirstMatch)?;
    let rogue = truthful.with_source_action(x2, SourceAction { choose: d.clone(), xhat: x1, dhat: d.clone() });
    let mirror = truthful.with_source_action(x1, SourceAction { choose: d.clone(), xhat: x2, dhat: d.clone() });
    let t1 = conditional_payoffs(setting, &truthful, x1)?;
    let t2 = conditional_payoffs(setting, &truthful, x2)?;
    let r2 = conditional_payoffs(setting, &rogue, x2)?;
    let r1 = conditional_payoffs(setting, &mirror, x1)?;
    let score_tie = is_exact_zero(&(&r2.source_score - &t1.source_score));
    let indicator_tie = is_exact_zero(&(&r2.source_indicator - &t1.source_indicator));
    let mirror_tie = is_exact_zero(&(&r1.source - &t2.source));
    let gap_at_x2 = &t2.source - &r2.source;
    let gap_at_x1 = &t1.source - &r1.source;
    let not_strict = gap_at_x2.sign(GAP_TOLERANCE) != Ordering::Greater || gap_at_x1.sign(GAP_TOLERANCE) != Ordering::Greater;
    Ok(ImpossibilityWitness {
        x1: spec.values()[x1].clone(),
        x2: spec.values()[x2].clone(),
        dist: d.to_labeled(spec.space()),
        truthful_at_x1: t1,
        truthful_at_x2: t2,
        rogue_at_x2: r2,
        rogue_at_x1: r1,
        score_tie,
        indicator_tie,
        mirror_tie,
        gap_at_x2,
        gap_at_x1,
        not_strict,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HonestyVerdict {
    Refuted,
    Survives,
}

#[derive(Clone, Debug, Serialize)]
pub struct HonestyRow {
    pub observer: usize,
    pub candidate: String,
    pub current: ExtReal,
    pub alternative: ExtReal,
    pub gain: ExtReal,
}

#[derive(Clone, Debug, Serialize)]
pub struct HonestyReport {
    pub p0: String,
    pub verdict: HonestyVerdict,
    pub evaluated: usize,
    /// Largest gain found, if any observer was non-truthful.
    pub best: Option<HonestyRow>,
}

/// Candidate replacements for a non-truthful observer: moves toward honesty plus the canonical deviations.
fn honesty_candidates(setting: &Setting, profile: &StrategyProfile, i: usize) -> Result<Vec<(String, ObserverStrategy)>> {
    let base = &profile.observers[i];
    let honest = honest_strategy(&setting.spec);
    let mut out = vec![
        ("honest".to_string(), honest.clone()),
        ("truthful signal".into(), ObserverStrategy { signal: SignalRule::Truthful, ..base.clone() }),
        (
            "truthful signal and beliefs from it".into(),
            ObserverStrategy { signal: SignalRule::Truthful, basis: BeliefBasis::TrueSignal, ..base.clone() },
        ),
        ("truthful beliefs".into(), ObserverStrategy { q: QRule::Truthful, ..base.clone() }),
        ("truthful pi".into(), ObserverStrategy { pi: PiRule::Truthful, ..base.clone() }),
        ("honest value report".into(), ObserverStrategy { x: honest.x.clone(), ..base.clone() }),
    ];
    for d in observer_deviations(setting, profile, i)? {
        if let super::Change::Observer { strategy, .. } = d.change {
            out.push((d.description, strategy));
        }
    }
    out.retain(|(_, s)| s != base);
    Ok(out)
}

/// Mixture payoff of observer `i` where with probability `p0` a uniformly chosen observer is
/// replaced by the honest strategy. The term where `i` itself is replaced is dropped: it does not
/// depend on `i`'s strategy.
fn mixture_payoff(setting: &Setting, profile: &StrategyProfile, i: usize, p0: &Q) -> Result<ExtReal> {
    let n = setting.n();
    let honest = honest_strategy(&setting.spec);
    let mut total = expected_payoffs(setting, profile)?.observers[i].scale(&(Q::one() - p0));
    if p0.is_zero() {
        return Ok(total);
    }
    let w = p0 / Q::from_integer((n as i64).into());
    for k in (0..n).filter(|&k| k != i) {
        let injected = profile.with_observer(k, honest.clone());
        total += expected_payoffs(setting, &injected)?.observers[i].scale(&w);
    }
    Ok(total)
}

/// Evaluates every non-truthful observer of `profile` under honest injection with probability `p0`.
pub fn honesty_injection(setting: &Setting, profile: &StrategyProfile, p0: &Q) -> Result<HonestyReport> {
    if p0.is_negative() || p0 > &Q::one() {
        return Err(Error::InvalidConfig(format!("p0 = {} outside [0,1]", fmt_q(p0))));
    }
    profile.validate(&setting.spec)?;
    let mut rows = Vec::new();
    for i in 0..setting.n() {
        if profile.observers[i].is_truthful() {
            continue;
        }
        let current = mixture_payoff(setting, profile, i, p0)?;
        let cands = honesty_candidates(setting, profile, i)?;
        let mut evaluated: Vec<HonestyRow> = cands
            .par_iter()
            .map(|(desc, s)| -> Result<HonestyRow> {
                let alt = mixture_payoff(setting, &profile.with_observer(i, s.clone()), i, p0)?;
                Ok(HonestyRow {
                    observer: i,
                    candidate: desc.clone(),
                    gain: &alt - &current,
                    current: current.clone(),
                    alternative: alt,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.append(&mut evaluated);
    }
    let evaluated = rows.len();
    let best = rows.into_iter().max_by(|a, b| a.gain.total_cmp(&b.gain));
    let verdict = match &best {
        Some(r) if r.gain.sign(GAP_TOLERANCE) == Ordering::Greater => HonestyVerdict::Refuted,
        _ => HonestyVerdict::Survives,
    };
    Ok(HonestyReport { p0: fmt_q(p0), verdict, evaluated, best })
}

/// Expected pairwise reward (indicator excluded) of observer `i` seeing `y` at the truthful profile,
/// averaged over the possible partners.
pub fn observer_ir_value(d: &JointDist, i: usize, y: usize, c: &Q) -> Result<ExtReal> {
    let n = d.arity();
    if i >= n {
        return Err(Error::ObserverOutOfRange { index: i, n });
    }
    if !c.is_positive() || c > &Q::one() {
        return Err(Error::InvalidConfig(format!("c = {} outside (0,1]", fmt_q(c))));
    }
    let mi = d.marginal(i)?;
    let Some(pi_y) = mi.get(&y).cloned() else {
        return Err(Error::ZeroProbabilityCondition { observer: i, signal: y });
    };
    let pairing = Pairing::from_groups(2, vec![vec![0, 1]])?;
    let w = Q::new(1.into(), ((n - 1) as i64).into());
    let mut total = ExtReal::zero();
    for j in (0..n).filter(|&j| j != i) {
        let pair = d.marginal_onto(&[i, j])?;
        let post = pair.pairwise_posterior(0, y, 1)?;
        let mj = pair.marginal(1)?;
        for (yj, p) in &post {
            let bundle = ReportBundle {
                yhat: vec![y, *yj],
                xhat: 0,
                dhat: pair.clone(),
                pi: vec![c * &pi_y, c * &mj[yj]],
                xhat_obs: vec![None, Some(0)],
                qhat: vec![
                    [(1, post.clone())].into_iter().collect(),
                    [(0, pair.pairwise_posterior(1, *yj, 0)?)].into_iter().collect(),
                ],
                pairing: pairing.clone(),
            };
            bundle.validate()?;
            total += observer_reward(&bundle, 0).scale(&(p * &w));
        }
    }
    Ok(total)
}

/// Truthful minus garbled total expected payoff.
pub fn total_payoff_gap(setting: &Setting, truthful: &StrategyProfile, garbled: &StrategyProfile) -> Result<ExtReal> {
    let a = expected_payoffs(setting, truthful)?.total();
    let b = expected_payoffs(setting, garbled)?.total();
    Ok(a - b)
}

/// Rescale factors searched when comparing total payoffs.
pub fn c_grid() -> Vec<Q> {
    [1, 2, 4, 8, 16].iter().map(|&k| Q::new(1.into(), k.into())).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct TotalPayoffPoint {
    pub c: String,
    pub truthful_total: ExtReal,
    pub gap: ExtReal,
}

#[derive(Clone, Debug, Serialize)]
pub struct TotalPayoffReport {
    pub garbled_total: ExtReal,
    /// Gap at the truthful profile's own rescale factor.
    pub gap: ExtReal,
    pub grid: Vec<TotalPayoffPoint>,
    /// Largest grid value with a strictly positive gap.
    pub witness_c: Option<String>,
}

/// Compares total payoffs, re-evaluating the truthful profile at every grid value of `c`
/// while the garbled profile keeps its own.
pub fn total_payoff_comparison(
    setting: &Setting,
    truthful: &StrategyProfile,
    garbled: &StrategyProfile,
) -> Result<TotalPayoffReport> {
    let garbled_total = expected_payoffs(setting, garbled)?.total();
    let gap = &expected_payoffs(setting, truthful)?.total() - &garbled_total;
    let grid = c_grid()
        .into_par_iter()
        .map(|c| -> Result<TotalPayoffPoint> {
            let p = StrategyProfile { c: c.clone(), ..truthful.clone() };
            let t = expected_payoffs(setting, &p)?.total();
            Ok(TotalPayoffPoint { c: fmt_q(&c), gap: &t - &garbled_total, truthful_total: t })
        })
        .collect::<Result<Vec<_>>>()?;
    let witness_c = grid
        .iter()
        .find(|p| p.gap.sign(GAP_TOLERANCE) == Ordering::Greater)
        .map(|p| p.c.clone());
    Ok(TotalPayoffReport { garbled_total, gap, grid, witness_c })
}

/// Identifiability before and after a coalition pools its signals.
#[derive(Clone, Debug, Serialize)]
pub struct CollusionReport {
    pub coalition: Vec<usize>,
    pub remaining: Vec<usize>,
    pub identifiable_before: bool,
    pub identifiable_after: bool,
    pub witness: Option<WitnessRecord>,
}

pub fn collusion_analysis(m: &ModelSpec, coalition: &BTreeSet<usize>) -> Result<CollusionReport> {
    let refined = coalition_refinement(m, coalition)?;
    let rep = is_source_identifiable(&refined);
    Ok(CollusionReport {
        coalition: coalition.iter().copied().collect(),
        remaining: (0..m.n()).filter(|i| !coalition.contains(i)).collect(),
        identifiable_before: m.is_identifiable(),
        identifiable_after: rep.identifiable,
        witness: rep.witness.map(|w| w.record(&refined)),
    })
}

