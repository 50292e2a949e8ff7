use std::cmp::Ordering;
use std::collections::BTreeSet;

use num::One;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::payoff::{conditional_payoffs, expected_payoffs, Player};
use crate::error::Result;
use crate::extreal::ExtReal;
use crate::mechanism::Setting;
use crate::model::{lookup_source, JointDist};
use crate::random::random_dist;
use crate::rational::{q, Q};
use crate::strategy::{
    BeliefBasis, ObserverStrategy, PiRule, QRule, SignalRule, SourceAction, StrategyProfile, XRule,
};

/// Absolute tolerance applied to gaps that carry a floating-point log component.
pub const GAP_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeviationTag {
    SignalMisreport,
    PiPerturbation,
    QPerturbation,
    XMisreport,
    DMisreport,
    Pooling,
    Garbling,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Change {
    Source { x: usize, action: SourceAction },
    Observer { i: usize, strategy: ObserverStrategy },
}

/// A single-player alternative strategy.
#[derive(Clone, Debug, PartialEq)]
pub struct Deviation {
    pub tag: DeviationTag,
    pub description: String,
    pub change: Change,
    /// Swapping to another distribution of the truthful value's own feasible set;
    /// strictness is measured aggregating over those choices.
    pub within_feasible_set: bool,
}

impl Deviation {
    pub fn player(&self) -> Player {
        match &self.change {
            Change::Source { .. } => Player::Source,
            Change::Observer { i, .. } => Player::Observer(*i),
        }
    }

    pub fn apply(&self, profile: &StrategyProfile) -> StrategyProfile {
        match &self.change {
            Change::Source { x, action } => profile.with_source_action(*x, action.clone()),
            Change::Observer { i, strategy } => profile.with_observer(*i, strategy.clone()),
        }
    }
}

pub type DeviationSet = Vec<Deviation>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Strict,
    TieWitness,
    Refuted,
}

#[derive(Clone, Debug, Serialize)]
pub struct GapRow {
    pub tag: DeviationTag,
    pub description: String,
    pub gap: ExtReal,
    pub exact: bool,
    pub excluded: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct EquilibriumReport {
    pub player: Player,
    pub truthful: ExtReal,
    pub rows: Vec<GapRow>,
    /// Minimum over deviations, excluding swaps within the truthful feasible set.
    pub min_gap: Option<ExtReal>,
    /// Minimum over every deviation.
    pub min_gap_including_swaps: Option<ExtReal>,
    pub verdict: Verdict,
}

fn min_of<'a>(it: impl Iterator<Item = &'a ExtReal>) -> Option<ExtReal> {
    it.min_by(|a, b| a.total_cmp(b)).cloned()
}

/// Gap (candidate payoff minus deviation payoff) for every deviation of `player`.
pub fn deviation_gaps(
    setting: &Setting,
    profile: &StrategyProfile,
    player: Player,
    devs: &[Deviation],
) -> Result<EquilibriumReport> {
    let base = expected_payoffs(setting, profile)?;
    let truthful = base.player(player).clone();
    let rows: Vec<GapRow> = devs
        .par_iter()
        .filter(|d| d.player() == player)
        .map(|d| -> Result<GapRow> {
            // Source deviations are compared at the deviating type, observers ex ante.
            let gap = match &d.change {
                Change::Source { x, .. } => {
                    let before = conditional_payoffs(setting, profile, *x)?;
                    let after = conditional_payoffs(setting, &d.apply(profile), *x)?;
                    &before.source - &after.source
                }
                Change::Observer { .. } => {
                    let alt = expected_payoffs(setting, &d.apply(profile))?;
                    &truthful - alt.player(player)
                }
            };
            Ok(GapRow {
                tag: d.tag,
                description: d.description.clone(),
                exact: gap.is_exact(),
                gap,
                excluded: d.within_feasible_set,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let min_gap = min_of(rows.iter().filter(|r| !r.excluded).map(|r| &r.gap));
    let min_all = min_of(rows.iter().map(|r| &r.gap));
    let verdict = match &min_gap {
        None => Verdict::Strict,
        Some(g) => match g.sign(GAP_TOLERANCE) {
            Ordering::Greater => Verdict::Strict,
            Ordering::Equal => Verdict::TieWitness,
            Ordering::Less => Verdict::Refuted,
        },
    };
    Ok(EquilibriumReport { player, truthful, rows, min_gap, min_gap_including_swaps: min_all, verdict })
}

/// Signals of observer `i` that occur with positive probability under the profile.
fn live_signals(setting: &Setting, profile: &StrategyProfile, i: usize) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    for x in setting.prior.support() {
        for t in profile.source[x].choose.support() {
            out.insert(t[i]);
        }
    }
    out
}

/// Random distributions outside every feasible set, deterministic in `seed`.
pub fn off_spec_distributions(setting: &Setting, count: usize, seed: u64) -> Vec<JointDist> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<JointDist> = Vec::new();
    let mut tries = 0;
    while out.len() < count && tries < 1000 {
        tries += 1;
        let d = random_dist(&mut rng, setting.spec.space(), 9);
        if setting.spec.sources_of(&d).is_empty() && !out.contains(&d) {
            out.push(d);
        }
    }
    out
}

/// The canonical finite deviation set for one player around `profile`.
pub fn canonical_deviations(
    setting: &Setting,
    profile: &StrategyProfile,
    player: Player,
    seed: u64,
) -> Result<DeviationSet> {
    match player {
        Player::Source => source_deviations(setting, profile, seed),
        Player::Observer(i) => observer_deviations(setting, profile, i),
    }
}

fn source_deviations(setting: &Setting, profile: &StrategyProfile, seed: u64) -> Result<DeviationSet> {
    let spec = &setting.spec;
    let values = spec.values();
    let mut out = Vec::new();
    let off = off_spec_distributions(setting, 5, seed);
    let all = spec.all_distributions();
    let obs_x = profile.observers.first().map(|o| o.x.clone());
    for x in setting.prior.support() {
        let a = &profile.source[x];
        let d = &a.choose;
        let push = |out: &mut DeviationSet, tag, desc: String, action: SourceAction, within| {
            out.push(Deviation {
                tag,
                description: format!("at {}: {desc}", values[x]),
                change: Change::Source { x, action },
                within_feasible_set: within,
            });
        };
        for x2 in 0..values.len() {
            if x2 != a.xhat {
                push(
                    &mut out,
                    DeviationTag::XMisreport,
                    format!("report value {}", values[x2]),
                    SourceAction { choose: d.clone(), xhat: x2, dhat: a.dhat.clone() },
                    false,
                );
            }
        }
        for (k, alt) in all.iter().enumerate() {
            if alt == &a.dhat {
                continue;
            }
            push(
                &mut out,
                DeviationTag::DMisreport,
                format!("report spec distribution #{k}"),
                SourceAction { choose: d.clone(), xhat: a.xhat, dhat: alt.clone() },
                false,
            );
            if obs_x == Some(XRule::Lookup) && spec.is_identifiable() {
                if let Some(x2) = lookup_source(spec, alt)? {
                    if x2 != a.xhat {
                        push(
                            &mut out,
                            DeviationTag::DMisreport,
                            format!("report spec distribution #{k} with its value {}", values[x2]),
                            SourceAction { choose: d.clone(), xhat: x2, dhat: alt.clone() },
                            false,
                        );
                    }
                }
            }
        }
        for (k, alt) in off.iter().enumerate() {
            push(
                &mut out,
                DeviationTag::DMisreport,
                format!("report off-spec distribution #{k}"),
                SourceAction { choose: d.clone(), xhat: a.xhat, dhat: alt.clone() },
                false,
            );
            push(
                &mut out,
                DeviationTag::DMisreport,
                format!("induce and report off-spec distribution #{k}"),
                SourceAction { choose: alt.clone(), xhat: a.xhat, dhat: alt.clone() },
                false,
            );
        }
        for (k, alt) in spec.lset(x).iter().enumerate() {
            if alt != d {
                push(
                    &mut out,
                    DeviationTag::DMisreport,
                    format!("induce and report feasible distribution #{k}"),
                    SourceAction { choose: alt.clone(), xhat: a.xhat, dhat: alt.clone() },
                    true,
                );
            }
        }
    }
    Ok(out)
}

pub(crate) fn observer_deviations(setting: &Setting, profile: &StrategyProfile, i: usize) -> Result<DeviationSet> {
    let spec = &setting.spec;
    let space = spec.space();
    let size = space.size(i);
    let base = profile.observers[i].clone();
    let live = live_signals(setting, profile, i);
    let partners: Vec<usize> = (0..spec.n()).filter(|&k| k != i).collect();
    let mut out = Vec::new();
    let mut push = |tag, description: String, strategy: ObserverStrategy| {
        if strategy != base {
            out.push(Deviation {
                tag,
                description: format!("observer {i}: {description}"),
                change: Change::Observer { i, strategy },
                within_feasible_set: false,
            });
        }
    };
    for &y in &live {
        for y2 in (0..size).filter(|&s| s != y) {
            let map = SignalRule::Map([(y, y2)].into_iter().collect());
            push(
                DeviationTag::SignalMisreport,
                format!("report {} when seeing {}", space.label(i, y2), space.label(i, y)),
                ObserverStrategy { signal: map.clone(), ..base.clone() },
            );
            push(
                DeviationTag::SignalMisreport,
                format!("act as if seeing {} when seeing {}", space.label(i, y2), space.label(i, y)),
                ObserverStrategy { signal: map, basis: BeliefBasis::ReportedSignal, ..base.clone() },
            );
        }
        // Truthful π values at y across the live feasible choices.
        let mut truthful_pis = BTreeSet::new();
        let mut posteriors = Vec::new();
        for x in setting.prior.support() {
            let dhat = &profile.source[x].dhat;
            let m = dhat.marginal(i)?;
            if let Some(p) = m.get(&y) {
                truthful_pis.insert(&profile.c * p);
                for &k in &partners {
                    posteriors.push((k, dhat.pairwise_posterior(i, y, k)?));
                }
            }
        }
        for k in 1..=10 {
            let v = q(k, 10);
            if truthful_pis.len() == 1 && truthful_pis.contains(&v) {
                continue;
            }
            push(
                DeviationTag::PiPerturbation,
                format!("pi = {k}/10 when seeing {}", space.label(i, y)),
                ObserverStrategy { pi: PiRule::Override { signal: y, value: v }, ..base.clone() },
            );
        }
        let max_partner = partners.iter().map(|&k| space.size(k)).max().unwrap_or(1);
        for target in 0..max_partner {
            let unchanged = posteriors.iter().all(|(k, post)| {
                let t = target.min(space.size(*k) - 1);
                post.len() == 1 && post.get(&t).is_some_and(|p| p.is_one())
            });
            if unchanged {
                continue;
            }
            for k in 1..=10 {
                push(
                    DeviationTag::QPerturbation,
                    format!("belief blended {k}/10 toward signal #{target} when seeing {}", space.label(i, y)),
                    ObserverStrategy { q: QRule::Blend { signal: y, t: q(k, 10), target }, ..base.clone() },
                );
            }
        }
    }
    let values = spec.values();
    for (x2, label) in values.iter().enumerate() {
        push(
            DeviationTag::XMisreport,
            format!("always report value {label}"),
            ObserverStrategy { x: XRule::Fixed(Some(x2)), ..base.clone() },
        );
    }
    push(DeviationTag::XMisreport, "always report the empty value".into(), ObserverStrategy {
        x: XRule::Fixed(None),
        ..base.clone()
    });
    for k in 0..size {
        push(
            DeviationTag::Pooling,
            format!("always report {}", space.label(i, k)),
            ObserverStrategy { x: base.x.clone(), ..ObserverStrategy::pooling(k) },
        );
        push(
            DeviationTag::Pooling,
            format!("always report {} keeping truthful beliefs", space.label(i, k)),
            ObserverStrategy { signal: SignalRule::Constant(k), ..base.clone() },
        );
    }
    if size > 1 {
        push(
            DeviationTag::Garbling,
            "uniformly random reports".into(),
            ObserverStrategy { x: base.x.clone(), ..ObserverStrategy::uniform_garbling(size) },
        );
        push(
            DeviationTag::Garbling,
            "uniformly random reports keeping truthful beliefs".into(),
            ObserverStrategy { signal: SignalRule::Uniform, ..base.clone() },
        );
        // Half truthful, half uniform: a non-permutation stochastic garbling.
        let rows = (0..size)
            .map(|y| {
                let mut r: crate::model::SignalDist = (0..size).map(|s| (s, Q::new(1.into(), (2 * size as i64).into()))).collect();
                *r.get_mut(&y).expect("in range") += q(1, 2);
                r
            })
            .collect();
        push(
            DeviationTag::Garbling,
            "half-uniform garbling".into(),
            ObserverStrategy { signal: SignalRule::Stochastic(rows), ..base.clone() },
        );
    }
    Ok(out)
}

/// Runs the canonical deviation set for every player.
pub fn check_equilibrium(setting: &Setting, profile: &StrategyProfile, seed: u64) -> Result<Vec<EquilibriumReport>> {
    let mut players = vec![Player::Source];
    players.extend((0..setting.n()).map(Player::Observer));
    players
        .into_iter()
        .map(|p| {
            let devs = canonical_deviations(setting, profile, p, seed)?;
            deviation_gaps(setting, profile, p, &devs)
        })
        .collect()
}

/// Overall verdict: refuted if any player is refuted, tie if any player ties.
pub fn overall_verdict(reports: &[EquilibriumReport]) -> Verdict {
    if reports.iter().any(|r| r.verdict == Verdict::Refuted) {
        Verdict::Refuted
    } else if reports.iter().any(|r| r.verdict == Verdict::TieWitness) {
        Verdict::TieWitness
    } else {
        Verdict::Strict
    }
}

