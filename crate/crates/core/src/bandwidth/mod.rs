//! Observers measuring a source's bandwidth through caps set by the source's throttling.

use std::cmp::Ordering;
use std::str::FromStr;

use num::{One, Zero};
use serde::Serialize;

use crate::equilibrium::{conditional_payoffs, impossibility_witness_for, truthful_profile_with, ImpossibilityWitness, GAP_TOLERANCE};
use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::mechanism::Setting;
use crate::model::{shared_distributions, JointDist, LabeledMass, ModelSpec, Prior, SignalDist, SignalSpace};
use crate::rational::{fmt_q, q, Q};
use crate::scoring::ScoringRule;
use crate::strategy::{SourceAction, XRule};

/// Finite noise family offered to one observer at a given cap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MenuKind {
    /// Point mass at the cap.
    AtCap,
    /// Point masses at every grid value up to the cap.
    AllBelow,
    /// Point mass at the cap and the even mixture of the cap with the next lower grid value.
    TwoPoint,
}

impl FromStr for MenuKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "at-cap" => Ok(MenuKind::AtCap),
            "all-below" => Ok(MenuKind::AllBelow),
            "two-point" => Ok(MenuKind::TwoPoint),
            other => Err(Error::InvalidConfig(format!("unknown menu kind `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BandwidthConfig {
    grid: Vec<Q>,
    throttles: Vec<Option<Q>>,
    menus: Vec<MenuKind>,
}

impl BandwidthConfig {
    /// `throttles[i] = None` means observer `i` is never throttled.
    pub fn new(grid: Vec<Q>, throttles: Vec<Option<Q>>, menus: Vec<MenuKind>) -> Result<Self> {
        if grid.len() < 2 {
            return Err(Error::InvalidConfig("the bandwidth grid needs at least two values".into()));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) || grid[0] <= Q::zero() {
            return Err(Error::InvalidConfig("the bandwidth grid must be positive and strictly ascending".into()));
        }
        if throttles.len() < 2 || throttles.len() != menus.len() {
            return Err(Error::InvalidConfig("need one throttle and one menu per observer, at least two observers".into()));
        }
        if let Some(t) = throttles.iter().flatten().find(|t| !grid.contains(t)) {
            return Err(Error::InvalidConfig(format!("throttle {} is not a grid value", fmt_q(t))));
        }
        Ok(BandwidthConfig { grid, throttles, menus })
    }

    pub fn grid(&self) -> &[Q] {
        &self.grid
    }

    pub fn throttles(&self) -> &[Option<Q>] {
        &self.throttles
    }

    pub fn menus(&self) -> &[MenuKind] {
        &self.menus
    }

    pub fn n(&self) -> usize {
        self.throttles.len()
    }

    /// Largest throttle, `None` if no observer is throttled.
    pub fn max_throttle(&self) -> Option<&Q> {
        self.throttles.iter().flatten().max()
    }
}

/// Menu of observer `i` at a cap, as distributions over grid indices.
pub fn menu(cfg: &BandwidthConfig, i: usize, cap: &Q) -> Result<Vec<SignalDist>> {
    let Some(top) = cfg.grid.iter().rposition(|g| g <= cap) else {
        return Err(Error::InvalidConfig(format!("empty menu for observer {i} at cap {}", fmt_q(cap))));
    };
    let point = |k: usize| SignalDist::from([(k, Q::one())]);
    Ok(match cfg.menus[i] {
        MenuKind::AtCap => vec![point(top)],
        MenuKind::AllBelow => (0..=top).map(point).collect(),
        MenuKind::TwoPoint if top > 0 => vec![point(top), SignalDist::from([(top - 1, q(1, 2)), (top, q(1, 2))])],
        MenuKind::TwoPoint => vec![point(top)],
    })
}

fn products(menus: &[Vec<SignalDist>]) -> Vec<JointDist> {
    let mut acc: Vec<Vec<SignalDist>> = vec![vec![]];
    for m in menus {
        acc = acc
            .into_iter()
            .flat_map(|pre| {
                m.iter().map(move |f| {
                    let mut v = pre.clone();
                    v.push(f.clone());
                    v
                })
            })
            .collect();
    }
    acc.iter().map(|f| JointDist::product(f)).collect()
}

/// `L_x` = products of menus at cap `x`, plus (when throttled) products of menus at `min(tᵢ, x)`.
pub fn build_bandwidth_spec(cfg: &BandwidthConfig) -> Result<ModelSpec> {
    let n = cfg.n();
    let labels: Vec<String> = cfg.grid.iter().map(fmt_q).collect();
    let space = SignalSpace::new(vec![labels.clone(); n])?;
    let mut lsets = Vec::new();
    for x in &cfg.grid {
        let open: Vec<Vec<SignalDist>> = (0..n).map(|i| menu(cfg, i, x)).collect::<Result<_>>()?;
        let mut set = products(&open);
        if cfg.max_throttle().is_some() {
            let capped: Vec<Vec<SignalDist>> = (0..n)
                .map(|i| match &cfg.throttles[i] {
                    Some(t) if t < x => menu(cfg, i, t),
                    _ => menu(cfg, i, x),
                })
                .collect::<Result<_>>()?;
            set.extend(products(&capped));
        }
        lsets.push(set);
    }
    let chars = cfg.throttles.iter().map(|t| t.as_ref().map_or_else(|| "inf".to_string(), fmt_q)).collect();
    ModelSpec::new(space, labels, lsets)?.with_characteristics(chars)
}

/// Maximum support point across the factors of a product report.
pub fn refined_observer_estimate(space: &SignalSpace, dhat: &JointDist) -> Result<Q> {
    if !dhat.is_product() {
        return Err(Error::InvalidReport("the bandwidth estimate needs a product distribution".into()));
    }
    let mut best: Option<Q> = None;
    for i in 0..dhat.arity() {
        for k in dhat.marginal(i)?.keys() {
            let v = crate::rational::parse_q(space.label(i, *k))?;
            if best.as_ref().is_none_or(|b| &v > b) {
                best = Some(v);
            }
        }
    }
    best.ok_or_else(|| Error::InvalidReport("empty distribution".into()))
}

#[derive(Clone, Debug, Serialize)]
pub struct BandwidthWitness {
    pub x1: String,
    pub x2: String,
    pub dist: Vec<LabeledMass>,
    pub above_max_throttle: bool,
    pub tie: ImpossibilityWitness,
}

/// Shared product with the largest pair `x₁ > x₂`, preferring pairs above every throttle.
pub fn demonstrate_non_identifiability(cfg: &BandwidthConfig, rule: ScoringRule) -> Result<Option<BandwidthWitness>> {
    let spec = build_bandwidth_spec(cfg)?;
    let shared = shared_distributions(&spec);
    let above = |w: &crate::model::SharedWitness| {
        cfg.max_throttle().is_some_and(|t| &cfg.grid[w.x1] > t && &cfg.grid[w.x2] > t)
    };
    // shared lists x1 < x2 by index; the grid is ascending so the larger value is `w.x2`.
    let Some(w) = shared.iter().max_by_key(|w| (above(w), w.x2, w.x1)) else {
        return Ok(None);
    };
    let k = spec.values().len();
    let setting = Setting::new(spec.clone(), Prior::uniform(k), rule)?;
    let tie = impossibility_witness_for(&setting, w.x2, w.x1, &w.dist)?;
    Ok(Some(BandwidthWitness {
        x1: spec.values()[w.x2].clone(),
        x2: spec.values()[w.x1].clone(),
        dist: w.dist.to_labeled(spec.space()),
        above_max_throttle: above(w),
        tie,
    }))
}

#[derive(Clone, Debug, Serialize)]
pub struct DeviationRow {
    pub xhat: String,
    /// Payoff with the reported distribution held at the truthful choice.
    pub held: ExtReal,
    pub held_gap: ExtReal,
    /// Lowest gap over every reported distribution tried.
    pub min_gap: ExtReal,
    pub reports_tried: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct QuasiStrictReport {
    pub x: String,
    pub chosen: Vec<LabeledMass>,
    /// Whether `x` lies in some factor's support of the chosen distribution.
    pub chosen_reaches_x: bool,
    pub truthful: ExtReal,
    pub upward: Vec<DeviationRow>,
    /// Recorded only; the definition quantifies over upward reports.
    pub downward: Vec<DeviationRow>,
    pub quasi_strict: bool,
}

fn reaches(d: &JointDist, k: usize) -> bool {
    d.support().any(|t| t.contains(&k))
}

fn mix(a: &JointDist, b: &JointDist) -> JointDist {
    let h = q(1, 2);
    JointDist::from_entries(a.arity(), a.iter().chain(b.iter()).map(|(t, p)| (t.clone(), p * &h)))
}

/// Source payoffs at `x` for the truthful report and every other value, observers reading the
/// maximum support point of the reported distribution.
pub fn quasi_strictness_check(cfg: &BandwidthConfig, rule: ScoringRule, xi: usize) -> Result<QuasiStrictReport> {
    let spec = build_bandwidth_spec(cfg)?;
    if xi >= spec.values().len() {
        return Err(Error::InvalidConfig(format!("value index {xi} outside the grid")));
    }
    let k = spec.values().len();
    let setting = Setting::new(spec.clone(), Prior::uniform(k), rule)?;
    let base_choices: Vec<JointDist> = spec.lsets().iter().map(|l| l[0].clone()).collect();
    let base = truthful_profile_with(&spec, &base_choices, Q::one(), XRule::MaxSupport)?;
    let payoff = |choose: &JointDist, xhat: usize, dhat: &JointDist| -> Result<ExtReal> {
        let p = base.with_source_action(xi, SourceAction { choose: choose.clone(), xhat, dhat: dhat.clone() });
        Ok(conditional_payoffs(&setting, &p, xi)?.source)
    };
    let mut best: Option<(ExtReal, bool, JointDist)> = None;
    for d in spec.lset(xi) {
        let v = payoff(d, xi, d)?;
        let r = reaches(d, xi);
        let better = match &best {
            None => true,
            Some((bv, br, _)) => match v.total_cmp(bv) {
                Ordering::Greater => true,
                Ordering::Equal => r && !br,
                Ordering::Less => false,
            },
        };
        if better {
            best = Some((v, r, d.clone()));
        }
    }
    let (truthful, reached, chosen) = best.expect("feasible sets are nonempty");
    if !spec.lset(xi).iter().any(|d| reaches(d, xi)) {
        return Err(Error::InvalidConfig(format!(
            "no distribution feasible at {} reaches it",
            spec.values()[xi]
        )));
    }
    let row = |x2: usize| -> Result<DeviationRow> {
        let held = payoff(&chosen, x2, &chosen)?;
        let held_gap = &truthful - &held;
        let mut min_gap = held_gap.clone();
        let mut tried = 1;
        for e in spec.lset(x2) {
            for dhat in [e.clone(), mix(&chosen, e)] {
                let g = &truthful - &payoff(&chosen, x2, &dhat)?;
                tried += 1;
                if g.total_cmp(&min_gap) == Ordering::Less {
                    min_gap = g;
                }
            }
        }
        Ok(DeviationRow { xhat: spec.values()[x2].clone(), held, held_gap, min_gap, reports_tried: tried })
    };
    let upward = (xi + 1..k).map(row).collect::<Result<Vec<_>>>()?;
    let downward = (0..xi).map(row).collect::<Result<Vec<_>>>()?;
    let quasi_strict = upward.iter().all(|r| r.min_gap.sign(GAP_TOLERANCE) == Ordering::Greater);
    Ok(QuasiStrictReport {
        x: spec.values()[xi].clone(),
        chosen: chosen.to_labeled(spec.space()),
        chosen_reaches_x: reached,
        truthful,
        upward,
        downward,
        quasi_strict,
    })
}

#[cfg(test)]
mod tests;
