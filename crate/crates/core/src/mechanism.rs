//! The elicitation mechanism: report bundles, observer pairing and rewards.
//!
//! Observers are scored against a paired peer with a log pairwise term and a
//! symmetric consistency penalty, plus an agreement bonus on the reported source
//! value. The source is scored by a proper scoring rule on the observers'
//! reported signals plus a bonus when every observer agrees with its value.
//!
//! With an odd number of observers one trio forms a 3-cycle. Each trio member
//! reports a belief about both of its trio neighbours and its pairwise term is
//! the average of the two mutual terms, so every pairwise term compares two
//! estimates of the same joint probability.

use std::collections::BTreeMap;

use num::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::model::{JointDist, LabeledMass, ModelSpec, Prior, SignalDist};
use crate::rational::{fmt_q, ln_q, to_f64, Q};
use crate::scoring::ScoringRule;
use crate::strategy::StrategyProfile;

/// Observer pairing: disjoint mutual pairs plus at most one 3-cycle.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Pairing {
    /// Each group is a pair `[a, b]` or a cycle `[a, b, c]` (a -> b -> c -> a).
    groups: Vec<Vec<usize>>,
}

impl Pairing {
    pub fn from_groups(n: usize, groups: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n];
        let mut trios = 0;
        for g in &groups {
            match g.len() {
                2 => {}
                3 => trios += 1,
                k => return Err(Error::InvalidReport(format!("pairing group of size {k}"))),
            }
            for &i in g {
                if i >= n || seen[i] {
                    return Err(Error::InvalidReport(format!("observer {i} paired twice or out of range")));
                }
                seen[i] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidReport("pairing leaves an observer unpaired".into()));
        }
        if trios != n % 2 {
            return Err(Error::InvalidReport(format!("{n} observers need {} trio(s)", n % 2)));
        }
        Ok(Pairing { groups })
    }

    pub fn n(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    /// The observer `i` is scored against first (its successor in a trio).
    pub fn partner(&self, i: usize) -> usize {
        self.neighbors(i)[0]
    }

    /// Everyone `i` reports a belief about: its pair partner, or [successor, predecessor] in the trio.
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        for g in &self.groups {
            if let Some(pos) = g.iter().position(|&a| a == i) {
                return match g.len() {
                    2 => vec![g[1 - pos]],
                    _ => vec![g[(pos + 1) % 3], g[(pos + 2) % 3]],
                };
            }
        }
        unreachable!("validated pairing covers every observer")
    }

    /// Unoriented pairing structures, each once (trio orientation does not affect rewards).
    pub fn all_structures(n: usize) -> Result<Vec<Pairing>> {
        if n < 2 {
            return Err(Error::InvalidConfig(format!("pairing needs at least 2 observers, got {n}")));
        }
        let all: Vec<usize> = (0..n).collect();
        let mut out = Vec::new();
        if n % 2 == 0 {
            for m in matchings(&all) {
                out.push(Pairing { groups: m });
            }
        } else {
            for a in 0..n {
                for b in a + 1..n {
                    for c in b + 1..n {
                        let rest: Vec<usize> = all.iter().copied().filter(|&v| v != a && v != b && v != c).collect();
                        for mut m in matchings(&rest) {
                            m.insert(0, vec![a, b, c]);
                            out.push(Pairing { groups: m });
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

fn matchings(items: &[usize]) -> Vec<Vec<Vec<usize>>> {
    if items.is_empty() {
        return vec![vec![]];
    }
    let first = items[0];
    let mut out = Vec::new();
    for k in 1..items.len() {
        let rest: Vec<usize> = items[1..].iter().copied().filter(|&v| v != items[k]).collect();
        for mut m in matchings(&rest) {
            m.insert(0, vec![first, items[k]]);
            out.push(m);
        }
    }
    out
}

/// Uniformly random pairing; deterministic for a given random stream.
pub fn pair_observers<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Pairing> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!("pairing needs at least 2 observers, got {n}")));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut groups = Vec::new();
    let mut rest = &perm[..];
    if n % 2 == 1 {
        groups.push(perm[..3].to_vec());
        rest = &perm[3..];
    }
    for c in rest.chunks(2) {
        groups.push(c.to_vec());
    }
    Pairing::from_groups(n, groups)
}

/// One round's reports.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportBundle {
    pub yhat: Vec<usize>,
    pub xhat: usize,
    pub dhat: JointDist,
    pub pi: Vec<Q>,
    pub xhat_obs: Vec<Option<usize>>,
    /// Per observer: belief about each neighbour's signal.
    pub qhat: Vec<BTreeMap<usize, SignalDist>>,
    pub pairing: Pairing,
}

impl ReportBundle {
    pub fn n(&self) -> usize {
        self.yhat.len()
    }

    /// Checks the report invariants (probability ranges, normalization, pairing coverage).
    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if self.pi.len() != n || self.xhat_obs.len() != n || self.qhat.len() != n || self.pairing.n() != n {
            return Err(Error::InvalidReport("report vectors disagree on observer count".into()));
        }
        if self.dhat.arity() != n {
            return Err(Error::InvalidReport("reported distribution has the wrong arity".into()));
        }
        for (i, p) in self.pi.iter().enumerate() {
            if !p.is_positive() || p > &Q::one() {
                return Err(Error::InvalidReport(format!(
                    "observer {i} reported pi = {}; pi range (0,1]",
                    fmt_q(p)
                )));
            }
        }
        for i in 0..n {
            for k in self.pairing.neighbors(i) {
                let d = self.qhat[i].get(&k).ok_or_else(|| {
                    Error::InvalidReport(format!("observer {i} has no belief about partner {k}"))
                })?;
                if d.values().any(|p| p.is_negative()) {
                    return Err(Error::InvalidReport(format!("observer {i} belief has negative mass")));
                }
                let s = d.values().fold(Q::zero(), |a, b| a + b);
                if !s.is_one() {
                    return Err(Error::InvalidReport(format!(
                        "observer {i} belief about {k} sums to {}",
                        fmt_q(&s)
                    )));
                }
            }
        }
        Ok(())
    }

    fn observers_agree(&self) -> bool {
        self.xhat_obs.windows(2).all(|w| w[0] == w[1])
    }
}

/// Mutual pairwise term for observer `i` scored against `k`.
fn pair_term(r: &ReportBundle, i: usize, k: usize) -> ExtReal {
    let qi = r.qhat[i].get(&k).and_then(|d| d.get(&r.yhat[k])).cloned().unwrap_or_else(Q::zero);
    let qk = r.qhat[k].get(&i).and_then(|d| d.get(&r.yhat[i])).cloned().unwrap_or_else(Q::zero);
    if qi.is_zero() || qk.is_zero() {
        return ExtReal::neg_infinity();
    }
    let first = &qi / &r.pi[k];
    let ratio = (&qk * &r.pi[k]) / (&qi * &r.pi[i]);
    ExtReal::log(ln_q(&first)) - ExtReal::log(ln_q(&ratio).abs())
}

/// Observer `i`'s reward for the round.
pub fn observer_reward(r: &ReportBundle, i: usize) -> ExtReal {
    let neighbors = r.pairing.neighbors(i);
    let w = Q::new(1.into(), (neighbors.len() as i64).into());
    let mut total = ExtReal::zero();
    for k in neighbors {
        total += pair_term(r, i, k).scale(&w);
    }
    if r.observers_agree() {
        total += ExtReal::exact(Q::one());
    }
    total
}

/// Source reward: proper score of the reported distribution plus the unanimity bonus.
pub fn source_reward(r: &ReportBundle, rule: &ScoringRule) -> Result<ExtReal> {
    let mut v = rule.score(&r.dhat, &r.yhat)?;
    if r.xhat_obs.iter().all(|x| *x == Some(r.xhat)) {
        v += ExtReal::exact(Q::one());
    }
    Ok(v)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PayoffVector {
    pub source: ExtReal,
    pub observers: Vec<ExtReal>,
}

pub fn payoffs(r: &ReportBundle, rule: &ScoringRule) -> Result<PayoffVector> {
    r.validate()?;
    Ok(PayoffVector {
        source: source_reward(r, rule)?,
        observers: (0..r.n()).map(|i| observer_reward(r, i)).collect(),
    })
}

/// Model, prior and scoring rule: everything nature and the mechanism need.
#[derive(Clone, Debug)]
pub struct Setting {
    pub spec: ModelSpec,
    pub prior: Prior,
    pub rule: ScoringRule,
}

impl Setting {
    pub fn new(spec: ModelSpec, prior: Prior, rule: ScoringRule) -> Result<Self> {
        prior.check_against(&spec)?;
        Ok(Setting { spec, prior, rule })
    }

    pub fn n(&self) -> usize {
        self.spec.n()
    }
}

fn sample_index<R: Rng + ?Sized>(rng: &mut R, weights: &[(usize, Q)]) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (k, w) in weights {
        acc += to_f64(w);
        if u < acc {
            return *k;
        }
    }
    weights.iter().rev().find(|(_, w)| w.is_positive()).map(|(k, _)| *k).unwrap_or(0)
}

/// Samples a tuple from a joint distribution.
pub fn sample_tuple<R: Rng + ?Sized>(rng: &mut R, d: &JointDist) -> Vec<usize> {
    let entries: Vec<(&Vec<usize>, &Q)> = d.iter().collect();
    let idx: Vec<(usize, Q)> = entries.iter().enumerate().map(|(k, (_, p))| (k, (*p).clone())).collect();
    entries[sample_index(rng, &idx)].0.clone()
}

#[derive(Clone, Debug)]
pub struct RoundOutcome {
    pub bundle: ReportBundle,
    pub payoffs: PayoffVector,
    pub x: usize,
    pub y: Vec<usize>,
}

/// Builds the report bundle for realized `(x, y, yhat)` under a pairing.
pub fn collect_reports(
    setting: &Setting,
    profile: &StrategyProfile,
    x: usize,
    y: &[usize],
    yhat: Vec<usize>,
    pairing: Pairing,
) -> Result<ReportBundle> {
    let action = &profile.source[x];
    let n = setting.n();
    let mut pi = Vec::with_capacity(n);
    let mut xo = Vec::with_capacity(n);
    let mut qh = Vec::with_capacity(n);
    for i in 0..n {
        let rep = profile.observers[i].later_reports(
            &setting.spec,
            i,
            y[i],
            yhat[i],
            &action.dhat,
            &pairing.neighbors(i),
            &profile.c,
        )?;
        pi.push(rep.pi);
        xo.push(rep.xhat);
        qh.push(rep.qhat);
    }
    let bundle = ReportBundle {
        yhat,
        xhat: action.xhat,
        dhat: action.dhat.clone(),
        pi,
        xhat_obs: xo,
        qhat: qh,
        pairing,
    };
    bundle.validate()?;
    Ok(bundle)
}

/// Runs nature's draws and one pass of the mechanism.
pub fn run_round<R: Rng + ?Sized>(
    setting: &Setting,
    profile: &StrategyProfile,
    rng: &mut R,
) -> Result<RoundOutcome> {
    profile.validate(&setting.spec)?;
    let prior: Vec<(usize, Q)> = setting.prior.probs().iter().cloned().enumerate().collect();
    let x = sample_index(rng, &prior);
    let y = sample_tuple(rng, &profile.source[x].choose);
    let space = setting.spec.space();
    // Signal reports are drawn before anything else is revealed.
    let yhat: Vec<usize> = (0..setting.n())
        .map(|i| {
            let dist = profile.observers[i].signal.report_dist(y[i], space.size(i));
            sample_index(rng, &dist)
        })
        .collect();
    let pairing = pair_observers(setting.n(), rng)?;
    let bundle = collect_reports(setting, profile, x, &y, yhat, pairing)?;
    let payoffs = payoffs(&bundle, &setting.rule)?;
    Ok(RoundOutcome { bundle, payoffs, x, y })
}

/// Labelled, serializable view of a round.
#[derive(Clone, Debug, Serialize)]
pub struct RoundRecord {
    pub x: String,
    pub y: Vec<String>,
    pub yhat: Vec<String>,
    pub xhat: String,
    pub dhat: Vec<LabeledMass>,
    pub pi: Vec<String>,
    pub xhat_obs: Vec<String>,
    pub qhat: Vec<BTreeMap<String, BTreeMap<String, String>>>,
    pub pairing: Vec<Vec<usize>>,
    pub payoffs: PayoffVector,
}

/// Label rendering of the empty reported value.
pub const EMPTY_VALUE: &str = "<none>";

impl RoundOutcome {
    pub fn record(&self, spec: &ModelSpec) -> RoundRecord {
        let space = spec.space();
        let b = &self.bundle;
        RoundRecord {
            x: spec.values()[self.x].clone(),
            y: space.render_tuple(&self.y),
            yhat: space.render_tuple(&b.yhat),
            xhat: spec.values()[b.xhat].clone(),
            dhat: b.dhat.to_labeled(space),
            pi: b.pi.iter().map(fmt_q).collect(),
            xhat_obs: b
                .xhat_obs
                .iter()
                .map(|x| x.map(|v| spec.values()[v].clone()).unwrap_or_else(|| EMPTY_VALUE.into()))
                .collect(),
            qhat: b
                .qhat
                .iter()
                .map(|m| {
                    m.iter()
                        .map(|(k, d)| {
                            (
                                k.to_string(),
                                d.iter().map(|(s, p)| (space.label(*k, *s).to_string(), fmt_q(p))).collect(),
                            )
                        })
                        .collect()
                })
                .collect(),
            pairing: b.pairing.groups().to_vec(),
            payoffs: self.payoffs.clone(),
        }
    }
}

/// Independent child stream `k` of a seeded generator.
pub fn round_rng(seed: u64, k: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(k);
    r
}
