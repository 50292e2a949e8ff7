use num::{One, Zero};
use serde::Serialize;

use crate::error::Result;
use crate::extreal::ExtReal;
use crate::mechanism::{collect_reports, observer_reward, Pairing, Setting};
use crate::rational::Q;
use crate::strategy::StrategyProfile;

/// Expected payoffs of every player, with the source's reward split into its two terms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Expectation {
    pub source: ExtReal,
    pub source_score: ExtReal,
    pub source_indicator: ExtReal,
    pub observers: Vec<ExtReal>,
}

impl Expectation {
    fn zero(n: usize) -> Self {
        Expectation {
            source: ExtReal::zero(),
            source_score: ExtReal::zero(),
            source_indicator: ExtReal::zero(),
            observers: vec![ExtReal::zero(); n],
        }
    }

    fn add_scaled(&mut self, other: &Expectation, w: &Q) {
        self.source += other.source.scale(w);
        self.source_score += other.source_score.scale(w);
        self.source_indicator += other.source_indicator.scale(w);
        for (a, b) in self.observers.iter_mut().zip(&other.observers) {
            *a += b.scale(w);
        }
    }

    /// Sum over all players.
    pub fn total(&self) -> ExtReal {
        self.observers.iter().fold(self.source.clone(), |a, b| a + b.clone())
    }

    /// Payoff of a player: `None` is the source, `Some(i)` observer `i`.
    pub fn player(&self, p: Player) -> &ExtReal {
        match p {
            Player::Source => &self.source,
            Player::Observer(i) => &self.observers[i],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Player {
    Source,
    Observer(usize),
}

/// Exact expectation over the prior, the source's chosen distributions, nature's
/// draw, mixed signal reports and the uniform pairing.
pub fn expected_payoffs(setting: &Setting, profile: &StrategyProfile) -> Result<Expectation> {
    profile.validate(&setting.spec)?;
    let mut acc = Expectation::zero(setting.n());
    let structures = Pairing::all_structures(setting.n())?;
    for x in setting.prior.support() {
        let cond = conditional_on(setting, profile, x, &structures)?;
        acc.add_scaled(&cond, setting.prior.prob(x));
    }
    Ok(acc)
}

/// Expected payoffs conditional on the source's private value `x`.
pub fn conditional_payoffs(setting: &Setting, profile: &StrategyProfile, x: usize) -> Result<Expectation> {
    profile.validate(&setting.spec)?;
    let structures = Pairing::all_structures(setting.n())?;
    conditional_on(setting, profile, x, &structures)
}

fn conditional_on(
    setting: &Setting,
    profile: &StrategyProfile,
    x: usize,
    structures: &[Pairing],
) -> Result<Expectation> {
    let n = setting.n();
    let space = setting.spec.space();
    let action = &profile.source[x];
    let w_pair = Q::new(1.into(), (structures.len() as i64).into());
    let mut acc = Expectation::zero(n);
    for (y, py) in action.choose.iter() {
        let per_obs: Vec<Vec<(usize, Q)>> = (0..n)
            .map(|i| profile.observers[i].signal.report_dist(y[i], space.size(i)))
            .collect();
        for (yhat, pyhat) in cartesian(&per_obs) {
            let w = py * &pyhat * &w_pair;
            if w.is_zero() {
                continue;
            }
            // The source's terms do not depend on the pairing except through x̂ᵢ.
            for pairing in structures {
                let b = collect_reports(setting, profile, x, y, yhat.clone(), pairing.clone())?;
                let score = setting.rule.score(&b.dhat, &b.yhat)?;
                let ind = if b.xhat_obs.iter().all(|v| *v == Some(b.xhat)) { Q::one() } else { Q::zero() };
                let ind = ExtReal::exact(ind);
                acc.source += (score.clone() + ind.clone()).scale(&w);
                acc.source_score += score.scale(&w);
                acc.source_indicator += ind.scale(&w);
                for i in 0..n {
                    acc.observers[i] += observer_reward(&b, i).scale(&w);
                }
            }
        }
    }
    Ok(acc)
}

fn cartesian(per: &[Vec<(usize, Q)>]) -> Vec<(Vec<usize>, Q)> {
    let mut out = vec![(Vec::with_capacity(per.len()), Q::one())];
    for opts in per {
        out = out
            .into_iter()
            .flat_map(|(t, p)| {
                opts.iter().map(move |(s, ps)| {
                    let mut t = t.clone();
                    t.push(*s);
                    (t, &p * ps)
                })
            })
            .collect();
    }
    out
}
