//! Strictly proper scoring rules over joint signal distributions.

use std::fmt;
use std::str::FromStr;

use num::Zero;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::model::JointDist;
use crate::rational::{fmt_q, ln_q, parse_q, q, Q};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScoringRule {
    /// ln d(y); `-inf` on zero-probability outcomes.
    Log,
    /// Brier: 2 d(y) - Σ_z d(z)².
    Quadratic,
    /// Brier plus a constant; `shift = 1/2` makes every score nonnegative.
    ShiftedQuadratic { shift: Q },
}

impl Default for ScoringRule {
    fn default() -> Self {
        ScoringRule::ShiftedQuadratic { shift: q(1, 2) }
    }
}

impl ScoringRule {
    pub fn shifted_quadratic() -> Self {
        Self::default()
    }

    pub fn name(&self) -> String {
        match self {
            ScoringRule::Log => "log".into(),
            ScoringRule::Quadratic => "quadratic".into(),
            ScoringRule::ShiftedQuadratic { shift } if *shift == q(1, 2) => "quadratic+0.5".into(),
            ScoringRule::ShiftedQuadratic { shift } => format!("quadratic+{}", fmt_q(shift)),
        }
    }

    /// Score of `reported` at a realized `outcome`.
    pub fn score(&self, reported: &JointDist, outcome: &[usize]) -> Result<ExtReal> {
        if outcome.len() != reported.arity() {
            return Err(Error::Dimension { expected: reported.arity(), got: outcome.len() });
        }
        let p = reported.prob(outcome);
        Ok(match self {
            ScoringRule::Log => {
                if p.is_zero() {
                    ExtReal::neg_infinity()
                } else {
                    ExtReal::log(ln_q(&p))
                }
            }
            ScoringRule::Quadratic => ExtReal::exact(quadratic(&p, reported)),
            ScoringRule::ShiftedQuadratic { shift } => ExtReal::exact(quadratic(&p, reported) + shift),
        })
    }

    /// E_{y ~ believed}[score(reported, y)].
    pub fn expected_score(&self, believed: &JointDist, reported: &JointDist) -> Result<ExtReal> {
        if believed.arity() != reported.arity() {
            return Err(Error::Dimension { expected: believed.arity(), got: reported.arity() });
        }
        let mut acc = ExtReal::zero();
        for (y, p) in believed.iter() {
            acc += self.score(reported, y)?.scale(p);
        }
        Ok(acc)
    }

    /// Expected loss from reporting `reported` instead of `believed`; zero iff they coincide.
    pub fn properness_gap(&self, believed: &JointDist, reported: &JointDist) -> Result<ExtReal> {
        Ok(self.expected_score(believed, believed)? - self.expected_score(believed, reported)?)
    }
}

fn quadratic(p: &Q, d: &JointDist) -> Q {
    p * Q::from_integer(2.into()) - d.sum_squares()
}

impl FromStr for ScoringRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "log" => Ok(ScoringRule::Log),
            "quadratic" | "brier" => Ok(ScoringRule::Quadratic),
            other => match other.strip_prefix("quadratic+") {
                Some(shift) => Ok(ScoringRule::ShiftedQuadratic { shift: parse_q(shift)? }),
                None => Err(Error::Parse {
                    path: "rule".into(),
                    message: format!(
                        "unknown scoring rule `{other}` (expected log | quadratic | quadratic+0.5)"
                    ),
                }),
            },
        }
    }
}

impl fmt::Display for ScoringRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl Serialize for ScoringRule {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.name())
    }
}
