//! Extended-real payoffs.
//!
//! A payoff is `-M * inf_weight + rational + log_part` in the limit `M -> inf`.
//! A single realized `-inf` reward has weight 1; expectations accumulate the
//! probability mass of `-inf` outcomes in `inf_weight`, so two payoffs are
//! ordered first by that mass and then by their finite parts. Indicator and
//! quadratic-score contributions stay in the exact `rational` part; logarithms
//! go to `log_part`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub};

use num::{Signed, Zero};
use serde::{Serialize, Serializer};

use crate::rational::{fmt_q, to_f64, Q};

#[derive(Clone, Debug, PartialEq)]
pub struct ExtReal {
    inf_weight: Q,
    rational: Q,
    log_part: f64,
}

impl Default for ExtReal {
    fn default() -> Self {
        Self::zero()
    }
}

impl ExtReal {
    pub fn zero() -> Self {
        ExtReal { inf_weight: Q::zero(), rational: Q::zero(), log_part: 0.0 }
    }

    pub fn exact(v: Q) -> Self {
        ExtReal { inf_weight: Q::zero(), rational: v, log_part: 0.0 }
    }

    pub fn log(v: f64) -> Self {
        debug_assert!(v.is_finite());
        ExtReal { inf_weight: Q::zero(), rational: Q::zero(), log_part: v }
    }

    pub fn neg_infinity() -> Self {
        ExtReal { inf_weight: crate::rational::one(), rational: Q::zero(), log_part: 0.0 }
    }

    /// Probability mass of `-inf` outcomes (negative for `+inf` gaps).
    pub fn inf_weight(&self) -> &Q {
        &self.inf_weight
    }

    pub fn rational_part(&self) -> &Q {
        &self.rational
    }

    pub fn log_part(&self) -> f64 {
        self.log_part
    }

    pub fn is_neg_infinite(&self) -> bool {
        self.inf_weight.is_positive()
    }

    pub fn is_pos_infinite(&self) -> bool {
        self.inf_weight.is_negative()
    }

    pub fn is_finite(&self) -> bool {
        self.inf_weight.is_zero()
    }

    /// True when the value carries no floating-point component.
    pub fn is_exact(&self) -> bool {
        self.log_part == 0.0
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_neg_infinite() {
            f64::NEG_INFINITY
        } else if self.is_pos_infinite() {
            f64::INFINITY
        } else {
            to_f64(&self.rational) + self.log_part
        }
    }

    /// Multiplies by a nonnegative probability weight.
    pub fn scale(&self, w: &Q) -> Self {
        if w.is_zero() {
            return Self::zero();
        }
        ExtReal {
            inf_weight: &self.inf_weight * w,
            rational: &self.rational * w,
            log_part: if self.log_part == 0.0 { 0.0 } else { self.log_part * to_f64(w) },
        }
    }

    /// Sign of the value, treating finite inexact magnitudes within `tol` as zero.
    pub fn sign(&self, tol: f64) -> Ordering {
        if !self.inf_weight.is_zero() {
            return if self.inf_weight.is_positive() { Ordering::Less } else { Ordering::Greater };
        }
        if self.is_exact() {
            return self.rational.cmp(&Q::zero());
        }
        let v = to_f64(&self.rational) + self.log_part;
        if v > tol {
            Ordering::Greater
        } else if v < -tol {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    }

    /// Total order: `-inf` mass first, then the finite value (exact when possible).
    pub fn total_cmp(&self, other: &Self) -> Ordering {
        match other.inf_weight.cmp(&self.inf_weight) {
            Ordering::Equal => {}
            o => return o,
        }
        if self.log_part == other.log_part {
            return self.rational.cmp(&other.rational);
        }
        let a = to_f64(&self.rational) + self.log_part;
        let b = to_f64(&other.rational) + other.log_part;
        a.total_cmp(&b)
    }

    /// Machine-readable form: "-inf", "inf", or a decimal number.
    pub fn render(&self) -> String {
        if self.is_neg_infinite() {
            "-inf".to_string()
        } else if self.is_pos_infinite() {
            "inf".to_string()
        } else if self.is_exact() {
            fmt_q(&self.rational)
        } else {
            format!("{:.12}", self.to_f64())
        }
    }
}

impl Add for ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: ExtReal) -> ExtReal {
        ExtReal {
            inf_weight: self.inf_weight + rhs.inf_weight,
            rational: self.rational + rhs.rational,
            log_part: self.log_part + rhs.log_part,
        }
    }
}

impl<'a> Add<&'a ExtReal> for &'a ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: &ExtReal) -> ExtReal {
        self.clone() + rhs.clone()
    }
}

impl AddAssign for ExtReal {
    fn add_assign(&mut self, rhs: ExtReal) {
        self.inf_weight += rhs.inf_weight;
        self.rational += rhs.rational;
        self.log_part += rhs.log_part;
    }
}

impl Neg for ExtReal {
    type Output = ExtReal;
    fn neg(self) -> ExtReal {
        ExtReal { inf_weight: -self.inf_weight, rational: -self.rational, log_part: -self.log_part }
    }
}

impl Sub for ExtReal {
    type Output = ExtReal;
    fn sub(self, rhs: ExtReal) -> ExtReal {
        self + (-rhs)
    }
}

impl<'a> Sub<&'a ExtReal> for &'a ExtReal {
    type Output = ExtReal;
    fn sub(self, rhs: &ExtReal) -> ExtReal {
        self.clone() - rhs.clone()
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.is_finite() {
            s.serialize_f64(self.to_f64())
        } else {
            s.serialize_str(&self.render())
        }
    }
}
