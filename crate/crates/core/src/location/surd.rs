use std::fmt;

use num::{BigInt, Integer, One, Signed, ToPrimitive, Zero};

use crate::rational::{exact_sqrt, fmt_q, to_f64, Q};

/// Exact number `a + b·√m` with `m` a squarefree positive integer (`m = 1` folds into `a`).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Surd {
    pub a: Q,
    pub b: Q,
    pub m: BigInt,
}

/// Splits `n > 0` into `k²·m` with `m` squarefree (trial division, perfect-square fallback for
/// large unfactored cofactors).
fn square_split(n: &BigInt) -> (BigInt, BigInt) {
    let mut rest = n.clone();
    let mut k = BigInt::one();
    let mut m = BigInt::one();
    let mut p = BigInt::from(2);
    let limit = BigInt::from(1_000_000u32);
    while &p * &p <= rest && p <= limit {
        let mut e = 0u32;
        while rest.is_multiple_of(&p) {
            rest /= &p;
            e += 1;
        }
        k *= p.pow(e / 2);
        if e % 2 == 1 {
            m *= &p;
        }
        p += 1;
    }
    let r = rest.sqrt();
    if &r * &r == rest {
        k *= r;
    } else {
        m *= rest;
    }
    (k, m)
}

impl Surd {
    pub fn rational(a: Q) -> Self {
        Surd { a, b: Q::zero(), m: BigInt::one() }
    }

    /// `√s + e` for `s ≥ 0`.
    pub fn sqrt_plus(s: &Q, e: &Q) -> Self {
        if let Some(r) = exact_sqrt(s) {
            return Surd::rational(r + e);
        }
        // √(p/q) = √(p·q)/q
        let pq = s.numer() * s.denom();
        let (k, m) = square_split(&pq);
        let b = Q::new(k, s.denom().clone());
        Surd { a: e.clone(), b, m }
    }

    pub fn is_negative(&self) -> bool {
        if self.b.is_zero() {
            return self.a.is_negative();
        }
        // Both parts have fixed signs here: a + b√m < 0 iff compare a² vs b²m by sign cases.
        let bm = &self.b * &self.b * Q::from_integer(self.m.clone());
        match (self.a.is_negative(), self.b.is_negative()) {
            (false, false) => false,
            (true, true) => true,
            (true, false) => self.a.clone() * &self.a > bm,
            (false, true) => self.a.clone() * &self.a < bm,
        }
    }

    pub fn to_f64(&self) -> f64 {
        to_f64(&self.a) + to_f64(&self.b) * self.m.to_f64().unwrap_or(f64::NAN).sqrt()
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return f.write_str(&fmt_q(&self.a));
        }
        let root = if self.b.is_one() { format!("sqrt({})", self.m) } else { format!("{}*sqrt({})", fmt_q(&self.b), self.m) };
        if self.a.is_zero() {
            f.write_str(&root)
        } else if self.a.is_negative() {
            write!(f, "{root}-{}", fmt_q(&-self.a.clone()))
        } else {
            write!(f, "{root}+{}", fmt_q(&self.a))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn canonical_forms_agree() {
        assert_eq!(Surd::sqrt_plus(&q(8, 1), &q(0, 1)), Surd::sqrt_plus(&q(2, 1), &q(0, 1)).scaled_for_test(2));
        assert_eq!(Surd::sqrt_plus(&q(9, 4), &q(1, 2)), Surd::rational(q(2, 1)));
        assert_eq!(Surd::sqrt_plus(&q(1, 2), &q(0, 1)).to_string(), "1/2*sqrt(2)");
        assert!((Surd::sqrt_plus(&q(5, 1), &q(-1, 3)).to_f64() - (5f64.sqrt() - 1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn negativity() {
        assert!(Surd::sqrt_plus(&q(1, 100), &q(-1, 5)).is_negative());
        assert!(!Surd::sqrt_plus(&q(1, 2), &q(-1, 5)).is_negative());
        assert!(!Surd::sqrt_plus(&q(1, 25), &q(-1, 5)).is_negative());
    }

    impl Surd {
        fn scaled_for_test(mut self, k: i64) -> Self {
            self.b *= Q::from_integer(k.into());
            self
        }
    }
}
