//! Exact rational helpers shared by every module.

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact probability / coordinate type.
pub type Q = BigRational;

pub fn q(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

pub fn qi(v: i64) -> Q {
    Q::from_integer(BigInt::from(v))
}

pub fn zero() -> Q {
    Q::zero()
}

pub fn one() -> Q {
    Q::one()
}

pub fn to_f64(v: &Q) -> f64 {
    v.to_f64().unwrap_or_else(|| {
        // Very large numerators/denominators: fall back to a scaled division.
        let n = v.numer().to_f64().unwrap_or(f64::NAN);
        let d = v.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Parses "p/q", an integer, or a finite decimal such as "0.25".
pub fn parse_q(s: &str) -> Result<Q> {
    let t = s.trim();
    let err = |m: &str| Error::Parse { path: t.to_string(), message: m.to_string() };
    if t.is_empty() {
        return Err(err("empty rational"));
    }
    if let Some((a, b)) = t.split_once('/') {
        let n: BigInt = a.trim().parse().map_err(|_| err("bad numerator"))?;
        let d: BigInt = b.trim().parse().map_err(|_| err("bad denominator"))?;
        if d.is_zero() {
            return Err(err("zero denominator"));
        }
        return Ok(Q::new(n, d));
    }
    if let Some((int, frac)) = t.split_once('.') {
        let neg = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches('-'), frac);
        let n: BigInt = digits.parse().map_err(|_| err("bad decimal"))?;
        let d = num::pow(BigInt::from(10), frac.len());
        let v = Q::new(n, d);
        return Ok(if neg { -v } else { v });
    }
    let n: BigInt = t.parse().map_err(|_| err("bad integer"))?;
    Ok(Q::from_integer(n))
}

/// Formats as "p/q" (or "p" for integers).
pub fn fmt_q(v: &Q) -> String {
    if v.is_integer() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

/// Exact square root of a nonnegative rational when it is rational.
pub fn exact_sqrt(v: &Q) -> Option<Q> {
    if v.is_negative() {
        return None;
    }
    let n = v.numer().sqrt();
    let d = v.denom().sqrt();
    if &(&n * &n) == v.numer() && &(&d * &d) == v.denom() {
        Some(Q::new(n, d))
    } else {
        None
    }
}

/// Natural log of a positive rational; exactly 0.0 when the argument is 1.
pub fn ln_q(v: &Q) -> f64 {
    if v.is_one() {
        return 0.0;
    }
    // ln(n/d) = ln n - ln d keeps precision for large operands.
    ln_bigint(v.numer()) - ln_bigint(v.denom())
}

fn ln_bigint(v: &BigInt) -> f64 {
    match v.to_f64() {
        Some(f) if f.is_finite() => f.ln(),
        _ => {
            let bits = v.bits();
            let shift = bits.saturating_sub(60);
            let top = (v >> shift).to_f64().unwrap_or(f64::NAN);
            top.ln() + shift as f64 * std::f64::consts::LN_2
        }
    }
}

pub mod serde_q {
    //! Serde adapter writing rationals as "p/q" strings.
    use super::{fmt_q, parse_q, Q};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_q(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        parse_q(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_q("1/2").unwrap(), q(1, 2));
        assert_eq!(parse_q(" 3 ").unwrap(), qi(3));
        assert_eq!(parse_q("0.25").unwrap(), q(1, 4));
        assert_eq!(parse_q("-1.5").unwrap(), q(-3, 2));
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("abc").is_err());
    }

    #[test]
    fn sqrt_and_format() {
        assert_eq!(exact_sqrt(&q(9, 4)), Some(q(3, 2)));
        assert_eq!(exact_sqrt(&q(1, 2)), None);
        assert_eq!(fmt_q(&q(6, 4)), "3/2");
        assert_eq!(fmt_q(&qi(2)), "2");
    }

    #[test]
    fn ln_exact_one() {
        assert_eq!(ln_q(&one()), 0.0);
        assert!((ln_q(&q(1, 2)) + std::f64::consts::LN_2).abs() < 1e-15);
    }
}
