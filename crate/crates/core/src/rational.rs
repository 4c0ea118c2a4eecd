//! Exact rational scalars and their text/JSON forms.
//!
//! Rationals are read from integers, decimal literals (`0.25`, `1e-3`) or
//! fractions (`"12/5"`). Decimal literals are converted exactly, so `0.1`
//! becomes `1/10` rather than the nearest binary double.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serializer};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn to_f64(q: &Q) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        if q.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Exact rational value of a finite double.
pub fn from_f64(x: f64) -> Result<Q> {
    Q::from_float(x).ok_or_else(|| Error::Parse(format!("non-finite value {x}")))
}

/// Parses `"p/q"`, an integer, or a decimal literal with optional exponent.
pub fn parse_rational(s: &str) -> Result<Q> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty rational".into()));
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
        let d: BigInt = d
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Q::new(n, d));
    }
    parse_decimal(s)
}

fn parse_decimal(s: &str) -> Result<Q> {
    let bad = || Error::Parse(format!("not a rational literal: {s:?}"));
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => {
            let e: i32 = s[i + 1..].parse().map_err(|_| bad())?;
            (&s[..i], e)
        }
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((a, b)) => (a, b),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    if exponent.unsigned_abs() > 4096 {
        return Err(bad());
    }
    let all: String = format!("{int_part}{frac_part}");
    let num: BigInt = if all.is_empty() { BigInt::zero() } else { all.parse().map_err(|_| bad())? };
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let mut q = Q::from_integer(num);
    if scale >= 0 {
        q *= Q::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        q /= Q::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -q } else { q })
}

/// Text form used in JSON output: integers stay integers, everything else is `"p/q"`.
pub fn format_rational(q: &Q) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub(crate) fn rational_to_json(q: &Q) -> serde_json::Value {
    if q.denom().is_one() {
        if let Some(i) = q.numer().to_i64() {
            return serde_json::Value::from(i);
        }
    }
    serde_json::Value::String(format_rational(q))
}

pub(crate) fn rational_from_json(v: &serde_json::Value) -> Result<Q> {
    match v {
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(qi(i))
            } else {
                // Display of a double is its shortest round-trip decimal.
                parse_decimal(&n.to_string())
            }
        }
        serde_json::Value::String(s) => parse_rational(s),
        other => Err(Error::Parse(format!("expected a rational, found {other}"))),
    }
}

/// `serde(with = ...)` adaptor for single rationals.
pub mod serde_q {
    use super::*;

    pub fn serialize<S: Serializer>(q: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
        serde::Serialize::serialize(&rational_to_json(q), s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Q, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        rational_from_json(&v).map_err(serde::de::Error::custom)
    }
}

/// `serde(with = ...)` adaptor for lists of rationals.
pub mod serde_q_vec {
    use super::*;

    pub fn serialize<S: Serializer>(qs: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<serde_json::Value> = qs.iter().map(rational_to_json).collect();
        serde::Serialize::serialize(&v, s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Q>, D::Error> {
        let v = Vec::<serde_json::Value>::deserialize(d)?;
        v.iter()
            .map(rational_from_json)
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("12/5").unwrap(), qr(12, 5));
        assert_eq!(parse_rational("-7/3").unwrap(), qr(-7, 3));
        assert_eq!(parse_rational("0.25").unwrap(), qr(1, 4));
        assert_eq!(parse_rational("0.1").unwrap(), qr(1, 10));
        assert_eq!(parse_rational("1e-3").unwrap(), qr(1, 1000));
        assert_eq!(parse_rational("-2.5E1").unwrap(), qi(-25));
        assert_eq!(parse_rational(".5").unwrap(), qr(1, 2));
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "1/0", "abc", "1.2.3", "--1", "1e", "/", "1e99999"] {
            assert!(parse_rational(s).is_err(), "{s}");
        }
    }

    #[test]
    fn json_numbers_convert_exactly() {
        let v: serde_json::Value = serde_json::from_str("0.4").unwrap();
        assert_eq!(rational_from_json(&v).unwrap(), qr(2, 5));
        assert_eq!(rational_to_json(&qr(2, 5)), serde_json::json!("2/5"));
        assert_eq!(rational_to_json(&qi(-3)), serde_json::json!(-3));
    }
}
