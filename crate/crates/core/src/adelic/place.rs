use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::rational::{format_rational, to_f64, Q};

/// A place of ℚ. Orders `∞` before every prime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Place {
    Infinity,
    Prime(u64),
}

impl Place {
    pub fn prime(p: u64) -> Result<Self> {
        if num_prime::nt_funcs::is_prime64(p) {
            Ok(Place::Prime(p))
        } else {
            Err(Error::NotPrime(p))
        }
    }

    pub fn is_archimedean(&self) -> bool {
        matches!(self, Place::Infinity)
    }

    /// `"inf"` or the prime as a JSON number.
    pub fn to_json(&self) -> Value {
        match self {
            Place::Infinity => Value::from("inf"),
            Place::Prime(p) => Value::from(*p),
        }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::String(s) => s.parse(),
            Value::Number(n) => match n.as_u64() {
                Some(p) => Place::prime(p),
                None => Err(Error::Parse(format!("place {n} is not a positive integer"))),
            },
            other => Err(Error::Parse(format!("expected a place, found {other}"))),
        }
    }
}

impl std::str::FromStr for Place {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if matches!(s, "inf" | "infinity" | "∞") {
            return Ok(Place::Infinity);
        }
        let p: u64 = s.parse().map_err(|_| Error::Parse(format!("bad place {s:?}")))?;
        Place::prime(p)
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Infinity => write!(f, "inf"),
            Place::Prime(p) => write!(f, "{p}"),
        }
    }
}

/// `c₀ + Σ c_p · log p` with rational coefficients, kept in normal form.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LogCombination {
    constant: Q,
    logs: BTreeMap<u64, Q>,
}

impl LogCombination {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Q) -> Self {
        LogCombination { constant: c, logs: BTreeMap::new() }
    }

    /// `coef · log p`.
    pub fn log_prime(p: u64, coef: Q) -> Self {
        let mut out = Self::zero();
        out.add_log(p, coef);
        out
    }

    fn add_log(&mut self, p: u64, coef: Q) {
        let slot = self.logs.entry(p).or_insert_with(Q::zero);
        *slot += coef;
        if slot.is_zero() {
            self.logs.remove(&p);
        }
    }

    pub fn constant_part(&self) -> &Q {
        &self.constant
    }

    /// Coefficients of `log p`, all nonzero.
    pub fn logs(&self) -> &BTreeMap<u64, Q> {
        &self.logs
    }

    pub fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.logs.is_empty()
    }

    pub fn add(&self, other: &LogCombination) -> LogCombination {
        let mut out = self.clone();
        out.constant += &other.constant;
        for (p, c) in &other.logs {
            out.add_log(*p, c.clone());
        }
        out
    }

    pub fn scale(&self, k: &Q) -> LogCombination {
        if k.is_zero() {
            return Self::zero();
        }
        LogCombination {
            constant: &self.constant * k,
            logs: self.logs.iter().map(|(p, c)| (*p, c * k)).collect(),
        }
    }

    pub fn neg(&self) -> LogCombination {
        self.scale(&-Q::one())
    }

    pub fn to_f64(&self) -> f64 {
        to_f64(&self.constant) + self.logs.iter().map(|(p, c)| to_f64(c) * (*p as f64).ln()).sum::<f64>()
    }
}

impl fmt::Display for LogCombination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut parts: Vec<(bool, String)> = Vec::new();
        if !self.constant.is_zero() {
            parts.push((self.constant.is_negative(), format_rational(&self.constant.abs())));
        }
        for (p, c) in &self.logs {
            let body = if c.abs().is_one() { format!("log {p}") } else { format!("{}*log {p}", format_rational(&c.abs())) };
            parts.push((c.is_negative(), body));
        }
        for (j, (neg, body)) in parts.iter().enumerate() {
            match (j, neg) {
                (0, true) => write!(f, "-{body}")?,
                (0, false) => write!(f, "{body}")?,
                (_, true) => write!(f, " - {body}")?,
                (_, false) => write!(f, " + {body}")?,
            }
        }
        Ok(())
    }
}

fn nonzero(q: &Q) -> Result<()> {
    if q.is_zero() {
        Err(Error::ZeroRational)
    } else {
        Ok(())
    }
}

fn multiplicity(n: &BigInt, p: u64) -> i64 {
    let p = BigInt::from(p);
    let mut n = n.clone();
    let mut k = 0;
    loop {
        let (quo, rem) = n.div_rem(&p);
        if !rem.is_zero() {
            return k;
        }
        n = quo;
        k += 1;
    }
}

/// `v_p(q)`.
pub fn valuation(q: &Q, p: u64) -> Result<i64> {
    nonzero(q)?;
    Ok(multiplicity(q.numer(), p) - multiplicity(q.denom(), p))
}

fn factor_integer(n: &BigInt) -> Result<BTreeMap<u64, usize>> {
    let n = n.abs().to_u64().ok_or_else(|| Error::TooLarge(n.to_string()))?;
    Ok(num_prime::nt_funcs::factorize64(n))
}

/// `q = ± Π p^{e_p}`; nonzero exponents only.
pub fn factor_rational(q: &Q) -> Result<BTreeMap<u64, i64>> {
    nonzero(q)?;
    let mut out: BTreeMap<u64, i64> = BTreeMap::new();
    for (p, e) in factor_integer(q.numer())? {
        *out.entry(p).or_insert(0) += e as i64;
    }
    for (p, e) in factor_integer(q.denom())? {
        *out.entry(p).or_insert(0) -= e as i64;
    }
    out.retain(|_, e| *e != 0);
    Ok(out)
}

/// `|q|_v`, exact.
pub fn abs_value(q: &Q, v: Place) -> Result<Q> {
    nonzero(q)?;
    match v {
        Place::Infinity => Ok(q.abs()),
        Place::Prime(p) => {
            let e = valuation(q, p)?;
            let pe = Q::from_integer(num_traits::pow(BigInt::from(p), e.unsigned_abs() as usize));
            Ok(if e >= 0 { pe.recip() } else { pe })
        }
    }
}

/// `log |q|_v` as an exact combination of logarithms of primes.
pub fn log_abs(q: &Q, v: Place) -> Result<LogCombination> {
    nonzero(q)?;
    match v {
        Place::Infinity => {
            let mut out = LogCombination::zero();
            for (p, e) in factor_rational(q)? {
                out.add_log(p, Q::from_integer(e.into()));
            }
            Ok(out)
        }
        Place::Prime(p) => Ok(LogCombination::log_prime(p, Q::from_integer((-valuation(q, p)?).into()))),
    }
}

/// Places where `|q|_v ≠ 1`, in order.
pub fn support(q: &Q) -> Result<Vec<Place>> {
    let mut out: Vec<Place> = factor_rational(q)?.into_keys().map(Place::Prime).collect();
    if !q.abs().is_one() {
        out.insert(0, Place::Infinity);
    }
    Ok(out)
}

/// Contributions `log |q|_v` of every place with `|q|_v ≠ 1` and their sum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductFormula {
    pub contributions: Vec<(Place, LogCombination)>,
    pub total: LogCombination,
}

impl ProductFormula {
    pub fn holds(&self) -> bool {
        self.total.is_zero()
    }
}

/// Symbolic `Σ_v log |q|_v`, which the product formula says is `0`.
pub fn product_formula_check(q: &Q) -> Result<ProductFormula> {
    let mut contributions = Vec::new();
    let mut total = LogCombination::zero();
    for v in support(q)? {
        let c = log_abs(q, v)?;
        total = total.add(&c);
        contributions.push((v, c));
    }
    Ok(ProductFormula { contributions, total })
}
