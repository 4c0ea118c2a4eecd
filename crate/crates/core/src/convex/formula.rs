use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{format_rational, serde_q, to_f64, Q};

/// `coef · (center − u)^exp`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PowerTerm {
    #[serde(with = "serde_q")]
    pub coef: Q,
    #[serde(with = "serde_q")]
    pub center: Q,
    #[serde(with = "serde_q")]
    pub exp: Q,
}

/// `slope · u + intercept + Σ coef · (center − u)^exp` with rational data.
///
/// Kept in a normal form: like terms combined, zero terms dropped, and
/// exponents 0 and 1 folded into the affine part, so two formulas are equal
/// as functions iff they are equal as values.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Formula {
    #[serde(with = "serde_q")]
    slope: Q,
    #[serde(with = "serde_q")]
    intercept: Q,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    terms: Vec<PowerTerm>,
}

/// Result of an integral that may diverge to `−∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: f64,
    /// Set when a tail was decided numerically rather than by exponents.
    pub heuristic: bool,
}

impl Integral {
    pub fn exact(value: f64) -> Self {
        Integral { value, heuristic: false }
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }

    /// Sum of two integrals; callers never produce `+∞` values.
    pub fn plus(self, other: Integral) -> Integral {
        Integral { value: self.value + other.value, heuristic: self.heuristic || other.heuristic }
    }
}

pub(crate) fn pow_f64(base: f64, exp: &Q) -> f64 {
    if exp.is_zero() {
        return 1.0;
    }
    if base == 0.0 {
        return if exp.is_positive() { 0.0 } else { f64::INFINITY };
    }
    if exp.is_integer() {
        if let Some(e) = exp.to_integer().to_i32() {
            return base.powi(e);
        }
    }
    if base < 0.0 {
        return f64::NAN;
    }
    base.powf(to_f64(exp))
}

fn pow_exact(base: &Q, exp: &Q) -> Option<Q> {
    if exp.is_zero() || base.is_one() {
        return Some(Q::one());
    }
    if base.is_zero() {
        return exp.is_positive().then(Q::zero);
    }
    if exp.is_integer() {
        let e = exp.to_integer().to_i32()?;
        if e.unsigned_abs() > 4096 {
            return None;
        }
        return Some(num_traits::pow::Pow::pow(base, e));
    }
    None
}

/// `x · y` that treats `0 · ∞` as 0.
fn scale_f64(k: f64, x: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else {
        k * x
    }
}

impl Formula {
    pub fn affine(slope: Q, intercept: Q) -> Self {
        Formula { slope, intercept, terms: Vec::new() }
    }

    pub fn constant(c: Q) -> Self {
        Self::affine(Q::zero(), c)
    }

    pub fn zero() -> Self {
        Self::constant(Q::zero())
    }

    pub fn power(coef: Q, center: Q, exp: Q) -> Self {
        Formula { slope: Q::zero(), intercept: Q::zero(), terms: vec![PowerTerm { coef, center, exp }] }.normalized()
    }

    pub fn from_parts(slope: Q, intercept: Q, terms: Vec<PowerTerm>) -> Self {
        Formula { slope, intercept, terms }.normalized()
    }

    pub fn slope(&self) -> &Q {
        &self.slope
    }

    pub fn intercept(&self) -> &Q {
        &self.intercept
    }

    pub fn terms(&self) -> &[PowerTerm] {
        &self.terms
    }

    pub fn is_affine(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.is_affine() && self.slope.is_zero() && self.intercept.is_zero()
    }

    fn normalized(mut self) -> Self {
        let mut grouped: BTreeMap<(Q, Q), Q> = BTreeMap::new();
        for t in self.terms.drain(..) {
            if t.coef.is_zero() {
                continue;
            }
            if t.exp.is_zero() {
                self.intercept += t.coef;
            } else if t.exp.is_one() {
                self.intercept += &t.coef * &t.center;
                self.slope -= t.coef;
            } else {
                *grouped.entry((t.center, t.exp)).or_insert_with(Q::zero) += t.coef;
            }
        }
        self.terms = grouped
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|((center, exp), coef)| PowerTerm { coef, center, exp })
            .collect();
        self
    }

    pub fn add(&self, other: &Formula) -> Formula {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Formula { slope: &self.slope + &other.slope, intercept: &self.intercept + &other.intercept, terms }.normalized()
    }

    pub fn neg(&self) -> Formula {
        self.scale(&-Q::one())
    }

    pub fn sub(&self, other: &Formula) -> Formula {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &Q) -> Formula {
        Formula {
            slope: &self.slope * k,
            intercept: &self.intercept * k,
            terms: self
                .terms
                .iter()
                .map(|t| PowerTerm { coef: &t.coef * k, center: t.center.clone(), exp: t.exp.clone() })
                .collect(),
        }
        .normalized()
    }

    pub fn add_constant(&self, c: &Q) -> Formula {
        let mut f = self.clone();
        f.intercept += c;
        f
    }

    pub fn derivative(&self) -> Formula {
        let terms = self
            .terms
            .iter()
            .map(|t| PowerTerm { coef: -(&t.coef * &t.exp), center: t.center.clone(), exp: &t.exp - Q::one() })
            .collect();
        Formula { slope: Q::zero(), intercept: self.slope.clone(), terms }.normalized()
    }

    pub fn eval(&self, u: f64) -> f64 {
        let mut v = scale_f64(to_f64(&self.slope), u) + to_f64(&self.intercept);
        for t in &self.terms {
            let base = to_f64(&t.center) - u;
            v += scale_f64(to_f64(&t.coef), pow_f64(base, &t.exp));
        }
        v
    }

    /// Exact value where every power term has a rational value.
    pub fn eval_exact(&self, u: &Q) -> Option<Q> {
        let mut v = &self.slope * u + &self.intercept;
        for t in &self.terms {
            v += &t.coef * pow_exact(&(&t.center - u), &t.exp)?;
        }
        Some(v)
    }

    /// Value at `u`, exact when possible and otherwise rounded from `f64`.
    pub fn eval_rational(&self, u: &Q) -> Result<Q> {
        match self.eval_exact(u) {
            Some(v) => Ok(v),
            None => crate::rational::from_f64(self.eval(to_f64(u))),
        }
    }

    /// Distinct centers of the power terms.
    pub fn centers(&self) -> Vec<Q> {
        let mut c: Vec<Q> = self.terms.iter().map(|t| t.center.clone()).collect();
        c.sort();
        c.dedup();
        c
    }

    /// Product, when both factors share at most one center.
    pub fn mul(&self, other: &Formula) -> Option<Formula> {
        let mut centers = self.centers();
        centers.extend(other.centers());
        centers.sort();
        centers.dedup();
        if centers.len() > 1 {
            return None;
        }
        let c = centers.pop().unwrap_or_else(Q::zero);
        let a = PowerSum::from_formula(self, &c)?;
        let b = PowerSum::from_formula(other, &c)?;
        Some(a.mul(&b).to_formula())
    }

    /// `∫_lo^hi` of the formula, `None` bounds meaning `∓∞`.
    ///
    /// Tails and endpoint singularities are decided exactly from the
    /// exponents; several centers are compared through the binomial
    /// expansion of each term around a common one.
    pub fn integrate(&self, lo: Option<&Q>, hi: Option<&Q>) -> Result<Integral> {
        if let (Some(a), Some(b)) = (lo, hi) {
            if a > b {
                return Err(Error::InvalidMeasure(format!("empty interval [{a}, {b}]")));
            }
            if a == b {
                return Ok(Integral::exact(0.0));
            }
        }
        match (lo, hi) {
            (None, None) => {
                let zero = Q::zero();
                combine(&[self.integrate(None, Some(&zero))?.value, self.integrate(Some(&zero), None)?.value])
            }
            (None, Some(b)) => {
                let mut split = b.clone();
                for c in self.centers() {
                    split = split.min(c);
                }
                split -= Q::one();
                let rest = self.integrate(Some(&split), Some(b))?.value;
                let tail = match self.left_tail_divergence() {
                    1 => f64::INFINITY,
                    -1 => f64::NEG_INFINITY,
                    _ => {
                        let at_split: f64 = self.groups().iter().map(|g| g.antiderivative(to_f64(&split))).sum();
                        at_split - self.left_antiderivative_limit()
                    }
                };
                combine(&[tail, rest])
            }
            (Some(_), _) => {
                let parts = self.groups().iter().map(|g| g.integrate(lo, hi)).collect::<Result<Vec<f64>>>()?;
                combine(&parts)
            }
        }
    }

    /// Single-center groups; the affine part joins the first group.
    fn groups(&self) -> Vec<PowerSum> {
        let mut groups: Vec<PowerSum> = self
            .centers()
            .into_iter()
            .map(|c| {
                let part = Formula {
                    slope: Q::zero(),
                    intercept: Q::zero(),
                    terms: self.terms.iter().filter(|t| t.center == c).cloned().collect(),
                };
                PowerSum::from_formula(&part, &c).expect("single center")
            })
            .collect();
        let affine = Formula::affine(self.slope.clone(), self.intercept.clone());
        match groups.first_mut() {
            Some(g) => *g = g.add(&PowerSum::from_formula(&affine, &g.center.clone()).expect("affine")),
            None => groups.push(PowerSum::from_formula(&affine, &Q::zero()).expect("affine")),
        }
        groups
    }

    fn reference_center(&self) -> Q {
        self.centers().into_iter().next().unwrap_or_else(Q::zero)
    }

    /// Coefficients of `x^e`, `e >= −1`, in the expansion of the formula in
    /// `x = c₁ − u` for large `x`.
    fn expansion_at_neg_infinity(&self) -> BTreeMap<Q, Q> {
        let c1 = self.reference_center();
        let floor = -Q::one();
        let mut out: BTreeMap<Q, Q> = BTreeMap::new();
        *out.entry(Q::zero()).or_insert_with(Q::zero) += &self.slope * &c1 + &self.intercept;
        *out.entry(Q::one()).or_insert_with(Q::zero) -= &self.slope;
        for t in &self.terms {
            let delta = &t.center - &c1;
            let mut coef = t.coef.clone();
            let mut j = 0i64;
            loop {
                let e = &t.exp - Q::from_integer(j.into());
                if e < floor || coef.is_zero() {
                    break;
                }
                *out.entry(e.clone()).or_insert_with(Q::zero) += &coef;
                // next binomial term: C(exp, j+1)·δ^{j+1}
                coef = coef * &e * &delta / Q::from_integer((j + 1).into());
                j += 1;
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    /// `+1`/`−1` if `∫_{−∞}` diverges to `±∞`, `0` if it converges.
    fn left_tail_divergence(&self) -> i8 {
        match self.expansion_at_neg_infinity().iter().next_back() {
            Some((_, k)) if k.is_positive() => 1,
            Some(_) => -1,
            None => 0,
        }
    }

    /// `lim_{u→−∞}` of the sum of the group antiderivatives, for a formula
    /// whose left tail converges.
    fn left_antiderivative_limit(&self) -> f64 {
        let c1 = self.reference_center();
        let mut limit = Q::zero();
        for t in &self.terms {
            let n = &t.exp + Q::one();
            if n.is_integer() && n.is_positive() {
                let delta = &t.center - &c1;
                limit -= &t.coef * pow_exact(&delta, &n).unwrap_or_else(Q::zero) / &n;
            }
        }
        to_f64(&limit)
    }
}

/// Sums possibly infinite parts; `+∞` (alone or against `−∞`) is an error.
fn combine(parts: &[f64]) -> Result<Integral> {
    let pos = parts.contains(&f64::INFINITY);
    let neg = parts.contains(&f64::NEG_INFINITY);
    if pos {
        return Err(Error::DivergesToPlusInfinity(if neg { "indeterminate ∞ − ∞".into() } else { "integral is +inf".into() }));
    }
    if neg {
        return Ok(Integral::exact(f64::NEG_INFINITY));
    }
    Ok(Integral::exact(parts.iter().sum()))
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if !self.slope.is_zero() {
            parts.push(format!("{}·u", format_rational(&self.slope)));
        }
        if !self.intercept.is_zero() {
            parts.push(format_rational(&self.intercept));
        }
        for t in &self.terms {
            parts.push(format!(
                "{}·({} − u)^({})",
                format_rational(&t.coef),
                format_rational(&t.center),
                format_rational(&t.exp)
            ));
        }
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" + "))
        }
    }
}

/// `Σ_e coef_e · (center − u)^e` around a single center.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct PowerSum {
    pub center: Q,
    pub coefs: BTreeMap<Q, Q>,
}

impl PowerSum {
    pub fn from_formula(f: &Formula, center: &Q) -> Option<PowerSum> {
        let mut coefs: BTreeMap<Q, Q> = BTreeMap::new();
        for t in &f.terms {
            if t.center != *center {
                return None;
            }
            *coefs.entry(t.exp.clone()).or_insert_with(Q::zero) += &t.coef;
        }
        // s·u + b = (s·c + b)·(c − u)^0 − s·(c − u)^1
        *coefs.entry(Q::zero()).or_insert_with(Q::zero) += &f.slope * center + &f.intercept;
        *coefs.entry(Q::one()).or_insert_with(Q::zero) -= &f.slope;
        coefs.retain(|_, c| !c.is_zero());
        Some(PowerSum { center: center.clone(), coefs })
    }

    pub fn to_formula(&self) -> Formula {
        Formula {
            slope: Q::zero(),
            intercept: Q::zero(),
            terms: self
                .coefs
                .iter()
                .map(|(e, k)| PowerTerm { coef: k.clone(), center: self.center.clone(), exp: e.clone() })
                .collect(),
        }
        .normalized()
    }

    pub fn add(&self, other: &PowerSum) -> PowerSum {
        debug_assert_eq!(self.center, other.center);
        let mut coefs = self.coefs.clone();
        for (e, k) in &other.coefs {
            *coefs.entry(e.clone()).or_insert_with(Q::zero) += k;
        }
        coefs.retain(|_, c| !c.is_zero());
        PowerSum { center: self.center.clone(), coefs }
    }

    pub fn mul(&self, other: &PowerSum) -> PowerSum {
        let mut coefs: BTreeMap<Q, Q> = BTreeMap::new();
        for (e1, k1) in &self.coefs {
            for (e2, k2) in &other.coefs {
                *coefs.entry(e1 + e2).or_insert_with(Q::zero) += k1 * k2;
            }
        }
        coefs.retain(|_, c| !c.is_zero());
        PowerSum { center: self.center.clone(), coefs }
    }

    /// `+1`/`−1` if the integral diverges to `±∞` at `−∞`, `0` if it converges.
    pub fn neg_tail_divergence(&self) -> i8 {
        match self.coefs.iter().next_back() {
            Some((e, k)) if *e >= -Q::one() => {
                if k.is_positive() {
                    1
                } else {
                    -1
                }
            }
            _ => 0,
        }
    }

    fn antiderivative(&self, u: f64) -> f64 {
        let base = to_f64(&self.center) - u;
        let mut v = 0.0;
        for (e, k) in &self.coefs {
            let k = to_f64(k);
            if *e == -Q::one() {
                v -= k * base.abs().ln();
            } else {
                let e1 = e + Q::one();
                v -= scale_f64(k, pow_f64(base, &e1)) / to_f64(&e1);
            }
        }
        v
    }

    fn all_integer_exponents(&self) -> bool {
        self.coefs.keys().all(|e| e.is_integer())
    }

    /// Exact divergence decision plus closed-form value.
    pub fn integrate(&self, lo: Option<&Q>, hi: Option<&Q>) -> Result<f64> {
        if self.coefs.is_empty() {
            return Ok(0.0);
        }
        let c = &self.center;
        let integer = self.all_integer_exponents();
        if !integer && hi.is_none_or(|b| b > c) {
            return Err(Error::InvalidMeasure(format!("fractional power of a negative base right of {c}")));
        }
        let has_negative = self.coefs.keys().any(|e| e.is_negative());
        if has_negative {
            let inside = lo.is_none_or(|a| a < c) && hi.is_none_or(|b| b > c);
            if inside {
                return Err(Error::InvalidMeasure(format!("singularity at {c} inside the interval")));
            }
        }

        let mut signs: Vec<i8> = Vec::new();
        let mut upper = 0.0;
        match hi {
            None => {
                // integer exponents only; (c − u)^e ~ (−1)^e·u^e
                let (e, k) = self.coefs.iter().next_back().expect("nonempty");
                if *e >= -Q::one() {
                    let odd = e.to_integer().to_i64().is_some_and(|n| n % 2 != 0);
                    let s = if k.is_positive() != odd { 1 } else { -1 };
                    signs.push(s);
                }
            }
            Some(b) if b == c => {
                let (e, k) = self.coefs.iter().next().expect("nonempty");
                if *e <= -Q::one() {
                    signs.push(if k.is_positive() { 1 } else { -1 });
                } else {
                    upper = self.antiderivative(to_f64(b));
                }
            }
            Some(b) => upper = self.antiderivative(to_f64(b)),
        }
        let mut lower = 0.0;
        match lo {
            None => {
                let s = self.neg_tail_divergence();
                if s != 0 {
                    signs.push(s);
                }
            }
            Some(a) if a == c => {
                let (e, k) = self.coefs.iter().next().expect("nonempty");
                if *e <= -Q::one() {
                    let odd = e.to_integer().to_i64().is_some_and(|n| n % 2 != 0);
                    signs.push(if k.is_positive() != odd { 1 } else { -1 });
                } else {
                    lower = self.antiderivative(to_f64(a));
                }
            }
            Some(a) => lower = self.antiderivative(to_f64(a)),
        }
        if signs.contains(&1) {
            return Ok(f64::INFINITY);
        }
        if signs.contains(&-1) {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(upper - lower)
    }
}
