//! Common refinement of two piecewise formulas and one-sided suprema.

use num_traits::{Signed, ToPrimitive, Zero};

use super::formula::{Formula, PowerSum};
use super::roots;
use crate::error::{Error, Result};
use crate::rational::{to_f64, Q};

#[derive(Clone, Debug)]
pub(crate) struct Span<'a> {
    pub lo: Option<Q>,
    pub hi: Option<Q>,
    pub a: usize,
    pub b: usize,
    pub fa: &'a Formula,
    pub fb: &'a Formula,
}

impl Span<'_> {
    pub fn lo_f64(&self) -> Option<f64> {
        self.lo.as_ref().map(to_f64)
    }

    pub fn hi_f64(&self) -> Option<f64> {
        self.hi.as_ref().map(to_f64)
    }
}

/// Index of the piece containing the open interval starting at `x`.
fn piece_after(breaks: &[Q], x: Option<&Q>) -> usize {
    match x {
        None => 0,
        Some(x) => breaks.partition_point(|b| b <= x),
    }
}

/// Spans of the common refinement of two piecewise formulas over `[lo, hi]`.
pub(crate) fn refine<'a>(
    lo: Option<&Q>,
    hi: Option<&Q>,
    a: (&[Q], &'a [Formula]),
    b: (&[Q], &'a [Formula]),
) -> Vec<Span<'a>> {
    let mut cuts: Vec<Q> = a.0.iter().chain(b.0.iter()).cloned().collect();
    cuts.retain(|x| lo.is_none_or(|l| x > l) && hi.is_none_or(|h| x < h));
    cuts.sort();
    cuts.dedup();
    let mut ends: Vec<Option<Q>> = vec![lo.cloned()];
    ends.extend(cuts.into_iter().map(Some));
    ends.push(hi.cloned());
    ends.windows(2)
        .map(|w| {
            let ia = piece_after(a.0, w[0].as_ref());
            let ib = piece_after(b.0, w[0].as_ref());
            Span { lo: w[0].clone(), hi: w[1].clone(), a: ia, b: ib, fa: &a.1[ia], fb: &b.1[ib] }
        })
        .collect()
}

/// A point strictly inside the interval.
pub(crate) fn interior_point(lo: Option<f64>, hi: Option<f64>) -> f64 {
    match (lo, hi) {
        (Some(a), Some(b)) => 0.5 * (a + b),
        (None, Some(b)) => b - b.abs().max(1.0),
        (Some(a), None) => a + a.abs().max(1.0),
        (None, None) => 0.0,
    }
}

/// `lim f(u)` as `u → −∞` (`side < 0`) or `u → +∞` (`side > 0`).
fn limit(f: &Formula, side: i8) -> f64 {
    let centers = f.centers();
    let c = centers.first().cloned().unwrap_or_else(Q::zero);
    match (centers.len() <= 1).then(|| PowerSum::from_formula(f, &c)).flatten() {
        Some(ps) => match ps.coefs.iter().next_back() {
            None => 0.0,
            Some((e, k)) if e.is_positive() => {
                let odd = side > 0 && e.is_integer() && e.to_integer().to_i64().is_some_and(|n| n % 2 != 0);
                if k.is_positive() != odd {
                    f64::INFINITY
                } else {
                    f64::NEG_INFINITY
                }
            }
            Some(_) => ps.coefs.get(&Q::zero()).map(to_f64).unwrap_or(0.0),
        },
        None => {
            let mut best = f64::NEG_INFINITY;
            for k in 0..1000 {
                let u = f64::from(side) * (2f64).powi(k);
                if !u.is_finite() {
                    break;
                }
                best = best.max(f.eval(u));
            }
            best
        }
    }
}

/// `sup f` over the closed interval (finite ends included), possibly `+∞`.
pub(crate) fn sup_on(f: &Formula, lo: Option<&Q>, hi: Option<&Q>) -> Result<f64> {
    let mut best = f64::NEG_INFINITY;
    let mut consider = |v: f64| -> Result<()> {
        if v.is_nan() {
            return Err(Error::InvalidFunction("formula undefined on its interval".into()));
        }
        best = best.max(v);
        Ok(())
    };
    match lo {
        Some(a) => consider(f.eval(to_f64(a)))?,
        None => consider(limit(f, -1))?,
    }
    match hi {
        Some(b) => consider(f.eval(to_f64(b)))?,
        None => consider(limit(f, 1))?,
    }
    if !f.is_affine() {
        let d = f.derivative();
        let lo_f = lo.map(to_f64);
        let hi_f = hi.map(to_f64);
        for r in roots::sign_change_roots(&|u| d.eval(u), lo_f, hi_f)? {
            consider(f.eval(r))?;
        }
    }
    Ok(best)
}
