use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use super::concave::{ConcaveFn, Piece};
use super::formula::{Formula, Integral, PowerTerm};
use super::piecewise::{self, refine};
use crate::error::{Error, Result};
use crate::rational::{from_f64, rational_to_json, to_f64, Q};

/// A concave function on a compact interval `[lo, hi]`, `−∞` outside it.
///
/// Endpoint values may be `−∞`; they come from singular power terms of the
/// boundary piece rather than being stored separately.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualFn {
    lo: Q,
    hi: Q,
    breakpoints: Vec<Q>,
    formulas: Vec<Formula>,
}

fn value_at(f: &Formula, x: &Q) -> Result<Q> {
    f.eval_rational(x)
}

fn slope_at(f: &Formula, x: &Q) -> Result<Q> {
    f.derivative().eval_rational(x)
}

/// Conjugate of `s·u + c + (1/α)(1 − u)^α` on the slopes it attains:
/// `m − s − c + (1 − 1/α)(s − m)^{α/(α−1)}`.
fn conjugate_formula(alpha: &Q, slope: &Q, intercept: &Q) -> Formula {
    let exp = alpha / (alpha - Q::one());
    Formula::from_parts(
        Q::one(),
        -(slope + intercept),
        vec![PowerTerm { coef: Q::one() - alpha.recip(), center: slope.clone(), exp }],
    )
}

/// Parameters `(α, s, c)` of the alpha piece whose conjugate is `f`.
fn alpha_piece_of(f: &Formula) -> Option<(Q, Q, Q)> {
    let [term] = f.terms() else { return None };
    if !f.slope().is_one() || !term.exp.is_negative() {
        return None;
    }
    let alpha = &term.exp / (&term.exp - Q::one());
    if term.coef != Q::one() - alpha.recip() {
        return None;
    }
    let s = term.center.clone();
    let c = -f.intercept() - &s;
    Some((alpha, s, c))
}

/// Point `u = 1 − (s − m)^{1/(α−1)}` where the alpha piece has slope `m`.
fn slope_preimage(alpha: &Q, s: &Q, m: &Q) -> Result<Q> {
    let base = s - m;
    if base.is_one() {
        return Ok(Q::zero());
    }
    let e = (alpha - Q::one()).recip();
    from_f64(1.0 - to_f64(&base).powf(to_f64(&e)))
}

/// `f^∨(m) = inf_u (m·u − f(u))`.
///
/// A kink at `t` with one-sided slopes `L > R` becomes an affine piece of
/// slope `t` on `[R, L]`; an alpha piece becomes its closed-form conjugate
/// on the slopes it attains.
pub fn legendre_dual(f: &ConcaveFn) -> Result<DualFn> {
    let lo = f.slope_pos().clone();
    let hi = f.slope_neg().clone();
    let pieces = f.pieces();
    let formulas = f.formulas();
    let breaks = f.breakpoints();
    if lo == hi {
        let Piece::Affine { intercept, .. } = pieces.last().expect("nonempty") else { unreachable!() };
        return Ok(DualFn { lo: lo.clone(), hi, breakpoints: vec![], formulas: vec![Formula::constant(-intercept)] });
    }

    let mut segs: Vec<(Q, Formula)> = Vec::new();
    let mut cur = lo.clone();
    let mut push = |start: &Q, end: &Q, g: Formula, cur: &mut Q| {
        if end > start {
            segs.push((start.clone(), g));
            *cur = end.clone();
        }
    };
    for j in (0..pieces.len()).rev() {
        if let Piece::AlphaSingular { alpha, slope, intercept } = &pieces[j] {
            let end = if j == 0 { slope.clone() } else { slope_at(&formulas[j], &breaks[j - 1])? };
            let start = cur.clone();
            push(&start, &end, conjugate_formula(alpha, slope, intercept), &mut cur);
        }
        if j > 0 {
            let t = &breaks[j - 1];
            let left = slope_at(&formulas[j - 1], t)?;
            let v = match formulas[j - 1].eval_exact(t).or_else(|| formulas[j].eval_exact(t)) {
                Some(v) => v,
                None => value_at(&formulas[j], t)?,
            };
            let start = cur.clone();
            push(&start, &left, Formula::affine(t.clone(), -v), &mut cur);
        }
    }
    if segs.is_empty() {
        return Err(Error::InvalidFunction("dual has no pieces".into()));
    }
    let breakpoints = segs.iter().skip(1).map(|(s, _)| s.clone()).collect();
    let formulas = segs.into_iter().map(|(_, g)| g).collect();
    Ok(DualFn { lo, hi, breakpoints, formulas })
}

enum Pending {
    Affine { slope: Q, intercept: Option<Q> },
    AlphaEnd { s: Q, m: Q, alpha: Q, formula: Box<Formula> },
}

impl DualFn {
    pub fn lo(&self) -> &Q {
        &self.lo
    }

    pub fn hi(&self) -> &Q {
        &self.hi
    }

    pub fn breakpoints(&self) -> &[Q] {
        &self.breakpoints
    }

    pub fn formulas(&self) -> &[Formula] {
        &self.formulas
    }

    fn piece_bounds(&self, j: usize) -> (&Q, &Q) {
        let a = if j == 0 { &self.lo } else { &self.breakpoints[j - 1] };
        let b = self.breakpoints.get(j).unwrap_or(&self.hi);
        (a, b)
    }

    pub fn eval(&self, m: f64) -> f64 {
        if m < to_f64(&self.lo) || m > to_f64(&self.hi) {
            return f64::NEG_INFINITY;
        }
        let j = self.breakpoints.partition_point(|b| to_f64(b) < m);
        self.formulas[j].eval(m)
    }

    /// Exact value inside the domain when the piece allows it.
    pub fn eval_exact(&self, m: &Q) -> Option<Q> {
        if *m < self.lo || *m > self.hi {
            return None;
        }
        let j = self.breakpoints.partition_point(|b| b < m);
        self.formulas[j].eval_exact(m)
    }

    pub fn value_at_lo(&self) -> f64 {
        self.formulas[0].eval(to_f64(&self.lo))
    }

    pub fn value_at_hi(&self) -> f64 {
        self.formulas.last().expect("nonempty").eval(to_f64(&self.hi))
    }

    /// `∫_lo^hi f^∨`, `−∞` when an endpoint singularity is not integrable.
    pub fn integrate(&self) -> Result<Integral> {
        let mut total = Integral::exact(0.0);
        for (j, f) in self.formulas.iter().enumerate() {
            let (a, b) = self.piece_bounds(j);
            total = total.plus(f.integrate(Some(a), Some(b))?);
        }
        Ok(total)
    }

    /// Pointwise sum on the intersection of the domains.
    pub fn add(&self, other: &DualFn) -> Result<DualFn> {
        let lo = (&self.lo).max(&other.lo).clone();
        let hi = (&self.hi).min(&other.hi).clone();
        if lo > hi {
            return Err(Error::Precondition(format!(
                "dual domains [{}, {}] and [{}, {}] do not meet",
                self.lo, self.hi, other.lo, other.hi
            )));
        }
        if lo == hi {
            let v = self.formulas[self.breakpoints.partition_point(|b| *b < lo)]
                .add(&other.formulas[other.breakpoints.partition_point(|b| *b < lo)]);
            return Ok(DualFn { lo, hi, breakpoints: vec![], formulas: vec![v] });
        }
        let spans = refine(Some(&lo), Some(&hi), (&self.breakpoints, &self.formulas), (&other.breakpoints, &other.formulas));
        let breakpoints = spans.iter().skip(1).map(|s| s.lo.clone().expect("finite")).collect();
        let formulas = spans.iter().map(|s| s.fa.add(s.fb)).collect();
        Ok(DualFn { lo, hi, breakpoints, formulas })
    }

    /// `(f^∨)^∨`, a concave function on ℝ.
    pub fn bidual(&self) -> Result<ConcaveFn> {
        if self.lo == self.hi {
            let c = -value_at(&self.formulas[0], &self.lo)?;
            return Ok(ConcaveFn::affine(self.lo.clone(), c));
        }
        let mut pieces: Vec<Piece> = Vec::new();
        let mut breaks: Vec<Q> = Vec::new();
        let mut pending = Pending::Affine { slope: self.lo.clone(), intercept: None };
        for (j, f) in self.formulas.iter().enumerate() {
            let (ma, mb) = self.piece_bounds(j);
            if f.is_affine() {
                let t = f.slope().clone();
                let v = -f.intercept();
                if let Pending::Affine { slope, intercept } = &pending {
                    let c = intercept.clone().unwrap_or_else(|| &v - slope * &t);
                    pieces.push(Piece::affine(slope.clone(), c));
                }
                breaks.push(t.clone());
                pending = Pending::Affine { slope: mb.clone(), intercept: Some(&v - mb * &t) };
            } else {
                let (alpha, s, c) = alpha_piece_of(f)
                    .ok_or_else(|| Error::InvalidFunction(format!("dual piece {f} is not a catalog conjugate")))?;
                match &pending {
                    // the kink just recorded is where this piece starts
                    Pending::Affine { intercept: Some(_), .. } => {}
                    Pending::Affine { slope, intercept: None } => {
                        pieces.push(Piece::affine(slope.clone(), -value_at(f, ma)?));
                        breaks.push(slope_preimage(&alpha, &s, ma)?);
                    }
                    Pending::AlphaEnd { .. } => breaks.push(slope_preimage(&alpha, &s, ma)?),
                }
                pieces.push(Piece::AlphaSingular { alpha: alpha.clone(), slope: s.clone(), intercept: c });
                pending = Pending::AlphaEnd { s, m: mb.clone(), alpha, formula: Box::new(f.clone()) };
            }
        }
        match pending {
            Pending::Affine { slope, intercept } => {
                let c = match intercept {
                    Some(c) => c,
                    None => -value_at(self.formulas.last().expect("nonempty"), &self.hi)?,
                };
                pieces.push(Piece::affine(slope, c));
            }
            Pending::AlphaEnd { s, m, alpha, formula } => {
                if m != s {
                    breaks.push(slope_preimage(&alpha, &s, &m)?);
                    pieces.push(Piece::affine(m.clone(), -value_at(&formula, &m)?));
                }
            }
        }
        pieces.reverse();
        breaks.reverse();
        ConcaveFn::new(breaks, pieces)
    }

    pub fn to_json(&self) -> Value {
        let pieces: Vec<Value> = (0..self.formulas.len())
            .map(|j| {
                let (a, b) = self.piece_bounds(j);
                json!({"from": rational_to_json(a), "to": rational_to_json(b), "formula": self.formulas[j]})
            })
            .collect();
        json!({"domain": [rational_to_json(&self.lo), rational_to_json(&self.hi)], "pieces": pieces})
    }
}

/// `sup |f − g|` for duals on the same domain, `+∞` otherwise.
pub fn dual_sup_distance(f: &DualFn, g: &DualFn) -> Result<f64> {
    if f.lo != g.lo || f.hi != g.hi {
        return Ok(f64::INFINITY);
    }
    if f.lo == f.hi {
        return Ok((f.value_at_lo() - g.value_at_lo()).abs());
    }
    let mut best: f64 = 0.0;
    for span in refine(Some(&f.lo), Some(&f.hi), (&f.breakpoints, &f.formulas), (&g.breakpoints, &g.formulas)) {
        let d = span.fa.sub(span.fb);
        let up = piecewise::sup_on(&d, span.lo.as_ref(), span.hi.as_ref())?;
        let down = piecewise::sup_on(&d.neg(), span.lo.as_ref(), span.hi.as_ref())?;
        best = best.max(up).max(down);
    }
    Ok(best)
}
