use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use super::formula::Formula;
use super::piecewise::{self, interior_point, refine};
use super::roots;
use crate::error::{Error, Result};
use crate::rational::{from_f64, rational_from_json, rational_to_json, to_f64, Q};

/// Relative tolerance for continuity and concavity checks that cannot be
/// made exactly (catalog pieces, numerically located crossings).
pub const JOIN_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Piece {
    Affine { slope: Q, intercept: Q },
    /// `slope·u + intercept + (1/α)(1 − u)^α`, only valid left of `u = 1`.
    AlphaSingular { alpha: Q, slope: Q, intercept: Q },
}

impl Piece {
    pub fn affine(slope: Q, intercept: Q) -> Self {
        Piece::Affine { slope, intercept }
    }

    pub fn formula(&self) -> Formula {
        match self {
            Piece::Affine { slope, intercept } => Formula::affine(slope.clone(), intercept.clone()),
            Piece::AlphaSingular { alpha, slope, intercept } => Formula::affine(slope.clone(), intercept.clone())
                .add(&Formula::power(alpha.recip(), Q::one(), alpha.clone())),
        }
    }

    /// The affine slope; for an alpha piece this is the slope as `u → −∞`.
    pub fn slope(&self) -> &Q {
        match self {
            Piece::Affine { slope, .. } | Piece::AlphaSingular { slope, .. } => slope,
        }
    }

    fn shifted(&self, ds: &Q, dc: &Q) -> Piece {
        match self {
            Piece::Affine { slope, intercept } => Piece::Affine { slope: slope + ds, intercept: intercept + dc },
            Piece::AlphaSingular { alpha, slope, intercept } => {
                Piece::AlphaSingular { alpha: alpha.clone(), slope: slope + ds, intercept: intercept + dc }
            }
        }
    }
}

/// A continuous concave function `ℝ → ℝ`, piecewise affine or alpha-singular
/// between finitely many rational breakpoints.
#[derive(Clone, Debug)]
pub struct ConcaveFn {
    breakpoints: Vec<Q>,
    pieces: Vec<Piece>,
    formulas: Vec<Formula>,
    breaks_f64: Vec<f64>,
}

impl PartialEq for ConcaveFn {
    fn eq(&self, other: &Self) -> bool {
        self.breakpoints == other.breakpoints && self.pieces == other.pieces
    }
}

impl Eq for ConcaveFn {}

fn same_value(a: &Formula, b: &Formula, t: &Q) -> bool {
    match (a.eval_exact(t), b.eval_exact(t)) {
        (Some(x), Some(y)) => x == y,
        _ => {
            let (x, y) = (a.eval(to_f64(t)), b.eval(to_f64(t)));
            (x - y).abs() <= JOIN_TOL * x.abs().max(1.0)
        }
    }
}

fn not_below(a: &Formula, b: &Formula, t: &Q) -> bool {
    match (a.eval_exact(t), b.eval_exact(t)) {
        (Some(x), Some(y)) => x >= y,
        _ => {
            let (x, y) = (a.eval(to_f64(t)), b.eval(to_f64(t)));
            x >= y - JOIN_TOL * x.abs().max(1.0)
        }
    }
}

impl ConcaveFn {
    /// Validates continuity and concavity at every breakpoint.
    pub fn new(breakpoints: Vec<Q>, pieces: Vec<Piece>) -> Result<Self> {
        if pieces.len() != breakpoints.len() + 1 {
            return Err(Error::InvalidFunction(format!(
                "{} pieces for {} breakpoints",
                pieces.len(),
                breakpoints.len()
            )));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidFunction("breakpoints must be strictly increasing".into()));
        }
        for (j, p) in pieces.iter().enumerate() {
            if let Piece::AlphaSingular { alpha, .. } = p {
                if !alpha.is_positive() || *alpha >= Q::one() {
                    return Err(Error::InvalidFunction(format!("alpha = {alpha} is not in (0, 1)")));
                }
                match breakpoints.get(j) {
                    Some(t) if *t < Q::one() => {}
                    _ => {
                        return Err(Error::InvalidFunction(
                            "an alpha-singular piece must end at a breakpoint left of 1".into(),
                        ))
                    }
                }
            }
        }
        let formulas: Vec<Formula> = pieces.iter().map(Piece::formula).collect();
        for (j, t) in breakpoints.iter().enumerate() {
            let (l, r) = (&formulas[j], &formulas[j + 1]);
            if !same_value(l, r, t) {
                return Err(Error::InvalidFunction(format!("discontinuous at {t}")));
            }
            if !not_below(&l.derivative(), &r.derivative(), t) {
                return Err(Error::InvalidFunction(format!("not concave at {t}")));
            }
        }
        let breaks_f64 = breakpoints.iter().map(to_f64).collect();
        Ok(ConcaveFn { breakpoints, pieces, formulas, breaks_f64 })
    }

    pub fn affine(slope: Q, intercept: Q) -> Self {
        Self::new(vec![], vec![Piece::affine(slope, intercept)]).expect("affine functions are concave")
    }

    /// `Ψ(u) = min(0, u)`.
    pub fn canonical() -> Self {
        Self::new(vec![Q::zero()], vec![Piece::affine(Q::one(), Q::zero()), Piece::affine(Q::zero(), Q::zero())])
            .expect("valid")
    }

    /// `Ψ + ρ_α` with `ρ_α(u) = (1/α)(1 − u)^α` for `u <= 0` and `1/α` after.
    pub fn with_alpha_singularity(alpha: &Q) -> Result<Self> {
        Self::new(
            vec![Q::zero()],
            vec![
                Piece::AlphaSingular { alpha: alpha.clone(), slope: Q::one(), intercept: Q::zero() },
                Piece::affine(Q::zero(), alpha.recip()),
            ],
        )
    }

    /// Exact minimum of finitely many affine functions `(slope, intercept)`.
    pub fn lower_envelope(lines: &[(Q, Q)]) -> Result<Self> {
        if lines.is_empty() {
            return Err(Error::InvalidFunction("empty envelope".into()));
        }
        let mut sorted = lines.to_vec();
        // steepest first; among equal slopes the lowest line wins
        sorted.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        sorted.dedup_by(|b, a| a.0 == b.0);
        let cross = |p: &(Q, Q), q: &(Q, Q)| (&q.1 - &p.1) / (&p.0 - &q.0);
        let mut hull: Vec<(Q, Q)> = Vec::new();
        for line in sorted {
            while hull.len() >= 2 {
                let n = hull.len();
                if cross(&hull[n - 1], &line) <= cross(&hull[n - 2], &hull[n - 1]) {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(line);
        }
        let breaks = hull.windows(2).map(|w| cross(&w[0], &w[1])).collect();
        Self::new(breaks, hull.into_iter().map(|(s, c)| Piece::affine(s, c)).collect())
    }

    pub fn breakpoints(&self) -> &[Q] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub(crate) fn formulas(&self) -> &[Formula] {
        &self.formulas
    }

    pub fn slope_neg(&self) -> &Q {
        self.pieces[0].slope()
    }

    pub fn slope_pos(&self) -> &Q {
        self.pieces.last().expect("nonempty").slope()
    }

    pub fn is_piecewise_affine(&self) -> bool {
        self.pieces.iter().all(|p| matches!(p, Piece::Affine { .. }))
    }

    fn index_left(&self, u: f64) -> usize {
        self.breaks_f64.partition_point(|b| *b < u)
    }

    fn index_right(&self, u: f64) -> usize {
        self.breaks_f64.partition_point(|b| *b <= u)
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.formulas[self.index_left(u)].eval(u)
    }

    pub fn eval_exact(&self, u: &Q) -> Option<Q> {
        let j = self.breakpoints.partition_point(|b| b < u);
        self.formulas[j].eval_exact(u)
    }

    pub fn left_derivative(&self, u: f64) -> f64 {
        self.formulas[self.index_left(u)].derivative().eval(u)
    }

    pub fn right_derivative(&self, u: f64) -> f64 {
        self.formulas[self.index_right(u)].derivative().eval(u)
    }

    pub fn add_affine(&self, slope: &Q, intercept: &Q) -> Self {
        let pieces = self.pieces.iter().map(|p| p.shifted(slope, intercept)).collect();
        Self::new(self.breakpoints.clone(), pieces).expect("adding an affine function keeps validity")
    }

    pub fn add_constant(&self, c: &Q) -> Self {
        self.add_affine(&Q::zero(), c)
    }

    /// Rebuilds from (piece, right end) runs, merging equal neighbours.
    fn from_runs(runs: Vec<(Piece, Option<Q>)>) -> Result<Self> {
        let mut pieces: Vec<Piece> = Vec::new();
        let mut breaks: Vec<Q> = Vec::new();
        for (p, end) in runs {
            if pieces.last() == Some(&p) {
                breaks.pop();
            } else {
                pieces.push(p);
            }
            if let Some(e) = end {
                breaks.push(e);
            }
        }
        Self::new(breaks, pieces)
    }

    pub fn to_json(&self) -> Value {
        let ends: Vec<Value> = std::iter::once(json!("-inf"))
            .chain(self.breakpoints.iter().map(rational_to_json))
            .chain(std::iter::once(json!("+inf")))
            .collect();
        let pieces: Vec<Value> = self
            .pieces
            .iter()
            .enumerate()
            .map(|(j, p)| {
                let (kind, params) = match p {
                    Piece::Affine { slope, intercept } => (
                        "affine",
                        json!({"slope": rational_to_json(slope), "intercept": rational_to_json(intercept)}),
                    ),
                    Piece::AlphaSingular { alpha, slope, intercept } => (
                        "alpha_singular",
                        json!({
                            "alpha": rational_to_json(alpha),
                            "slope": rational_to_json(slope),
                            "intercept": rational_to_json(intercept),
                        }),
                    ),
                };
                json!({"from": ends[j], "to": ends[j + 1], "kind": kind, "params": params})
            })
            .collect();
        json!({
            "slope_neg": rational_to_json(self.slope_neg()),
            "slope_pos": rational_to_json(self.slope_pos()),
            "pieces": pieces,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |m: &str| Error::InvalidFunction(m.to_string());
        let obj = v.as_object().ok_or_else(|| bad("expected an object"))?;
        let items = obj.get("pieces").and_then(Value::as_array).ok_or_else(|| bad("missing \"pieces\" array"))?;
        if items.is_empty() {
            return Err(bad("no pieces"));
        }
        let mut pieces = Vec::with_capacity(items.len());
        let mut breaks = Vec::new();
        for (j, item) in items.iter().enumerate() {
            let from = item.get("from").ok_or_else(|| bad("piece without \"from\""))?;
            let to = item.get("to").ok_or_else(|| bad("piece without \"to\""))?;
            let first = j == 0;
            let last = j + 1 == items.len();
            match (first, from.as_str()) {
                (true, Some("-inf")) => {}
                (true, _) => return Err(bad("first piece must start at \"-inf\"")),
                (false, _) => {
                    let f = rational_from_json(from)?;
                    if breaks.last() != Some(&f) {
                        return Err(bad("pieces must be contiguous"));
                    }
                }
            }
            match (last, to.as_str()) {
                (true, Some("+inf")) => {}
                (true, _) => return Err(bad("last piece must end at \"+inf\"")),
                (false, _) => breaks.push(rational_from_json(to)?),
            }
            let params = item.get("params").ok_or_else(|| bad("piece without \"params\""))?;
            let get = |k: &str| -> Result<Q> {
                rational_from_json(params.get(k).ok_or_else(|| bad(&format!("missing parameter {k:?}")))?)
            };
            let piece = match item.get("kind").and_then(Value::as_str) {
                Some("affine") => Piece::Affine { slope: get("slope")?, intercept: get("intercept")? },
                Some("alpha_singular") => {
                    Piece::AlphaSingular { alpha: get("alpha")?, slope: get("slope")?, intercept: get("intercept")? }
                }
                _ => return Err(bad("kind must be \"affine\" or \"alpha_singular\"")),
            };
            pieces.push(piece);
        }
        let f = Self::new(breaks, pieces)?;
        for (key, want) in [("slope_neg", f.slope_neg()), ("slope_pos", f.slope_pos())] {
            if let Some(given) = obj.get(key) {
                if rational_from_json(given)? != *want {
                    return Err(bad(&format!("{key} does not match the pieces")));
                }
            }
        }
        Ok(f)
    }
}

impl Serialize for ConcaveFn {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ConcaveFn {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        ConcaveFn::from_json(&v).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for ConcaveFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (j, p) in self.formulas.iter().enumerate() {
            let lo = if j == 0 { "-inf".to_string() } else { self.breakpoints[j - 1].to_string() };
            let hi = self.breakpoints.get(j).map_or("+inf".to_string(), |b| b.to_string());
            writeln!(f, "[{lo}, {hi}]: {p}")?;
        }
        Ok(())
    }
}

/// Pointwise minimum of two concave functions.
///
/// Affine crossings are exact; crossings involving an alpha piece are
/// bracketed on a sample grid and bisected to `1e-12`.
pub fn min_concave(f: &ConcaveFn, g: &ConcaveFn) -> Result<ConcaveFn> {
    let mut runs: Vec<(Piece, Option<Q>)> = Vec::new();
    for span in refine(None, None, (&f.breakpoints, &f.formulas), (&g.breakpoints, &g.formulas)) {
        let (pf, pg) = (&f.pieces[span.a], &g.pieces[span.b]);
        let d = span.fa.sub(span.fb);
        if d.is_zero() {
            runs.push((pf.clone(), span.hi.clone()));
            continue;
        }
        let inside = |x: &Q| span.lo.as_ref().is_none_or(|l| x > l) && span.hi.as_ref().is_none_or(|h| x < h);
        let mut cuts: Vec<Q> = if d.is_affine() {
            if d.slope().is_zero() {
                vec![]
            } else {
                vec![-d.intercept() / d.slope()]
            }
        } else {
            roots::sign_change_roots(&|u| d.eval(u), span.lo_f64(), span.hi_f64())?
                .into_iter()
                .map(from_f64)
                .collect::<Result<_>>()?
        };
        cuts.retain(inside);
        cuts.sort();
        cuts.dedup();
        let mut ends: Vec<Option<Q>> = vec![span.lo.clone()];
        ends.extend(cuts.into_iter().map(Some));
        ends.push(span.hi.clone());
        for w in ends.windows(2) {
            let x = interior_point(w[0].as_ref().map(to_f64), w[1].as_ref().map(to_f64));
            let p = if d.eval(x) <= 0.0 { pf } else { pg };
            runs.push((p.clone(), w[1].clone()));
        }
    }
    ConcaveFn::from_runs(runs)
}

/// `sup (f − g)` over ℝ, possibly `+∞`.
pub fn sup_difference(f: &ConcaveFn, g: &ConcaveFn) -> Result<f64> {
    let mut best = f64::NEG_INFINITY;
    for span in refine(None, None, (&f.breakpoints, &f.formulas), (&g.breakpoints, &g.formulas)) {
        let d = span.fa.sub(span.fb);
        best = best.max(piecewise::sup_on(&d, span.lo.as_ref(), span.hi.as_ref())?);
        if best == f64::INFINITY {
            break;
        }
    }
    Ok(best)
}

/// `sup |f − g|`; `+∞` when the asymptotic slopes differ or the gap is
/// unbounded.
pub fn sup_distance(f: &ConcaveFn, g: &ConcaveFn) -> Result<f64> {
    if f.slope_neg() != g.slope_neg() || f.slope_pos() != g.slope_pos() {
        return Ok(f64::INFINITY);
    }
    Ok(sup_difference(f, g)?.max(sup_difference(g, f)?))
}

/// `min(ψ + n, φ)`, the `n`-th cutoff of the more singular `φ` by `ψ`.
///
/// Requires `ψ <= φ + C` for some constant `C`.
pub fn cutoff(phi: &ConcaveFn, psi: &ConcaveFn, n: &Q) -> Result<ConcaveFn> {
    let gap = sup_difference(psi, phi)?;
    if gap == f64::INFINITY {
        return Err(Error::Precondition("sup(psi - phi) is infinite; phi is not more singular than psi".into()));
    }
    min_concave(&psi.add_constant(n), phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{qi, qr};

    fn psi() -> ConcaveFn {
        ConcaveFn::canonical()
    }

    #[test]
    fn evaluation_examples() {
        assert_eq!(psi().eval(-3.0), -3.0);
        assert_eq!(psi().eval(2.0), 0.0);
        let rho = Piece::AlphaSingular { alpha: qr(1, 4), slope: qi(0), intercept: qi(0) };
        assert_eq!(rho.formula().eval(0.0), 4.0);
        assert_eq!(ConcaveFn::with_alpha_singularity(&qr(1, 4)).unwrap().eval(0.0), 4.0);
        assert_eq!(ConcaveFn::affine(qi(2), qi(1)).eval_exact(&qr(1, 2)), Some(qi(2)));
    }

    #[test]
    fn rejects_invalid_input() {
        // convex kink
        let convex = ConcaveFn::new(vec![qi(0)], vec![Piece::affine(qi(0), qi(0)), Piece::affine(qi(1), qi(0))]);
        assert!(convex.is_err());
        let jump = ConcaveFn::new(vec![qi(0)], vec![Piece::affine(qi(1), qi(0)), Piece::affine(qi(0), qi(1))]);
        assert!(jump.is_err());
        let bad_alpha = ConcaveFn::new(
            vec![qi(0)],
            vec![Piece::AlphaSingular { alpha: qi(1), slope: qi(1), intercept: qi(-1) }, Piece::affine(qi(0), qi(0))],
        );
        assert!(bad_alpha.is_err());
        let unbounded = ConcaveFn::new(vec![], vec![Piece::AlphaSingular { alpha: qr(1, 2), slope: qi(0), intercept: qi(0) }]);
        assert!(unbounded.is_err());
    }

    #[test]
    fn envelope_and_min() {
        let env = ConcaveFn::lower_envelope(&[(qi(1), qi(0)), (qi(0), qi(0))]).unwrap();
        assert_eq!(env, psi());
        let a = ConcaveFn::affine(qi(1), qi(0));
        let b = ConcaveFn::affine(qi(0), qi(0));
        assert_eq!(min_concave(&a, &b).unwrap(), psi());
        assert_eq!(min_concave(&psi(), &psi()).unwrap(), psi());
        assert_eq!(min_concave(&psi().add_constant(&qi(5)), &psi()).unwrap(), psi());
        let three = ConcaveFn::lower_envelope(&[(qi(1), qi(0)), (qr(1, 3), qr(2, 3)), (qi(0), qi(4)), (qi(5), qi(100))])
            .unwrap();
        assert_eq!(three.breakpoints(), &[qi(-25), qi(1), qi(10)]);
    }

    #[test]
    fn min_slopes_follow_the_pieces() {
        let f = ConcaveFn::lower_envelope(&[(qi(2), qi(0)), (qi(-1), qi(0))]).unwrap();
        let g = ConcaveFn::lower_envelope(&[(qi(1), qi(1)), (qi(-2), qi(1))]).unwrap();
        let m = min_concave(&f, &g).unwrap();
        assert_eq!(m.slope_neg(), &qi(2));
        assert_eq!(m.slope_pos(), &qi(-2));
    }

    #[test]
    fn cutoff_examples() {
        let phi = ConcaveFn::with_alpha_singularity(&qr(1, 4)).unwrap();
        assert_eq!(cutoff(&phi, &psi(), &qi(0)).unwrap(), psi());
        let c = cutoff(&phi, &psi(), &qi(1000)).unwrap();
        // crossing where ρ(u) = 1000, i.e. u = 1 − 250^4
        let x = 1.0 - 250f64.powi(4);
        assert_eq!(c.breakpoints().len(), 2);
        assert!((to_f64(&c.breakpoints()[0]) - x).abs() < 1e-12 * x.abs());
        assert_eq!(c.eval(-5.0), phi.eval(-5.0));
        assert!(cutoff(&psi(), &phi, &qi(0)).is_err());
        let shifted = psi().add_constant(&qi(-3));
        assert_eq!(cutoff(&shifted, &psi(), &qi(3)).unwrap(), shifted);
    }

    #[test]
    fn sup_distances() {
        assert_eq!(sup_distance(&psi(), &psi().add_constant(&qi(-7))).unwrap(), 7.0);
        let phi = ConcaveFn::with_alpha_singularity(&qr(1, 4)).unwrap();
        assert_eq!(sup_distance(&psi(), &phi).unwrap(), f64::INFINITY);
        let f = ConcaveFn::lower_envelope(&[(qi(1), qi(0)), (qi(0), qi(0))]).unwrap();
        let g = ConcaveFn::lower_envelope(&[(qi(1), qi(1)), (qi(0), qi(0))]).unwrap();
        assert_eq!(sup_distance(&f, &g).unwrap(), 1.0);
        assert_eq!(sup_distance(&f, &ConcaveFn::affine(qi(1), qi(0))).unwrap(), f64::INFINITY);
    }

    #[test]
    fn json_round_trip() {
        let phi = ConcaveFn::with_alpha_singularity(&qr(1, 3)).unwrap();
        let back = ConcaveFn::from_json(&phi.to_json()).unwrap();
        assert_eq!(back, phi);
        let text = r#"{"slope_neg": 1, "slope_pos": 0, "pieces": [
            {"from": "-inf", "to": 0, "kind": "affine", "params": {"slope": 1, "intercept": 0}},
            {"from": 0, "to": "+inf", "kind": "affine", "params": {"slope": "0", "intercept": 0}}]}"#;
        let f: ConcaveFn = serde_json::from_str(text).unwrap();
        assert_eq!(f, psi());
        let wrong = text.replace("\"slope_neg\": 1", "\"slope_neg\": 2");
        assert!(serde_json::from_str::<ConcaveFn>(&wrong).is_err());
    }
}
