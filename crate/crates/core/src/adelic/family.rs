use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use super::place::{log_abs, support, valuation, LogCombination, Place};
use crate::convex::{legendre_dual, local_energy, sup_distance, ConcaveFn, DualFn, Integral, Piece};
use crate::error::{Error, Result};
use crate::rational::{rational_from_json, rational_to_json, to_f64, Q};

/// `D = a[0] + b[∞]` on the toric line, with `a + b >= 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ToricDivisor {
    a: Q,
    b: Q,
}

impl ToricDivisor {
    pub fn new(a: Q, b: Q) -> Result<Self> {
        if (&a + &b).is_negative() {
            return Err(Error::Precondition(format!("a + b = {} is negative", &a + &b)));
        }
        Ok(ToricDivisor { a, b })
    }

    /// `[∞]`.
    pub fn infinity() -> Self {
        ToricDivisor { a: Q::zero(), b: Q::from_integer(1.into()) }
    }

    pub fn a(&self) -> &Q {
        &self.a
    }

    pub fn b(&self) -> &Q {
        &self.b
    }

    /// `min(b·u, −a·u)`: slope `b` at `−∞` and `−a` at `+∞`.
    pub fn canonical_function(&self) -> ConcaveFn {
        if (&self.a + &self.b).is_zero() {
            return ConcaveFn::affine(self.b.clone(), Q::zero());
        }
        ConcaveFn::lower_envelope(&[(self.b.clone(), Q::zero()), (-self.a.clone(), Q::zero())]).expect("two lines")
    }

    pub fn to_json(&self) -> Value {
        json!({"a": rational_to_json(&self.a), "b": rational_to_json(&self.b)})
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let get = |k: &str| -> Result<Q> {
            rational_from_json(v.get(k).ok_or_else(|| Error::Parse(format!("divisor without {k:?}")))?)
        };
        Self::new(get("a")?, get("b")?)
    }
}

/// Outcome of the local positivity check of one concave function.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LocalNefCheck {
    /// Asymptotic slopes are `b` at `−∞` and `−a` at `+∞`.
    pub strongly_nef: bool,
    /// Bounded distance from the canonical function.
    pub non_singular: bool,
}

pub fn strongly_nef_local_check(psi: &ConcaveFn, d: &ToricDivisor) -> Result<LocalNefCheck> {
    let strongly_nef = *psi.slope_neg() == d.b && *psi.slope_pos() == -d.a.clone();
    let non_singular = strongly_nef && sup_distance(psi, &d.canonical_function())?.is_finite();
    Ok(LocalNefCheck { strongly_nef, non_singular })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NefStatus {
    SAmple,
    SNefOnly,
    RelativelyNefOnly,
    NotRelativelyNef,
}

impl NefStatus {
    pub fn is_arithmetically_nef(&self) -> bool {
        matches!(self, NefStatus::SAmple | NefStatus::SNefOnly)
    }
}

impl fmt::Display for NefStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NefStatus::SAmple => "S_ample",
            NefStatus::SNefOnly => "S_nef_only",
            NefStatus::RelativelyNefOnly => "relatively_nef_only",
            NefStatus::NotRelativelyNef => "not_relatively_nef",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NefReport {
    pub status: NefStatus,
    /// `min(ϑ(−a), ϑ(b))`; absent when the family is not relatively nef.
    pub mu_min_asy: Option<f64>,
    /// First place whose function has the wrong asymptotic slopes.
    pub failing_place: Option<Place>,
}

/// Per-place local energies and their sum.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyReport {
    pub per_place: Vec<(Place, Integral)>,
    pub total: Integral,
}

/// Concave functions indexed by the places of ℚ: the canonical function of
/// the divisor everywhere except at finitely many exceptional places.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdelicFamily {
    divisor: ToricDivisor,
    exceptions: BTreeMap<Place, ConcaveFn>,
}

fn at_place(v: Place, e: Error) -> Error {
    match e {
        Error::Precondition(m) => Error::Precondition(format!("at place {v}: {m}")),
        other => other,
    }
}

impl AdelicFamily {
    pub fn new(divisor: ToricDivisor, exceptions: BTreeMap<Place, ConcaveFn>) -> Result<Self> {
        for (v, psi) in &exceptions {
            if !strongly_nef_local_check(psi, &divisor)?.strongly_nef {
                return Err(Error::Precondition(format!(
                    "at place {v}: slopes ({}, {}) do not match the divisor (b = {}, -a = {})",
                    psi.slope_neg(),
                    psi.slope_pos(),
                    divisor.b,
                    -divisor.a.clone()
                )));
            }
        }
        Ok(AdelicFamily { divisor, exceptions })
    }

    pub fn canonical(divisor: ToricDivisor) -> Self {
        AdelicFamily { divisor, exceptions: BTreeMap::new() }
    }

    /// `[∞]` with `Ψ + ρ_α` at `v` and `Ψ` elsewhere.
    pub fn alpha_family(alpha: &Q, v: Place) -> Result<Self> {
        Self::new(ToricDivisor::infinity(), BTreeMap::from([(v, ConcaveFn::with_alpha_singularity(alpha)?)]))
    }

    pub fn divisor(&self) -> &ToricDivisor {
        &self.divisor
    }

    pub fn exceptions(&self) -> &BTreeMap<Place, ConcaveFn> {
        &self.exceptions
    }

    pub fn function_at(&self, v: Place) -> ConcaveFn {
        self.exceptions.get(&v).cloned().unwrap_or_else(|| self.divisor.canonical_function())
    }

    /// Places where the function is at infinite distance from the canonical one.
    pub fn singular_places(&self) -> Result<Vec<Place>> {
        let mut out = Vec::new();
        for (v, psi) in &self.exceptions {
            if !strongly_nef_local_check(psi, &self.divisor)?.non_singular {
                out.push(*v);
            }
        }
        Ok(out)
    }

    /// `−Σ_v ψ_v(−log|t|_v)`.
    pub fn point_height(&self, t: &Q) -> Result<f64> {
        let mut places = support(t)?;
        places.extend(self.exceptions.keys().copied());
        places.sort();
        places.dedup();
        let mut h = 0.0;
        for v in places {
            let u = match v {
                Place::Infinity => {
                    let abs = t.abs();
                    -(to_f64(&Q::from_integer(abs.numer().clone())).ln() - to_f64(&Q::from_integer(abs.denom().clone())).ln())
                }
                Place::Prime(p) => valuation(t, p)? as f64 * (p as f64).ln(),
            };
            h -= self.function_at(v).eval(u);
        }
        Ok(h)
    }

    /// The height as an exact combination of logarithms, available when
    /// `|t|_v = 1` at every exceptional place.
    pub fn point_height_exact(&self, t: &Q) -> Result<Option<LogCombination>> {
        let mut h = LogCombination::zero();
        for (v, psi) in &self.exceptions {
            if !log_abs(t, *v)?.is_zero() {
                return Ok(None);
            }
            match psi.eval_exact(&Q::zero()) {
                Some(c) => h = h.add(&LogCombination::constant(-c)),
                None => return Ok(None),
            }
        }
        for v in support(t)? {
            if self.exceptions.contains_key(&v) {
                continue;
            }
            // u = −log|t|_v; the canonical function is −a·u for u >= 0 and b·u below
            let log_t = log_abs(t, v)?;
            let u_nonneg = match v {
                Place::Infinity => t.abs() < Q::from_integer(1.into()),
                Place::Prime(p) => valuation(t, p)? > 0,
            };
            let slope = if u_nonneg { -self.divisor.a.clone() } else { self.divisor.b.clone() };
            h = h.add(&log_t.scale(&slope));
        }
        Ok(Some(h))
    }

    /// `ϑ = Σ_v ψ_v^∨` on `[−a, b]`; canonical places add `0`.
    pub fn roof(&self) -> Result<DualFn> {
        let mut roof = legendre_dual(&self.divisor.canonical_function())?;
        debug_assert!(roof.formulas().iter().all(|f| f.is_zero()));
        for psi in self.exceptions.values() {
            roof = roof.add(&legendre_dual(psi)?)?;
        }
        Ok(roof)
    }

    /// `2 ∫ ϑ`, possibly `−∞`.
    pub fn global_height(&self) -> Result<Integral> {
        let i = self.roof()?.integrate()?;
        Ok(Integral { value: 2.0 * i.value, heuristic: i.heuristic })
    }

    pub fn nef_status(&self) -> Result<NefReport> {
        let roof = self.roof()?;
        let lo = endpoint_value(&roof, true);
        let hi = endpoint_value(&roof, false);
        let sign = match (&lo, &hi) {
            (Endpoint::Exact(x), Endpoint::Exact(y)) => x.min(y).cmp(&Q::zero()),
            _ => {
                let m = lo.to_f64().min(hi.to_f64());
                m.partial_cmp(&0.0).unwrap_or(Ordering::Less)
            }
        };
        let status = match sign {
            Ordering::Greater => NefStatus::SAmple,
            Ordering::Equal => NefStatus::SNefOnly,
            Ordering::Less => NefStatus::RelativelyNefOnly,
        };
        Ok(NefReport { status, mu_min_asy: Some(lo.to_f64().min(hi.to_f64())), failing_place: None })
    }

    /// `ψ_v ↦ ψ_v − c(v)`.
    pub fn twist(&self, c: &BTreeMap<Place, Q>) -> AdelicFamily {
        let mut out = self.clone();
        for (v, cv) in c {
            if cv.is_zero() {
                continue;
            }
            out.exceptions.insert(*v, self.function_at(*v).add_constant(&-cv.clone()));
        }
        out
    }

    /// Heights of the fixed points `0` and `∞`, from the asymptotic
    /// intercepts of the functions at `+∞` and `−∞`.
    pub fn fixed_point_heights(&self) -> (f64, f64) {
        let mut h0 = 0.0;
        let mut h_inf = 0.0;
        for psi in self.exceptions.values() {
            if let Some(Piece::Affine { intercept, .. }) = psi.pieces().last() {
                h0 -= to_f64(intercept);
            }
            h_inf -= match psi.pieces().first() {
                Some(Piece::Affine { intercept, .. }) => to_f64(intercept),
                _ => f64::INFINITY,
            };
        }
        (h0, h_inf)
    }

    pub fn to_json(&self) -> Value {
        let exceptions: Vec<Value> =
            self.exceptions.iter().map(|(v, psi)| json!({"place": v.to_json(), "psi": psi.to_json()})).collect();
        json!({"divisor": self.divisor.to_json(), "exceptions": exceptions})
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let divisor = ToricDivisor::from_json(v.get("divisor").ok_or_else(|| Error::Parse("missing \"divisor\"".into()))?)?;
        let mut exceptions = BTreeMap::new();
        for item in raw_exceptions(v)? {
            let (place, psi) = item;
            if exceptions.insert(place, psi).is_some() {
                return Err(Error::Parse(format!("place {place} listed twice")));
            }
        }
        Self::new(divisor, exceptions)
    }
}

/// Exceptions of a family JSON without checking them against the divisor.
pub fn raw_exceptions(v: &Value) -> Result<Vec<(Place, ConcaveFn)>> {
    let Some(items) = v.get("exceptions") else { return Ok(Vec::new()) };
    let items = items.as_array().ok_or_else(|| Error::Parse("\"exceptions\" must be an array".into()))?;
    items
        .iter()
        .map(|item| {
            let place = Place::from_json(item.get("place").ok_or_else(|| Error::Parse("exception without \"place\"".into()))?)?;
            let psi = ConcaveFn::from_json(item.get("psi").ok_or_else(|| Error::Parse("exception without \"psi\"".into()))?)?;
            Ok((place, psi))
        })
        .collect()
}

enum Endpoint {
    Exact(Q),
    Approx(f64),
}

impl Endpoint {
    fn to_f64(&self) -> f64 {
        match self {
            Endpoint::Exact(q) => to_f64(q),
            Endpoint::Approx(x) => *x,
        }
    }
}

fn endpoint_value(roof: &DualFn, low: bool) -> Endpoint {
    let (m, approx) = if low { (roof.lo(), roof.value_at_lo()) } else { (roof.hi(), roof.value_at_hi()) };
    match roof.eval_exact(m) {
        Some(q) => Endpoint::Exact(q),
        None => Endpoint::Approx(approx),
    }
}

/// Classifies a family given as raw data, reporting a slope mismatch as
/// `not_relatively_nef` instead of an error.
pub fn nef_check(divisor: ToricDivisor, exceptions: Vec<(Place, ConcaveFn)>) -> Result<NefReport> {
    for (v, psi) in &exceptions {
        if !strongly_nef_local_check(psi, &divisor)?.strongly_nef {
            return Ok(NefReport { status: NefStatus::NotRelativelyNef, mu_min_asy: None, failing_place: Some(*v) });
        }
    }
    AdelicFamily::new(divisor, exceptions.into_iter().collect())?.nef_status()
}

/// `Σ_v E(ψ_v, φ_v)` over the places where either family is exceptional.
pub fn global_energy(reference: &AdelicFamily, singular: &AdelicFamily) -> Result<EnergyReport> {
    if reference.divisor != singular.divisor {
        return Err(Error::Precondition("families have different divisors".into()));
    }
    let mut places: Vec<Place> = reference.exceptions.keys().chain(singular.exceptions.keys()).copied().collect();
    places.sort();
    places.dedup();
    let mut per_place = Vec::with_capacity(places.len());
    let mut total = Integral::exact(0.0);
    for v in places {
        let e = local_energy(&reference.function_at(v), &singular.function_at(v)).map_err(|e| at_place(v, e))?;
        total = total.plus(e);
        per_place.push((v, e));
    }
    Ok(EnergyReport { per_place, total })
}

/// Height of `singular` through the energy: `h(reference) + E(reference, singular)`.
pub fn extended_height(reference: &AdelicFamily, singular: &AdelicFamily) -> Result<Integral> {
    let nef = reference.nef_status()?;
    if !nef.status.is_arithmetically_nef() {
        return Err(Error::Precondition(format!("reference family is {}, not arithmetically nef", nef.status)));
    }
    Ok(reference.global_height()?.plus(global_energy(reference, singular)?.total))
}

impl Serialize for AdelicFamily {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for AdelicFamily {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        AdelicFamily::from_json(&v).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{qi, qr};

    fn canonical() -> AdelicFamily {
        AdelicFamily::canonical(ToricDivisor::infinity())
    }

    #[test]
    fn canonical_function_has_the_divisor_slopes() {
        let d = ToricDivisor::new(qi(2), qi(3)).unwrap();
        let f = d.canonical_function();
        assert_eq!((f.slope_neg(), f.slope_pos()), (&qi(3), &qi(-2)));
        assert_eq!(ToricDivisor::infinity().canonical_function(), ConcaveFn::canonical());
        assert!(ToricDivisor::new(qi(-2), qi(1)).is_err());
        let flat = ToricDivisor::new(qi(-1), qi(1)).unwrap().canonical_function();
        assert!(flat.breakpoints().is_empty());
    }

    #[test]
    fn point_heights() {
        let f = canonical();
        assert!((f.point_height(&qi(2)).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert_eq!(f.point_height(&qi(1)).unwrap(), 0.0);
        assert_eq!(f.point_height_exact(&qr(12, 5)).unwrap().unwrap(), log_abs(&qi(12), Place::Infinity).unwrap());
        assert_eq!(f.point_height_exact(&qr(-5, 12)).unwrap().unwrap(), log_abs(&qi(12), Place::Infinity).unwrap());
        let g = AdelicFamily::alpha_family(&qr(1, 4), Place::Prime(3)).unwrap();
        assert_eq!(g.point_height(&qi(1)).unwrap(), -4.0);
        assert_eq!(g.point_height_exact(&qi(1)).unwrap().unwrap(), LogCombination::constant(qi(-4)));
        assert_eq!(g.point_height_exact(&qi(3)).unwrap(), None);
        assert!(g.point_height(&qi(0)).is_err());
    }

    #[test]
    fn roofs_and_heights() {
        let f = canonical();
        let r = f.roof().unwrap();
        assert_eq!((r.lo(), r.hi()), (&qi(0), &qi(1)));
        assert!(r.formulas().iter().all(|g| g.is_zero()));
        assert_eq!(f.global_height().unwrap().value, 0.0);

        let shifted = f.twist(&BTreeMap::from([(Place::Infinity, qi(-3))]));
        assert_eq!(shifted.roof().unwrap().eval_exact(&qr(1, 2)), Some(qi(-3)));

        let g = AdelicFamily::alpha_family(&qr(1, 4), Place::Infinity).unwrap();
        let r = g.roof().unwrap();
        assert_eq!(r.value_at_lo(), -4.0);
        assert_eq!(r.value_at_hi(), f64::NEG_INFINITY);
        assert!((g.global_height().unwrap().value + 10.0).abs() < 1e-12);
        let half = AdelicFamily::alpha_family(&qr(1, 2), Place::Infinity).unwrap();
        assert_eq!(half.global_height().unwrap().value, f64::NEG_INFINITY);
    }

    #[test]
    fn nef_statuses() {
        let f = canonical();
        let r = f.nef_status().unwrap();
        assert_eq!((r.status, r.mu_min_asy), (NefStatus::SNefOnly, Some(0.0)));
        let up = f.twist(&BTreeMap::from([(Place::Prime(2), qr(1, 2))]));
        let r = up.nef_status().unwrap();
        assert_eq!((r.status, r.mu_min_asy), (NefStatus::SAmple, Some(0.5)));
        let g = AdelicFamily::alpha_family(&qr(1, 4), Place::Infinity).unwrap();
        let r = g.nef_status().unwrap();
        assert_eq!((r.status, r.mu_min_asy), (NefStatus::RelativelyNefOnly, Some(f64::NEG_INFINITY)));
        let bad = ConcaveFn::lower_envelope(&[(qi(1), qi(0)), (qr(1, 2), qi(0))]).unwrap();
        let r = nef_check(ToricDivisor::infinity(), vec![(Place::Prime(5), bad.clone())]).unwrap();
        assert_eq!((r.status, r.failing_place), (NefStatus::NotRelativelyNef, Some(Place::Prime(5))));
        assert!(AdelicFamily::new(ToricDivisor::infinity(), BTreeMap::from([(Place::Prime(5), bad)])).is_err());
    }

    #[test]
    fn local_checks() {
        let d = ToricDivisor::infinity();
        let c = strongly_nef_local_check(&ConcaveFn::canonical(), &d).unwrap();
        assert!(c.strongly_nef && c.non_singular);
        let s = strongly_nef_local_check(&ConcaveFn::with_alpha_singularity(&qr(1, 3)).unwrap(), &d).unwrap();
        assert!(s.strongly_nef && !s.non_singular);
        let half = ConcaveFn::affine(qi(1), qi(0));
        assert!(!strongly_nef_local_check(&half, &d).unwrap().strongly_nef);
    }

    #[test]
    fn energies() {
        let f = canonical();
        assert_eq!(global_energy(&f, &f).unwrap().total.value, 0.0);
        let g = AdelicFamily::alpha_family(&qr(1, 4), Place::Infinity).unwrap();
        let e = global_energy(&f, &g).unwrap();
        assert!((e.total.value + 10.0).abs() < 1e-12);
        assert_eq!(e.per_place.len(), 1);
        assert!((extended_height(&f, &g).unwrap().value + 10.0).abs() < 1e-12);
        // twisting by c lowers the concave function by c and adds 2c to the energy
        let shifted = f.twist(&BTreeMap::from([(Place::Infinity, qi(3))]));
        assert_eq!(global_energy(&f, &shifted).unwrap().total.value, 6.0);
        let err = global_energy(&g, &f).unwrap_err();
        assert!(err.to_string().contains("at place inf"), "{err}");
        assert!(extended_height(&g, &f).is_err());
    }

    #[test]
    fn twist_adds_to_the_height() {
        let f = canonical();
        assert_eq!(f.twist(&BTreeMap::new()), f);
        assert_eq!(f.twist(&BTreeMap::from([(Place::Infinity, qi(0))])), f);
        let t = f.twist(&BTreeMap::from([(Place::Infinity, qi(1))]));
        assert_eq!(t.global_height().unwrap().value, 2.0);
    }

    #[test]
    fn fixed_points_match_the_roof_ends() {
        let psi = ConcaveFn::lower_envelope(&[(qi(1), qi(2)), (qr(1, 3), qi(1)), (qi(0), qr(3, 2))]).unwrap();
        let f = AdelicFamily::new(ToricDivisor::infinity(), BTreeMap::from([(Place::Prime(7), psi)])).unwrap();
        let (h0, h_inf) = f.fixed_point_heights();
        let r = f.roof().unwrap();
        assert_eq!((h0, h_inf), (r.value_at_lo(), r.value_at_hi()));
        assert_eq!(canonical().fixed_point_heights(), (0.0, 0.0));
    }

    #[test]
    fn json_round_trip() {
        let g = AdelicFamily::alpha_family(&qr(1, 4), Place::Prime(5)).unwrap();
        let text = g.to_json().to_string();
        let back: AdelicFamily = serde_json::from_str(&text).unwrap();
        assert_eq!(back, g);
        let dup = json!({"divisor": {"a": 0, "b": 1}, "exceptions": [
            {"place": "inf", "psi": ConcaveFn::canonical().to_json()},
            {"place": "inf", "psi": ConcaveFn::canonical().to_json()}]});
        assert!(AdelicFamily::from_json(&dup).is_err());
        let plain = AdelicFamily::from_json(&json!({"divisor": {"a": "1/2", "b": 1}})).unwrap();
        assert_eq!(plain.divisor().a(), &qr(1, 2));
    }
}
