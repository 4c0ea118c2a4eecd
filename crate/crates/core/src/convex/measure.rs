use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use super::concave::ConcaveFn;
use super::formula::{Formula, Integral};
use super::piecewise::refine;
use super::quadrature::{self, Tail, TailOutcome};
use crate::error::{Error, Result};
use crate::rational::{rational_from_json, rational_to_json, to_f64, Q};

/// Atoms whose inexact mass is below this are dropped.
pub const ATOM_FLOOR: f64 = 1e-15;

#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub location: Q,
    pub mass: f64,
    /// Present when the mass is a difference of rational slopes.
    pub exact_mass: Option<Q>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityPiece {
    /// `None` is `−∞`.
    pub from: Option<Q>,
    /// `None` is `+∞`.
    pub to: Option<Q>,
    pub density: Formula,
}

/// A measure on ℝ: finitely many atoms plus closed-form densities on
/// disjoint intervals.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Measure1D {
    atoms: Vec<Atom>,
    densities: Vec<DensityPiece>,
}

fn end_to_json(x: &Option<Q>, inf: &str) -> Value {
    match x {
        Some(q) => rational_to_json(q),
        None => json!(inf),
    }
}

fn end_from_json(v: &Value, inf: &str) -> Result<Option<Q>> {
    if v.as_str() == Some(inf) {
        Ok(None)
    } else {
        rational_from_json(v).map(Some)
    }
}

impl Measure1D {
    pub fn new(mut atoms: Vec<Atom>, mut densities: Vec<DensityPiece>) -> Result<Self> {
        atoms.sort_by(|a, b| a.location.cmp(&b.location));
        if atoms.windows(2).any(|w| w[0].location == w[1].location) {
            return Err(Error::InvalidMeasure("atoms must sit at distinct locations".into()));
        }
        if atoms.iter().any(|a| !a.mass.is_finite()) {
            return Err(Error::InvalidMeasure("atom masses must be finite".into()));
        }
        for d in &densities {
            if let (Some(a), Some(b)) = (&d.from, &d.to) {
                if a >= b {
                    return Err(Error::InvalidMeasure(format!("empty density interval [{a}, {b}]")));
                }
            }
        }
        densities.sort_by(|a, b| match (&a.from, &b.from) {
            (None, None) => std::cmp::Ordering::Equal,
            (None, _) => std::cmp::Ordering::Less,
            (_, None) => std::cmp::Ordering::Greater,
            (Some(x), Some(y)) => x.cmp(y),
        });
        for w in densities.windows(2) {
            let overlap = match (&w[0].to, &w[1].from) {
                (None, _) | (_, None) => true,
                (Some(a), Some(b)) => a > b,
            };
            if overlap {
                return Err(Error::InvalidMeasure("density intervals overlap".into()));
            }
        }
        Ok(Measure1D { atoms, densities })
    }

    pub fn dirac(location: Q, mass: Q) -> Self {
        Measure1D { atoms: vec![Atom { location, mass: to_f64(&mass), exact_mass: Some(mass) }], densities: vec![] }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn densities(&self) -> &[DensityPiece] {
        &self.densities
    }

    pub fn total_mass(&self) -> Result<f64> {
        let mut m: f64 = self.atoms.iter().map(|a| a.mass).sum();
        for d in &self.densities {
            m += d.density.integrate(d.from.as_ref(), d.to.as_ref())?.value;
        }
        Ok(m)
    }

    /// Exact total mass of a purely atomic measure with rational masses.
    pub fn total_mass_exact(&self) -> Option<Q> {
        if !self.densities.is_empty() {
            return None;
        }
        self.atoms.iter().map(|a| a.exact_mass.clone()).sum()
    }

    /// Sum of two measures.
    pub fn add(&self, other: &Measure1D) -> Measure1D {
        let mut atoms = self.atoms.clone();
        for a in &other.atoms {
            match atoms.iter_mut().find(|b| b.location == a.location) {
                Some(b) => {
                    b.mass += a.mass;
                    b.exact_mass = match (&b.exact_mass, &a.exact_mass) {
                        (Some(x), Some(y)) => Some(x + y),
                        _ => None,
                    };
                }
                None => atoms.push(a.clone()),
            }
        }
        atoms.sort_by(|a, b| a.location.cmp(&b.location));

        let mut cuts: Vec<Q> = Vec::new();
        for d in self.densities.iter().chain(&other.densities) {
            cuts.extend(d.from.iter().cloned());
            cuts.extend(d.to.iter().cloned());
        }
        cuts.sort();
        cuts.dedup();
        let mut ends: Vec<Option<Q>> = vec![None];
        ends.extend(cuts.into_iter().map(Some));
        ends.push(None);
        let covers = |d: &DensityPiece, a: &Option<Q>, b: &Option<Q>| {
            let left_ok = match (&d.from, a) {
                (None, _) => true,
                (Some(_), None) => false,
                (Some(f), Some(a)) => f <= a,
            };
            let right_ok = match (&d.to, b) {
                (None, _) => true,
                (Some(_), None) => false,
                (Some(t), Some(b)) => t >= b,
            };
            left_ok && right_ok
        };
        let mut densities: Vec<DensityPiece> = Vec::new();
        for w in ends.windows(2) {
            let sum = self
                .densities
                .iter()
                .chain(&other.densities)
                .filter(|d| covers(d, &w[0], &w[1]))
                .fold(Formula::zero(), |acc, d| acc.add(&d.density));
            if sum.is_zero() {
                continue;
            }
            match densities.last_mut() {
                Some(last) if last.density == sum && last.to == w[0] => last.to = w[1].clone(),
                _ => densities.push(DensityPiece { from: w[0].clone(), to: w[1].clone(), density: sum }),
            }
        }
        Measure1D { atoms, densities }
    }

    /// `∫ f dμ` for a bounded continuous test function.
    pub fn integrate_fn(&self, f: &dyn Fn(f64) -> f64, tol: f64) -> Result<f64> {
        let mut total: f64 = self.atoms.iter().map(|a| a.mass * f(to_f64(&a.location))).sum();
        let n = (self.densities.len().max(1)) as f64;
        for d in &self.densities {
            let g = |u: f64| f(u) * d.density.eval(u);
            total += integrate_numeric(&g, d.from.as_ref(), d.to.as_ref(), tol / n)?.value;
        }
        Ok(total)
    }

    /// `∫ (f − g) dμ` with closed-form integration wherever the integrand is a
    /// single-center power sum.
    pub fn integrate_difference(&self, f: &ConcaveFn, g: &ConcaveFn, tol: f64) -> Result<Integral> {
        let mut total = Integral::exact(0.0);
        for a in &self.atoms {
            let jf = f.breakpoints().partition_point(|b| *b < a.location);
            let jg = g.breakpoints().partition_point(|b| *b < a.location);
            let d = f.formulas()[jf].sub(&g.formulas()[jg]);
            let v = match (d.eval_exact(&a.location), &a.exact_mass) {
                (Some(v), Some(m)) => to_f64(&(v * m)),
                (Some(v), None) => to_f64(&v) * a.mass,
                (None, _) => d.eval(to_f64(&a.location)) * a.mass,
            };
            total = total.plus(Integral::exact(v));
        }
        for piece in &self.densities {
            let spans = refine(
                piece.from.as_ref(),
                piece.to.as_ref(),
                (f.breakpoints(), f.formulas()),
                (g.breakpoints(), g.formulas()),
            );
            for span in spans {
                let d = span.fa.sub(span.fb);
                let part = match d.mul(&piece.density) {
                    Some(p) => p.integrate(span.lo.as_ref(), span.hi.as_ref())?,
                    None => {
                        let h = |u: f64| d.eval(u) * piece.density.eval(u);
                        integrate_numeric(&h, span.lo.as_ref(), span.hi.as_ref(), tol)?
                    }
                };
                total = total.plus(part);
            }
        }
        if total.value == f64::INFINITY {
            return Err(Error::DivergesToPlusInfinity("integrand grows".into()));
        }
        Ok(total)
    }

    pub fn to_json(&self) -> Value {
        let atoms: Vec<Value> = self
            .atoms
            .iter()
            .map(|a| {
                let mass = match &a.exact_mass {
                    Some(m) => rational_to_json(m),
                    None => json!(a.mass),
                };
                json!({"location": rational_to_json(&a.location), "mass": mass})
            })
            .collect();
        let densities: Vec<Value> = self
            .densities
            .iter()
            .map(|d| {
                json!({
                    "from": end_to_json(&d.from, "-inf"),
                    "to": end_to_json(&d.to, "+inf"),
                    "density": d.density,
                })
            })
            .collect();
        json!({"atoms": atoms, "densities": densities})
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |m: &str| Error::InvalidMeasure(m.to_string());
        let empty = Vec::new();
        let atoms_v = v.get("atoms").map(|a| a.as_array().ok_or_else(|| bad("\"atoms\" must be an array")));
        let dens_v = v.get("densities").map(|a| a.as_array().ok_or_else(|| bad("\"densities\" must be an array")));
        let mut atoms = Vec::new();
        for a in atoms_v.unwrap_or(Ok(&empty))? {
            let location = rational_from_json(a.get("location").ok_or_else(|| bad("atom without location"))?)?;
            let m = a.get("mass").ok_or_else(|| bad("atom without mass"))?;
            let exact = rational_from_json(m)?;
            atoms.push(Atom { location, mass: to_f64(&exact), exact_mass: Some(exact) });
        }
        let mut densities = Vec::new();
        for d in dens_v.unwrap_or(Ok(&empty))? {
            let from = end_from_json(d.get("from").ok_or_else(|| bad("density without from"))?, "-inf")?;
            let to = end_from_json(d.get("to").ok_or_else(|| bad("density without to"))?, "+inf")?;
            let density: Formula = serde_json::from_value(d.get("density").cloned().ok_or_else(|| bad("missing density"))?)?;
            densities.push(DensityPiece { from, to, density: Formula::from_parts(density.slope().clone(), density.intercept().clone(), density.terms().to_vec()) });
        }
        Self::new(atoms, densities)
    }
}

/// Numerical `∫_lo^hi h`, with doubling for infinite ends.
fn integrate_numeric(h: &dyn Fn(f64) -> f64, lo: Option<&Q>, hi: Option<&Q>, tol: f64) -> Result<Integral> {
    let tail = |b: f64, side: Tail| -> Result<f64> {
        match quadrature::doubling_tail(h, b, side, tol) {
            TailOutcome::Converged(v) => Ok(v),
            TailOutcome::DivergesNeg => Ok(f64::NEG_INFINITY),
            TailOutcome::DivergesPos => Err(Error::DivergesToPlusInfinity("numerical tail grows".into())),
        }
    };
    let (value, heuristic) = match (lo.map(to_f64), hi.map(to_f64)) {
        (Some(a), Some(b)) => (quadrature::integrate(h, a, b, tol), false),
        (None, Some(b)) => (tail(b, Tail::Left)?, true),
        (Some(a), None) => (tail(a, Tail::Right)?, true),
        (None, None) => (tail(0.0, Tail::Left)? + tail(0.0, Tail::Right)?, true),
    };
    Ok(Integral { value, heuristic })
}

/// Real Monge–Ampère measure `−f''` of a concave function.
///
/// Kinks carry atoms of mass `f'(t−) − f'(t+)`; zero atoms are omitted.
/// Alpha pieces carry the density `(1 − α)(1 − u)^{α−2}`.
pub fn monge_ampere(f: &ConcaveFn) -> Measure1D {
    let formulas = f.formulas();
    let breaks = f.breakpoints();
    let mut atoms = Vec::new();
    for (j, t) in breaks.iter().enumerate() {
        let (l, r) = (formulas[j].derivative(), formulas[j + 1].derivative());
        match (l.eval_exact(t), r.eval_exact(t)) {
            (Some(a), Some(b)) => {
                let m = a - b;
                if !m.is_zero() {
                    atoms.push(Atom { location: t.clone(), mass: to_f64(&m), exact_mass: Some(m) });
                }
            }
            _ => {
                let x = to_f64(t);
                let m = l.eval(x) - r.eval(x);
                if m.abs() > ATOM_FLOOR {
                    atoms.push(Atom { location: t.clone(), mass: m, exact_mass: None });
                }
            }
        }
    }
    let mut densities = Vec::new();
    for (j, fm) in formulas.iter().enumerate() {
        let density = fm.derivative().derivative().neg();
        if density.is_zero() {
            continue;
        }
        let from = if j == 0 { None } else { Some(breaks[j - 1].clone()) };
        densities.push(DensityPiece { from, to: breaks.get(j).cloned(), density });
    }
    debug_assert!(atoms.iter().all(|a| a.exact_mass.as_ref().is_none_or(|m| m.is_positive())));
    Measure1D { atoms, densities }
}
