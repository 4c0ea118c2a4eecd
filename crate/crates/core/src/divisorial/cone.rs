use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::linalg::{self, fm_feasible, Ineq};
use crate::error::{Error, Result};
use crate::rational::{format_rational, qi, serde_q_vec, Q};

/// A vector of exact rationals.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RationalVector(#[serde(with = "serde_q_vec")] pub Vec<Q>);

impl RationalVector {
    pub fn new(coords: Vec<Q>) -> Self {
        RationalVector(coords)
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        RationalVector(coords.iter().map(|&c| qi(c)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        RationalVector(vec![Q::zero(); dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Q] {
        &self.0
    }

    pub fn dot(&self, row: &[Q]) -> Q {
        self.0.iter().zip(row).map(|(a, b)| a * b).sum()
    }

    pub fn scale(&self, r: &Q) -> Self {
        RationalVector(self.0.iter().map(|x| x * r).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() == dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: dim, found: self.dim() })
        }
    }
}

impl Add for &RationalVector {
    type Output = RationalVector;
    fn add(self, rhs: &RationalVector) -> RationalVector {
        RationalVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &RationalVector {
    type Output = RationalVector;
    fn sub(self, rhs: &RationalVector) -> RationalVector {
        RationalVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &RationalVector {
    type Output = RationalVector;
    fn neg(self) -> RationalVector {
        RationalVector(self.0.iter().map(|a| -a).collect())
    }
}

impl fmt::Display for RationalVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(format_rational).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Homogeneous constraint `row·x > 0` (strict) or `row·x >= 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    #[serde(with = "serde_q_vec")]
    pub row: Vec<Q>,
    #[serde(default)]
    pub strict: bool,
}

impl Constraint {
    pub fn ge(row: Vec<Q>) -> Self {
        Constraint { row, strict: false }
    }

    pub fn gt(row: Vec<Q>) -> Self {
        Constraint { row, strict: true }
    }

    pub fn holds(&self, x: &RationalVector) -> bool {
        let v = x.dot(&self.row);
        if self.strict {
            v.is_positive()
        } else {
            !v.is_negative()
        }
    }
}

/// One convex piece of a semilinear cone.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Cell {
    pub constraints: Vec<Constraint>,
}

impl Cell {
    pub fn new(constraints: Vec<Constraint>) -> Self {
        Cell { constraints }
    }

    pub fn contains(&self, x: &RationalVector) -> bool {
        self.constraints.iter().all(|c| c.holds(x))
    }

    fn relaxed(&self) -> Cell {
        Cell {
            constraints: self
                .constraints
                .iter()
                .map(|c| Constraint::ge(c.row.clone()))
                .collect(),
        }
    }

    /// Constraints of `x ∈ cell` as FM inequalities, optionally after the
    /// substitution `x ↦ sign·x + shift`.
    fn ineqs(&self, sign: &Q, shift: Option<&RationalVector>) -> Vec<Ineq> {
        self.constraints
            .iter()
            .map(|c| Ineq {
                coeffs: c.row.iter().map(|a| a * sign).collect(),
                constant: shift.map(|s| s.dot(&c.row)).unwrap_or_else(Q::zero),
                strict: c.strict,
            })
            .collect()
    }

    pub fn is_nonempty(&self, dim: usize) -> bool {
        fm_feasible(dim, self.ineqs(&qi(1), None))
    }
}

/// Finite union of homogeneous cells in ℚ^d.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ConeRepr")]
pub struct SemilinearCone {
    pub ambient_dim: usize,
    pub cells: Vec<Cell>,
}

#[derive(Deserialize)]
struct ConeRepr {
    ambient_dim: usize,
    cells: Vec<Cell>,
}

impl TryFrom<ConeRepr> for SemilinearCone {
    type Error = Error;
    fn try_from(r: ConeRepr) -> Result<Self> {
        SemilinearCone::new(r.ambient_dim, r.cells)
    }
}

impl SemilinearCone {
    /// Builds the union without checking closure under addition.
    pub fn new(ambient_dim: usize, cells: Vec<Cell>) -> Result<Self> {
        if ambient_dim == 0 {
            return Err(Error::InvalidCone("ambient dimension must be positive".into()));
        }
        for cell in &cells {
            for c in &cell.constraints {
                if c.row.len() != ambient_dim {
                    return Err(Error::DimensionMismatch { expected: ambient_dim, found: c.row.len() });
                }
            }
        }
        Ok(SemilinearCone { ambient_dim, cells })
    }

    /// Builds the union and rejects it if the additivity check finds two
    /// members whose sum leaves the set.
    pub fn new_cone(ambient_dim: usize, cells: Vec<Cell>) -> Result<Self> {
        let c = Self::new(ambient_dim, cells)?;
        if let Some((x, y)) = c.additivity_counterexample() {
            return Err(Error::InvalidCone(format!("not closed under addition: {x} + {y}")));
        }
        Ok(c)
    }

    pub fn nonnegative_orthant(dim: usize) -> Self {
        let cell = Cell::new((0..dim).map(|i| Constraint::ge(unit(dim, i))).collect());
        SemilinearCone { ambient_dim: dim, cells: vec![cell] }
    }

    /// `ℚ^d_{>0} ∪ {0}`.
    pub fn open_orthant_with_origin(dim: usize) -> Self {
        let open = Cell::new((0..dim).map(|i| Constraint::gt(unit(dim, i))).collect());
        SemilinearCone { ambient_dim: dim, cells: vec![open, origin_cell(dim)] }
    }

    /// Closed cone generated by finitely many vectors, via facet enumeration.
    pub fn from_generators(dim: usize, generators: &[RationalVector]) -> Result<Self> {
        let cell = Self::generated_cell(dim, generators, false)?;
        Ok(SemilinearCone { ambient_dim: dim, cells: vec![cell] })
    }

    /// Relative interior of the generated cone together with the origin.
    pub fn open_from_generators(dim: usize, generators: &[RationalVector]) -> Result<Self> {
        let cell = Self::generated_cell(dim, generators, true)?;
        Ok(SemilinearCone { ambient_dim: dim, cells: vec![cell, origin_cell(dim)] })
    }

    fn generated_cell(dim: usize, generators: &[RationalVector], strict: bool) -> Result<Cell> {
        for g in generators {
            g.check_dim(dim)?;
        }
        let gens: Vec<Vec<Q>> = generators.iter().filter(|g| !g.is_zero()).map(|g| g.0.clone()).collect();
        let r = linalg::rank(&gens, dim);
        let complement = linalg::nullspace(&gens, dim);
        let mut constraints = Vec::new();
        for w in &complement {
            constraints.push(Constraint::ge(w.clone()));
            constraints.push(Constraint::ge(w.iter().map(|x| -x).collect()));
        }
        if r == 0 {
            return Ok(Cell::new(constraints));
        }
        let mut normals: Vec<Vec<Q>> = Vec::new();
        for subset in combinations(gens.len(), r - 1) {
            let mut rows: Vec<Vec<Q>> = subset.iter().map(|&i| gens[i].clone()).collect();
            if linalg::rank(&rows, dim) != r - 1 {
                continue;
            }
            rows.extend(complement.iter().cloned());
            let ns = linalg::nullspace(&rows, dim);
            if ns.len() != 1 {
                continue;
            }
            let a = &ns[0];
            let signs: Vec<Q> = gens.iter().map(|g| g.iter().zip(a).map(|(x, y)| x * y).sum()).collect();
            let oriented = if signs.iter().all(|s| !s.is_negative()) {
                a.clone()
            } else if signs.iter().all(|s| !s.is_positive()) {
                a.iter().map(|x| -x).collect()
            } else {
                continue;
            };
            let n = linalg::normalize_direction(&oriented);
            if !normals.contains(&n) {
                normals.push(n);
            }
        }
        for n in normals {
            constraints.push(Constraint { row: n, strict });
        }
        Ok(Cell::new(constraints))
    }

    pub fn contains(&self, x: &RationalVector) -> Result<bool> {
        x.check_dim(self.ambient_dim)?;
        Ok(self.cells.iter().any(|c| c.contains(x)))
    }

    /// Euclidean closure: every nonempty cell with strict constraints relaxed.
    pub fn closure(&self) -> SemilinearCone {
        SemilinearCone {
            ambient_dim: self.ambient_dim,
            cells: self
                .cells
                .iter()
                .filter(|c| c.is_nonempty(self.ambient_dim))
                .map(Cell::relaxed)
                .collect(),
        }
    }

    pub fn closure_contains(&self, x: &RationalVector) -> Result<bool> {
        x.check_dim(self.ambient_dim)?;
        Ok(self
            .cells
            .iter()
            .any(|c| c.relaxed().contains(x) && c.is_nonempty(self.ambient_dim)))
    }

    /// Exact test of `C ∩ −C = {0}`.
    pub fn is_pointed(&self) -> bool {
        let d = self.ambient_dim;
        let one = qi(1);
        let minus = qi(-1);
        for ci in &self.cells {
            for cj in &self.cells {
                for k in 0..d {
                    // x ∈ ci, −x ∈ cj, x_k > 0
                    let mut sys = ci.ineqs(&one, None);
                    sys.extend(cj.ineqs(&minus, None));
                    sys.push(Ineq { coeffs: unit(d, k), constant: Q::zero(), strict: true });
                    if fm_feasible(d, sys) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Exact test of whether `C − C` is the whole ambient space.
    pub fn spans_ambient(&self) -> bool {
        let d = self.ambient_dim;
        let one = qi(1);
        (0..d).all(|k| {
            let shift = RationalVector(unit(d, k).into_iter().map(|x| -x).collect());
            self.cells.iter().any(|ci| {
                self.cells.iter().any(|cj| {
                    // x ∈ ci and x − e_k ∈ cj
                    let mut sys = ci.ineqs(&one, None);
                    sys.extend(cj.ineqs(&one, Some(&shift)));
                    fm_feasible(d, sys)
                })
            })
        })
    }

    /// Closure under addition, checked on integer points of a small box.
    ///
    /// This is a sampling check: a `None` result is evidence, not proof.
    pub fn additivity_counterexample(&self) -> Option<(RationalVector, RationalVector)> {
        let d = self.ambient_dim;
        let radius: i64 = if d <= 3 { 3 } else { 2 };
        let mut members = Vec::new();
        let side = (2 * radius + 1) as usize;
        let total = side.checked_pow(d as u32).unwrap_or(usize::MAX).min(20_000);
        for idx in 0..total {
            let mut rem = idx;
            let coords: Vec<i64> = (0..d)
                .map(|_| {
                    let c = (rem % side) as i64 - radius;
                    rem /= side;
                    c
                })
                .collect();
            let v = RationalVector::from_ints(&coords);
            if self.cells.iter().any(|c| c.contains(&v)) {
                members.push(v);
            }
        }
        if members.len() > 300 {
            let step = members.len() / 300 + 1;
            members = members.into_iter().step_by(step).collect();
        }
        for x in &members {
            for y in &members {
                let s = x + y;
                if !self.cells.iter().any(|c| c.contains(&s)) {
                    return Some((x.clone(), y.clone()));
                }
            }
        }
        None
    }

    pub(crate) fn cell_list(&self) -> &[Cell] {
        &self.cells
    }
}

pub(crate) fn unit(dim: usize, i: usize) -> Vec<Q> {
    (0..dim).map(|j| if i == j { qi(1) } else { Q::zero() }).collect()
}

fn origin_cell(dim: usize) -> Cell {
    let mut cs = Vec::new();
    for i in 0..dim {
        cs.push(Constraint::ge(unit(dim, i)));
        cs.push(Constraint::ge(unit(dim, i).into_iter().map(|x| -x).collect()));
    }
    Cell::new(cs)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[i64]) -> RationalVector {
        RationalVector::from_ints(c)
    }

    /// `(ℚ_{>0} × ℚ) ∪ ({0} × ℚ_{>=0})`
    pub(crate) fn half_open() -> SemilinearCone {
        SemilinearCone::new_cone(
            2,
            vec![
                Cell::new(vec![Constraint::gt(vec![qi(1), qi(0)])]),
                Cell::new(vec![
                    Constraint::ge(vec![qi(1), qi(0)]),
                    Constraint::ge(vec![qi(-1), qi(0)]),
                    Constraint::ge(vec![qi(0), qi(1)]),
                ]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn zero_in_orthant() {
        let c = SemilinearCone::nonnegative_orthant(2);
        assert!(c.contains(&v(&[0, 0])).unwrap());
    }

    #[test]
    fn half_open_membership() {
        let c = half_open();
        assert!(c.contains(&v(&[0, 1])).unwrap());
        assert!(!c.contains(&v(&[0, -1])).unwrap());
        assert!(c.contains(&v(&[1, -5])).unwrap());
        assert!(c.is_pointed());
    }

    #[test]
    fn generated_cone_membership() {
        let c = SemilinearCone::from_generators(2, &[v(&[1, 2]), v(&[2, 1])]).unwrap();
        assert!(c.contains(&v(&[1, 1])).unwrap());
        assert!(c.contains(&v(&[1, 2])).unwrap());
        assert!(!c.contains(&v(&[1, 3])).unwrap());
        assert!(!c.contains(&v(&[-1, -1])).unwrap());
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let c = SemilinearCone::nonnegative_orthant(2);
        assert!(matches!(c.contains(&v(&[1, 2, 3])), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn closure_of_open_generated_cone() {
        let c = SemilinearCone::open_from_generators(2, &[v(&[1, 2]), v(&[2, 1])]).unwrap();
        assert!(!c.contains(&v(&[1, 2])).unwrap());
        assert!(c.closure_contains(&v(&[1, 2])).unwrap());
        assert!(!c.closure_contains(&v(&[1, 3])).unwrap());
        let o = SemilinearCone::open_orthant_with_origin(2);
        assert!(o.closure_contains(&v(&[1, 0])).unwrap());
    }

    #[test]
    fn empty_strict_cell_has_empty_closure() {
        let c = SemilinearCone::new(
            1,
            vec![Cell::new(vec![Constraint::gt(vec![qi(1)]), Constraint::gt(vec![qi(-1)])])],
        )
        .unwrap();
        assert!(!c.closure_contains(&v(&[0])).unwrap());
    }

    #[test]
    fn pointedness_is_exact() {
        assert!(SemilinearCone::nonnegative_orthant(3).is_pointed());
        let halfplane = SemilinearCone::from_generators(2, &[v(&[1, 0]), v(&[-1, 0]), v(&[0, 1])]).unwrap();
        assert!(!halfplane.is_pointed());
        assert!(halfplane.contains(&v(&[-7, 0])).unwrap());
        assert!(!halfplane.contains(&v(&[0, -1])).unwrap());
    }

    #[test]
    fn lower_dimensional_generators() {
        let ray = SemilinearCone::from_generators(3, &[v(&[1, 1, 0])]).unwrap();
        assert!(ray.contains(&v(&[2, 2, 0])).unwrap());
        assert!(!ray.contains(&v(&[2, 1, 0])).unwrap());
        assert!(!ray.contains(&v(&[-1, -1, 0])).unwrap());
        assert!(!ray.spans_ambient());
        assert!(SemilinearCone::nonnegative_orthant(3).spans_ambient());
    }

    #[test]
    fn non_additive_union_is_rejected() {
        // Two opposite-quadrant rays do not form a cone.
        let r = SemilinearCone::new_cone(
            2,
            vec![
                Cell::new(vec![Constraint::ge(vec![qi(1), qi(0)]), Constraint::ge(vec![qi(0), qi(1)])]),
                Cell::new(vec![Constraint::ge(vec![qi(-1), qi(0)]), Constraint::ge(vec![qi(0), qi(-1)])]),
            ],
        );
        assert!(r.is_err());
    }
}
