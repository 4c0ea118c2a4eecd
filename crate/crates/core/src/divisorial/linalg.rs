//! Exact Gaussian elimination and Fourier–Motzkin elimination over ℚ.

use num_traits::{Signed, Zero};
use std::collections::BTreeSet;

use crate::rational::Q;

/// Reduced row echelon form; returns the pivot columns.
pub(crate) fn rref(rows: &mut Vec<Vec<Q>>, ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for v in rows[r].iter_mut() {
            *v *= &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                let pivot = rows[r].clone();
                for (x, p) in rows[i].iter_mut().zip(&pivot) {
                    *x -= &f * p;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    pivots
}

pub(crate) fn rank(rows: &[Vec<Q>], ncols: usize) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m, ncols).len()
}

/// Basis of `{x : row·x = 0 for every row}`.
pub(crate) fn nullspace(rows: &[Vec<Q>], ncols: usize) -> Vec<Vec<Q>> {
    let mut m = rows.to_vec();
    let pivots = rref(&mut m, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Q::zero(); ncols];
            v[f] = Q::from_integer(1.into());
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -m[r][f].clone();
            }
            v
        })
        .collect()
}

/// Scales a nonzero vector so that its first nonzero entry is ±1.
pub(crate) fn normalize_direction(v: &[Q]) -> Vec<Q> {
    match v.iter().find(|x| !x.is_zero()) {
        Some(lead) => {
            let s = lead.abs();
            v.iter().map(|x| x / &s).collect()
        }
        None => v.to_vec(),
    }
}

/// Affine inequality `coeffs·x + constant > 0` (strict) or `>= 0`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct Ineq {
    pub coeffs: Vec<Q>,
    pub constant: Q,
    pub strict: bool,
}

impl Ineq {
    fn normalized(self) -> Ineq {
        let scale = self
            .coeffs
            .iter()
            .find(|x| !x.is_zero())
            .map(|x| x.abs())
            .or_else(|| (!self.constant.is_zero()).then(|| self.constant.abs()));
        match scale {
            Some(s) => Ineq {
                coeffs: self.coeffs.iter().map(|x| x / &s).collect(),
                constant: &self.constant / &s,
                strict: self.strict,
            },
            None => self,
        }
    }

    fn is_trivial(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    fn holds_trivially(&self) -> bool {
        if self.strict {
            self.constant.is_positive()
        } else {
            !self.constant.is_negative()
        }
    }
}

/// Decides feasibility of a mixed strict/non-strict affine system exactly.
pub(crate) fn fm_feasible(nvars: usize, system: Vec<Ineq>) -> bool {
    let mut current: BTreeSet<Ineq> = BTreeSet::new();
    for ineq in system {
        if ineq.is_trivial() {
            if !ineq.holds_trivially() {
                return false;
            }
        } else {
            current.insert(ineq.normalized());
        }
    }
    for var in (0..nvars).rev() {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        let mut next = BTreeSet::new();
        for ineq in current {
            let c = &ineq.coeffs[var];
            if c.is_positive() {
                pos.push(ineq);
            } else if c.is_negative() {
                neg.push(ineq);
            } else {
                next.insert(ineq);
            }
        }
        for p in &pos {
            for n in &neg {
                let a = p.coeffs[var].clone();
                let b = -n.coeffs[var].clone();
                let coeffs: Vec<Q> = p
                    .coeffs
                    .iter()
                    .zip(&n.coeffs)
                    .map(|(x, y)| x * &b + y * &a)
                    .collect();
                let combined = Ineq {
                    coeffs,
                    constant: &p.constant * &b + &n.constant * &a,
                    strict: p.strict || n.strict,
                };
                if combined.is_trivial() {
                    if !combined.holds_trivially() {
                        return false;
                    }
                } else {
                    next.insert(combined.normalized());
                }
            }
        }
        current = next;
    }
    current.iter().all(Ineq::holds_trivially)
}
