use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::cone::{Cell, RationalVector, SemilinearCone};
use crate::error::{Error, Result};
use crate::rational::Q;

/// An ordered ℚ-vector space `M = ℚ^d` with a pointed order cone and a
/// spanning cone `N`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SpaceRepr", into = "SpaceRepr")]
pub struct DivisorialSpace {
    ambient_dim: usize,
    order_cone: SemilinearCone,
    positive_cone: SemilinearCone,
}

#[derive(Serialize, Deserialize)]
struct SpaceRepr {
    ambient_dim: usize,
    order_cone: SemilinearCone,
    positive_cone: SemilinearCone,
}

impl TryFrom<SpaceRepr> for DivisorialSpace {
    type Error = Error;
    fn try_from(r: SpaceRepr) -> Result<Self> {
        DivisorialSpace::new(r.ambient_dim, r.order_cone, r.positive_cone)
    }
}

impl From<DivisorialSpace> for SpaceRepr {
    fn from(s: DivisorialSpace) -> Self {
        SpaceRepr { ambient_dim: s.ambient_dim, order_cone: s.order_cone, positive_cone: s.positive_cone }
    }
}

/// Closed or open end of a δ-interval.
#[derive(Clone, Debug)]
struct End {
    value: Q,
    open: bool,
}

impl DivisorialSpace {
    pub fn new(ambient_dim: usize, order_cone: SemilinearCone, positive_cone: SemilinearCone) -> Result<Self> {
        for c in [&order_cone, &positive_cone] {
            if c.ambient_dim != ambient_dim {
                return Err(Error::DimensionMismatch { expected: ambient_dim, found: c.ambient_dim });
            }
            if let Some((x, y)) = c.additivity_counterexample() {
                return Err(Error::InvalidCone(format!("not closed under addition: {x} + {y}")));
            }
        }
        if !order_cone.is_pointed() {
            return Err(Error::InvalidSpace("order cone is not pointed".into()));
        }
        if !positive_cone.spans_ambient() {
            return Err(Error::InvalidSpace("N - N is not the whole space".into()));
        }
        Ok(DivisorialSpace { ambient_dim, order_cone, positive_cone })
    }

    /// `(ℚ^d, ℚ^d_{>=0})` with the componentwise order.
    pub fn standard(dim: usize) -> Self {
        let c = SemilinearCone::nonnegative_orthant(dim);
        DivisorialSpace { ambient_dim: dim, order_cone: c.clone(), positive_cone: c }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn order_cone(&self) -> &SemilinearCone {
        &self.order_cone
    }

    pub fn positive_cone(&self) -> &SemilinearCone {
        &self.positive_cone
    }

    /// `x <= y`, i.e. `y − x` lies in the order cone.
    pub fn leq(&self, x: &RationalVector, y: &RationalVector) -> Result<bool> {
        x.check_dim(self.ambient_dim)?;
        y.check_dim(self.ambient_dim)?;
        self.order_cone.contains(&(y - x))
    }

    pub fn is_nonnegative(&self, x: &RationalVector) -> Result<bool> {
        self.order_cone.contains(x)
    }

    pub fn in_positive_cone(&self, x: &RationalVector) -> Result<bool> {
        self.positive_cone.contains(x)
    }

    pub fn cone_contains(&self, x: &RationalVector) -> Result<bool> {
        self.positive_cone.contains(x)
    }

    /// Membership in the Euclidean closure of `N`.
    pub fn cone_closure_contains(&self, x: &RationalVector) -> Result<bool> {
        self.positive_cone.closure_contains(x)
    }

    /// The b-pseudo-distance `min(inf{δ >= 0 : −δb <= x − y <= δb}, 1)`.
    ///
    /// Every constraint of a cell is affine in δ, so the feasible δ for one
    /// pair of cells is an interval; the infimum over the union of those
    /// intervals is exact.
    pub fn d_b(&self, b: &RationalVector, x: &RationalVector, y: &RationalVector) -> Result<Q> {
        for v in [b, x, y] {
            v.check_dim(self.ambient_dim)?;
        }
        if !self.order_cone.contains(b)? {
            return Err(Error::BoundaryNotNonnegative);
        }
        let d = x - y;
        let mut best: Option<Q> = None;
        for upper in self.order_cone.cell_list() {
            for lower in self.order_cone.cell_list() {
                // δb − d ∈ upper, δb + d ∈ lower
                if let Some(lo) = delta_interval_inf(upper, lower, b, &d) {
                    if best.as_ref().is_none_or(|cur| lo < *cur) {
                        best = Some(lo);
                    }
                }
            }
        }
        let one = Q::one();
        Ok(match best {
            Some(v) if v < one => v,
            _ => one,
        })
    }
}

/// Infimum of `{δ >= 0 : δb − d ∈ upper, δb + d ∈ lower}`, or `None` if empty.
fn delta_interval_inf(upper: &Cell, lower: &Cell, b: &RationalVector, d: &RationalVector) -> Option<Q> {
    let mut lo = End { value: Q::zero(), open: false };
    let mut hi: Option<End> = None;
    // Each constraint reads  δ·s + t (>|>=) 0.
    let rows = upper
        .constraints
        .iter()
        .map(|c| (b.dot(&c.row), -d.dot(&c.row), c.strict))
        .chain(lower.constraints.iter().map(|c| (b.dot(&c.row), d.dot(&c.row), c.strict)));
    for (s, t, strict) in rows {
        if s.is_zero() {
            let ok = if strict { t.is_positive() } else { !t.is_negative() };
            if !ok {
                return None;
            }
        } else if s.is_positive() {
            let bound = -t / s;
            if bound > lo.value || (bound == lo.value && strict) {
                lo = End { value: bound, open: strict };
            }
        } else {
            let bound = -t / s;
            let tighter = match &hi {
                None => true,
                Some(h) => bound < h.value || (bound == h.value && strict),
            };
            if tighter {
                hi = Some(End { value: bound, open: strict });
            }
        }
    }
    match hi {
        None => Some(lo.value),
        Some(h) => {
            if lo.value < h.value || (lo.value == h.value && !lo.open && !h.open) {
                Some(lo.value)
            } else {
                None
            }
        }
    }
}
