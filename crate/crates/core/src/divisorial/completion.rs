use std::fmt;
use std::sync::Arc;

use num_traits::Signed;

use super::cone::RationalVector;
use super::space::DivisorialSpace;
use crate::error::{Error, Result};
use crate::rational::{qi, Q};

type SequenceFn = dyn Fn(u64) -> RationalVector + Send + Sync;
type ModulusFn = dyn Fn(&Q) -> u64 + Send + Sync;

/// A point of the b-completion, represented by a Cauchy sequence together
/// with an explicit convergence modulus.
///
/// `modulus(ε)` must return an index `N` with `d_b(x_m, x_n) <= ε` for all
/// `m, n >= N`. Equality of completion points is not decidable; compare
/// them with [`completion_distance`].
#[derive(Clone)]
pub struct CompletionElement {
    space: Arc<DivisorialSpace>,
    b: RationalVector,
    sequence: Arc<SequenceFn>,
    modulus: Arc<ModulusFn>,
}

impl fmt::Debug for CompletionElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CompletionElement")
            .field("b", &self.b)
            .field("x_1", &(self.sequence)(1))
            .finish_non_exhaustive()
    }
}

impl CompletionElement {
    pub fn new<S, M>(space: Arc<DivisorialSpace>, b: RationalVector, sequence: S, modulus: M) -> Result<Self>
    where
        S: Fn(u64) -> RationalVector + Send + Sync + 'static,
        M: Fn(&Q) -> u64 + Send + Sync + 'static,
    {
        b.check_dim(space.ambient_dim())?;
        if !space.is_nonnegative(&b)? {
            return Err(Error::BoundaryNotNonnegative);
        }
        (sequence)(1).check_dim(space.ambient_dim())?;
        Ok(CompletionElement { space, b, sequence: Arc::new(sequence), modulus: Arc::new(modulus) })
    }

    /// Image of `x` under the canonical map into the completion.
    pub fn constant(space: Arc<DivisorialSpace>, b: RationalVector, x: RationalVector) -> Result<Self> {
        x.check_dim(space.ambient_dim())?;
        Self::new(space, b, move |_| x.clone(), |_| 1)
    }

    pub fn space(&self) -> &Arc<DivisorialSpace> {
        &self.space
    }

    pub fn b(&self) -> &RationalVector {
        &self.b
    }

    pub fn term(&self, n: u64) -> RationalVector {
        (self.sequence)(n.max(1))
    }

    pub fn modulus(&self, eps: &Q) -> u64 {
        (self.modulus)(eps).max(1)
    }

    fn compatible(&self, other: &CompletionElement) -> Result<()> {
        if !Arc::ptr_eq(&self.space, &other.space) && *self.space != *other.space {
            return Err(Error::MismatchedCompletion("different base spaces".into()));
        }
        if self.b != other.b {
            return Err(Error::MismatchedCompletion(format!("b = {} vs {}", self.b, other.b)));
        }
        Ok(())
    }

    /// Termwise sum; the modulus splits ε between the summands.
    pub fn add(&self, other: &CompletionElement) -> Result<CompletionElement> {
        self.compatible(other)?;
        let (s1, s2) = (self.sequence.clone(), other.sequence.clone());
        let (m1, m2) = (self.modulus.clone(), other.modulus.clone());
        Ok(CompletionElement {
            space: self.space.clone(),
            b: self.b.clone(),
            sequence: Arc::new(move |n| &s1(n) + &s2(n)),
            modulus: Arc::new(move |eps| {
                let half = eps / qi(2);
                m1(&half).max(m2(&half))
            }),
        })
    }

    /// Termwise multiple by a positive rational.
    pub fn scale(&self, r: &Q) -> Result<CompletionElement> {
        if !r.is_positive() {
            return Err(Error::Precondition("scaling factor must be positive".into()));
        }
        let s = self.sequence.clone();
        let m = self.modulus.clone();
        let r1 = r.clone();
        let r2 = r.clone();
        Ok(CompletionElement {
            space: self.space.clone(),
            b: self.b.clone(),
            sequence: Arc::new(move |n| s(n).scale(&r1)),
            modulus: Arc::new(move |eps| {
                // d_b(rx, ry) = r·d_b(x, y) below the cap
                let inner = (eps / &r2).min(eps.clone());
                m(&inner)
            }),
        })
    }

    /// Spot-checks the modulus on a few tolerances and index pairs.
    pub fn spot_check(&self, tolerances: &[Q], depth: u64) -> Result<()> {
        for eps in tolerances {
            let n0 = self.modulus(eps);
            let idx = [n0, n0 + 1, n0 + depth / 2 + 1, n0 + depth];
            for &m in &idx {
                for &n in &idx {
                    let d = self.space.d_b(&self.b, &self.term(m), &self.term(n))?;
                    if d > *eps {
                        return Err(Error::Precondition(format!(
                            "modulus violated at eps={eps}: d(x_{m}, x_{n}) = {d}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// `d_b(a_N, b_N)` at `N = max(a.modulus(ε/3), b.modulus(ε/3))`; within ε of
/// the completion pseudo-distance.
pub fn completion_distance(a: &CompletionElement, b: &CompletionElement, eps: &Q) -> Result<Q> {
    a.compatible(b)?;
    if !eps.is_positive() {
        return Err(Error::Precondition("tolerance must be positive".into()));
    }
    let third = eps / qi(3);
    let n = a.modulus(&third).max(b.modulus(&third));
    a.space.d_b(&a.b, &a.term(n), &b.term(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qr;

    fn standard() -> Arc<DivisorialSpace> {
        Arc::new(DivisorialSpace::standard(2))
    }

    fn b() -> RationalVector {
        RationalVector::from_ints(&[1, 1])
    }

    /// `(1/n, 0)` with modulus ⌈1/ε⌉.
    fn one_over_n(space: Arc<DivisorialSpace>) -> CompletionElement {
        CompletionElement::new(
            space,
            b(),
            |n| RationalVector::new(vec![qr(1, n as i64), qi(0)]),
            ceil_recip,
        )
        .unwrap()
    }

    pub(crate) fn ceil_recip(eps: &Q) -> u64 {
        use num_traits::ToPrimitive;
        eps.recip().ceil().to_integer().to_u64().unwrap_or(u64::MAX)
    }

    #[test]
    fn same_sequence_has_distance_zero() {
        let s = standard();
        let a = one_over_n(s.clone());
        assert_eq!(completion_distance(&a, &a, &qr(1, 100)).unwrap(), qi(0));
    }

    #[test]
    fn constants_embed() {
        let s = standard();
        let x = CompletionElement::constant(s.clone(), b(), RationalVector::new(vec![qr(1, 2), qi(0)])).unwrap();
        let y = CompletionElement::constant(s.clone(), b(), RationalVector::from_ints(&[0, 0])).unwrap();
        let d = completion_distance(&x, &y, &qr(1, 10)).unwrap();
        assert_eq!(d, qr(1, 2));
    }

    #[test]
    fn null_sequence_is_close_to_zero() {
        let s = standard();
        let a = one_over_n(s.clone());
        let z = CompletionElement::constant(s, b(), RationalVector::from_ints(&[0, 0])).unwrap();
        let eps = qr(1, 1000);
        let d = completion_distance(&a, &z, &eps).unwrap();
        assert!(d <= eps, "{d}");
        a.spot_check(&[qr(1, 10), qr(1, 1000)], 50).unwrap();
    }

    #[test]
    fn mismatched_b_is_rejected() {
        let s = standard();
        let a = one_over_n(s.clone());
        let z = CompletionElement::constant(s, RationalVector::from_ints(&[2, 1]), RationalVector::from_ints(&[0, 0]))
            .unwrap();
        assert!(matches!(completion_distance(&a, &z, &qr(1, 10)), Err(Error::MismatchedCompletion(_))));
    }

    #[test]
    fn bad_modulus_is_caught_by_spot_check() {
        let s = standard();
        let lying = CompletionElement::new(s, b(), |n| RationalVector::new(vec![qr(1, n as i64), qi(0)]), |_| 1).unwrap();
        assert!(lying.spot_check(&[qr(1, 100)], 10).is_err());
    }

    #[test]
    fn sums_and_scalings() {
        let s = standard();
        let a = one_over_n(s.clone());
        let two_a = a.add(&a).unwrap();
        let also = a.scale(&qi(2)).unwrap();
        let eps = qr(1, 500);
        assert!(completion_distance(&two_a, &also, &eps).unwrap() <= eps);
        two_a.spot_check(&[qr(1, 10), qr(1, 100)], 20).unwrap();
    }
}
