use std::sync::Arc;

use adelic_heights::divisorial::{
    extend_intersection, Cell, CompletionElement, Constraint, DivisorialSpace, IntersectionMap, RationalVector,
    SemilinearCone,
};
use adelic_heights::rational::{qi, qr, Q};
use num_traits::{Signed, Zero};
use proptest::prelude::*;

fn v(c: &[i64]) -> RationalVector {
    RationalVector::from_ints(c)
}

/// Order cone `(ℚ>0 × ℚ) ∪ ({0} × ℚ≥0)`.
fn half_open() -> DivisorialSpace {
    let order = SemilinearCone::new(
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
    .unwrap();
    DivisorialSpace::new(2, order, SemilinearCone::nonnegative_orthant(2)).unwrap()
}

fn rational() -> impl Strategy<Value = Q> {
    (-24i64..=24, 1i64..=6).prop_map(|(n, d)| qr(n, d))
}

fn vector(dim: usize) -> impl Strategy<Value = RationalVector> {
    proptest::collection::vec(rational(), dim).prop_map(RationalVector::new)
}

fn nonneg_vector(dim: usize) -> impl Strategy<Value = RationalVector> {
    proptest::collection::vec((0i64..=12, 1i64..=4).prop_map(|(n, d)| qr(n, d)), dim).prop_map(RationalVector::new)
}

fn spaces() -> Vec<(DivisorialSpace, RationalVector)> {
    vec![(DivisorialSpace::standard(2), v(&[1, 1])), (half_open(), v(&[1, 0])), (half_open(), v(&[2, 1]))]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn d_b_is_a_pseudo_metric(x in vector(2), y in vector(2), z in vector(2)) {
        for (space, b) in spaces() {
            let dxy = space.d_b(&b, &x, &y).unwrap();
            prop_assert_eq!(space.d_b(&b, &x, &x).unwrap(), Q::zero());
            prop_assert_eq!(&dxy, &space.d_b(&b, &y, &x).unwrap());
            let dyz = space.d_b(&b, &y, &z).unwrap();
            let dxz = space.d_b(&b, &x, &z).unwrap();
            prop_assert!(dxz <= &dxy + &dyz, "{} > {} + {}", dxz, dxy, dyz);
            prop_assert!(!dxy.is_negative() && dxy <= qi(1));
        }
    }

    #[test]
    fn neighbourhoods_nest(x in vector(2), y in vector(2), dn in 1i64..20, en in 1i64..=20) {
        let delta = qr(dn, 21);
        let eps = qr(dn + en, 41).max(&delta + qr(1, 100)).min(qi(1));
        for (space, b) in spaces() {
            let d = space.d_b(&b, &x, &y).unwrap();
            let diff = &x - &y;
            let inside = space.leq(&b.scale(&-eps.clone()), &diff).unwrap() && space.leq(&diff, &b.scale(&eps)).unwrap();
            if d <= delta {
                prop_assert!(inside, "d = {} <= {} but not within {}b", d, delta, eps);
            }
            if inside {
                prop_assert!(d <= eps);
            }
        }
    }

    #[test]
    fn closure_matches_the_vanishing_witness_criterion(
        gens in proptest::collection::vec(nonneg_vector(2), 2..4),
        twist in -3i64..=3,
        x in vector(2),
    ) {
        // shear the generators so some cones leave the orthant
        let gens: Vec<RationalVector> = gens
            .iter()
            .map(|g| RationalVector::new(vec![g.coords()[0].clone() + qi(twist) * &g.coords()[1], g.coords()[1].clone()]))
            .collect();
        let Ok(cone) = SemilinearCone::open_from_generators(2, &gens) else { return Ok(()) };
        let mut candidates = gens.clone();
        candidates.push(gens.iter().skip(1).fold(gens[0].clone(), |a, g| &a + g));
        let scales: Vec<i64> = (0..=6).map(|k| 10i64.pow(k)).collect();
        let witnessed = candidates.iter().any(|y| {
            scales.iter().all(|&n| cone.contains(&(&x + &y.scale(&qr(1, n)))).unwrap())
        });
        prop_assert_eq!(cone.closure_contains(&x).unwrap(), witnessed);
    }
}

fn standard_space() -> Arc<DivisorialSpace> {
    Arc::new(DivisorialSpace::standard(2))
}

/// `x + r/n` with an exact modulus for `b = (1, 1)`.
fn sequence(x: RationalVector, r: RationalVector) -> CompletionElement {
    let size = r.coords().iter().map(|c| c.abs()).fold(Q::zero(), |a, c| a.max(c));
    CompletionElement::new(
        standard_space(),
        v(&[1, 1]),
        move |n| &x + &r.scale(&qr(1, n as i64)),
        move |eps| (&size / eps).ceil().to_integer().try_into().unwrap_or(u64::MAX - 1) + 1,
    )
    .unwrap()
}

fn cross_form() -> IntersectionMap {
    IntersectionMap::new(2, 2, vec![qi(1), qi(2), qi(2), qi(3)]).unwrap()
}

fn exact(h: &IntersectionMap, x: &RationalVector, y: &RationalVector) -> Q {
    h.eval(&[x, y]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn extension_is_symmetric_and_multilinear(
        x in nonneg_vector(2), rx in nonneg_vector(2),
        y in nonneg_vector(2), ry in nonneg_vector(2),
        z in nonneg_vector(2), rz in nonneg_vector(2),
        e in 2i64..6,
    ) {
        let h = cross_form();
        let eps = qr(1, 10i64.pow(e as u32));
        let bt = v(&[1, 1]);
        let a = sequence(x.clone(), rx);
        let b = sequence(y.clone(), ry);
        let c = sequence(z.clone(), rz);
        let ext = |p: &CompletionElement, q: &CompletionElement| {
            extend_intersection(&h, &[p.clone(), q.clone()], &bt, &eps).unwrap().value
        };
        let two_eps = &eps * qi(2);
        let ab = ext(&a, &b);
        prop_assert!((&ab - exact(&h, &x, &y)).abs() <= eps);
        prop_assert!((&ab - ext(&b, &a)).abs() <= two_eps);
        let sum = ext(&a.add(&c).unwrap(), &b);
        prop_assert!((&sum - &ab - ext(&c, &b)).abs() <= two_eps);
        let scaled = ext(&a.scale(&qi(3)).unwrap(), &b);
        prop_assert!((&scaled - &ab * qi(3)).abs() <= two_eps);
        // sequences inside N give values >= −ε
        prop_assert!(ab >= -eps.clone());
    }
}

#[test]
fn one_argument_extension_is_the_limit() {
    let h = IntersectionMap::new(2, 1, vec![qi(2), qi(-1)]).unwrap();
    let a = sequence(v(&[1, 1]), v(&[3, 0]));
    let eps = qr(1, 1000);
    let got = extend_intersection(&h, &[a], &v(&[1, 1]), &eps).unwrap();
    assert!((got.value - qi(1)).abs() <= eps);
}

#[test]
fn non_pointed_order_is_rejected() {
    let plane = SemilinearCone::new(2, vec![Cell::new(vec![Constraint::ge(vec![qi(1), qi(0)])])]).unwrap();
    assert!(DivisorialSpace::new(2, plane, SemilinearCone::nonnegative_orthant(2)).is_err());
}
