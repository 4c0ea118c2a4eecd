use adelic_heights::convex::{
    cutoff, dual_sup_distance, integrate_against, legendre_dual, local_energy, min_concave, mixed_local_energy,
    monge_ampere, sup_distance, ConcaveFn, DEFAULT_TOL,
};
use adelic_heights::rational::{qi, qr, to_f64};
use proptest::prelude::*;

/// Lower envelope of lines whose extreme slopes are `hi` and `lo`.
fn envelope(hi: i64, lo: i64, inner: &[(i64, i64, i64)], c_hi: i64, c_lo: i64) -> ConcaveFn {
    let mut lines = vec![(qi(hi), qr(c_hi, 2)), (qi(lo), qr(c_lo, 2))];
    for &(k, d, c) in inner {
        // slope strictly between lo and hi
        let t = qr(k, d + k);
        lines.push((qi(lo) + (qi(hi) - qi(lo)) * t, qr(c, 3)));
    }
    ConcaveFn::lower_envelope(&lines).unwrap()
}

fn concave(hi: i64, lo: i64) -> impl Strategy<Value = ConcaveFn> {
    (proptest::collection::vec((1i64..8, 1i64..8, -30i64..30), 0..5), -10i64..10, -10i64..10)
        .prop_map(move |(inner, a, b)| envelope(hi, lo, &inner, a, b))
}

fn slopes() -> impl Strategy<Value = (i64, i64)> {
    (-3i64..3, 1i64..4).prop_map(|(lo, w)| (lo + w, lo))
}

fn pair() -> impl Strategy<Value = (ConcaveFn, ConcaveFn)> {
    slopes().prop_flat_map(|(h, l)| (concave(h, l), concave(h, l)))
}

fn triple() -> impl Strategy<Value = (ConcaveFn, ConcaveFn, ConcaveFn)> {
    slopes().prop_flat_map(|(h, l)| (concave(h, l), concave(h, l), concave(h, l)))
}

fn catalog() -> Vec<ConcaveFn> {
    let mut out = Vec::new();
    for a in [qr(1, 10), qr(1, 4), qr(2, 5), qr(1, 2), qr(3, 4)] {
        let f = ConcaveFn::with_alpha_singularity(&a).unwrap();
        out.push(f.add_constant(&qr(-1, 3)));
        let line = ConcaveFn::affine(qi(0), qi(2));
        out.push(min_concave(&f, &line).unwrap());
        out.push(f);
    }
    out
}

/// `inf_u (m·u − f(u))` by ternary search of a convex function.
fn dual_oracle(f: &ConcaveFn, m: f64) -> f64 {
    let g = |u: f64| m * u - f.eval(u);
    let (mut a, mut b) = (-1e7, 1e7);
    for _ in 0..400 {
        let x = a + (b - a) / 3.0;
        let y = b - (b - a) / 3.0;
        if g(x) <= g(y) {
            b = y;
        } else {
            a = x;
        }
    }
    g(0.5 * (a + b))
}

fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..=n).map(move |k| lo + (hi - lo) * k as f64 / n as f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn fenchel_inequality(f in slopes().prop_flat_map(|(h, l)| concave(h, l))) {
        let d = legendre_dual(&f).unwrap();
        for m in grid(to_f64(d.lo()), to_f64(d.hi()), 16) {
            for u in grid(-40.0, 40.0, 40) {
                prop_assert!(f.eval(u) + d.eval(m) <= m * u + 1e-9);
            }
        }
    }

    #[test]
    fn piecewise_affine_duals_match_the_oracle(f in slopes().prop_flat_map(|(h, l)| concave(h, l))) {
        let d = legendre_dual(&f).unwrap();
        let (lo, hi) = (to_f64(d.lo()), to_f64(d.hi()));
        for m in grid(lo, hi, 12).skip(1).take(11) {
            let want = dual_oracle(&f, m);
            prop_assert!((d.eval(m) - want).abs() < 1e-6, "m = {}: {} vs {}", m, d.eval(m), want);
        }
    }

    #[test]
    fn biduality_is_exact(f in slopes().prop_flat_map(|(h, l)| concave(h, l))) {
        prop_assert_eq!(legendre_dual(&f).unwrap().bidual().unwrap(), f);
    }

    #[test]
    fn duality_is_an_isometry((f, g) in pair()) {
        let primal = sup_distance(&f, &g).unwrap();
        let dual = dual_sup_distance(&legendre_dual(&f).unwrap(), &legendre_dual(&g).unwrap()).unwrap();
        prop_assert!((primal - dual).abs() <= 1e-8, "{} vs {}", primal, dual);
    }

    #[test]
    fn duality_reverses_order((f, g) in pair()) {
        let low = min_concave(&f, &g).unwrap();
        let (dl, df) = (legendre_dual(&low).unwrap(), legendre_dual(&f).unwrap());
        for m in grid(to_f64(df.lo()), to_f64(df.hi()), 24) {
            prop_assert!(dl.eval(m) >= df.eval(m) - 1e-12);
        }
    }

    #[test]
    fn monge_ampere_mass_is_the_slope_drop(f in slopes().prop_flat_map(|(h, l)| concave(h, l))) {
        let mass = monge_ampere(&f).total_mass().unwrap();
        prop_assert!((mass - to_f64(&(f.slope_neg() - f.slope_pos()))).abs() <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn energy_is_monotone_and_transitive((psi, phi, other) in triple()) {
        let lower = min_concave(&phi, &other).unwrap();
        let e_phi = local_energy(&psi, &phi).unwrap().value;
        let e_lower = local_energy(&psi, &lower).unwrap().value;
        prop_assert!(e_phi <= e_lower + 1e-6, "{} > {}", e_phi, e_lower);
        let chain = local_energy(&psi, &phi).unwrap().value + local_energy(&phi, &other).unwrap().value;
        let direct = local_energy(&psi, &other).unwrap().value;
        prop_assert!((chain - direct).abs() <= 1e-6, "{} vs {}", chain, direct);
    }

    #[test]
    fn constant_shift_adds_twice_the_mass((psi, phi) in pair(), c in -20i64..20) {
        let c = qr(c, 3);
        let mass = to_f64(&(psi.slope_neg() - psi.slope_pos()));
        let shifted = local_energy(&psi, &phi.add_constant(&-c.clone())).unwrap().value;
        let base = local_energy(&psi, &phi).unwrap().value;
        prop_assert!((shifted - base - 2.0 * to_f64(&c) * mass).abs() <= 1e-9);
    }

    #[test]
    fn integration_by_parts(((p1, s1), (p2, s2)) in slopes().prop_flat_map(|(h, l)| {
        ((concave(h, l), concave(h, l)), (concave(h, l), concave(h, l)))
    })) {
        let side = |a: &ConcaveFn, b: &ConcaveFn, c: &ConcaveFn, d: &ConcaveFn| {
            integrate_against(a, b, &monge_ampere(c), DEFAULT_TOL).unwrap().value
                - integrate_against(a, b, &monge_ampere(d), DEFAULT_TOL).unwrap().value
        };
        let left = side(&p1, &s1, &p2, &s2);
        let right = side(&p2, &s2, &p1, &s1);
        prop_assert!((left - right).abs() <= 1e-7, "{} vs {}", left, right);
    }

    #[test]
    fn mixed_energy_is_symmetric((a0, a1, b0) in triple(), shift in 0i64..5) {
        let b1 = min_concave(&a1, &b0.add_constant(&qi(shift))).unwrap();
        let e = mixed_local_energy(&a0, &a1, &b0, &b1).unwrap().value;
        let swapped = mixed_local_energy(&a1, &a0, &b1, &b0).unwrap().value;
        prop_assert!((e - swapped).abs() <= 1e-7, "{} vs {}", e, swapped);
    }
}

#[test]
fn catalog_duals_match_the_oracle_and_biduals() {
    for f in catalog() {
        let d = legendre_dual(&f).unwrap();
        let (lo, hi) = (to_f64(d.lo()), to_f64(d.hi()));
        for m in grid(lo, hi, 20).skip(1).take(19) {
            let want = dual_oracle(&f, m);
            assert!((d.eval(m) - want).abs() < 1e-6, "{f}m = {m}: {} vs {want}", d.eval(m));
        }
        let back = d.bidual().unwrap();
        for u in grid(-50.0, 50.0, 200) {
            assert!((back.eval(u) - f.eval(u)).abs() <= 1e-8, "{f}u = {u}");
        }
    }
}

#[test]
fn catalog_masses() {
    for f in catalog() {
        let mass = monge_ampere(&f).total_mass().unwrap();
        assert!((mass - 1.0).abs() <= 1e-10, "{f}{mass}");
    }
}

#[test]
fn singular_energies_and_their_cutoffs() {
    let psi = ConcaveFn::canonical();
    for (a, want) in [(qr(1, 10), -21.25), (qr(1, 4), -10.0), (qr(2, 5), -10.0)] {
        let phi = ConcaveFn::with_alpha_singularity(&a).unwrap();
        let e = local_energy(&psi, &phi).unwrap().value;
        assert!((e - want).abs() < 1e-9, "{a}: {e}");
    }
    let phi = ConcaveFn::with_alpha_singularity(&qr(1, 4)).unwrap();
    let limit = local_energy(&psi, &phi).unwrap().value;
    let mut prev = f64::INFINITY;
    for n in [1, 10, 100, 1000] {
        let e = local_energy(&psi, &cutoff(&phi, &psi, &qi(n)).unwrap()).unwrap().value;
        assert!(e <= prev && e >= limit - 1e-9, "n = {n}: {e}");
        prev = e;
    }
    assert!(prev - limit < 1e-3, "{prev} vs {limit}");
}

#[test]
fn mixed_energy_on_the_catalog_is_symmetric() {
    let psi = ConcaveFn::canonical();
    let phi = ConcaveFn::with_alpha_singularity(&qr(1, 4)).unwrap();
    let phi2 = ConcaveFn::with_alpha_singularity(&qr(1, 3)).unwrap().add_constant(&qi(1));
    let psi2 = psi.add_constant(&qr(-1, 2));
    let e = mixed_local_energy(&psi, &psi2, &phi, &phi2).unwrap().value;
    let swapped = mixed_local_energy(&psi2, &psi, &phi2, &phi).unwrap().value;
    assert!((e - swapped).abs() <= 1e-7, "{e} vs {swapped}");
}

#[test]
fn unbounded_gaps_are_infinite() {
    let f = ConcaveFn::canonical();
    let g = ConcaveFn::with_alpha_singularity(&qr(1, 2)).unwrap();
    assert_eq!(sup_distance(&f, &g).unwrap(), f64::INFINITY);
}
