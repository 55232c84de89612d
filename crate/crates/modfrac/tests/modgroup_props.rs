use modfrac::modgroup::*;
use modfrac::Complex64;
use num_integer::Integer;
use proptest::prelude::*;

fn cusps_up_to(qmax: i64, period: i64) -> Vec<Cusp> {
    let mut v = vec![Cusp::Infinity];
    for q in 1..=qmax {
        for p in 0..period * q {
            if p.gcd(&q) == 1 {
                v.push(Cusp::new(p, q));
            }
        }
    }
    v
}

fn check_group_against_oracle(g: GroupId, qmax: i64, bound: i64) {
    let period = if g == GroupId::GammaTheta { 2 } else { 1 };
    let cusps = cusps_up_to(qmax, period);
    for (i, x) in cusps.iter().enumerate() {
        for y in &cusps[i..] {
            let same = cusp_class(g, x) == cusp_class(g, y);
            let found = cusp_equivalent_bruteforce(g, x, y, bound);
            assert_eq!(same, found, "group {g}: {x} vs {y}");
        }
    }
}

#[test]
fn theta_classes_match_oracle() {
    check_group_against_oracle(GroupId::GammaTheta, 20, 2000);
}

#[test]
fn gamma0_classes_match_oracle() {
    for n in 1..=30 {
        check_group_against_oracle(GroupId::Gamma0(n), 12, 20_000);
    }
}

#[test]
fn normalizer_predicate_matches_orbits() {
    for n in 1..=100u64 {
        let orbits = normalizer_orbit_classes(n);
        assert_eq!(normalizer_transitive(n), orbits.len() == 1, "N={n}: {} orbits", orbits.len());
    }
}

#[test]
fn atkin_lehner_shape_and_involution() {
    for n in 1..=60u64 {
        for q in (1..=n).filter(|q| n % q == 0 && q.gcd(&(n / q)) == 1) {
            let w = atkin_lehner(n, q).unwrap();
            assert!(is_atkin_lehner(n, q, &w), "N={n} Q={q}");
            assert!(squares_into_gamma0(n, q, &w), "N={n} Q={q}");
            assert_eq!(w.det(), q as i128);
        }
    }
}

proptest! {
    #[test]
    fn ford_circles_cover_the_strip(x in -3.0f64..3.0, y in 1e-4f64..0.4999) {
        let z = Complex64::new(x, y);
        prop_assert!(find_ford_circle(z, 2.0).is_some());
    }

    #[test]
    fn matrix_product_is_associative(a in -9i64..9, b in -9i64..9, c in -9i64..9, d in -9i64..9) {
        let m1 = IntMatrix2::raw(a, b, c, d);
        let m2 = IntMatrix2::raw(2, 1, 1, 1);
        let m3 = IntMatrix2::raw(7, 3, 14, 7);
        prop_assert_eq!(m1.mul(&m2).mul(&m3), m1.mul(&m2.mul(&m3)));
    }

    #[test]
    fn action_is_compatible_with_product(p in -50i64..50, q in 1i64..50) {
        let x = Cusp::new(p, q);
        let m1 = IntMatrix2::raw(2, 1, 1, 1);
        let m2 = IntMatrix2::raw(7, 3, 14, 7);
        prop_assert_eq!(m1.mul(&m2).apply_cusp(&x), m1.apply_cusp(&m2.apply_cusp(&x)));
    }
}
