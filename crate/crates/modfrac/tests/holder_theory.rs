use modfrac::forms::FormDescriptor;
use modfrac::holder::{spectrum, theory_exponents, PointDescriptor};
use proptest::prelude::*;

fn point(f: &FormDescriptor, s: &str) -> PointDescriptor {
    PointDescriptor::parse(f, s).unwrap()
}

#[test]
fn theta_rationals_split_by_cuspidality() {
    let t = FormDescriptor::by_name("theta").unwrap();
    // odd/odd rationals are cuspidal for theta
    for (s, cusp) in [("1", true), ("1/3", true), ("3/5", true), ("1/2", false), ("2/3", false), ("0", false)] {
        let p = point(&t, s);
        assert!(matches!(p, PointDescriptor::Rational { cuspidal, .. } if cuspidal == cusp), "{s}");
        let b = theory_exponents(&t, 1.0, &p).unwrap().beta;
        assert_eq!(b, if cusp { 1.5 } else { 0.5 }, "{s}");
    }
}

#[test]
fn tau_shapes_irrational_exponent() {
    let t = FormDescriptor::by_name("theta").unwrap();
    let p = point(&t, "0.25").with_tau(4.0);
    let e = theory_exponents(&t, 1.0, &p).unwrap();
    assert_eq!(e.beta, 1.0 - 0.75 * 0.5);
}

proptest! {
    #[test]
    fn spectrum_endpoints(alpha in 0.51f64..4.0) {
        let t = FormDescriptor::by_name("theta").unwrap();
        let s = spectrum(&t, alpha).unwrap();
        prop_assert_eq!(s.eval(alpha - 0.5), 0.0);
        prop_assert!((s.eval(alpha - 0.25) - 1.0).abs() < 1e-12);
        prop_assert_eq!(s.eval(2.0 * alpha - 0.5), 0.0);
        prop_assert_eq!(s.eval(alpha), f64::NEG_INFINITY);
    }

    #[test]
    fn exponents_are_ordered(alpha in 6.01f64..9.0, tau in 2.0f64..8.0) {
        for name in ["delta", "e4", "theta"] {
            let f = FormDescriptor::by_name(name).unwrap();
            for s in ["0", "1/2", "2/5"] {
                let e = theory_exponents(&f, alpha, &point(&f, s)).unwrap();
                prop_assert!(e.beta >= e.beta_star && e.beta_star >= e.beta_star_star);
                prop_assert!((e.beta_star_star - (alpha - f.alpha0())).abs() < 1e-12);
            }
            let p = point(&f, "0.3").with_tau(tau);
            let e = theory_exponents(&f, alpha, &p).unwrap();
            prop_assert!(e.beta >= e.beta_star - 1e-12 && e.beta_star >= e.beta_star_star - 1e-12);
        }
    }
}
