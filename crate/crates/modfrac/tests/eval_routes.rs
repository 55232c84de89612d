use std::f64::consts::PI;

use modfrac::diophantine::{convergents, RealDescriptor};
use modfrac::eval::{eval_falpha_integral, eval_falpha_series, eval_form, QuadratureConfig};
use modfrac::forms::FormDescriptor;
use modfrac::Complex64;

#[test]
fn riemann_closed_form() {
    let t = FormDescriptor::by_name("theta").unwrap();
    let v = eval_falpha_integral(&t, 1.0, 0.5, &QuadratureConfig::default()).unwrap();
    assert!((v.value.im / 2.0 - PI * PI / 8.0).abs() < 1e-10);
    // phi(1) = 0 and Re f_1(0) = 2 zeta(2)
    let v = eval_falpha_integral(&t, 1.0, 0.0, &QuadratureConfig::default()).unwrap();
    assert!((v.value.re - PI * PI / 3.0).abs() < 1e-10);
}

#[test]
fn routes_agree_within_reported_error() {
    let q = QuadratureConfig::default();
    for (name, alpha, x) in [("theta", 1.0, 0.2718), ("delta", 7.0, 0.1414), ("e4", 5.0, 0.5772), ("e6", 6.5, 0.3333)] {
        let f = FormDescriptor::by_name(name).unwrap();
        let s = eval_falpha_series(&f, alpha, x, 50_000).unwrap();
        let i = eval_falpha_integral(&f, alpha, x, &q).unwrap();
        assert!((s.value - i.value).norm() <= s.err_estimate + i.err_estimate, "{name}: {s:?} {i:?}");
    }
}

#[test]
fn forms_are_periodic_and_modular() {
    let d = FormDescriptor::by_name("delta").unwrap();
    let z = Complex64::new(0.123, 0.9);
    let a = eval_form(&d, z).unwrap().value;
    let b = eval_form(&d, z + 1.0).unwrap().value;
    assert!((a - b).norm() < 1e-12 * a.norm());
    let c = eval_form(&d, -1.0 / z).unwrap().value;
    assert!((c - z.powi(12) * a).norm() < 1e-9 * c.norm());
}

#[test]
fn golden_convergents_are_fibonacci_ratios() {
    let cf = RealDescriptor::golden().cf_expand(10).unwrap();
    assert!(cf.iter().all(|&a| a == 1));
    let c = convergents(&cf);
    assert_eq!(c[5].as_pair(), (13, 8));
}
