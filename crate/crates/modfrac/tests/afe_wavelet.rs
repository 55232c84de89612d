use modfrac::afe::{build_context, error_regularity_check, DyadicWindow};
use modfrac::eval::QuadratureConfig;
use modfrac::forms::FormDescriptor;
use modfrac::modgroup::Cusp;
use modfrac::wavelet::{identity_check, WaveletConfig};

#[test]
fn theta_afe_at_one_third() {
    let t = FormDescriptor::by_name("theta").unwrap();
    let mut ctx = build_context(&t, 1.0, &Cusp::new(1, 3)).unwrap();
    let w = DyadicWindow {
        k_min: 5,
        k_max: 12,
        per_block: 4,
    };
    let rep = error_regularity_check(&mut ctx, &w, &QuadratureConfig::default()).unwrap();
    assert!(rep.pass, "{} < {}", rep.slope, rep.threshold);
    // |B| = q^{3/2} for the scaling at p/q
    let b = (rep.b_hat[0].powi(2) + rep.b_hat[1].powi(2)).sqrt();
    assert!((b - 3f64.powf(1.5)).abs() < 0.05 * b, "{b}");
}

#[test]
fn wavelet_identity_e6() {
    let f = FormDescriptor::by_name("e6").unwrap();
    let rep = identity_check(&f, 7.0, &[(0.1, 0.0), (0.2, 0.5)], &QuadratureConfig::default(), &WaveletConfig::default()).unwrap();
    assert!(rep.rel_residual < 1e-3, "{}", rep.rel_residual);
}
