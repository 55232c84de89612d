//! The analytic wavelet psi(x) = (x+i)^{-alpha-1}, its Fourier transform and
//! the continuous wavelet transform W(a,b) = (1/a) int g(t) conj psi((t-b)/a) dt.
//!
//! For g = e^{2 pi i lambda t} the transform is C (lambda a)^alpha e^{2 pi i lambda (b+ia)}
//! when lambda > 0 and zero otherwise, with C the conjugate of
//! K = psi_hat(xi) / (xi^alpha e^{-2 pi xi}).

use std::collections::HashMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{pre, Error, Result};
use crate::eval::QuadratureConfig;
use crate::forms::FormDescriptor;
use crate::quad::{exp_tail, tanh_sinh, QuadResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveletDescriptor {
    pub alpha: f64,
    pub c: Complex64,
    pub c_err: f64,
}

impl WaveletDescriptor {
    pub fn new(alpha: f64, cfg: &QuadratureConfig) -> Result<WaveletDescriptor> {
        let (k, err) = k_constant(alpha, cfg)?;
        Ok(WaveletDescriptor {
            alpha,
            c: k.conj(),
            c_err: err,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransformSample {
    pub a: f64,
    pub b: f64,
    pub value: Complex64,
    pub err_estimate: f64,
}

/// Trapezoid settings for `transform_direct`, in the rescaled variable
/// u = (t-b)/a.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveletConfig {
    pub tol: f64,
    pub step: f64,
    pub max_radius: f64,
}

impl Default for WaveletConfig {
    fn default() -> Self {
        WaveletConfig {
            tol: 1e-13,
            step: 1.0 / 16.0,
            max_radius: 1e5,
        }
    }
}

pub fn psi(alpha: f64, x: f64) -> Complex64 {
    Complex64::new(x, 1.0).powf(-alpha - 1.0)
}

/// k-th derivative of psi.
pub fn psi_derivative(alpha: f64, k: u32, x: f64) -> Complex64 {
    let mut c = 1.0;
    for j in 0..k {
        c *= -alpha - 1.0 - j as f64;
    }
    Complex64::new(x, 1.0).powf(-alpha - 1.0 - k as f64) * c
}

/// w^{-s} with the branch cut along the negative imaginary axis.
fn power_cut_down(w: Complex64, s: f64) -> Complex64 {
    let mut arg = w.im.atan2(w.re);
    if arg < -PI / 2.0 {
        arg += 2.0 * PI;
    }
    let ln = Complex64::new(w.norm().ln(), arg);
    (-s * ln).exp()
}

/// psi_hat(xi) by quadrature. The line Im w = 1 (w = x+i) is folded onto
/// two rays leaving i at angles -pi/4 and -3pi/4, where e^{-2 pi i xi w}
/// decays exponentially.
pub fn psi_hat_quad(alpha: f64, xi: f64, cfg: &QuadratureConfig) -> Result<QuadResult> {
    if xi <= 0.0 {
        return Ok(QuadResult::ZERO);
    }
    let s = alpha + 1.0;
    let ray = |d: Complex64| {
        move |r: f64| {
            let w = Complex64::i() + d * r;
            (Complex64::new(0.0, -2.0 * PI * xi) * d * r).exp() * power_cut_down(w, s) * d
        }
    };
    let right = Complex64::new(FRAC_1_SQRT_2, -FRAC_1_SQRT_2);
    let left = Complex64::new(-FRAC_1_SQRT_2, -FRAC_1_SQRT_2);
    let rate = 2.0 * PI * xi * FRAC_1_SQRT_2;
    let tol = cfg.abs_tol;
    let r = exp_tail(ray(right), 0.0, rate, tol, cfg.max_level);
    let l = exp_tail(ray(left), 0.0, rate, tol, cfg.max_level);
    let out = r + l.scale(Complex64::new(-1.0, 0.0));
    if !(out.err <= 1e3 * tol.max(cfg.rel_tol * out.value.norm())) {
        return Err(Error::Numeric(format!("psi_hat quadrature did not converge (err {:.2e})", out.err)));
    }
    Ok(out)
}

fn k_cache() -> &'static Mutex<HashMap<u64, (Complex64, f64)>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, (Complex64, f64)>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// K = psi_hat(1) e^{2 pi}, computed once per alpha.
pub fn k_constant(alpha: f64, cfg: &QuadratureConfig) -> Result<(Complex64, f64)> {
    if !(alpha > 0.0) {
        return pre("wavelet order alpha must be positive");
    }
    if let Some(v) = k_cache().lock().expect("wavelet cache").get(&alpha.to_bits()) {
        return Ok(*v);
    }
    let q = psi_hat_quad(alpha, 1.0, cfg)?;
    let e = (2.0 * PI).exp();
    let v = (q.value * e, q.err * e);
    k_cache().lock().expect("wavelet cache").insert(alpha.to_bits(), v);
    Ok(v)
}

pub fn psi_hat(alpha: f64, xi: f64, cfg: &QuadratureConfig) -> Result<Complex64> {
    if xi <= 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (k, _) = k_constant(alpha, cfg)?;
    Ok(k * xi.powf(alpha) * (-2.0 * PI * xi).exp())
}

/// int x^k psi(x) dx over the real line, via x = tan(theta).
pub fn moment(alpha: f64, k: u32, cfg: &QuadratureConfig) -> Result<QuadResult> {
    if (k as f64) >= alpha {
        return pre("moment k must be below alpha for convergence");
    }
    let g = |th: f64| {
        let x = th.tan();
        let c = th.cos();
        if !x.is_finite() || c == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        psi(alpha, x) * x.powi(k as i32) / (c * c)
    };
    Ok(tanh_sinh(g, -PI / 2.0, PI / 2.0, cfg.abs_tol, cfg.max_level + 2))
}

/// W(a,b) by the trapezoid rule in u = (t-b)/a, truncated where the
/// |u|^{-alpha-1} tail of psi falls below `cfg.tol`. `g_sup` bounds |g|.
pub fn transform_direct(
    g: &(dyn Fn(f64) -> Complex64 + Sync),
    g_sup: f64,
    alpha: f64,
    a: f64,
    b: f64,
    cfg: &WaveletConfig,
) -> Result<TransformSample> {
    if !(a > 0.0) {
        return pre("wavelet scale a must be positive");
    }
    if !(alpha > 0.0) {
        return pre("wavelet order alpha must be positive");
    }
    if !(cfg.tol > 0.0 && cfg.step > 0.0) {
        return pre("wavelet tolerance and step must be positive");
    }
    let radius = (2.0 * g_sup.max(f64::MIN_POSITIVE) / (alpha * cfg.tol)).powf(1.0 / alpha).max(8.0);
    if radius > cfg.max_radius {
        return pre(format!(
            "tolerance {:.1e} unreachable for alpha = {alpha}: truncation radius {radius:.2e} exceeds {:.1e}",
            cfg.tol, cfg.max_radius
        ));
    }
    let h = cfg.step;
    let n = (radius / h).ceil() as i64;
    let blocks: Vec<i64> = (-(n / 64) - 1..=n / 64 + 1).collect();
    let parts = crate::par::map(&blocks, |blk| {
        let mut even = Complex64::new(0.0, 0.0);
        let mut odd = Complex64::new(0.0, 0.0);
        for j in blk * 64..blk * 64 + 64 {
            if j.abs() > n {
                continue;
            }
            let u = j as f64 * h;
            let v = g(b + a * u) * psi(alpha, u).conj();
            if j % 2 == 0 {
                even += v;
            } else {
                odd += v;
            }
        }
        (even, odd)
    });
    let (even, odd) = parts
        .iter()
        .fold((Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    let fine = (even + odd) * h;
    let coarse = even * (2.0 * h);
    let tail = 2.0 * g_sup * radius.powf(-alpha) / alpha;
    Ok(TransformSample {
        a,
        b,
        value: fine,
        err_estimate: (fine - coarse).norm() + tail,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityRow {
    pub a: f64,
    pub b: f64,
    pub direct: Complex64,
    pub closed: Complex64,
    pub residual: f64,
    pub err_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub form: String,
    pub alpha: f64,
    pub c: Complex64,
    pub terms: usize,
    pub rows: Vec<IdentityRow>,
    /// max |closed| over the grid
    pub scale: f64,
    /// max residual / scale
    pub rel_residual: f64,
    pub pass: bool,
}

/// Compares the trapezoid transform of the truncated series f_alpha with
/// C a^alpha (f(b+ia) - f(inf)) on a grid of (a, b).
pub fn identity_check(
    f: &FormDescriptor,
    alpha: f64,
    grid: &[(f64, f64)],
    qcfg: &QuadratureConfig,
    wcfg: &WaveletConfig,
) -> Result<IdentityReport> {
    if !(alpha > f.alpha0()) {
        return pre(format!("alpha = {alpha} must exceed alpha0 = {}", f.alpha0()));
    }
    if alpha < 3.0 {
        return pre("direct wavelet quadrature needs alpha >= 3");
    }
    if grid.is_empty() || grid.iter().any(|(a, _)| !(*a > 0.0)) {
        return pre("wavelet grid must be nonempty with positive scales");
    }
    let wd = WaveletDescriptor::new(alpha, qcfg)?;
    let m = f.m_inf as f64;
    let a_min = grid.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    // the transform damps frequency nu by e^{-2 pi nu a / m}
    let (c, e) = f.coef_bound();
    let mut len = 8usize;
    loop {
        let nu = if let crate::forms::FormKind::Theta(_) = f.kind { (len * len) as f64 } else { len as f64 };
        if c * nu.powf(e + 1.0) * (-2.0 * PI * nu * a_min / m).exp() < 1e-22 || len >= f.max_index() {
            break;
        }
        len += len / 2;
    }
    let len = len.min(f.max_index());
    let poly: Vec<(f64, Complex64)> = f
        .terms(len)?
        .into_iter()
        .filter(|t| t.freq > 0.0)
        .map(|t| (2.0 * PI * t.freq / m, t.coef * t.freq.powf(-alpha)))
        .collect();
    let sup: f64 = poly.iter().map(|p| p.1.norm()).sum();
    let nu_max = poly.last().map(|p| p.0).unwrap_or(0.0) / (2.0 * PI);
    let g = |t: f64| poly.iter().map(|(w, c)| c * Complex64::from_polar(1.0, w * t)).sum::<Complex64>();
    let mut rows = Vec::with_capacity(grid.len());
    for &(a, b) in grid {
        let step = wcfg.step.min(0.5 / (nu_max * a).max(1e-300));
        let cfg = WaveletConfig { step, ..*wcfg };
        let d = transform_direct(&g, sup, alpha, a, b, &cfg)?;
        let fv = f.value_at(Complex64::new(b, a))?;
        let closed = wd.c * a.powf(alpha) * fv.minus_const;
        rows.push(IdentityRow {
            a,
            b,
            direct: d.value,
            closed,
            residual: (d.value - closed).norm(),
            err_estimate: d.err_estimate + wd.c.norm() * a.powf(alpha) * fv.err + wd.c_err * a.powf(alpha) * fv.minus_const.norm(),
        });
    }
    let scale = rows.iter().map(|r| r.closed.norm()).fold(0.0, f64::max);
    let worst = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    let rel = if scale > 0.0 { worst / scale } else { worst };
    Ok(IdentityReport {
        form: f.id.clone(),
        alpha,
        c: wd.c,
        terms: poly.len(),
        rows,
        scale,
        rel_residual: rel,
        pass: rel < crate::tolerances::WAVELET_REL_TOL,
    })
}

/// The 3x3 grid a in {0.05, 0.1, 0.2}, b in {0, 0.3, 0.5}.
pub fn default_grid() -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for a in [0.05, 0.1, 0.2] {
        for b in [0.0, 0.3, 0.5] {
            out.push((a, b));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::gamma;

    fn q() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn expo(lambda: f64) -> impl Fn(f64) -> Complex64 + Sync {
        move |t| Complex64::from_polar(1.0, 2.0 * PI * lambda * t)
    }

    #[test]
    fn psi_values() {
        assert!((psi(1.0, 0.0) - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        for alpha in [0.3, 1.0, 2.5, 7.0] {
            let want = Complex64::from_polar(1.0, -PI * (alpha + 1.0) / 2.0);
            assert!((psi(alpha, 0.0) - want).norm() < 1e-14);
        }
        assert!((psi(1.0, 10.0).norm() - 1.0 / 101.0).abs() < 1e-15);
    }

    #[test]
    fn k_matches_closed_form() {
        for alpha in [0.5, 1.0, 3.0, 5.0, 7.0] {
            let (k, err) = k_constant(alpha, &q()).unwrap();
            let want = Complex64::from_polar((2.0 * PI).powf(alpha + 1.0) / gamma(alpha + 1.0), -PI * (alpha + 1.0) / 2.0);
            assert!((k - want).norm() < 1e-10 * want.norm(), "alpha {alpha}: {k} vs {want} (err {err:.1e})");
        }
    }

    #[test]
    fn psi_hat_ratio_is_constant() {
        let alpha = 7.0;
        let ratios: Vec<Complex64> = [0.5, 1.0, 2.0]
            .iter()
            .map(|&xi| psi_hat_quad(alpha, xi, &q()).unwrap().value / (xi.powf(alpha) * (-2.0 * PI * xi).exp()))
            .collect();
        for r in &ratios[1..] {
            assert!((r - ratios[0]).norm() < 1e-8 * ratios[0].norm());
        }
        assert_eq!(psi_hat(alpha, -1.0, &q()).unwrap(), Complex64::new(0.0, 0.0));
        assert!(psi_hat(alpha, 1e-6, &q()).unwrap().norm() < 1e-38);
    }

    #[test]
    fn vanishing_moments() {
        for k in 0..=6 {
            let m = moment(7.0, k, &q()).unwrap();
            assert!(m.value.norm() < 1e-6, "k = {k}: {}", m.value);
        }
        assert!(moment(7.0, 7, &q()).is_err());
    }

    #[test]
    fn derivative_decay() {
        let alpha = 3.5;
        for k in 0..=2 {
            let ck = psi_derivative(alpha, k, 0.0).norm() * 4.0 + 1.0;
            for i in 0..200 {
                let x = -100.0 + i as f64;
                let bound = ck * (1.0 + x.abs()).powf(-alpha - 1.0) * 2f64.powf(alpha + 1.0);
                assert!(psi_derivative(alpha, k, x).norm() <= bound);
            }
        }
        let h = 1e-5;
        let fd = (psi(alpha, 0.3 + h) - psi(alpha, 0.3 - h)) / (2.0 * h);
        assert!((fd - psi_derivative(alpha, 1, 0.3)).norm() < 1e-8);
    }

    #[test]
    fn exponential_transform() {
        let alpha = 7.0;
        let wd = WaveletDescriptor::new(alpha, &q()).unwrap();
        let cfg = WaveletConfig::default();
        let (a, b) = (0.1, 0.0);
        let w = transform_direct(&expo(1.0), 1.0, alpha, a, b, &cfg).unwrap();
        let want = wd.c * a.powf(alpha) * (Complex64::new(0.0, 2.0 * PI) * Complex64::new(b, a)).exp();
        assert!((w.value - want).norm() < 1e-6 * want.norm(), "{} vs {}", w.value, want);
        let neg = transform_direct(&expo(-1.0), 1.0, alpha, a, b, &cfg).unwrap();
        assert!(neg.value.norm() < 1e-12);
        let c = transform_direct(&|_| Complex64::new(3.0, -1.0), 4.0, alpha, 0.3, 0.7, &cfg).unwrap();
        assert!(c.value.norm() < 1e-12);
    }

    #[test]
    fn scale_law() {
        let alpha = 5.0;
        let cfg = WaveletConfig::default();
        let w1 = transform_direct(&expo(2.0), 1.0, alpha, 0.1, 0.0, &cfg).unwrap();
        let w2 = transform_direct(&expo(1.0), 1.0, alpha, 0.2, 0.37, &cfg).unwrap();
        assert!((w1.value.norm() - w2.value.norm()).abs() < 1e-10 * w1.value.norm());
        let la: f64 = 0.3;
        let w3 = transform_direct(&expo(1.0), 1.0, alpha, la, 0.0, &cfg).unwrap();
        let r = w3.value.norm() / w2.value.norm();
        let want = (la / 0.2).powf(alpha) * (-2.0 * PI * (la - 0.2)).exp();
        assert!((r - want).abs() < 1e-9 * want);
    }

    #[test]
    fn linearity_and_dilation() {
        let alpha = 4.0;
        let cfg = WaveletConfig::default();
        let g1 = expo(1.0);
        let g2 = expo(3.0);
        let sum = |t: f64| g1(t) * 2.0 + g2(t);
        let w = transform_direct(&sum, 3.0, alpha, 0.15, 0.2, &cfg).unwrap();
        let w1 = transform_direct(&g1, 1.0, alpha, 0.15, 0.2, &cfg).unwrap();
        let w2 = transform_direct(&g2, 1.0, alpha, 0.15, 0.2, &cfg).unwrap();
        assert!((w.value - (w1.value * 2.0 + w2.value)).norm() < 1e-12);
        // g(kt) at (a, b) equals g at (k a, k b)
        let g3 = |t: f64| g1(3.0 * t);
        let d = transform_direct(&g3, 1.0, alpha, 0.05, 0.1, &cfg).unwrap();
        let e = transform_direct(&g1, 1.0, alpha, 0.15, 0.3, &cfg).unwrap();
        assert!((d.value - e.value).norm() < 1e-12);
    }

    #[test]
    fn unreachable_tolerance_is_reported() {
        let cfg = WaveletConfig {
            tol: 1e-14,
            ..WaveletConfig::default()
        };
        assert!(matches!(
            transform_direct(&expo(1.0), 1.0, 0.5, 0.1, 0.0, &cfg),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn identity_delta_and_e4() {
        let grid = default_grid();
        let d = FormDescriptor::by_name("delta").unwrap();
        let r = identity_check(&d, 7.0, &grid, &q(), &WaveletConfig::default()).unwrap();
        assert!(r.pass, "delta rel residual {:.2e}", r.rel_residual);
        let e = FormDescriptor::by_name("e4").unwrap();
        let r = identity_check(&e, 5.0, &grid, &q(), &WaveletConfig::default()).unwrap();
        assert!(r.pass, "e4 rel residual {:.2e}", r.rel_residual);
        assert!(identity_check(&e, 2.5, &grid, &q(), &WaveletConfig::default()).is_err());
    }

    #[test]
    fn identity_is_periodic_in_b() {
        let d = FormDescriptor::by_name("delta").unwrap();
        let a = identity_check(&d, 7.0, &[(0.1, 0.3)], &q(), &WaveletConfig::default()).unwrap();
        let b = identity_check(&d, 7.0, &[(0.1, 1.3)], &q(), &WaveletConfig::default()).unwrap();
        assert!((a.rows[0].direct - b.rows[0].direct).norm() < 1e-12 * a.scale.max(1e-300) + 1e-20);
    }
}
