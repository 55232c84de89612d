//! Values of f on the upper half-plane and of the fractional integral
//! f_alpha(x) = sum a_n (n+kappa)^{-alpha} e^{2 pi i (n+kappa) x / m}
//! on the real line, by truncated series and by the vertical-ray integral
//! f_alpha(x) = (2 pi/m)^alpha / Gamma(alpha) int_0^inf t^{alpha-1} (f(x+it) - f(inf)) dt.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{pre, Error, Result};
use crate::forms::{FormDescriptor, FormKind, Term};
use crate::modgroup::{cusp_class, sl2z_to_cusp, Cusp};
use crate::point::HPoint;
use crate::quad::{exp_tail, tanh_sinh, QuadResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Series,
    Abel,
    Integral,
    Transformed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalOutput {
    pub value: Complex64,
    pub err_estimate: f64,
    pub terms_or_nodes: usize,
    pub method: Method,
    /// True when the error is a proven tail bound rather than an estimate.
    pub rigorous: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Split between the near-axis segment and the exponential tail.
    pub split: f64,
    /// Refinement levels per tanh-sinh piece.
    pub max_level: u32,
    /// Lowest height integrated numerically.
    pub t_floor: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            abs_tol: 1e-13,
            rel_tol: 1e-12,
            split: crate::tolerances::TAIL_SPLIT,
            max_level: 9,
            t_floor: 2f64.powi(-90),
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0 && self.split > 0.0 && self.t_floor > 0.0) {
            return pre("quadrature tolerances must be positive");
        }
        Ok(())
    }
}

fn check_alpha(f: &FormDescriptor, alpha: f64) -> Result<()> {
    if !(alpha > f.alpha0()) {
        return pre(format!(
            "alpha = {alpha} must exceed alpha0 = {} for {} (the series diverges otherwise)",
            f.alpha0(),
            f.id
        ));
    }
    Ok(())
}

/// f(z) with the modular reduction where available.
pub fn eval_form(f: &FormDescriptor, z: Complex64) -> Result<EvalOutput> {
    if !(z.im > 0.0) {
        return pre(format!("Im z must be positive, got {z}"));
    }
    let v = f.value_at(z)?;
    let reduced = matches!(f.kind, FormKind::Theta(_) | FormKind::Level1(_)) && z.im < 0.5;
    Ok(EvalOutput {
        value: v.value,
        err_estimate: v.err,
        terms_or_nodes: v.terms,
        method: if reduced { Method::Transformed } else { Method::Series },
        rigorous: !reduced,
    })
}

/// Phase e^{2 pi i freq x / m}, with the integer part of the frequency
/// reduced exactly against the dyadic x.
struct Phaser {
    num: i128,
    den: i128,
    rem: f64,
    m: i128,
}

impl Phaser {
    fn new(x: f64, m: u32) -> Phaser {
        let p = HPoint::from_real(x, 1.0);
        Phaser {
            num: p.num,
            den: p.den,
            rem: p.off.re,
            m: m as i128,
        }
    }

    fn phase(&self, freq: f64) -> Complex64 {
        let n = freq.floor();
        let frac = freq - n;
        let md = self.m * self.den;
        let e = ((n as i128 % md) * (self.num % md)).rem_euclid(md);
        let turns = e as f64 / md as f64 + (frac * (self.num as f64 / self.den as f64) + freq * self.rem) / self.m as f64;
        Complex64::from_polar(1.0, 2.0 * PI * turns.fract())
    }
}

/// Partial-sum growth constant G with |S_N(x)| <= G N^{alpha0} ln N for
/// N >= 256, measured on a grid of x and N (twice the observed maximum).
fn growth_constant(f: &FormDescriptor) -> f64 {
    match &f.kind {
        FormKind::Level1(crate::forms::Level1::E4) => 24.0,
        FormKind::Level1(crate::forms::Level1::E6) => 32.0,
        FormKind::Level1(crate::forms::Level1::Delta) => 0.2,
        FormKind::Newform(_) => 0.4,
        FormKind::Dilated(b, _) => growth_constant(b),
        FormKind::Combination(p) => p.iter().map(|(c, g)| c.norm() * growth_constant(g)).sum(),
        _ => 8.0,
    }
}

fn series_tail(f: &FormDescriptor, alpha: f64, terms: &[Term]) -> (f64, bool) {
    let lam = terms.last().map(|t| t.freq).unwrap_or(1.0).max(2.0);
    if let FormKind::Theta(_) = f.kind {
        // sum_{k > K} 2 k^{-2 alpha} <= 2 K^{1 - 2 alpha} / (2 alpha - 1)
        let k = lam.sqrt().floor().max(1.0);
        return (2.0 * k.powf(1.0 - 2.0 * alpha) / (2.0 * alpha - 1.0), true);
    }
    let a0 = f.alpha0();
    let (c, e) = f.coef_bound();
    let g = growth_constant(f);
    let d = alpha - a0;
    let heuristic = 2.0 * g * alpha * lam.powf(-d) * (lam.ln() / d + 1.0 / (d * d));
    if alpha > e + 1.0 {
        let rig = c * lam.powf(e + 1.0 - alpha) / (alpha - e - 1.0);
        if rig <= heuristic {
            return (rig, true);
        }
    }
    (heuristic, false)
}

/// Partial sum over terms with n <= N (lattice index k <= N for the theta
/// family).
pub fn eval_falpha_series(f: &FormDescriptor, alpha: f64, x: f64, n: usize) -> Result<EvalOutput> {
    check_alpha(f, alpha)?;
    if n < 1 {
        return pre("series length must be at least 1");
    }
    let terms = f.terms(n)?;
    let ph = Phaser::new(x, f.m_inf);
    let mut acc = Complex64::new(0.0, 0.0);
    for t in terms.iter().filter(|t| t.freq > 0.0) {
        acc += t.coef * t.freq.powf(-alpha) * ph.phase(t.freq);
    }
    let (tail, rigorous) = series_tail(f, alpha, &terms);
    Ok(EvalOutput {
        value: acc,
        err_estimate: tail + 1e-15 * (terms.len() as f64).sqrt() * acc.norm().max(1.0),
        terms_or_nodes: terms.len(),
        method: Method::Series,
        rigorous,
    })
}

/// Series evaluated at x + iy (Abel summation).
pub fn eval_falpha_abel(f: &FormDescriptor, alpha: f64, x: f64, y: f64, n: usize) -> Result<EvalOutput> {
    check_alpha(f, alpha)?;
    if !(y > 0.0) {
        return pre("Abel height must be positive");
    }
    let terms = f.terms(n)?;
    let ph = Phaser::new(x, f.m_inf);
    let m = f.m_inf as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for t in terms.iter().filter(|t| t.freq > 0.0) {
        acc += t.coef * t.freq.powf(-alpha) * (-2.0 * PI * t.freq * y / m).exp() * ph.phase(t.freq);
    }
    let lam = terms.last().map(|t| t.freq).unwrap_or(1.0);
    let (c, e) = f.coef_bound();
    let tail = c * lam.powf(e - alpha + 1.0) * (-2.0 * PI * lam * y / m).exp() / (1.0 - (-2.0 * PI * y / m).exp());
    Ok(EvalOutput {
        value: acc,
        err_estimate: tail,
        terms_or_nodes: terms.len(),
        method: Method::Abel,
        rigorous: true,
    })
}

/// Smallest positive frequency with a nonzero coefficient.
fn lowest_frequency(f: &FormDescriptor) -> Result<f64> {
    let terms = f.terms(64.min(f.max_index()))?;
    Ok(terms
        .iter()
        .filter(|t| t.freq > 0.0 && t.coef.norm() > 0.0)
        .map(|t| t.freq)
        .fold(f64::INFINITY, f64::min))
}

/// Largest denominator treated as an exact cusp in the innermost piece.
const EXACT_DEN: i128 = 1 << 32;

/// (2 pi/m)^alpha / Gamma(alpha) * int_0^inf t^{alpha-1} g(t) dt where
/// g(t) = h(x + it) and `h` returns (value minus f(inf), error, full value).
fn ray_integral<H>(f: &FormDescriptor, alpha: f64, base: HPoint, cfg: &QuadratureConfig, h: H) -> Result<EvalOutput>
where
    H: Fn(&HPoint) -> Result<(Complex64, f64)> + Sync,
{
    cfg.validate()?;
    let m = f.m_inf as f64;
    let lam = lowest_frequency(f)?;
    if !lam.is_finite() {
        return Ok(EvalOutput {
            value: Complex64::new(0.0, 0.0),
            err_estimate: 0.0,
            terms_or_nodes: 0,
            method: Method::Integral,
            rigorous: false,
        });
    }
    let base = HPoint { off: Complex64::new(base.off.re, 0.0), ..base };
    let at = |t: f64| HPoint {
        off: Complex64::new(base.off.re, t),
        ..base
    };
    let err_cell = std::sync::Mutex::new((0.0f64, None::<Error>));
    let integrand = |t: f64| -> Complex64 {
        match h(&at(t)) {
            Ok((v, e)) => {
                let w = t.powf(alpha - 1.0);
                let mut c = err_cell.lock().expect("quadrature state");
                c.0 = c.0.max(e * w * t);
                v * w
            }
            Err(e) => {
                let mut c = err_cell.lock().expect("quadrature state");
                c.1.get_or_insert(e);
                Complex64::new(0.0, 0.0)
            }
        }
    };
    let rate = 2.0 * PI * lam / m;
    let tol = cfg.abs_tol;
    let mut total = exp_tail(&integrand, cfg.split, rate, tol, cfg.max_level);
    // dyadic pieces toward the axis
    let exact = base.off.re == 0.0 && base.den <= EXACT_DEN;
    let floor = if exact {
        cfg.t_floor.min(2f64.powi(-40) / (base.den as f64).powi(2))
    } else {
        cfg.t_floor
    };
    let ratio = 4.0;
    let mut hi = cfg.split;
    while hi > floor {
        let lo = hi / ratio;
        let piece = tanh_sinh(&integrand, lo, hi, tol, cfg.max_level);
        total = total + piece;
        hi = lo;
    }
    if let Some(e) = err_cell.lock().expect("quadrature state").1.take() {
        return Err(e);
    }
    // innermost piece (0, hi]
    let r = f.weight();
    let a0 = f.alpha0();
    let (inner, inner_err) = if exact {
        // deep inside the Ford circle f(x+it) = c t^{-r} up to e^{-K/t}
        let (v, _) = h(&at(hi))?;
        let full = v + f.f_infinity;
        let c = full * hi.powf(r);
        let mut val = -f.f_infinity * hi.powf(alpha) / alpha;
        if c.norm() > 1e-300 {
            val += c * hi.powf(alpha - r) / (alpha - r);
        }
        (val, 1e-12 * val.norm())
    } else {
        let mut cmax: f64 = 0.0;
        for k in 0..8 {
            let t = hi * 2f64.powf(k as f64 * 0.5);
            let (v, _) = h(&at(t))?;
            cmax = cmax.max((v + f.f_infinity).norm() * t.powf(a0));
        }
        let bound = 4.0 * cmax * hi.powf(alpha - a0) / (alpha - a0) + f.f_infinity.norm() * hi.powf(alpha) / alpha;
        (-f.f_infinity * hi.powf(alpha) / alpha, bound)
    };
    let pref = (alpha * (2.0 * PI / m).ln() - ln_gamma(alpha)).exp();
    let QuadResult { value, err, nodes } = total;
    let value = (value + inner) * pref;
    let eval_err = err_cell.lock().expect("quadrature state").0;
    let err = pref * (err + inner_err + eval_err * 50.0) + 1e-15 * value.norm();
    Ok(EvalOutput {
        value,
        err_estimate: err,
        terms_or_nodes: nodes,
        method: Method::Integral,
        rigorous: false,
    })
}

/// Integral-representation route.
pub fn eval_falpha_integral(f: &FormDescriptor, alpha: f64, x: f64, cfg: &QuadratureConfig) -> Result<EvalOutput> {
    eval_falpha_integral_at(f, alpha, &HPoint::from_real(x, 1.0), cfg)
}

/// Integral route at an exactly represented real point (the imaginary part
/// of `x` is ignored).
pub fn eval_falpha_integral_at(f: &FormDescriptor, alpha: f64, x: &HPoint, cfg: &QuadratureConfig) -> Result<EvalOutput> {
    check_alpha(f, alpha)?;
    ray_integral(f, alpha, *x, cfg, |p| {
        let v = f.value(p)?;
        Ok((v.minus_const, v.err))
    })
}

/// f_alpha'(x0) at a cuspidal rational from the differentiated ray integral.
pub fn derivative_at_cuspidal(f: &FormDescriptor, alpha: f64, x0: &Cusp, cfg: &QuadratureConfig) -> Result<EvalOutput> {
    check_alpha(f, alpha)?;
    let x = match x0 {
        Cusp::Rational { .. } => x0.to_f64(),
        Cusp::Infinity => return pre("the point must be a finite rational"),
    };
    let d = f.cusp_datum(x0)?;
    if !d.cuspidal {
        return pre(format!("{} is not cuspidal at {x0}; f_alpha is not differentiable there", f.id));
    }
    let thr = (f.weight() + 1.0) / 2.0;
    if alpha <= thr {
        return pre(format!("alpha = {alpha} must exceed (r+1)/2 = {thr} for differentiability"));
    }
    if (x0.to_f64() - x).abs() > 0.0 || HPoint::from_real(x, 1.0).den > EXACT_DEN {
        return pre("the cusp must be exactly representable");
    }
    let mut out = ray_integral(f, alpha, HPoint::from_real(x, 1.0), cfg, |p| {
        let v = f.derivative(p)?;
        Ok((v.value, v.err))
    })?;
    // the derivative integrand has no constant term
    out.method = Method::Integral;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CuspResidual {
    pub y: f64,
    pub residual: f64,
    pub main: (f64, f64),
}

/// |f(z) - c (qz - p)^{-r}| where c is the constant term of f|gamma for the
/// canonical gamma sending infinity to p/q (this equals f(p/q) m^{-r/2} in
/// the width-scaled normalization).
pub fn cusp_expansion_check(f: &FormDescriptor, pq: &Cusp, z: Complex64) -> Result<CuspResidual> {
    let (p, q) = match *pq {
        Cusp::Rational { p, q } => (p as f64, q as f64),
        Cusp::Infinity => return pre("the cusp must be finite"),
    };
    if !(z.im > 0.0) {
        return pre("Im z must be positive");
    }
    let u = z * q - p;
    if u.norm_sqr() / z.im > 2.0 {
        return pre(format!("|qz-p|^2/Im z = {:.3} exceeds 2 (outside the Ford region)", u.norm_sqr() / z.im));
    }
    let c = f.form_at_cusp(pq)?;
    let main = c * (-(u.ln()) * f.weight()).exp();
    let pt = HPoint::rational(pq.as_pair().0 as i128, pq.as_pair().1 as i128, z - pq.to_f64());
    let v = f.value(&pt)?.value;
    Ok(CuspResidual {
        y: z.im,
        residual: (v - main).norm(),
        main: (main.re, main.im),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthTable {
    pub rows: Vec<(usize, f64)>,
    /// max / median of the ratios
    pub stability: f64,
}

fn stability(rows: &[(usize, f64)]) -> f64 {
    let mut v: Vec<f64> = rows.iter().map(|r| r.1).collect();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite ratios"));
    let med = v[v.len() / 2];
    v.last().copied().unwrap_or(0.0) / med
}

/// |S_N(x)| / (N^{alpha0} ln N) with S_N = sum_{n <= N} a_n e^{2 pi i (n+kappa) x/m}.
pub fn partial_sum_growth(f: &FormDescriptor, x: f64, grid: &[usize]) -> Result<GrowthTable> {
    if grid.iter().any(|&n| n < 2) {
        return pre("N must be at least 2");
    }
    let nmax = grid.iter().copied().max().unwrap_or(2);
    let a = f.coefficients(nmax)?;
    let ph = Phaser::new(x, f.m_inf);
    let kap = f.kappa_f64();
    let mut sorted = grid.to_vec();
    sorted.sort_unstable();
    let mut rows = Vec::new();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut next = 0usize;
    for &n in &sorted {
        while next <= n {
            if a[next].norm() > 0.0 {
                acc += a[next] * ph.phase(next as f64 + kap);
            }
            next += 1;
        }
        let nf = n as f64;
        rows.push((n, acc.norm() / (nf.powf(f.alpha0()) * nf.ln())));
    }
    let s = stability(&rows);
    Ok(GrowthTable { rows, stability: s })
}

/// (a, |f(x+ia)| a^{alpha0}) samples.
pub fn vertical_growth(f: &FormDescriptor, x: f64, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if grid.iter().any(|&a| !(a > 0.0)) {
        return pre("heights must be positive");
    }
    let base = HPoint::from_real(x, 1.0);
    crate::par::map(grid, |&a| {
        let p = HPoint {
            off: Complex64::new(base.off.re, a),
            ..base
        };
        f.value(&p).map(|v| (a, v.value.norm() * a.powf(f.alpha0())))
    })
    .into_iter()
    .collect()
}

/// Gamma-function prefactor (2 pi / m)^alpha / Gamma(alpha).
pub fn ray_prefactor(alpha: f64, m: u32) -> f64 {
    (2.0 * PI / m as f64).powf(alpha) / gamma(alpha)
}

/// Is f cuspidal at the rational x (as a cusp of its group)?
pub fn cuspidal_at(f: &FormDescriptor, x: &Cusp) -> Result<bool> {
    Ok(f.cusp_datum(x)?.cuspidal)
}

/// Canonical class of x under the form's group.
pub fn class_of(f: &FormDescriptor, x: &Cusp) -> crate::modgroup::CuspClass {
    let _ = sl2z_to_cusp(x);
    cusp_class(f.group, x)
}
