//! Approximate functional equation at a rational point x0:
//!
//! f_alpha(x) = A i^{-alpha} f(x0) psi(x - x0) + B |x - x0|^{2 alpha} (x - x0)^{-r} f^sigma_alpha(sigma^{-1} x) + E(x)
//!
//! with sigma(inf) = x0, psi(h) = h^{alpha - r} (times log h when alpha - r is
//! an integer) and E of order 2 alpha - r + 1 at x0. A and B are fitted
//! together with the Taylor polynomial of E; each side of x0 gets its own
//! constants.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_integer::Integer;
use serde::Serialize;

use crate::error::{pre, Error, Result};
use crate::eval::{eval_falpha_integral_at, eval_falpha_series, QuadratureConfig};
use crate::forms::{newform, theta_conjugate_of, FormDescriptor, FormKind};
use crate::linalg::{line_fit, weighted_lstsq};
use crate::modgroup::{cusp_class, sl2z_to_cusp, Cusp, GroupId, IntMatrix2};
use crate::point::HPoint;
use crate::quad::{exp_tail, tanh_sinh};
use crate::tolerances::{AFE_CLOSURE_TOL, AFE_SLOPE_SLACK};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PsiKind {
    Power,
    PowerLog,
}

/// f^sigma = mu * form.
#[derive(Debug, Clone)]
pub struct Conjugate {
    pub mu: Complex64,
    pub form: FormDescriptor,
    pub label: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct AfeFit {
    pub a_plus: Option<Complex64>,
    pub a_minus: Option<Complex64>,
    pub b_plus: Complex64,
    pub b_minus: Complex64,
    /// Taylor polynomial of E in powers of x - x0.
    pub poly: Vec<Complex64>,
    pub condition: f64,
}

#[derive(Debug, Clone)]
pub struct AfeContext {
    pub form: FormDescriptor,
    pub alpha: f64,
    pub x0: Cusp,
    pub sigma: IntMatrix2,
    pub conjugate: Conjugate,
    pub psi_kind: PsiKind,
    /// f(x0); None when f is cuspidal there and the A-term is absent.
    pub f_x0: Option<Complex64>,
    pub fit: Option<AfeFit>,
}

/// Distances |x - x0| = 1/K with K in [2^k, 2^{k+1}) for k_min <= k <= k_max,
/// `per_block` values of K per block on each side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DyadicWindow {
    pub k_min: u32,
    pub k_max: u32,
    pub per_block: u32,
}

impl DyadicWindow {
    /// Distances 2^-2..2^-8, the range resolved by stored newform coefficients.
    pub fn coarse() -> DyadicWindow {
        DyadicWindow {
            k_min: 2,
            k_max: 8,
            per_block: 8,
        }
    }
}

impl Default for DyadicWindow {
    fn default() -> Self {
        DyadicWindow {
            k_min: 5,
            k_max: 14,
            per_block: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AfeSample {
    pub h: f64,
    pub block: u32,
    pub f_alpha: Complex64,
    /// f^sigma_alpha(sigma^{-1} x), including mu
    pub conj: Complex64,
    pub err: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AfeReport {
    pub form: String,
    pub alpha: f64,
    pub x0: String,
    pub sigma: [i64; 4],
    pub conjugate: String,
    #[serde(rename = "A_hat")]
    pub a_hat: Option<[f64; 2]>,
    #[serde(rename = "B_hat")]
    pub b_hat: [f64; 2],
    #[serde(rename = "A_minus")]
    pub a_minus: Option<[f64; 2]>,
    #[serde(rename = "B_minus")]
    pub b_minus: [f64; 2],
    /// max of |A- - A+|/|A+| and |B- - B+|/|B+|: one constant per term
    /// serves both sides when the powers take principal values
    pub side_mismatch: f64,
    pub poly: Vec<[f64; 2]>,
    /// (distance 2^-k, max |E - P| over the block)
    pub blocks: Vec<(f64, f64)>,
    pub slope: f64,
    pub slope_stderr: f64,
    pub threshold: f64,
    pub pass: bool,
}

fn pair(c: Complex64) -> [f64; 2] {
    [c.re, c.im]
}

/// sigma with sigma(inf) = x0 and f|sigma = conj, for the supported cases.
pub fn build_context(f: &FormDescriptor, alpha: f64, x0: &Cusp) -> Result<AfeContext> {
    let (p, q) = match *x0 {
        Cusp::Rational { p, q } => (p, q),
        Cusp::Infinity => return pre("x0 must be a finite rational"),
    };
    let (sigma, conj) = match &f.kind {
        FormKind::Theta(m) => {
            let sigma = sl2z_to_cusp(x0);
            let (mem, c) = theta_conjugate_of(*m, &sigma)?;
            let g = FormDescriptor::theta(mem);
            let label = format!("({:.6}{:+.6}i) {}", c.re, c.im, g.id);
            (sigma, Conjugate { mu: c, form: g, label })
        }
        FormKind::Level1(_) => (
            sl2z_to_cusp(x0),
            Conjugate {
                mu: Complex64::new(1.0, 0.0),
                form: f.clone(),
                label: f.id.clone(),
            },
        ),
        FormKind::Newform(t) => newform_conjugate(f, t, p, q)?,
        _ => {
            return Err(Error::ConjugateUnknown(format!(
                "{}: supply sigma and the conjugate explicitly",
                f.id
            )))
        }
    };
    build_context_with(f, alpha, x0, sigma, conj)
}

/// Context for a caller-supplied sigma and conjugate f|sigma = mu * g.
pub fn build_context_with(f: &FormDescriptor, alpha: f64, x0: &Cusp, sigma: IntMatrix2, conj: Conjugate) -> Result<AfeContext> {
    if !(alpha > f.alpha0()) {
        return pre(format!("alpha = {alpha} must exceed alpha0 = {}", f.alpha0()));
    }
    if sigma.det() <= 0 {
        return pre(format!("{sigma} must have positive determinant"));
    }
    if sigma.c >= 0 {
        return pre(format!("{sigma} must have a negative bottom-left entry"));
    }
    if sigma.apply_cusp(&Cusp::Infinity) != *x0 {
        return pre(format!("{sigma} does not send infinity to {x0}"));
    }
    let r = f.weight();
    let d = alpha - r;
    let psi_kind = if (d - d.round()).abs() < 1e-12 { PsiKind::PowerLog } else { PsiKind::Power };
    let datum = f.cusp_datum(x0);
    let f_x0 = match datum {
        Ok(dm) if dm.cuspidal => None,
        Ok(dm) => Some(Complex64::new(dm.value.0, dm.value.1)),
        Err(_) if f.is_cusp_form => None,
        Err(e) => return Err(e),
    };
    Ok(AfeContext {
        form: f.clone(),
        alpha,
        x0: *x0,
        sigma,
        conjugate: conj,
        psi_kind,
        f_x0,
        fit: None,
    })
}

/// Atkin-Lehner type sigma = [[Qx, y], [Nz, Qw]] with sigma(inf) = p/q, or
/// the level-45 relation at 1/3 + n.
fn newform_conjugate(f: &FormDescriptor, t: &newform::NewformTable, p: i64, q: i64) -> Result<(IntMatrix2, Conjugate)> {
    let n = t.level as i64;
    let mut divisors: Vec<i64> = (1..=n).filter(|d| n % d == 0 && d.gcd(&(n / d)) == 1).collect();
    divisors.sort_unstable();
    for &qq in &divisors {
        let eps = if qq == 1 { Some(1) } else { t.al_eigenvalue(qq as u64) };
        let Some(eps) = eps else { continue };
        let r = n / qq;
        for z in 1..=(n * q) {
            let num = p as i128 * n as i128 * z as i128;
            let den = qq as i128 * q as i128;
            if num % den != 0 {
                continue;
            }
            let x = (num / den) as i64;
            // Q x w - r z y = 1
            let (u, v) = (qq * x, r * z);
            let e = u.extended_gcd(&v);
            if e.gcd != 1 {
                continue;
            }
            let (w, y) = (e.x, -e.y);
            let sigma = IntMatrix2::raw(-qq * x, -y, -n * z, -qq * w);
            let mu = Complex64::new(eps as f64, 0.0);
            let label = if eps > 0 { f.id.clone() } else { format!("-{}", f.id) };
            return Ok((sigma, Conjugate { mu, form: f.clone(), label }));
        }
    }
    if t.level == 45 && q == 3 && p.rem_euclid(3) == 1 {
        let k = (p - 1) / 3;
        let sigma = IntMatrix2::raw(1, k, 0, 1).mul(&IntMatrix2::raw(-15, 1, -45, 0));
        let h = FormDescriptor::newform(newform::bundled("15")?);
        let r3 = 3f64.sqrt();
        let i = Complex64::i();
        let g = FormDescriptor::combination(
            "f/2 - i h/(2 sqrt3) - i (3 sqrt3/2) h(3z)",
            vec![(Complex64::new(0.5, 0.0), f.clone()), (-i / (2.0 * r3), h.clone()), (-i * 1.5 * r3, h.dilate(3))],
        )?;
        let label = g.id.clone();
        return Ok((
            sigma,
            Conjugate {
                mu: Complex64::new(1.0, 0.0),
                form: g,
                label,
            },
        ));
    }
    let class = cusp_class(GroupId::Gamma0(t.level), &Cusp::new(p, q));
    Err(Error::ConjugateUnknown(format!(
        "{}: the cusp {} (class {}) is not related to infinity by a known involution",
        f.id,
        Cusp::new(p, q),
        class.label
    )))
}

/// f_alpha at an exact point: the integral route when the form can be
/// evaluated near the axis, otherwise the series over all stored
/// coefficients.
pub fn falpha_at(f: &FormDescriptor, alpha: f64, x: &HPoint, cfg: &QuadratureConfig) -> Result<(Complex64, f64)> {
    let n = f.max_index();
    if n == usize::MAX {
        let o = eval_falpha_integral_at(f, alpha, x, cfg)?;
        Ok((o.value, o.err_estimate))
    } else {
        let o = eval_falpha_series(f, alpha, x.r(), n)?;
        Ok((o.value, o.err_estimate))
    }
}

impl AfeContext {
    fn x0_pair(&self) -> (i128, i128) {
        let (p, q) = self.x0.as_pair();
        (p as i128, q as i128)
    }

    /// x0 + s/k and sigma^{-1}(x0 + s/k) = -(det k s)/c^2 - d/c as exact points.
    fn points(&self, s: i128, k: i128) -> (HPoint, HPoint) {
        let (p, q) = self.x0_pair();
        let x = HPoint::rational(p * k + s * q, q * k, Complex64::new(0.0, 0.0));
        let (c, d) = (self.sigma.c as i128, self.sigma.d as i128);
        let det = self.sigma.det();
        let u = HPoint::rational(-det * k * s - d * c, c * c, Complex64::new(0.0, 0.0));
        (x, u)
    }

    /// Samples at x0 +- 1/K over the window.
    pub fn sample(&self, window: &DyadicWindow, cfg: &QuadratureConfig) -> Result<Vec<AfeSample>> {
        if window.k_min > window.k_max || window.k_max > 40 || window.per_block == 0 {
            return pre("invalid dyadic window");
        }
        let mut jobs = Vec::new();
        for k in window.k_min..=window.k_max {
            let base = 1i128 << k;
            for i in 0..window.per_block as i128 {
                let kk = base + i * base / window.per_block as i128;
                for s in [1i128, -1] {
                    jobs.push((k, s, kk));
                }
            }
        }
        let out = crate::par::map(&jobs, |&(k, s, kk)| -> Result<AfeSample> {
            let (x, u) = self.points(s, kk);
            let (fa, e1) = falpha_at(&self.form, self.alpha, &x, cfg)?;
            let (g, e2) = falpha_at(&self.conjugate.form, self.alpha, &u, cfg)?;
            Ok(AfeSample {
                h: s as f64 / kk as f64,
                block: k,
                f_alpha: fa,
                conj: self.conjugate.mu * g,
                err: e1 + e2 * self.conjugate.mu.norm(),
            })
        });
        out.into_iter().collect()
    }

    fn psi(&self, h: f64) -> Complex64 {
        let z = Complex64::new(h, 0.0);
        let p = z.powf(self.alpha - self.form.weight());
        match self.psi_kind {
            PsiKind::Power => p,
            PsiKind::PowerLog => p * z.ln(),
        }
    }

    /// |h|^{2 alpha} h^{-r}, principal branch.
    fn b_factor(&self, h: f64) -> Complex64 {
        Complex64::new(h, 0.0).powf(-self.form.weight()) * h.abs().powf(2.0 * self.alpha)
    }

    fn a_factor(&self, h: f64) -> Option<Complex64> {
        self.f_x0
            .map(|v| Complex64::from_polar(1.0, -PI * self.alpha / 2.0) * v * self.psi(h))
    }

    pub fn poly_degree(&self) -> usize {
        let s = 2.0 * self.alpha - self.form.weight() + 1.0;
        (s.ceil() as usize).saturating_sub(1)
    }

    pub fn threshold(&self) -> f64 {
        2.0 * self.alpha - self.form.weight() + 1.0 - AFE_SLOPE_SLACK
    }

    fn columns(&self, s: &AfeSample, scale: f64) -> Vec<Complex64> {
        let zero = Complex64::new(0.0, 0.0);
        let pos = s.h > 0.0;
        let mut row = Vec::new();
        if let Some(a) = self.a_factor(s.h) {
            row.push(if pos { a } else { zero });
            row.push(if pos { zero } else { a });
            if self.psi_kind == PsiKind::PowerLog {
                // one-sided h^{alpha - r} is not polynomial across x0
                let plain = Complex64::new(s.h.abs().powf(self.alpha - self.form.weight()), 0.0);
                row.push(if pos { plain } else { zero });
            }
        }
        let b = self.b_factor(s.h) * s.conj;
        row.push(if pos { b } else { zero });
        row.push(if pos { zero } else { b });
        for j in 0..=self.poly_degree() {
            row.push(Complex64::new((s.h * scale).powi(j as i32), 0.0));
        }
        row
    }

    /// Weighted least squares for A, B and the Taylor polynomial of E; the
    /// weight |h|^{-(2 alpha - r + 1)} equalizes the expected residual.
    pub fn fit_constants(&mut self, samples: &[AfeSample]) -> Result<(Option<Complex64>, Complex64)> {
        if samples.len() < 40 {
            return pre(format!("{} samples given, at least 40 needed", samples.len()));
        }
        let hmax = samples.iter().map(|s| s.h.abs()).fold(0.0, f64::max);
        let scale = 1.0 / hmax;
        let order = 2.0 * self.alpha - self.form.weight() + 1.0;
        let rows: Vec<Vec<Complex64>> = samples.iter().map(|s| self.columns(s, scale)).collect();
        let y: Vec<Complex64> = samples.iter().map(|s| s.f_alpha).collect();
        let w: Vec<f64> = samples.iter().map(|s| (s.h.abs() * scale).powf(-order)).collect();
        let fit = weighted_lstsq(&rows, &y, &w)?;
        let mut c = fit.coef.into_iter();
        let (a_plus, a_minus) = if self.f_x0.is_some() {
            let ap = c.next();
            let am = c.next();
            if self.psi_kind == PsiKind::PowerLog {
                c.next();
            }
            (ap, am)
        } else {
            (None, None)
        };
        let b_plus = c.next().expect("B column");
        let b_minus = c.next().expect("B column");
        let poly: Vec<Complex64> = c.enumerate().map(|(j, v)| v * scale.powi(j as i32)).collect();
        self.fit = Some(AfeFit {
            a_plus,
            a_minus,
            b_plus,
            b_minus,
            poly,
            condition: fit.condition,
        });
        Ok((a_plus, b_plus))
    }

    fn fitted(&self) -> Result<&AfeFit> {
        self.fit.as_ref().ok_or_else(|| Error::Precondition("constants not fitted".into()))
    }

    /// Main term from a sample's stored conjugate value.
    pub fn main_from_sample(&self, s: &AfeSample) -> Result<Complex64> {
        let fit = self.fitted()?;
        let pos = s.h > 0.0;
        let mut v = self.b_factor(s.h) * s.conj * if pos { fit.b_plus } else { fit.b_minus };
        if let (Some(a), Some(ap), Some(am)) = (self.a_factor(s.h), fit.a_plus, fit.a_minus) {
            v += a * if pos { ap } else { am };
        }
        Ok(v)
    }

    /// Both summands of the main term at x = x0 + 1/k * s (s = +-1).
    pub fn main_term(&self, s: i64, k: i64, cfg: &QuadratureConfig) -> Result<Complex64> {
        if k == 0 || s.abs() != 1 {
            return pre("x must differ from x0");
        }
        let (_, u) = self.points(s as i128, k as i128);
        let (g, e) = falpha_at(&self.conjugate.form, self.alpha, &u, cfg)?;
        let sample = AfeSample {
            h: s as f64 / k as f64,
            block: 0,
            f_alpha: Complex64::new(0.0, 0.0),
            conj: self.conjugate.mu * g,
            err: e,
        };
        self.main_from_sample(&sample)
    }

    pub fn poly_at(&self, h: f64) -> Result<Complex64> {
        let fit = self.fitted()?;
        Ok(fit.poly.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * h + c))
    }

    /// Slope of log max|E - P| against log|x - x0| over the dyadic blocks.
    pub fn residual_report(&self, samples: &[AfeSample]) -> Result<AfeReport> {
        let fit = self.fitted()?;
        let mut blocks: Vec<(f64, f64)> = Vec::new();
        let mut noise: f64 = 0.0;
        let scale = samples.iter().map(|s| s.f_alpha.norm()).fold(0.0, f64::max);
        for s in samples {
            let r = (s.f_alpha - self.main_from_sample(s)? - self.poly_at(s.h)?).norm();
            noise = noise.max(s.err);
            let d = 2f64.powi(-(s.block as i32));
            match blocks.iter_mut().find(|b| b.0 == d) {
                Some(b) => b.1 = b.1.max(r),
                None => blocks.push((d, r)),
            }
        }
        blocks.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite distances"));
        // rounding at the smallest distances reaches the widest block amplified by the weights
        let floor = noise.max(AFE_CLOSURE_TOL * scale);
        let (slope, stderr) = if blocks.iter().all(|b| b.1 <= floor) {
            (f64::INFINITY, 0.0)
        } else {
            let x: Vec<f64> = blocks.iter().map(|b| b.0.ln()).collect();
            let y: Vec<f64> = blocks.iter().map(|b| b.1.max(f64::MIN_POSITIVE).ln()).collect();
            let (_, b, se) = line_fit(&x, &y);
            (b, se)
        };
        let threshold = self.threshold();
        let mut side_mismatch = (fit.b_minus - fit.b_plus).norm() / fit.b_plus.norm();
        if let (Some(ap), Some(am)) = (fit.a_plus, fit.a_minus) {
            side_mismatch = side_mismatch.max((am - ap).norm() / ap.norm());
        }
        let (a, b, c, d) = (self.sigma.a, self.sigma.b, self.sigma.c, self.sigma.d);
        Ok(AfeReport {
            form: self.form.id.clone(),
            alpha: self.alpha,
            x0: self.x0.to_string(),
            sigma: [a, b, c, d],
            conjugate: self.conjugate.label.clone(),
            a_hat: fit.a_plus.map(pair),
            b_hat: pair(fit.b_plus),
            a_minus: fit.a_minus.map(pair),
            b_minus: pair(fit.b_minus),
            side_mismatch,
            poly: fit.poly.iter().map(|c| pair(*c)).collect(),
            blocks,
            slope,
            slope_stderr: stderr,
            threshold,
            pass: slope >= threshold,
        })
    }
}


/// Samples, fits and reports the residual slope.
pub fn error_regularity_check(ctx: &mut AfeContext, window: &DyadicWindow, cfg: &QuadratureConfig) -> Result<AfeReport> {
    if window.k_max - window.k_min + 1 < 8 {
        return pre("the slope needs at least 8 dyadic distances");
    }
    let samples = ctx.sample(window, cfg)?;
    ctx.fit_constants(&samples)?;
    ctx.residual_report(&samples)
}

#[derive(Debug, Clone, Serialize)]
pub struct SpotCheck {
    pub x: f64,
    pub poly: Complex64,
    pub quadrature: Complex64,
    pub rel_diff: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EichlerReport {
    pub form: String,
    pub alpha: f64,
    pub x0: String,
    pub b_hat: [f64; 2],
    /// coefficients of E in powers of x - x0
    pub poly: Vec<[f64; 2]>,
    pub max_fit_residual: f64,
    pub spots: Vec<SpotCheck>,
    pub max_spot_diff: f64,
    pub pass: bool,
}

/// For a full-level cusp form of integral weight r and alpha = r - 1 the
/// error term is a polynomial of degree r - 2. It is fitted on
/// [x0 - w, x0 + w] and compared with
/// (2 pi)^{r-1} / (i^{r-1} Gamma(r-1)) int_{x0}^{i inf} (z - x)^{r-2} f(z) dz.
pub fn eichler_check(f: &FormDescriptor, alpha: f64, x0: &Cusp, half_width: f64, cfg: &QuadratureConfig) -> Result<EichlerReport> {
    let r = f.weight();
    if f.group != GroupId::SL2Z || !f.is_cusp_form || r.fract() != 0.0 {
        return pre(format!("{} is not a full-level cusp form of integral weight", f.id));
    }
    if (alpha - (r - 1.0)).abs() > 1e-12 {
        return pre(format!("alpha = {alpha} must equal r - 1 = {}", r - 1.0));
    }
    if !(half_width > 0.0 && half_width < 1.0) {
        return pre("half width must lie in (0, 1)");
    }
    let ctx = build_context(f, alpha, x0)?;
    let (p, q) = ctx.x0_pair();
    let steps = 40i128;
    // x = x0 + j w / steps with w = num/den rational
    let wq = 1_000_000i128;
    let wn = (half_width * wq as f64).round() as i128;
    let mut jobs = Vec::new();
    for j in -steps..=steps {
        if j != 0 {
            jobs.push(j);
        }
    }
    let sigma = ctx.sigma;
    let det = sigma.det();
    let (c, d) = (sigma.c as i128, sigma.d as i128);
    let vals = crate::par::map(&jobs, |&j| -> Result<(f64, Complex64, Complex64)> {
        // h = j wn / (steps wq)
        let (hn, hd) = (j * wn, steps * wq);
        let x = HPoint::rational(p * hd + hn * q, q * hd, Complex64::new(0.0, 0.0));
        // sigma^{-1} x = -det/(c^2 h) - d/c
        let u = HPoint::rational(-det * hd - d * c * hn, c * c * hn, Complex64::new(0.0, 0.0));
        let (fa, _) = falpha_at(f, alpha, &x, cfg)?;
        let (g, _) = falpha_at(f, alpha, &u, cfg)?;
        Ok((hn as f64 / hd as f64, fa, g))
    });
    let vals: Vec<(f64, Complex64, Complex64)> = vals.into_iter().collect::<Result<_>>()?;
    let deg = (r - 2.0) as usize;
    let scale = 1.0 / half_width;
    let rows: Vec<Vec<Complex64>> = vals
        .iter()
        .map(|(h, _, g)| {
            let mut row = vec![ctx.b_factor(*h) * g];
            for k in 0..=deg {
                row.push(Complex64::new((h * scale).powi(k as i32), 0.0));
            }
            row
        })
        .collect();
    let y: Vec<Complex64> = vals.iter().map(|v| v.1).collect();
    let fit = weighted_lstsq(&rows, &y, &vec![1.0; y.len()])?;
    let fscale = y.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let max_res = fit.residuals.iter().map(|v| v.norm()).fold(0.0, f64::max) / fscale;
    let b = fit.coef[0];
    let poly: Vec<Complex64> = fit.coef[1..].iter().enumerate().map(|(k, v)| v * scale.powi(k as i32)).collect();
    let eval_poly = |h: f64| poly.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * h + c);
    let mut spots = Vec::new();
    for s in [-0.75, -0.25, 0.25, 0.5, 0.875] {
        let h = s * half_width;
        let quad = eichler_integral(f, x0, h, cfg)?;
        let pv = eval_poly(h);
        spots.push(SpotCheck {
            x: x0.to_f64() + h,
            poly: pv,
            quadrature: quad,
            rel_diff: (pv - quad).norm() / quad.norm().max(1e-300),
        });
    }
    let max_spot = spots.iter().map(|s| s.rel_diff).fold(0.0, f64::max);
    Ok(EichlerReport {
        form: f.id.clone(),
        alpha,
        x0: x0.to_string(),
        b_hat: pair(b),
        poly: poly.iter().map(|c| pair(*c)).collect(),
        max_fit_residual: max_res,
        spots,
        max_spot_diff: max_spot,
        pass: max_res < 1e-6 && max_spot < 1e-4,
    })
}

/// (2 pi)^{r-1} / (i^{r-1} Gamma(r-1)) * i int_0^inf (it - h)^{r-2} f(x0 + it) dt.
pub fn eichler_integral(f: &FormDescriptor, x0: &Cusp, h: f64, cfg: &QuadratureConfig) -> Result<Complex64> {
    let r = f.weight();
    let (p, q) = x0.as_pair();
    let base = HPoint::rational(p as i128, q as i128, Complex64::new(0.0, 0.0));
    let err = std::sync::Mutex::new(None::<Error>);
    let g = |t: f64| {
        let pt = HPoint { off: Complex64::new(0.0, t), ..base };
        match f.value(&pt) {
            Ok(v) => Complex64::new(-h, t).powi((r - 2.0) as i32) * v.value,
            Err(e) => {
                err.lock().expect("quadrature state").get_or_insert(e);
                Complex64::new(0.0, 0.0)
            }
        }
    };
    let mut total = exp_tail(&g, 2.0, 2.0 * PI, cfg.abs_tol, cfg.max_level);
    let mut hi = 2.0;
    // f decays like exp(-2 pi / (q^2 t)) toward the cusp
    let stop = 0.02 / (q * q) as f64;
    while hi > stop {
        let lo = hi / 4.0;
        total = total + tanh_sinh(&g, lo, hi, cfg.abs_tol, cfg.max_level);
        hi = lo;
    }
    if let Some(e) = err.lock().expect("quadrature state").take() {
        return Err(e);
    }
    let c = (2.0 * PI).powf(r - 1.0) / statrs::function::gamma::gamma(r - 1.0);
    let ipow = Complex64::i().powi(-(r as i32 - 1));
    Ok(total.value * c * ipow * Complex64::i())
}

#[derive(Debug, Clone, Serialize)]
pub struct PatternRow {
    pub x: f64,
    pub g: Complex64,
    pub main: Complex64,
    pub poly: Complex64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelfSimilarityReport {
    pub form: String,
    pub alpha: f64,
    pub x0: String,
    pub sigma: [i64; 4],
    pub conjugate: String,
    pub b_hat: [f64; 2],
    pub slope: f64,
    pub threshold: f64,
    /// correlation between g - P and the main term over the window
    pub correlation: f64,
    pub rows: Vec<PatternRow>,
}

/// Local pattern of a newform's fractional integral at x0 against the
/// rescaled conjugate. The series route limits the window to distances the
/// stored coefficients resolve.
pub fn self_similarity_report(f: &FormDescriptor, alpha: f64, x0: &Cusp, window: &DyadicWindow, cfg: &QuadratureConfig) -> Result<SelfSimilarityReport> {
    if !matches!(f.kind, FormKind::Newform(_)) {
        return pre(format!("{} is not a newform", f.id));
    }
    let mut ctx = build_context(f, alpha, x0)?;
    let samples = ctx.sample(window, cfg)?;
    ctx.fit_constants(&samples)?;
    let rep = ctx.residual_report(&samples)?;
    let mut rows = Vec::with_capacity(samples.len());
    let (mut sgm, mut smm, mut sgg) = (0.0, 0.0, 0.0);
    for s in &samples {
        let main = ctx.main_from_sample(s)?;
        let poly = ctx.poly_at(s.h)?;
        let g = s.f_alpha - poly;
        sgm += (g.conj() * main).re;
        smm += main.norm_sqr();
        sgg += g.norm_sqr();
        rows.push(PatternRow {
            x: x0.to_f64() + s.h,
            g: s.f_alpha,
            main,
            poly,
        });
    }
    rows.sort_by(|a, b| a.x.partial_cmp(&b.x).expect("finite abscissae"));
    Ok(SelfSimilarityReport {
        form: f.id.clone(),
        alpha,
        x0: x0.to_string(),
        sigma: rep.sigma,
        conjugate: rep.conjugate,
        b_hat: rep.b_hat,
        slope: rep.slope,
        threshold: rep.threshold,
        correlation: sgm / (smm * sgg).sqrt().max(f64::MIN_POSITIVE),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn contexts() {
        let th = FormDescriptor::by_name("theta").unwrap();
        let c = build_context(&th, 1.0, &Cusp::integer(1)).unwrap();
        assert_eq!(c.sigma, IntMatrix2::raw(-1, 1, -1, 0));
        assert!(c.conjugate.form.id.contains("2") || c.conjugate.label.contains("theta2"), "{}", c.conjugate.label);
        assert!(c.f_x0.is_none());
        assert_eq!(c.psi_kind, PsiKind::Power);
        let c0 = build_context(&th, 1.0, &Cusp::integer(0)).unwrap();
        assert_eq!(c0.sigma, IntMatrix2::raw(0, 1, -1, 0));
        assert!(c0.f_x0.is_some());

        let d = FormDescriptor::by_name("delta").unwrap();
        let c = build_context(&d, 11.0, &Cusp::integer(0)).unwrap();
        assert_eq!(c.sigma, IntMatrix2::raw(0, 1, -1, 0));
        assert_eq!(c.conjugate.mu, Complex64::new(1.0, 0.0));
        assert_eq!(c.psi_kind, PsiKind::PowerLog);
        assert!(c.f_x0.is_none());

        let f14 = FormDescriptor::by_name("14").unwrap();
        let c = build_context(&f14, 1.8, &Cusp::new(1, 2)).unwrap();
        assert_eq!(c.sigma, IntMatrix2::raw(-7, -3, -14, -7));
        assert_eq!(c.conjugate.mu, Complex64::new(-1.0, 0.0));

        let f49 = FormDescriptor::by_name("49").unwrap();
        assert!(matches!(build_context(&f49, 1.75, &Cusp::new(1, 7)), Err(Error::ConjugateUnknown(_))));
        let f45 = FormDescriptor::by_name("45").unwrap();
        let c = build_context(&f45, 1.75, &Cusp::new(1, 3)).unwrap();
        assert_eq!(c.sigma, IntMatrix2::raw(-15, 1, -45, 0));
    }

    #[test]
    fn conjugate_matches_slash() {
        // f|sigma = mu g at a few points
        let cases: Vec<(&str, Cusp)> = vec![
            ("theta", Cusp::integer(0)),
            ("theta", Cusp::integer(1)),
            ("theta", Cusp::new(1, 3)),
            ("delta", Cusp::new(2, 5)),
            ("14", Cusp::new(1, 2)),
            ("14", Cusp::new(1, 7)),
            ("45", Cusp::new(1, 3)),
        ];
        for (name, x0) in cases {
            let f = FormDescriptor::by_name(name).unwrap();
            let c = build_context(&f, f.alpha0() + 1.0, &x0).unwrap();
            // near the top of the isometric circle both z and sigma z stay high
            let (sc, sd) = (c.sigma.c as f64, c.sigma.d as f64);
            let top = Complex64::new(-sd / sc, (c.sigma.det() as f64).sqrt() / sc.abs());
            for z in [top + Complex64::new(0.01, 0.0), top + Complex64::new(-0.02, 0.1 * top.im)] {
                let lhs = f.slash(&c.sigma, z).unwrap();
                let rhs = c.conjugate.mu * c.conjugate.form.value_at(z).unwrap().value;
                assert!((lhs - rhs).norm() < 1e-8 * rhs.norm().max(1e-3), "{name} at {x0}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn theta_error_regularity() {
        let th = FormDescriptor::by_name("theta").unwrap();
        for x0 in [Cusp::integer(0), Cusp::integer(1)] {
            let mut ctx = build_context(&th, 1.0, &x0).unwrap();
            let rep = error_regularity_check(&mut ctx, &DyadicWindow::default(), &q()).unwrap();
            assert!(rep.pass, "x0 = {x0}: slope {:.3} +- {:.3}, blocks {:?}", rep.slope, rep.slope_stderr, rep.blocks);
            assert!(rep.side_mismatch < 1e-3, "{}", rep.side_mismatch);
            assert!(rep.b_hat[0] > 0.0 && rep.b_hat[1].abs() < 1e-3 * rep.b_hat[0], "B = {:?}", rep.b_hat);
            if x0 == Cusp::integer(0) {
                let a = rep.a_hat.unwrap();
                assert!(a[0].hypot(a[1]) > 1e-3);
            } else {
                assert!(rep.a_hat.is_none());
            }
        }
    }

    #[test]
    fn b_is_window_independent() {
        let th = FormDescriptor::by_name("theta").unwrap();
        let mut b = Vec::new();
        for (lo, hi) in [(6, 10), (11, 15)] {
            let mut ctx = build_context(&th, 1.0, &Cusp::integer(1)).unwrap();
            let s = ctx
                .sample(
                    &DyadicWindow {
                        k_min: lo,
                        k_max: hi,
                        per_block: 8,
                    },
                    &q(),
                )
                .unwrap();
            ctx.fit_constants(&s).unwrap();
            b.push(ctx.fit.unwrap().b_plus);
        }
        assert!((b[0] - b[1]).norm() < 0.01 * b[0].norm(), "{} vs {}", b[0], b[1]);
    }

    #[test]
    fn closure_gives_infinite_slope() {
        let th = FormDescriptor::by_name("theta").unwrap();
        let mut ctx = build_context(&th, 1.0, &Cusp::integer(0)).unwrap();
        let w = DyadicWindow::default();
        let mut s = ctx.sample(&w, &q()).unwrap();
        ctx.fit_constants(&s).unwrap();
        for x in s.iter_mut() {
            x.f_alpha = ctx.main_from_sample(x).unwrap() + ctx.poly_at(x.h).unwrap();
        }
        ctx.fit_constants(&s).unwrap();
        let rep = ctx.residual_report(&s).unwrap();
        assert!(rep.slope.is_infinite() && rep.pass, "{:?}", rep.blocks);
    }

    #[test]
    fn derivative_is_linear_coefficient() {
        let th = FormDescriptor::by_name("theta").unwrap();
        let mut ctx = build_context(&th, 1.0, &Cusp::integer(1)).unwrap();
        let s = ctx.sample(&DyadicWindow::default(), &q()).unwrap();
        ctx.fit_constants(&s).unwrap();
        let p1 = ctx.fit.as_ref().unwrap().poly[1];
        let d = crate::eval::derivative_at_cuspidal(&th, 1.0, &Cusp::integer(1), &q()).unwrap();
        assert!((p1 - d.value).norm() < 1e-3 * d.value.norm(), "{p1} vs {}", d.value);
    }

    #[test]
    fn eichler_delta() {
        let d = FormDescriptor::by_name("delta").unwrap();
        let rep = eichler_check(&d, 11.0, &Cusp::integer(0), 0.4, &q()).unwrap();
        assert!(rep.max_fit_residual < 1e-6, "fit residual {:.2e}", rep.max_fit_residual);
        assert!(rep.max_spot_diff < 1e-4, "{:?}", rep.spots);
        assert!((rep.b_hat[0] - 1.0).abs() < 1e-6 && rep.b_hat[1].abs() < 1e-6, "B = {:?}", rep.b_hat);
        assert!(eichler_check(&d, 10.0, &Cusp::integer(0), 0.4, &q()).is_err());
    }

    #[test]
    fn newform_patterns() {
        let f14 = FormDescriptor::by_name("14").unwrap();
        let r = self_similarity_report(&f14, 1.8, &Cusp::new(1, 2), &DyadicWindow::coarse(), &q()).unwrap();
        assert!(r.correlation > 0.8 && r.b_hat[0] > 0.0, "corr {} B {:?}", r.correlation, r.b_hat);
        assert!(r.conjugate.starts_with('-'));
        let f45 = FormDescriptor::by_name("45").unwrap();
        let r = self_similarity_report(&f45, 1.75, &Cusp::new(1, 3), &DyadicWindow::coarse(), &q()).unwrap();
        assert!(r.correlation > 0.8 && r.b_hat[0] > 0.0, "corr {} B {:?}", r.correlation, r.b_hat);
        let f49 = FormDescriptor::by_name("49").unwrap();
        assert!(matches!(
            self_similarity_report(&f49, 1.75, &Cusp::new(1, 7), &DyadicWindow::coarse(), &q()),
            Err(Error::ConjugateUnknown(_))
        ));
    }

    #[test]
    fn main_term_needs_distinct_point() {
        let th = FormDescriptor::by_name("theta").unwrap();
        let ctx = build_context(&th, 1.0, &Cusp::integer(0)).unwrap();
        assert!(ctx.main_term(1, 0, &q()).is_err());
        assert!(ctx.main_term(1, 64, &q()).is_err());
    }
}
