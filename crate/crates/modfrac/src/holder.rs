//! Pointwise Hoelder exponents of f_alpha: closed forms at rationals and
//! irrationals, the spectrum of singularities, differentiability, and two
//! empirical estimators.

use num_complex::Complex64;
use serde::Serialize;

use crate::diophantine::RealDescriptor;
use crate::error::{pre, Error, Result};
use crate::eval::{derivative_at_cuspidal, eval_falpha_integral_at, QuadratureConfig};
use crate::forms::FormDescriptor;
use crate::linalg::{line_fit, weighted_lstsq};
use crate::modgroup::Cusp;
use crate::point::HPoint;

#[derive(Debug, Clone)]
pub enum PointDescriptor {
    Rational { cusp: Cusp, cuspidal: bool },
    Irrational { real: RealDescriptor, tau: Option<f64> },
}

impl PointDescriptor {
    /// `p/q`, an integer, `golden`, `sqrt2`, or a decimal. Quadratic surds
    /// have bounded partial quotients and get tau_x = 2; decimals are
    /// treated as irrationals of unknown tau_x.
    pub fn parse(f: &FormDescriptor, s: &str) -> Result<PointDescriptor> {
        let t = s.trim().to_ascii_lowercase();
        if t.parse::<i64>().is_ok() {
            return Self::rational(f, Cusp::parse(&t)?);
        }
        let real = RealDescriptor::parse(&t)?;
        Ok(match real {
            RealDescriptor::Rational { p, q } => return Self::rational(f, Cusp::new(p, q)),
            RealDescriptor::QuadraticSurd { .. } => PointDescriptor::Irrational { real, tau: Some(2.0) },
            _ => PointDescriptor::Irrational { real, tau: None },
        })
    }

    pub fn rational(f: &FormDescriptor, cusp: Cusp) -> Result<PointDescriptor> {
        if cusp.is_infinity() {
            return pre("the point must be finite");
        }
        let cuspidal = match f.cusp_datum(&cusp) {
            Ok(d) => d.cuspidal,
            Err(_) if f.is_cusp_form => true,
            Err(e) => return Err(e),
        };
        Ok(PointDescriptor::Rational { cusp, cuspidal })
    }

    pub fn with_tau(self, tau: f64) -> PointDescriptor {
        match self {
            PointDescriptor::Irrational { real, .. } => PointDescriptor::Irrational { real, tau: Some(tau) },
            p => p,
        }
    }

    pub fn label(&self) -> String {
        match self {
            PointDescriptor::Rational { cusp, .. } => {
                let (p, q) = cusp.as_pair();
                format!("{p}/{q}")
            }
            PointDescriptor::Irrational { real, .. } => match real {
                RealDescriptor::CfDefined { label, .. } => label.clone(),
                r => format!("{}", r.value()),
            },
        }
    }

    pub fn value(&self) -> f64 {
        match self {
            PointDescriptor::Rational { cusp, .. } => cusp.to_f64(),
            PointDescriptor::Irrational { real, .. } => real.value(),
        }
    }

    /// Exact point for rationals, dyadic snap otherwise.
    pub fn hpoint(&self) -> HPoint {
        match self {
            PointDescriptor::Rational { cusp, .. } => {
                let (p, q) = cusp.as_pair();
                HPoint::rational(p as i128, q as i128, Complex64::new(0.0, 0.0))
            }
            PointDescriptor::Irrational { real, .. } => HPoint::from_real(real.value(), 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolderTriple {
    pub beta: f64,
    pub beta_star: f64,
    pub beta_star_star: f64,
    /// a logarithmic endpoint case: the exponent is attained only up to a log factor
    pub log_flag: bool,
}

fn int_part(x: f64) -> f64 {
    x.floor()
}

fn frac_part(x: f64) -> f64 {
    x - x.floor()
}

fn is_int(x: f64) -> bool {
    (x - x.round()).abs() < 1e-12
}

fn check_alpha(f: &FormDescriptor, alpha: f64) -> Result<()> {
    if !(alpha > f.alpha0()) {
        return pre(format!("alpha = {alpha} must exceed alpha0 = {}", f.alpha0()));
    }
    Ok(())
}

pub fn theory_exponents(f: &FormDescriptor, alpha: f64, pt: &PointDescriptor) -> Result<HolderTriple> {
    check_alpha(f, alpha)?;
    let r = f.weight();
    let a0 = f.alpha0();
    let cusp_form = f.is_cusp_form;
    Ok(match pt {
        PointDescriptor::Rational { cuspidal, .. } => {
            let beta = if *cuspidal { 2.0 * alpha - r } else { alpha - r };
            let (beta_star, log_flag) = if cusp_form {
                let s = alpha - r / 2.0;
                (int_part(s) + (2.0 * frac_part(s)).min(1.0), is_int(s))
            } else if *cuspidal && !is_int(alpha - r) {
                let s = alpha - r;
                (int_part(s) + (2.0 * frac_part(s) + r).min(1.0), false)
            } else {
                (alpha - r, is_int(alpha - r))
            };
            HolderTriple {
                beta,
                beta_star,
                beta_star_star: alpha - a0,
                log_flag: log_flag || is_int(alpha - a0),
            }
        }
        PointDescriptor::Irrational { tau, .. } => {
            if cusp_form {
                let b = alpha - r / 2.0;
                HolderTriple {
                    beta: b,
                    beta_star: b,
                    beta_star_star: b,
                    log_flag: is_int(b),
                }
            } else {
                let tau = match tau {
                    Some(t) if *t >= 2.0 => *t,
                    Some(t) => return pre(format!("tau_x = {t} is below 2")),
                    None => return pre("tau_x is required at irrationals for a form that is not a cusp form"),
                };
                let s = alpha - r;
                let beta_star = if is_int(s) { s } else { int_part(s) + (frac_part(s) + r / tau).min(1.0) };
                HolderTriple {
                    beta: alpha - (1.0 - 1.0 / tau) * r,
                    beta_star,
                    beta_star_star: s,
                    log_flag: is_int(s),
                }
            }
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Verdict {
    NotDifferentiable { reason: String },
    Differentiable { value: Complex64, err: f64 },
}

/// Cuspidal rationals: differentiable iff alpha > (r+1)/2, with the value
/// from the ray integral of f'. Elsewhere beta = alpha - r decides, and
/// the value is (2 pi i/m) f_{alpha-1}(x0).
pub fn differentiability(f: &FormDescriptor, alpha: f64, x0: &Cusp, cfg: &QuadratureConfig) -> Result<Verdict> {
    check_alpha(f, alpha)?;
    let r = f.weight();
    let cuspidal = match f.cusp_datum(x0) {
        Ok(d) => d.cuspidal,
        Err(_) if f.is_cusp_form => true,
        Err(e) => return Err(e),
    };
    if cuspidal {
        let thr = (r + 1.0) / 2.0;
        if alpha <= thr {
            return Ok(Verdict::NotDifferentiable {
                reason: format!("cuspidal point with alpha = {alpha} <= (r+1)/2 = {thr}"),
            });
        }
        let d = derivative_at_cuspidal(f, alpha, x0, cfg)?;
        return Ok(Verdict::Differentiable {
            value: d.value,
            err: d.err_estimate,
        });
    }
    if alpha - r <= 1.0 {
        return Ok(Verdict::NotDifferentiable {
            reason: format!("non-cuspidal point with beta = alpha - r = {} <= 1", alpha - r),
        });
    }
    let (p, q) = x0.as_pair();
    let x = HPoint::rational(p as i128, q as i128, Complex64::new(0.0, 0.0));
    let v = eval_falpha_integral_at(f, alpha - 1.0, &x, cfg)?;
    let c = Complex64::new(0.0, 2.0 * std::f64::consts::PI / f.m_inf as f64);
    Ok(Verdict::Differentiable {
        value: c * v.value,
        err: c.norm() * v.err_estimate,
    })
}

/// d(delta) = intercept + slope * delta on [lo, hi].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub intercept: f64,
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumDescription {
    pub segments: Vec<Segment>,
    /// isolated (delta, d) values
    pub points: Vec<(f64, f64)>,
    pub multifractal: bool,
}

impl SpectrumDescription {
    /// d(delta); -inf off the support.
    pub fn eval(&self, delta: f64) -> f64 {
        for &(x, d) in &self.points {
            if x == delta {
                return d;
            }
        }
        for s in &self.segments {
            if delta >= s.lo && delta <= s.hi {
                return s.intercept + s.slope * delta;
            }
        }
        f64::NEG_INFINITY
    }
}

pub fn spectrum(f: &FormDescriptor, alpha: f64) -> Result<SpectrumDescription> {
    check_alpha(f, alpha)?;
    let r = f.weight();
    Ok(if f.is_cusp_form {
        SpectrumDescription {
            segments: vec![],
            points: vec![(alpha - r / 2.0, 1.0), (2.0 * alpha - r, 0.0)],
            multifractal: false,
        }
    } else {
        SpectrumDescription {
            segments: vec![Segment {
                lo: alpha - r,
                hi: alpha - r / 2.0,
                intercept: 2.0 - 2.0 * alpha / r,
                slope: 2.0 / r,
            }],
            points: vec![(2.0 * alpha - r, 0.0)],
            multifractal: true,
        }
    })
}

/// Dyadic blocks [2^-(k+1), 2^-k] for k_min <= k <= k_max with
/// `per_block` log-spaced samples each.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DyadicGrid {
    pub k_min: u32,
    pub k_max: u32,
    pub per_block: u32,
}

impl DyadicGrid {
    fn validate(&self, decades: f64) -> Result<()> {
        if self.k_min > self.k_max || self.per_block == 0 {
            return pre("invalid dyadic grid");
        }
        if ((self.k_max + 1 - self.k_min) as f64) * 2f64.log10() < decades - 1e-9 {
            return pre(format!("the grid must span at least {decades} decades"));
        }
        Ok(())
    }

    fn points(&self) -> Vec<(u32, f64)> {
        let mut out = Vec::new();
        for k in self.k_min..=self.k_max {
            for i in 0..self.per_block {
                let e = k as f64 + i as f64 / self.per_block as f64;
                out.push((k, 2f64.powf(-e)));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetaEstimate {
    pub beta_hat: f64,
    pub stderr: f64,
    /// (scale, block maximum)
    pub blocks: Vec<(f64, f64)>,
    pub slope: f64,
}

fn fit_blocks(samples: &[(u32, f64, f64)]) -> Result<(Vec<(f64, f64)>, f64, f64)> {
    let mut blocks: Vec<(u32, f64, f64)> = Vec::new();
    for &(k, s, v) in samples {
        match blocks.iter_mut().find(|b| b.0 == k) {
            Some(b) => {
                if v > b.2 {
                    b.1 = s;
                    b.2 = v;
                }
            }
            None => blocks.push((k, s, v)),
        }
    }
    let usable: Vec<&(u32, f64, f64)> = blocks.iter().filter(|b| b.2 > 0.0 && b.2.is_finite()).collect();
    if usable.len() < 3 {
        return Err(Error::Numeric("degenerate envelope: fewer than three blocks above the noise floor".into()));
    }
    let x: Vec<f64> = usable.iter().map(|b| b.1.ln()).collect();
    let y: Vec<f64> = usable.iter().map(|b| b.2.ln()).collect();
    let (_, slope, se) = line_fit(&x, &y);
    Ok((blocks.iter().map(|b| (b.1, b.2)).collect(), slope, se))
}

/// beta_hat = alpha - s where |f(x0 + ia) - f(inf)| grows like a^{-s};
/// s is the regression slope of the per-block maxima.
pub fn estimate_beta_vertical(f: &FormDescriptor, alpha: f64, x0: &PointDescriptor, grid: &DyadicGrid) -> Result<BetaEstimate> {
    check_alpha(f, alpha)?;
    grid.validate(3.0)?;
    let base = x0.hpoint();
    let pts = grid.points();
    let vals = crate::par::map(&pts, |&(k, a)| -> Result<(u32, f64, f64)> {
        let p = HPoint {
            off: Complex64::new(base.off.re, a),
            ..base
        };
        let v = f.value(&p)?;
        let floor = 10.0 * v.err;
        let m = v.minus_const.norm();
        Ok((k, a, if m > floor { m } else { 0.0 }))
    });
    let vals: Vec<(u32, f64, f64)> = vals.into_iter().collect::<Result<_>>()?;
    let (blocks, slope, se) = fit_blocks(&vals)?;
    // log|f| against log a has slope -s
    Ok(BetaEstimate {
        beta_hat: alpha + slope,
        stderr: se,
        blocks,
        slope: -slope,
    })
}

/// Slope of the block maxima of |g(x0 + h) - P(h)| against log h, where P
/// of the given degree is fitted by least squares with P(0) = g(x0) and
/// weight |h|^{-(degree+1)}.
pub fn oscillation_slope<G>(g: G, g0: Complex64, grid: &DyadicGrid, degree: usize) -> Result<BetaEstimate>
where
    G: Fn(f64) -> Result<Complex64> + Sync,
{
    grid.validate(2.0)?;
    let mut hs = Vec::new();
    for (k, a) in grid.points() {
        hs.push((k, a));
        hs.push((k, -a));
    }
    let vals = crate::par::map(&hs, |&(_, h)| g(h));
    let vals: Vec<Complex64> = vals.into_iter().collect::<Result<_>>()?;
    let hmax = hs.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
    let resid: Vec<f64> = if degree == 0 {
        vals.iter().map(|v| (v - g0).norm()).collect()
    } else {
        let rows: Vec<Vec<Complex64>> = hs
            .iter()
            .map(|&(_, h)| (1..=degree).map(|j| Complex64::new((h / hmax).powi(j as i32), 0.0)).collect())
            .collect();
        let y: Vec<Complex64> = vals.iter().map(|v| v - g0).collect();
        let w: Vec<f64> = hs.iter().map(|&(_, h)| (h.abs() / hmax).powf(-(degree as f64 + 1.0))).collect();
        let fit = weighted_lstsq(&rows, &y, &w)?;
        fit.residuals.iter().map(|r| r.norm()).collect()
    };
    let samples: Vec<(u32, f64, f64)> = hs.iter().zip(&resid).map(|(&(k, h), &r)| (k, h.abs(), r)).collect();
    let (blocks, slope, se) = fit_blocks(&samples)?;
    Ok(BetaEstimate {
        beta_hat: slope,
        stderr: se,
        blocks,
        slope,
    })
}

/// Which real or complex projection of f_alpha an estimator sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Part {
    Complex,
    Re,
    Im,
}

impl Part {
    pub fn project(self, z: Complex64) -> Complex64 {
        match self {
            Part::Complex => z,
            Part::Re => Complex64::new(z.re, 0.0),
            Part::Im => Complex64::new(z.im, 0.0),
        }
    }
}

/// Oscillation estimator on f_alpha (integral route). Without a theory
/// degree, a degree-0 pilot picks it.
pub fn estimate_beta_oscillation(
    f: &FormDescriptor,
    alpha: f64,
    x0: &PointDescriptor,
    grid: &DyadicGrid,
    degree: Option<usize>,
    part: Part,
    cfg: &QuadratureConfig,
) -> Result<BetaEstimate> {
    check_alpha(f, alpha)?;
    let base = x0.hpoint();
    let at = |h: f64| -> HPoint {
        match x0 {
            PointDescriptor::Rational { cusp, .. } => {
                // h = +-2^-e is a dyadic rational; keep the point exact when possible
                let (p, q) = cusp.as_pair();
                let hp = HPoint::from_real(h, 0.0);
                if hp.off.re == 0.0 && hp.den <= 1 << 62 / (q as i128).max(1) {
                    HPoint::rational(p as i128 * hp.den + hp.num * q as i128, q as i128 * hp.den, Complex64::new(0.0, 0.0))
                } else {
                    HPoint::from_real(cusp.to_f64() + h, 0.0)
                }
            }
            PointDescriptor::Irrational { .. } => HPoint::from_real(base.to_complex().re + h, 0.0),
        }
    };
    let g = |h: f64| -> Result<Complex64> { Ok(part.project(eval_falpha_integral_at(f, alpha, &at(h), cfg)?.value)) };
    let g0 = part.project(eval_falpha_integral_at(f, alpha, &base, cfg)?.value);
    let degree = match degree {
        Some(d) => d,
        None => match theory_exponents(f, alpha, x0) {
            Ok(t) => (t.beta.ceil() as usize).saturating_sub(1),
            Err(_) => {
                let pilot = oscillation_slope(g, g0, grid, 0)?;
                if pilot.beta_hat > 1.0 {
                    (pilot.beta_hat.ceil() as usize).saturating_sub(1)
                } else {
                    return Ok(pilot);
                }
            }
        },
    };
    oscillation_slope(g, g0, grid, degree)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn theta() -> FormDescriptor {
        FormDescriptor::by_name("theta").unwrap()
    }

    fn rat(f: &FormDescriptor, s: &str) -> PointDescriptor {
        PointDescriptor::parse(f, s).unwrap()
    }

    fn triple(t: HolderTriple) -> (f64, f64, f64) {
        (t.beta, t.beta_star, t.beta_star_star)
    }

    #[test]
    fn theory_examples() {
        let th = theta();
        assert_eq!(triple(theory_exponents(&th, 1.0, &rat(&th, "1")).unwrap()), (1.5, 1.0, 0.5));
        assert_eq!(triple(theory_exponents(&th, 1.0, &rat(&th, "3/5")).unwrap()), (1.5, 1.0, 0.5));
        assert_eq!(triple(theory_exponents(&th, 1.0, &rat(&th, "1/2")).unwrap()), (0.5, 0.5, 0.5));
        assert_eq!(triple(theory_exponents(&th, 1.0, &rat(&th, "2/3")).unwrap()), (0.5, 0.5, 0.5));
        assert_eq!(triple(theory_exponents(&th, 1.0, &rat(&th, "golden")).unwrap()), (0.75, 0.75, 0.5));
        let d = FormDescriptor::by_name("delta").unwrap();
        assert_eq!(triple(theory_exponents(&d, 7.0, &rat(&d, "sqrt2")).unwrap()), (1.0, 1.0, 1.0));
        assert!(theory_exponents(&th, 1.0, &rat(&th, "0.1234")).is_err());
        assert!(theory_exponents(&th, 0.4, &rat(&th, "1")).is_err());
    }

    #[test]
    fn ordering_sweep() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for name in ["theta", "e4", "e6", "delta", "14"] {
            let f = FormDescriptor::by_name(name).unwrap();
            let a0 = f.alpha0();
            for _ in 0..200 {
                let alpha = a0 + rng.gen_range(0.01..3.0);
                let pts = vec![
                    rat(&f, "1/2"),
                    rat(&f, "1"),
                    rat(&f, "0"),
                    rat(&f, "2/7"),
                    PointDescriptor::Irrational {
                        real: RealDescriptor::Float(0.3),
                        tau: Some(rng.gen_range(2.0..10.0)),
                    },
                ];
                for p in pts {
                    let t = match theory_exponents(&f, alpha, &p) {
                        Ok(t) => t,
                        Err(_) => continue,
                    };
                    assert!(t.beta >= t.beta_star - 1e-12 && t.beta_star >= t.beta_star_star - 1e-12, "{name} {alpha} {p:?} {t:?}");
                    if matches!(p, PointDescriptor::Rational { .. }) {
                        assert!((t.beta_star_star - (alpha - a0)).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn verdicts() {
        let th = theta();
        let q = QuadratureConfig::default();
        match differentiability(&th, 1.0, &Cusp::integer(1), &q).unwrap() {
            Verdict::Differentiable { value, .. } => assert!((value.im + std::f64::consts::PI).abs() < 1e-8, "{value}"),
            v => panic!("{v:?}"),
        }
        assert!(matches!(differentiability(&th, 1.0, &Cusp::new(1, 2), &q).unwrap(), Verdict::NotDifferentiable { .. }));
        let d = FormDescriptor::by_name("delta").unwrap();
        assert!(matches!(differentiability(&d, 6.4, &Cusp::integer(0), &q).unwrap(), Verdict::NotDifferentiable { .. }));
        // non-cuspidal with beta > 1: (2 pi i / m) f_{alpha-1}
        match differentiability(&th, 2.0, &Cusp::new(1, 2), &q).unwrap() {
            Verdict::Differentiable { value, .. } => assert!(value.norm() > 0.0),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn spectra() {
        let th = theta();
        let s = spectrum(&th, 1.0).unwrap();
        let want = SpectrumDescription {
            segments: vec![Segment {
                lo: 0.5,
                hi: 0.75,
                intercept: -2.0,
                slope: 4.0,
            }],
            points: vec![(1.5, 0.0)],
            multifractal: true,
        };
        assert_eq!(s, want);
        assert_eq!(s.eval(0.5), 0.0);
        assert_eq!(s.eval(0.75), 1.0);
        assert_eq!(s.eval(1.0), f64::NEG_INFINITY);
        let d = FormDescriptor::by_name("delta").unwrap();
        let s = spectrum(&d, 7.0).unwrap();
        assert_eq!(
            s,
            SpectrumDescription {
                segments: vec![],
                points: vec![(1.0, 1.0), (2.0, 0.0)],
                multifractal: false,
            }
        );
        let e4 = FormDescriptor::by_name("e4").unwrap();
        let s = spectrum(&e4, 5.5).unwrap();
        assert_eq!(s.eval(5.5 - 4.0), 0.0);
        assert_eq!(s.eval(5.5 - 2.0), 1.0);
    }

    fn vgrid() -> DyadicGrid {
        DyadicGrid {
            k_min: 2,
            k_max: 26,
            per_block: 8,
        }
    }

    #[test]
    fn vertical_estimates() {
        let th = theta();
        for (p, want) in [("1/2", 0.5), ("golden", 0.75)] {
            let e = estimate_beta_vertical(&th, 1.0, &rat(&th, p), &vgrid()).unwrap();
            assert!((e.beta_hat - want).abs() <= 0.15, "{p}: {} (+-{})", e.beta_hat, e.stderr);
        }
        let d = FormDescriptor::by_name("delta").unwrap();
        let e = estimate_beta_vertical(&d, 7.0, &rat(&d, "sqrt2"), &vgrid()).unwrap();
        assert!((e.beta_hat - 1.0).abs() <= 0.15, "{}", e.beta_hat);
    }

    #[test]
    fn oscillation_estimates() {
        let th = theta();
        let q = QuadratureConfig::default();
        let grid = DyadicGrid {
            k_min: 5,
            k_max: 16,
            per_block: 4,
        };
        let e = estimate_beta_oscillation(&th, 1.0, &rat(&th, "1"), &grid, None, Part::Complex, &q).unwrap();
        assert!((e.beta_hat - 1.5).abs() <= 0.15, "{}", e.beta_hat);
        let e = estimate_beta_oscillation(&th, 1.0, &rat(&th, "1/2"), &grid, None, Part::Complex, &q).unwrap();
        assert!((e.beta_hat - 0.5).abs() <= 0.15, "{}", e.beta_hat);
        let e = estimate_beta_oscillation(&th, 1.0, &rat(&th, "1/2"), &grid, None, Part::Im, &q).unwrap();
        assert!((e.beta_hat - 0.5).abs() <= 0.15, "{}", e.beta_hat);
        let s = oscillation_slope(|h| Ok(Complex64::new(h * h, 0.0)), Complex64::new(0.0, 0.0), &grid, 1).unwrap();
        assert!((s.beta_hat - 2.0).abs() < 1e-6, "{}", s.beta_hat);
    }

    #[test]
    fn short_grid_rejected() {
        let th = theta();
        let g = DyadicGrid {
            k_min: 2,
            k_max: 6,
            per_block: 4,
        };
        assert!(estimate_beta_vertical(&th, 1.0, &rat(&th, "1/2"), &g).is_err());
    }
}
