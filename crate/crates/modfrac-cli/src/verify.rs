//! Verification suites. Each criterion records what was measured, the
//! tolerance it was held to and whether it passed; a criterion that errors
//! counts as a failure with the error as detail.

use std::f64::consts::PI;
use std::time::Instant;

use anyhow::Result;
use modfrac::afe::{build_context, eichler_check, error_regularity_check, DyadicWindow};
use modfrac::eval::{
    derivative_at_cuspidal, eval_falpha_integral, eval_falpha_series, partial_sum_growth, QuadratureConfig,
};
use modfrac::forms::theta::{theta_direct, ThetaMember};
use modfrac::forms::FormDescriptor;
use modfrac::holder::{
    differentiability, estimate_beta_oscillation, estimate_beta_vertical, spectrum, theory_exponents, DyadicGrid,
    Part, PointDescriptor, Segment, SpectrumDescription, Verdict,
};
use modfrac::modgroup::{
    atkin_lehner, cusp_class, cusp_equivalent_bruteforce, gamma0_cusp_classes, is_atkin_lehner,
    normalizer_orbit_classes, normalizer_transitive, squares_into_gamma0, Cusp, GroupId,
};
use modfrac::wavelet::{default_grid, identity_check, transform_direct, WaveletConfig, WaveletDescriptor};
use modfrac::Complex64;
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Eval,
    Wavelet,
    Afe,
    Holder,
    Group,
    All,
}

#[derive(Debug, Clone, Serialize)]
pub struct Criterion {
    pub suite: &'static str,
    pub name: String,
    pub pass: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub criteria: Vec<Criterion>,
    pub pass: bool,
}

/// measured <= tolerance passes
fn at_most(measured: f64, tolerance: f64) -> bool {
    measured <= tolerance
}

struct Runner {
    suite: &'static str,
    out: Vec<Criterion>,
}

impl Runner {
    fn new(suite: &'static str) -> Runner {
        Runner { suite, out: Vec::new() }
    }

    /// `body` returns (pass, measured, tolerance, detail).
    fn run<F>(&mut self, name: &str, body: F)
    where
        F: FnOnce() -> Result<(bool, f64, f64, String)>,
    {
        let t0 = Instant::now();
        let c = match body() {
            Ok((pass, measured, tolerance, detail)) => Criterion {
                suite: self.suite,
                name: name.into(),
                pass,
                measured,
                tolerance,
                detail,
                seconds: 0.0,
            },
            Err(e) => Criterion {
                suite: self.suite,
                name: name.into(),
                pass: false,
                measured: f64::NAN,
                tolerance: f64::NAN,
                detail: format!("error: {e:#}"),
                seconds: 0.0,
            },
        };
        self.out.push(Criterion {
            seconds: t0.elapsed().as_secs_f64(),
            ..c
        });
    }
}

pub fn run(suite: Suite) -> SuiteReport {
    let criteria = match suite {
        Suite::Eval => eval_suite(),
        Suite::Wavelet => wavelet_suite(),
        Suite::Afe => afe_suite(),
        Suite::Holder => holder_suite(),
        Suite::Group => group_suite(),
        Suite::All => {
            let mut v = eval_suite();
            v.extend(wavelet_suite());
            v.extend(afe_suite());
            v.extend(holder_suite());
            v.extend(group_suite());
            v
        }
    };
    let pass = criteria.iter().all(|c| c.pass);
    SuiteReport { suite, criteria, pass }
}

fn form(name: &str) -> Result<FormDescriptor> {
    Ok(FormDescriptor::by_name(name)?)
}

pub fn eval_suite() -> Vec<Criterion> {
    let mut r = Runner::new("eval");
    let q = QuadratureConfig::default();
    let target = PI * PI / 8.0;
    r.run("riemann phi(1/2) = pi^2/8, integral route", || {
        let v = eval_falpha_integral(&form("theta")?, 1.0, 0.5, &q)?;
        let d = (v.value.im / 2.0 - target).abs();
        Ok((at_most(d, 1e-8), d, 1e-8, format!("phi(1/2) = {:.15}", v.value.im / 2.0)))
    });
    r.run("riemann phi(1/2) = pi^2/8, series route N=1e5", || {
        let n = 100_000;
        let v = eval_falpha_series(&form("theta")?, 1.0, 0.5, n)?;
        let d = (v.value.im / 2.0 - target).abs();
        let tol = 3.0 / n as f64;
        Ok((at_most(d, tol), d, tol, format!("phi(1/2) = {:.15}", v.value.im / 2.0)))
    });
    r.run("route equivalence at 20 random x (theta 1, delta 7, e4 5)", || {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20);
        let mut worst: f64 = 0.0;
        let mut detail = String::new();
        for (name, alpha) in [("theta", 1.0), ("delta", 7.0), ("e4", 5.0)] {
            let f = form(name)?;
            let xs: Vec<f64> = (0..20).map(|_| rng.gen_range(0.0..1.0)).collect();
            let ratios = modfrac::par::map(&xs, |&x| -> Result<f64> {
                let s = eval_falpha_series(&f, alpha, x, 100_000)?;
                let i = eval_falpha_integral(&f, alpha, x, &q)?;
                Ok((s.value - i.value).norm() / (s.err_estimate + i.err_estimate))
            });
            let m = ratios.into_iter().collect::<Result<Vec<f64>>>()?.into_iter().fold(0.0, f64::max);
            detail.push_str(&format!("{name}: {m:.3} "));
            worst = worst.max(m);
        }
        Ok((at_most(worst, 1.0), worst, 1.0, format!("max |series - integral| / combined error; {}", detail.trim())))
    });
    r.run("theta transformation law on 50 points, Im z >= 0.3", || {
        let mut worst: f64 = 0.0;
        for i in 0..10 {
            for j in 0..5 {
                let z = Complex64::new(-1.0 + 0.2 * i as f64 + 0.05, 0.3 + 0.4 * j as f64);
                let lhs = theta_direct(ThetaMember::Three, -1.0 / z).0;
                let rhs = (-Complex64::i() * z).sqrt() * theta_direct(ThetaMember::Three, z).0;
                worst = worst.max((lhs - rhs).norm());
            }
        }
        Ok((at_most(worst, 1e-10), worst, 1e-10, "direct sums on both sides".into()))
    });
    r.run("partial-sum growth stable for theta and delta at 3 irrationals", || {
        let grid: Vec<usize> = (0..=10).map(|k| (1000.0 * 10f64.powf(k as f64 / 5.0)).round() as usize).collect();
        let xs = [2f64.sqrt() - 1.0, (5f64.sqrt() - 1.0) / 2.0, std::f64::consts::E - 2.0];
        let mut worst: f64 = 0.0;
        for name in ["theta", "delta"] {
            let f = form(name)?;
            for &x in &xs {
                worst = worst.max(partial_sum_growth(&f, x, &grid)?.stability);
            }
        }
        Ok((at_most(worst, 5.0), worst, 5.0, "max/median of |S_N|/(N^alpha0 ln N), N in [1e3, 1e5]".into()))
    });
    r.run("delta coefficient L2 growth over N in [256, 4096]", || {
        let grid: Vec<usize> = (8..=12).map(|k| 1usize << k).collect();
        let g = form("delta")?.coef_growth_check(&grid)?;
        Ok((at_most(g.max_over_min, 10.0), g.max_over_min, 10.0, "max/min of sum |a_n|^2 / N^r".into()))
    });
    r.out
}

pub fn wavelet_suite() -> Vec<Criterion> {
    let mut r = Runner::new("wavelet");
    let q = QuadratureConfig::default();
    let w = WaveletConfig::default();
    for (name, alpha) in [("delta", 7.0), ("e4", 5.0)] {
        r.run(&format!("wavelet identity {name} alpha={alpha} on the 3x3 grid"), || {
            let rep = identity_check(&form(name)?, alpha, &default_grid(), &q, &w)?;
            Ok((rep.rel_residual < 1e-3, rep.rel_residual, 1e-3, format!("{} series terms", rep.terms)))
        });
    }
    r.run("exponential test function transform", || {
        let mut worst: f64 = 0.0;
        for alpha in [5.0, 7.0] {
            let wd = WaveletDescriptor::new(alpha, &q)?;
            for (lambda, a, b) in [(1.0, 0.1, 0.0), (2.0, 0.05, 0.3), (0.5, 0.2, 0.5)] {
                let g = move |t: f64| (Complex64::new(0.0, 2.0 * PI * lambda * t)).exp();
                let v = transform_direct(&g, 1.0, alpha, a, b, &w)?;
                let want = wd.c * (lambda * a).powf(alpha) * (Complex64::new(0.0, 2.0 * PI * lambda) * Complex64::new(b, a)).exp();
                worst = worst.max((v.value - want).norm() / want.norm());
            }
        }
        Ok((at_most(worst, 1e-6), worst, 1e-6, "relative error against C (lambda a)^alpha e(lambda (b + ia))".into()))
    });
    r.out
}

pub fn afe_suite() -> Vec<Criterion> {
    let mut r = Runner::new("afe");
    let q = QuadratureConfig::default();
    for x0 in [0i64, 1] {
        r.run(&format!("afe error regularity theta alpha=1 x0={x0}"), || {
            let th = form("theta")?;
            let mut ctx = build_context(&th, 1.0, &Cusp::integer(x0))?;
            let rep = error_regularity_check(&mut ctx, &DyadicWindow::default(), &q)?;
            Ok((
                rep.slope >= rep.threshold,
                rep.slope,
                rep.threshold,
                format!("slope >= threshold over 2^-5..2^-14; B = {:.6}{:+.6}i", rep.b_hat[0], rep.b_hat[1]),
            ))
        });
    }
    r.run("eichler polynomial delta alpha=11 x0=0 on [-0.4, 0.4]", || {
        let rep = eichler_check(&form("delta")?, 11.0, &Cusp::integer(0), 0.4, &q)?;
        let pass = rep.max_fit_residual < 1e-6 && rep.max_spot_diff < 1e-4;
        Ok((
            pass,
            rep.max_fit_residual,
            1e-6,
            format!("fit residual < 1e-6; quadrature spots differ by {:.2e} (< 1e-4)", rep.max_spot_diff),
        ))
    });
    r.out
}

pub fn holder_suite() -> Vec<Criterion> {
    let mut r = Runner::new("holder");
    let q = QuadratureConfig::default();
    let vgrid = DyadicGrid {
        k_min: 2,
        k_max: 26,
        per_block: 8,
    };
    let ogrid = DyadicGrid {
        k_min: 5,
        k_max: 16,
        per_block: 4,
    };
    let cases: [(&str, f64, &str, bool); 4] = [
        ("theta", 1.0, "1/2", false),
        ("theta", 1.0, "1", true),
        ("theta", 1.0, "golden", false),
        ("delta", 7.0, "sqrt2", false),
    ];
    for (name, alpha, point, oscillation) in cases {
        let method = if oscillation { "oscillation" } else { "vertical" };
        r.run(&format!("holder exponent {name} alpha={alpha} at {point} ({method})"), || {
            let f = form(name)?;
            let p = PointDescriptor::parse(&f, point)?;
            let beta = theory_exponents(&f, alpha, &p)?.beta;
            let e = if oscillation {
                estimate_beta_oscillation(&f, alpha, &p, &ogrid, None, Part::Complex, &q)?
            } else {
                estimate_beta_vertical(&f, alpha, &p, &vgrid)?
            };
            let d = (e.beta_hat - beta).abs();
            Ok((at_most(d, 0.15), d, 0.15, format!("beta = {beta}, beta_hat = {:.4} +- {:.4}", e.beta_hat, e.stderr)))
        });
    }
    r.run("differentiability of theta alpha=1 at 1 and 1/2", || {
        let th = form("theta")?;
        let at_one = differentiability(&th, 1.0, &Cusp::integer(1), &q)?;
        let at_half = differentiability(&th, 1.0, &Cusp::new(1, 2), &q)?;
        let value = match at_one {
            Verdict::Differentiable { value, .. } => value,
            v => return Ok((false, f64::NAN, 1e-3, format!("at 1: {v:?}"))),
        };
        if !matches!(at_half, Verdict::NotDifferentiable { .. }) {
            return Ok((false, f64::NAN, 1e-3, format!("at 1/2: {at_half:?}")));
        }
        let d = derivative_at_cuspidal(&th, 1.0, &Cusp::integer(1), &q)?;
        let h = 2f64.powi(-28);
        let up = eval_falpha_integral(&th, 1.0, 1.0 + h, &q)?.value;
        let dn = eval_falpha_integral(&th, 1.0, 1.0 - h, &q)?.value;
        let dq = (up - dn) / (2.0 * h);
        let diff = (dq - d.value).norm();
        Ok((
            at_most(diff, 1e-3),
            diff,
            1e-3,
            format!("f'(1) = {:.8}{:+.8}i, difference quotient at h = 2^-28 = {:.8}{:+.8}i", value.re, value.im, dq.re, dq.im),
        ))
    });
    r.run("spectrum theta alpha=1", || {
        let s = spectrum(&form("theta")?, 1.0)?;
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
        let ok = s == want;
        Ok((ok, if ok { 0.0 } else { 1.0 }, 0.0, "segment 4 delta - 2 on [1/2, 3/4], point (3/2, 0)".into()))
    });
    r.run("spectrum delta alpha=7", || {
        let s = spectrum(&form("delta")?, 7.0)?;
        let want = SpectrumDescription {
            segments: vec![],
            points: vec![(1.0, 1.0), (2.0, 0.0)],
            multifractal: false,
        };
        let ok = s == want;
        Ok((ok, if ok { 0.0 } else { 1.0 }, 0.0, "points (1, 1) and (2, 0)".into()))
    });
    r.out
}

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

fn class_mismatches(g: GroupId, qmax: i64, bound: i64) -> usize {
    let period = if g == GroupId::GammaTheta { 2 } else { 1 };
    let cusps = cusps_up_to(qmax, period);
    let mut bad = 0;
    for (i, x) in cusps.iter().enumerate() {
        for y in &cusps[i..] {
            if (cusp_class(g, x) == cusp_class(g, y)) != cusp_equivalent_bruteforce(g, x, y, bound) {
                bad += 1;
            }
        }
    }
    bad
}

pub fn group_suite() -> Vec<Criterion> {
    let mut r = Runner::new("group");
    r.run("cusp classes vs brute force, q <= 12, Gamma_theta and Gamma0(N <= 30)", || {
        let mut groups = vec![GroupId::GammaTheta];
        groups.extend((1..=30).map(GroupId::Gamma0));
        let bad: usize = modfrac::par::map(&groups, |&g| {
            let bound = if g == GroupId::GammaTheta { 2000 } else { 20_000 };
            class_mismatches(g, 12, bound)
        })
        .into_iter()
        .sum();
        Ok((bad == 0, bad as f64, 0.0, "disagreeing pairs".into()))
    });
    r.run("normalizer transitivity vs orbit search, N <= 100", || {
        let ns: Vec<u64> = (1..=100).collect();
        let bad = modfrac::par::map(&ns, |&n| normalizer_transitive(n) != (normalizer_orbit_classes(n).len() == 1))
            .into_iter()
            .filter(|b| *b)
            .count();
        let named = normalizer_transitive(45) && !normalizer_transitive(49);
        Ok((
            bad == 0 && named,
            bad as f64,
            0.0,
            format!("disagreeing N; 45 -> {}, 49 -> {}", normalizer_transitive(45), normalizer_transitive(49)),
        ))
    });
    r.run("atkin-lehner shape, determinant and involution, N <= 60", || {
        let mut bad = 0usize;
        let mut count = 0usize;
        for n in 1..=60u64 {
            for qq in (1..=n).filter(|qq| n % qq == 0 && qq.gcd(&(n / qq)) == 1) {
                count += 1;
                let w = atkin_lehner(n, qq)?;
                if !(is_atkin_lehner(n, qq, &w) && squares_into_gamma0(n, qq, &w) && w.det() == qq as i128) {
                    bad += 1;
                }
            }
        }
        Ok((bad == 0, bad as f64, 0.0, format!("{count} (N, Q) pairs checked")))
    });
    r.run("gamma0(49): cusp 1/7 outside the class of infinity and its normalizer orbit", || {
        let g = GroupId::Gamma0(49);
        let c = cusp_class(g, &Cusp::new(1, 7));
        let inf = cusp_class(g, &Cusp::Infinity);
        let orbit = normalizer_orbit_classes(49).into_iter().find(|o| o.contains(&inf)).unwrap_or_default();
        let ok = c != inf && !orbit.contains(&c) && gamma0_cusp_classes(49).contains(&c);
        Ok((ok, if ok { 0.0 } else { 1.0 }, 0.0, format!("class of 1/7 is {}", c.label)))
    });
    r.out
}
