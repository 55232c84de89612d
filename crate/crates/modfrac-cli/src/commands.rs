//! Thin wrappers from parsed flags to library calls.

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Subcommand, ValueEnum};
use modfrac::afe::{build_context, eichler_check, error_regularity_check, falpha_at, self_similarity_report, DyadicWindow};
use modfrac::eval::{eval_falpha_integral_at, eval_falpha_series};
use modfrac::forms::newform::fetch_newform;
use modfrac::holder::{
    differentiability, estimate_beta_oscillation, estimate_beta_vertical, spectrum, theory_exponents, BetaEstimate,
    DyadicGrid, HolderTriple, Part, PointDescriptor, Verdict,
};
use modfrac::modgroup::{
    atkin_lehner, cusp_class, cusp_width, gamma0_cusp_classes, is_atkin_lehner, normalizer_orbit_classes,
    normalizer_transitive, squares_into_gamma0, Cusp, GroupId,
};
use modfrac::point::HPoint;
use modfrac::wavelet::{default_grid, identity_check, WaveletConfig};
use serde::Serialize;

use crate::config::{GridSpec, RunConfig};
use crate::output::{csv_to, json_to, Row};
use crate::verify::{self, Suite};
use crate::UsageError;

#[derive(Debug, Subcommand)]
pub enum Command {
    /// CSV data for the figures plus a manifest
    Plotdata(PlotdataArgs),
    /// Run a verification suite; exits 1 when a criterion fails
    Verify(VerifyArgs),
    /// Cusp classes, widths, Atkin-Lehner matrices and normalizer orbits
    #[command(subcommand)]
    Group(GroupCommand),
    /// Approximate functional equation near a rational
    Afe(AfeArgs),
    /// Hoelder exponents at a point: theory and estimate
    Holder(HolderArgs),
    /// Spectrum of singularities
    Spectrum(FormArgs),
    /// Wavelet transform identity on the standard grid
    Wavelet(WaveletArgs),
    /// Fourier coefficients of a form
    Coeffs(CoeffsArgs),
    /// f_alpha on a grid or at a point, as CSV
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
pub struct FormArgs {
    #[arg(long)]
    pub form: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotdataArgs {
    /// output directory
    #[arg(long, default_value = "plotdata")]
    pub out: PathBuf,
    /// rows per file (default 4096 for full curves, 2048 for details)
    #[arg(long)]
    pub points: Option<usize>,
    /// restrict to these groups: riemann, details, patterns, level14, level45, level49
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<String>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum GroupCommand {
    /// Class label and width of a cusp
    CuspClass {
        /// theta, sl2z, gamma0:N or gamma0upper:N
        #[arg(long)]
        group: String,
        #[arg(long, allow_hyphen_values = true)]
        cusp: String,
    },
    /// All cusp classes of Gamma0(N)
    Classes {
        #[arg(long)]
        n: u64,
    },
    /// The Atkin-Lehner matrix W_Q for Gamma0(N)
    AtkinLehner {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        q: u64,
    },
    /// Normalizer orbits on the cusps of Gamma0(N)
    Normalizer {
        #[arg(long)]
        n: u64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AfeMode {
    Regularity,
    Eichler,
    Pattern,
}

#[derive(Debug, Args)]
pub struct AfeArgs {
    #[command(flatten)]
    pub form: FormArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub x0: String,
    /// dyadic window k_min:k_max[:per_block]
    #[arg(long)]
    pub window: Option<String>,
    #[arg(long, value_enum, default_value = "regularity")]
    pub mode: AfeMode,
    /// Eichler mode: fit on [x0 - w, x0 + w]
    #[arg(long, default_value_t = 0.4)]
    pub half_width: f64,
    /// report path (stdout when absent)
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimateMethod {
    Auto,
    Vertical,
    Oscillation,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PartArg {
    Complex,
    Re,
    Im,
}

impl From<PartArg> for Part {
    fn from(p: PartArg) -> Part {
        match p {
            PartArg::Complex => Part::Complex,
            PartArg::Re => Part::Re,
            PartArg::Im => Part::Im,
        }
    }
}

#[derive(Debug, Args)]
pub struct HolderArgs {
    #[command(flatten)]
    pub form: FormArgs,
    /// p/q, golden, sqrt2 or a decimal
    #[arg(long, allow_hyphen_values = true)]
    pub point: String,
    /// approximation exponent tau_x for irrationals
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long, value_enum, default_value = "auto")]
    pub method: EstimateMethod,
    /// projection seen by the oscillation estimator
    #[arg(long, value_enum, default_value = "complex")]
    pub part: PartArg,
}

#[derive(Debug, Args)]
pub struct WaveletArgs {
    #[command(flatten)]
    pub form: FormArgs,
}

#[derive(Debug, Args)]
pub struct CoeffsArgs {
    #[arg(long)]
    pub form: Option<String>,
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    /// fetch a newform table by label (needs network; refused with --offline)
    #[arg(long)]
    pub fetch: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EvalMethod {
    Auto,
    Integral,
    Series,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub form: FormArgs,
    /// single abscissa (decimal or p/q)
    #[arg(long, allow_hyphen_values = true, conflicts_with = "grid")]
    pub x: Option<String>,
    /// start:end:points
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    #[arg(long, value_enum, default_value = "auto")]
    pub method: EvalMethod,
    /// series length for the series route
    #[arg(long, default_value_t = 100_000)]
    pub terms: usize,
}

pub struct Globals {
    pub config: RunConfig,
    pub offline: bool,
}

/// Runs a command; the returned bool is false when a reported check failed.
pub fn dispatch(cmd: Command, g: &Globals) -> Result<bool> {
    let q = g.config.quadrature();
    match cmd {
        Command::Plotdata(a) => {
            let points = a.points.or(g.config.grid.map(|s| s.points));
            let dir = if a.out.as_os_str() == "plotdata" {
                g.config.output.clone().unwrap_or(a.out)
            } else {
                a.out
            };
            crate::plotdata::run(&dir, points, &a.only, &q)?;
            Ok(true)
        }
        Command::Verify(a) => {
            let rep = verify::run(a.suite);
            json_to(a.out.as_deref(), &rep)?;
            Ok(rep.pass)
        }
        Command::Group(c) => group(c),
        Command::Afe(a) => afe(a, g),
        Command::Holder(a) => holder(a, g),
        Command::Spectrum(a) => {
            let f = g.config.form_or(a.form.as_deref())?;
            let alpha = g.config.alpha_or(a.alpha)?;
            let s = spectrum(&f, alpha)?;
            json_to(
                a.out.as_deref(),
                &serde_json::json!({"form": f.id, "alpha": alpha, "spectrum": s}),
            )?;
            Ok(true)
        }
        Command::Wavelet(a) => {
            let f = g.config.form_or(a.form.form.as_deref())?;
            let alpha = g.config.alpha_or(a.form.alpha)?;
            let rep = identity_check(&f, alpha, &default_grid(), &q, &WaveletConfig::default())?;
            json_to(a.form.out.as_deref(), &rep)?;
            Ok(true)
        }
        Command::Coeffs(a) => coeffs(a, g),
        Command::Eval(a) => eval(a, g),
    }
}

fn group(c: GroupCommand) -> Result<bool> {
    match c {
        GroupCommand::CuspClass { group, cusp } => {
            let gid = GroupId::parse(&group)?;
            let x = Cusp::parse(&cusp)?;
            let cls = cusp_class(gid, &x);
            let inf = cusp_class(gid, &Cusp::Infinity);
            json_to(
                None,
                &serde_json::json!({
                    "group": gid.to_string(),
                    "cusp": x.to_string(),
                    "class": cls.label.to_string(),
                    "width": cusp_width(gid, &x),
                    "infinity_class": cls == inf,
                }),
            )?;
        }
        GroupCommand::Classes { n } => {
            let gid = GroupId::Gamma0(n);
            let rows: Vec<_> = gamma0_cusp_classes(n)
                .into_iter()
                .map(|c| serde_json::json!({"class": c.label.to_string(), "width": cusp_width(gid, &c.label)}))
                .collect();
            json_to(None, &serde_json::json!({"group": gid.to_string(), "classes": rows}))?;
        }
        GroupCommand::AtkinLehner { n, q } => {
            let w = atkin_lehner(n, q)?;
            json_to(
                None,
                &serde_json::json!({
                    "n": n,
                    "q": q,
                    "matrix": [w.a, w.b, w.c, w.d],
                    "det": w.det() as i64,
                    "shape_ok": is_atkin_lehner(n, q, &w),
                    "square_in_gamma0": squares_into_gamma0(n, q, &w),
                }),
            )?;
        }
        GroupCommand::Normalizer { n } => {
            let orbits: Vec<Vec<String>> = normalizer_orbit_classes(n)
                .into_iter()
                .map(|o| o.into_iter().map(|c| c.label.to_string()).collect())
                .collect();
            json_to(
                None,
                &serde_json::json!({"n": n, "transitive": normalizer_transitive(n), "orbits": orbits}),
            )?;
        }
    }
    Ok(true)
}

fn parse_window(s: &str) -> Result<DyadicWindow> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || UsageError(format!("window '{s}' is not k_min:k_max[:per_block]"));
    let num = |t: &str| t.trim().parse::<u32>().map_err(|_| bad());
    match parts.as_slice() {
        [a, b] => Ok(DyadicWindow {
            k_min: num(a)?,
            k_max: num(b)?,
            per_block: DyadicWindow::default().per_block,
        }),
        [a, b, c] => Ok(DyadicWindow {
            k_min: num(a)?,
            k_max: num(b)?,
            per_block: num(c)?,
        }),
        _ => Err(bad().into()),
    }
}

fn afe(a: AfeArgs, g: &Globals) -> Result<bool> {
    let q = g.config.quadrature();
    let f = g.config.form_or(a.form.form.as_deref())?;
    let alpha = g.config.alpha_or(a.form.alpha)?;
    let x0 = Cusp::parse(&a.x0)?;
    let path = a.report.as_deref().or(a.form.out.as_deref());
    match a.mode {
        AfeMode::Regularity => {
            let window = match &a.window {
                Some(s) => parse_window(s)?,
                None => DyadicWindow::default(),
            };
            let mut ctx = build_context(&f, alpha, &x0)?;
            let rep = error_regularity_check(&mut ctx, &window, &q)?;
            json_to(path, &rep)?;
            Ok(true)
        }
        AfeMode::Eichler => {
            let rep = eichler_check(&f, alpha, &x0, a.half_width, &q)?;
            json_to(path, &rep)?;
            Ok(true)
        }
        AfeMode::Pattern => {
            let window = match &a.window {
                Some(s) => parse_window(s)?,
                None => DyadicWindow::coarse(),
            };
            let rep = self_similarity_report(&f, alpha, &x0, &window, &q)?;
            json_to(path, &rep)?;
            Ok(true)
        }
    }
}

#[derive(Debug, Serialize)]
struct Estimate {
    beta_hat: f64,
    stderr: f64,
    method: &'static str,
    blocks: Vec<(f64, f64)>,
}

#[derive(Debug, Serialize)]
struct HolderOutput {
    form: String,
    alpha: f64,
    point: String,
    theory: Option<HolderTriple>,
    theory_error: Option<String>,
    differentiability: Option<Verdict>,
    estimate: Estimate,
    tolerance: f64,
    pass: Option<bool>,
}

fn holder(a: HolderArgs, g: &Globals) -> Result<bool> {
    let q = g.config.quadrature();
    let f = g.config.form_or(a.form.form.as_deref())?;
    let alpha = g.config.alpha_or(a.form.alpha)?;
    let mut p = PointDescriptor::parse(&f, &a.point)?;
    if let Some(t) = a.tau {
        p = p.with_tau(t);
    }
    let (theory, theory_error) = match theory_exponents(&f, alpha, &p) {
        Ok(t) => (Some(t), None),
        Err(modfrac::Error::Precondition(m)) if m.contains("tau") => (None, Some(m)),
        Err(e) => return Err(e.into()),
    };
    let cuspidal_rational = matches!(p, PointDescriptor::Rational { cuspidal: true, .. });
    let method = match a.method {
        EstimateMethod::Auto if cuspidal_rational => EstimateMethod::Oscillation,
        EstimateMethod::Auto => EstimateMethod::Vertical,
        m => m,
    };
    let est: BetaEstimate = match method {
        EstimateMethod::Oscillation => {
            let grid = DyadicGrid {
                k_min: 5,
                k_max: 16,
                per_block: 4,
            };
            estimate_beta_oscillation(&f, alpha, &p, &grid, None, a.part.into(), &q)?
        }
        _ => {
            let grid = DyadicGrid {
                k_min: 2,
                k_max: 26,
                per_block: 8,
            };
            estimate_beta_vertical(&f, alpha, &p, &grid)?
        }
    };
    let differentiability = match &p {
        PointDescriptor::Rational { cusp, .. } => Some(differentiability(&f, alpha, cusp, &q)?),
        _ => None,
    };
    let tol = 0.15;
    let pass = theory.map(|t| (est.beta_hat - t.beta).abs() <= tol);
    let out = HolderOutput {
        form: f.id.clone(),
        alpha,
        point: a.point.clone(),
        theory,
        theory_error,
        differentiability,
        estimate: Estimate {
            beta_hat: est.beta_hat,
            stderr: est.stderr,
            method: if method == EstimateMethod::Oscillation { "oscillation" } else { "vertical" },
            blocks: est.blocks,
        },
        tolerance: tol,
        pass,
    };
    json_to(a.form.out.as_deref(), &out)?;
    Ok(true)
}

fn coeffs(a: CoeffsArgs, g: &Globals) -> Result<bool> {
    if let Some(label) = &a.fetch {
        let text = fetch_newform(label, !g.offline)?;
        match &a.out {
            Some(p) => std::fs::write(p, text)?,
            None => print!("{text}"),
        }
        return Ok(true);
    }
    let f = g.config.form_or(a.form.as_deref())?;
    let terms = f.terms(a.n)?;
    let rows: Vec<_> = terms
        .iter()
        .map(|t| serde_json::json!({"freq": t.freq, "coef": [t.coef.re, t.coef.im]}))
        .collect();
    json_to(
        a.out.as_deref(),
        &serde_json::json!({
            "form": f.id,
            "weight": f.weight(),
            "m": f.m_inf,
            "kappa": [f.kappa.0, f.kappa.1],
            "cusp_form": f.is_cusp_form,
            "terms": rows,
        }),
    )?;
    Ok(true)
}

fn eval(a: EvalArgs, g: &Globals) -> Result<bool> {
    let q = g.config.quadrature();
    let f = g.config.form_or(a.form.form.as_deref())?;
    let alpha = g.config.alpha_or(a.form.alpha)?;
    let xs: Vec<f64> = match (&a.x, &a.grid) {
        (Some(x), _) => vec![crate::config::parse_real(x).ok_or_else(|| UsageError(format!("bad abscissa '{x}'")))?],
        (None, Some(s)) => GridSpec::parse(s)?.xs(),
        (None, None) => match g.config.grid {
            Some(gs) => gs.xs(),
            None => return Err(UsageError("give --x, --grid or a grid in --config".into()).into()),
        },
    };
    let rows = modfrac::par::map(&xs, |&x| -> Result<Row> {
        let p = HPoint::from_real(x, 0.0);
        let (value, err) = match a.method {
            EvalMethod::Auto => falpha_at(&f, alpha, &p, &q)?,
            EvalMethod::Integral => {
                let o = eval_falpha_integral_at(&f, alpha, &p, &q)?;
                (o.value, o.err_estimate)
            }
            EvalMethod::Series => {
                let o = eval_falpha_series(&f, alpha, x, a.terms)?;
                (o.value, o.err_estimate)
            }
        };
        Ok(Row { x, value, err })
    });
    let rows: Vec<Row> = rows.into_iter().collect::<Result<_>>()?;
    csv_to(a.form.out.as_deref(), &rows)?;
    Ok(true)
}
