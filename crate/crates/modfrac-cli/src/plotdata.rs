//! Figure data: one CSV per curve plus a manifest saying which projection
//! of the stored complex values each panel shows.

use std::path::Path;

use anyhow::{Context, Result};
use modfrac::afe::{build_context, falpha_at};
use modfrac::eval::QuadratureConfig;
use modfrac::forms::FormDescriptor;
use modfrac::modgroup::Cusp;
use modfrac::point::HPoint;
use modfrac::Complex64;
use serde::Serialize;

use crate::config::{load_form, GridSpec};
use crate::output::{csv_to, json_to, Row};
use crate::UsageError;

/// What a curve evaluates at each abscissa.
enum Source {
    /// scale * f_alpha
    Falpha { form: &'static str, alpha: f64, scale: f64 },
    /// f^sigma_alpha for the conjugate at x0
    Conjugate { form: &'static str, alpha: f64, x0: Cusp },
}

struct Curve {
    group: &'static str,
    file: &'static str,
    source: Source,
    start: f64,
    end: f64,
    default_points: usize,
}

#[derive(Debug, Serialize)]
pub struct Panel {
    pub file: String,
    /// re, im, re+im, -re
    pub projection: &'static str,
    pub title: String,
}

#[derive(Debug, Serialize)]
pub struct Figure {
    pub name: &'static str,
    pub panels: Vec<Panel>,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub figures: Vec<Figure>,
    pub files: Vec<FileEntry>,
}

#[derive(Debug, Serialize)]
pub struct FileEntry {
    pub file: String,
    pub rows: usize,
    pub start: f64,
    pub end: f64,
    pub description: String,
}

pub const GROUPS: [&str; 6] = ["riemann", "details", "patterns", "level14", "level45", "level49"];

fn curves() -> Vec<Curve> {
    let theta_half = |file, start, end, n| Curve {
        group: "details",
        file,
        source: Source::Falpha {
            form: "theta",
            alpha: 1.0,
            scale: 0.5,
        },
        start,
        end,
        default_points: n,
    };
    let w = 1.0 / 16.0;
    vec![
        Curve {
            group: "riemann",
            file: "riemann.csv",
            source: Source::Falpha {
                form: "theta",
                alpha: 1.0,
                scale: 0.5,
            },
            start: 0.0,
            end: 2.0,
            default_points: 4096,
        },
        theta_half("detail_1_2.csv", 0.5 - w, 0.5 + w, 2048),
        theta_half("detail_1_3.csv", 1.0 / 3.0 - w, 1.0 / 3.0 + w, 2048),
        theta_half("detail_2_3.csv", 2.0 / 3.0 - w, 2.0 / 3.0 + w, 2048),
        Curve {
            group: "patterns",
            file: "pattern_theta.csv",
            source: Source::Falpha {
                form: "theta",
                alpha: 1.0,
                scale: 1.0,
            },
            start: 0.0,
            end: 2.0,
            default_points: 4096,
        },
        Curve {
            group: "patterns",
            file: "pattern_theta2.csv",
            source: Source::Falpha {
                form: "theta2",
                alpha: 1.0,
                scale: 1.0,
            },
            start: 0.0,
            end: 2.0,
            default_points: 4096,
        },
        Curve {
            group: "level14",
            file: "level14.csv",
            source: Source::Falpha {
                form: "14",
                alpha: 1.8,
                scale: 1.0,
            },
            start: 0.0,
            end: 1.0,
            default_points: 4096,
        },
        Curve {
            group: "level14",
            file: "level14_detail_1_2.csv",
            source: Source::Falpha {
                form: "14",
                alpha: 1.8,
                scale: 1.0,
            },
            start: 0.5 - w,
            end: 0.5 + w,
            default_points: 2048,
        },
        Curve {
            group: "level45",
            file: "level45.csv",
            source: Source::Falpha {
                form: "45",
                alpha: 1.75,
                scale: 1.0,
            },
            start: 0.0,
            end: 1.0,
            default_points: 4096,
        },
        Curve {
            group: "level45",
            file: "level45_detail_1_3.csv",
            source: Source::Falpha {
                form: "45",
                alpha: 1.75,
                scale: 1.0,
            },
            start: 1.0 / 3.0 - w,
            end: 1.0 / 3.0 + w,
            default_points: 2048,
        },
        Curve {
            group: "level45",
            file: "level45_conjugate.csv",
            source: Source::Conjugate {
                form: "45",
                alpha: 1.75,
                x0: Cusp::new(1, 3),
            },
            start: 0.0,
            end: 1.0,
            default_points: 4096,
        },
        Curve {
            group: "level49",
            file: "level49.csv",
            source: Source::Falpha {
                form: "49",
                alpha: 1.75,
                scale: 1.0,
            },
            start: 0.0,
            end: 1.0,
            default_points: 4096,
        },
        Curve {
            group: "level49",
            file: "level49_detail_1_7.csv",
            source: Source::Falpha {
                form: "49",
                alpha: 1.75,
                scale: 1.0,
            },
            start: 1.0 / 7.0 - w,
            end: 1.0 / 7.0 + w,
            default_points: 2048,
        },
    ]
}

fn figures() -> Vec<Figure> {
    let p = |file: &str, projection, title: &str| Panel {
        file: file.into(),
        projection,
        title: title.into(),
    };
    vec![
        Figure {
            name: "riemann",
            panels: vec![p("riemann.csv", "im", "phi")],
        },
        Figure {
            name: "details",
            panels: vec![
                p("detail_1_2.csv", "im", "phi near 1/2"),
                p("detail_1_3.csv", "im", "phi near 1/3"),
                p("detail_2_3.csv", "im", "phi near 2/3"),
            ],
        },
        Figure {
            name: "patterns",
            panels: vec![
                p("pattern_theta.csv", "re", "Re theta_1"),
                p("pattern_theta.csv", "im", "Im theta_1"),
                p("pattern_theta.csv", "re+im", "Re theta_1 + Im theta_1"),
                p("pattern_theta2.csv", "im", "Im theta~_1"),
            ],
        },
        Figure {
            name: "level14",
            panels: vec![
                p("level14.csv", "-re", "-Re f_9/5, level 14"),
                p("level14_detail_1_2.csv", "re", "Re f_9/5 near 1/2"),
            ],
        },
        Figure {
            name: "level45",
            panels: vec![
                p("level45.csv", "im", "Im f_7/4, level 45"),
                p("level45_detail_1_3.csv", "im", "Im f_7/4 near 1/3"),
                p("level45_conjugate.csv", "im", "Im f^sigma_7/4"),
            ],
        },
        Figure {
            name: "level49",
            panels: vec![
                p("level49.csv", "re", "Re f_7/4, level 49"),
                p("level49_detail_1_7.csv", "re", "Re f_7/4 near 1/7"),
            ],
        },
    ]
}

fn evaluate(source: &Source, xs: &[f64], cfg: &QuadratureConfig) -> Result<Vec<Row>> {
    let (form, alpha, scale): (FormDescriptor, f64, Complex64) = match source {
        Source::Falpha { form, alpha, scale } => (load_form(form)?, *alpha, Complex64::new(*scale, 0.0)),
        Source::Conjugate { form, alpha, x0 } => {
            let ctx = build_context(&load_form(form)?, *alpha, x0)?;
            (ctx.conjugate.form.clone(), *alpha, ctx.conjugate.mu)
        }
    };
    let vals = modfrac::par::map(xs, |&x| -> Result<Row> {
        let (v, e) = falpha_at(&form, alpha, &HPoint::from_real(x, 0.0), cfg)?;
        Ok(Row {
            x,
            value: scale * v,
            err: scale.norm() * e,
        })
    });
    vals.into_iter().collect()
}

/// Writes the selected groups (all when `only` is empty) into `dir`.
pub fn run(dir: &Path, points: Option<usize>, only: &[String], cfg: &QuadratureConfig) -> Result<Manifest> {
    for o in only {
        if !GROUPS.contains(&o.as_str()) {
            return Err(UsageError(format!("unknown figure group '{o}'; expected one of {}", GROUPS.join(", "))).into());
        }
    }
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let selected = |g: &str| only.is_empty() || only.iter().any(|o| o == g);
    let mut files = Vec::new();
    for c in curves().into_iter().filter(|c| selected(c.group)) {
        let grid = GridSpec {
            start: c.start,
            end: c.end,
            points: points.unwrap_or(c.default_points),
        };
        grid.validate()?;
        let rows = evaluate(&c.source, &grid.xs(), cfg)?;
        csv_to(Some(&dir.join(c.file)), &rows)?;
        files.push(FileEntry {
            file: c.file.into(),
            rows: rows.len(),
            start: c.start,
            end: c.end,
            description: match &c.source {
                Source::Falpha { form, alpha, scale } => format!("{scale} * f_alpha for {form}, alpha = {alpha}"),
                Source::Conjugate { form, alpha, x0 } => format!("conjugate f^sigma_alpha for {form} at {x0}, alpha = {alpha}"),
            },
        });
    }
    let manifest = Manifest {
        figures: figures().into_iter().filter(|f| selected(f.name)).collect(),
        files,
    };
    json_to(Some(&dir.join("manifest.json")), &manifest)?;
    Ok(manifest)
}
