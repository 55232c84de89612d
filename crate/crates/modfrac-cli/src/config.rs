//! Run configuration read from `--config <json>`; command-line flags
//! override it field by field.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use modfrac::eval::QuadratureConfig;
use modfrac::forms::newform::NewformTable;
use modfrac::forms::FormDescriptor;
use serde::Deserialize;

use crate::UsageError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// catalog name or path to a newform table
    pub form: Option<String>,
    pub alpha: Option<f64>,
    pub grid: Option<GridSpec>,
    pub tolerances: Option<Tolerances>,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
    pub offline: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct GridSpec {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct Tolerances {
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: RunConfig = serde_json::from_str(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(g) = &self.grid {
            g.validate()?;
        }
        if let Some(t) = &self.tolerances {
            if !(t.abs_tol > 0.0 && t.rel_tol > 0.0) {
                return Err(UsageError("tolerances must be positive".into()).into());
            }
        }
        if self.threads == Some(0) {
            return Err(UsageError("thread count must be positive".into()).into());
        }
        Ok(())
    }

    pub fn quadrature(&self) -> QuadratureConfig {
        let mut q = QuadratureConfig::default();
        if let Some(t) = self.tolerances {
            q.abs_tol = t.abs_tol;
            q.rel_tol = t.rel_tol;
        }
        q
    }

    pub fn form_or(&self, flag: Option<&str>) -> Result<FormDescriptor> {
        match flag.or(self.form.as_deref()) {
            Some(s) => load_form(s),
            None => Err(UsageError("--form is required".into()).into()),
        }
    }

    pub fn alpha_or(&self, flag: Option<f64>) -> Result<f64> {
        flag.or(self.alpha).ok_or_else(|| UsageError("--alpha is required".into()).into())
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(UsageError(format!("a grid needs at least 2 points, got {}", self.points)).into());
        }
        if !(self.start.is_finite() && self.end.is_finite() && self.start < self.end) {
            return Err(UsageError("grid start must be below grid end".into()).into());
        }
        Ok(())
    }

    /// `start:end:points`
    pub fn parse(s: &str) -> Result<GridSpec> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || UsageError(format!("grid '{s}' is not start:end:points"));
        if parts.len() != 3 {
            return Err(bad().into());
        }
        let g = GridSpec {
            start: parse_real(parts[0]).ok_or_else(bad)?,
            end: parse_real(parts[1]).ok_or_else(bad)?,
            points: parts[2].trim().parse().map_err(|_| bad())?,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn xs(&self) -> Vec<f64> {
        let n = self.points - 1;
        (0..=n)
            .map(|i| self.start + (self.end - self.start) * i as f64 / n as f64)
            .collect()
    }
}

/// A decimal or `p/q`.
pub fn parse_real(s: &str) -> Option<f64> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let (p, q) = (p.trim().parse::<f64>().ok()?, q.trim().parse::<f64>().ok()?);
            (q != 0.0).then(|| p / q)
        }
        None => s.parse().ok(),
    }
}

/// Catalog name, bundled level, or a path to a newform table.
pub fn load_form(spec: &str) -> Result<FormDescriptor> {
    let path = Path::new(spec);
    if path.is_file() {
        let t = NewformTable::load(path)?;
        return Ok(FormDescriptor::newform(t));
    }
    Ok(FormDescriptor::by_name(spec)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g = GridSpec::parse("0:2:5").unwrap();
        assert_eq!(g.xs(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert!(GridSpec::parse("0:1:1").is_err());
        assert!(GridSpec::parse("0:1:0").is_err());
        assert!(GridSpec::parse("1:0:5").is_err());
        assert_eq!(GridSpec::parse("1/3:2/3:2").unwrap().start, 1.0 / 3.0);
    }

    #[test]
    fn config_json() {
        let c: RunConfig = serde_json::from_str(r#"{"form":"theta","alpha":1.0,"grid":{"start":0,"end":1,"points":3}}"#).unwrap();
        assert!(c.validate().is_ok());
        assert_eq!(c.form_or(None).unwrap().id, "theta");
        let c: RunConfig = serde_json::from_str(r#"{"grid":{"start":0,"end":1,"points":0}}"#).unwrap();
        assert!(c.validate().is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"colour":1}"#).is_err());
    }
}
