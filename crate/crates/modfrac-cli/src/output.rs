//! Deterministic CSV and JSON emission.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use num_complex::Complex64;
use serde::Serialize;

/// One curve sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Row {
    pub x: f64,
    pub value: Complex64,
    pub err: f64,
}

/// 17 significant digits, enough to round-trip an f64.
pub fn fmt17(v: f64) -> String {
    if v == 0.0 {
        // no negative zero in the files
        return "0.0000000000000000e0".into();
    }
    format!("{v:.16e}")
}

pub fn write_csv<W: Write>(w: W, rows: &[Row]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["x", "re", "im", "err"])?;
    for r in rows {
        wr.write_record([fmt17(r.x), fmt17(r.value.re), fmt17(r.value.im), fmt17(r.err)])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn csv_to(path: Option<&Path>, rows: &[Row]) -> Result<()> {
    match path {
        Some(p) => {
            let f = std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?;
            write_csv(std::io::BufWriter::new(f), rows)
        }
        None => write_csv(std::io::stdout().lock(), rows),
    }
}

pub fn json_to<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_format() {
        let mut buf = Vec::new();
        let rows = [Row {
            x: 0.1,
            value: Complex64::new(-0.0, 1.0 / 3.0),
            err: 1e-300,
        }];
        write_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x,re,im,err"));
        let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(fields[0], "1.0000000000000001e-1");
        assert_eq!(fields[1], "0.0000000000000000e0");
        assert_eq!(fields[2].parse::<f64>().unwrap(), 1.0 / 3.0);
        assert_eq!(fields[3].parse::<f64>().unwrap(), 1e-300);
    }
}
