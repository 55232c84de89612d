//! Newform tables in the line-oriented text format:
//!
//! ```text
//! # level=14
//! # weight=2
//! # label=14.2.a.a
//! # AL 7=-1
//! 1 1
//! 2 -1
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use num_integer::Integer;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NewformTable {
    pub level: u64,
    pub weight: u32,
    pub label: String,
    /// Atkin-Lehner eigenvalue per exact divisor Q of the level.
    pub al: BTreeMap<u64, i8>,
    /// a_1..a_N stored at index n (index 0 unused, zero).
    pub coeffs: Vec<i64>,
    pub provenance: String,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

impl NewformTable {
    pub fn len(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn parse(text: &str) -> Result<NewformTable> {
        let mut level = None;
        let mut weight = None;
        let mut label = String::new();
        let mut provenance = String::new();
        let mut al = BTreeMap::new();
        let mut coeffs = vec![0i64];
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(h) = line.strip_prefix('#') {
                let h = h.trim();
                if let Some(rest) = h.strip_prefix("AL ") {
                    let (q, e) = rest
                        .split_once('=')
                        .ok_or_else(|| bad(format!("line {}: AL entry needs Q=sign", lineno + 1)))?;
                    let q: u64 = q.trim().parse().map_err(|_| bad(format!("line {}: bad AL divisor", lineno + 1)))?;
                    let e: i8 = e.trim().parse().map_err(|_| bad(format!("line {}: bad AL sign", lineno + 1)))?;
                    if e != 1 && e != -1 {
                        return Err(bad(format!("line {}: AL eigenvalue must be +1 or -1", lineno + 1)));
                    }
                    al.insert(q, e);
                } else if let Some((k, v)) = h.split_once('=') {
                    let v = v.trim();
                    match k.trim() {
                        "level" => level = Some(v.parse::<u64>().map_err(|_| bad("bad level"))?),
                        "weight" => weight = Some(v.parse::<u32>().map_err(|_| bad("bad weight"))?),
                        "label" => label = v.to_string(),
                        "provenance" => provenance = v.to_string(),
                        _ => {}
                    }
                }
                continue;
            }
            let mut it = line.split_whitespace();
            let (n, a) = match (it.next(), it.next(), it.next()) {
                (Some(n), Some(a), None) => (n, a),
                _ => return Err(bad(format!("line {}: expected 'n a_n'", lineno + 1))),
            };
            let n: usize = n.parse().map_err(|_| bad(format!("line {}: bad index", lineno + 1)))?;
            let a: i64 = a.parse().map_err(|_| bad(format!("line {}: bad coefficient", lineno + 1)))?;
            if n != coeffs.len() {
                return Err(bad(format!("line {}: expected index {}, found {n}", lineno + 1, coeffs.len())));
            }
            coeffs.push(a);
        }
        let level = level.ok_or_else(|| bad("missing level header"))?;
        let weight = weight.ok_or_else(|| bad("missing weight header"))?;
        if level == 0 {
            return Err(bad("level must be positive"));
        }
        if weight == 0 || weight % 2 == 1 {
            return Err(bad("weight must be a positive even integer"));
        }
        if coeffs.len() < 2 {
            return Err(bad("no coefficients"));
        }
        if coeffs[1] != 1 {
            return Err(bad(format!("a_1 = {} but a newform is normalized to a_1 = 1", coeffs[1])));
        }
        for &q in al.keys() {
            if q == 0 || level % q != 0 || q.gcd(&(level / q)) != 1 {
                return Err(Error::Precondition(format!("AL divisor {q} does not exactly divide {level}")));
            }
        }
        Ok(NewformTable {
            level,
            weight,
            label,
            al,
            coeffs,
            provenance,
        })
    }

    pub fn load(path: &Path) -> Result<NewformTable> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        NewformTable::parse(&text)
    }

    /// Eigenvalue of the involution for an exact divisor Q, from the table
    /// or as a product over its prime-power parts.
    pub fn al_eigenvalue(&self, q: u64) -> Option<i8> {
        if q == 1 {
            return Some(1);
        }
        if let Some(&e) = self.al.get(&q) {
            return Some(e);
        }
        let mut rest = q;
        let mut sign = 1i8;
        let mut p = 2;
        while rest > 1 {
            if rest % p == 0 {
                let mut pk = 1;
                while rest % p == 0 {
                    rest /= p;
                    pk *= p;
                }
                sign *= *self.al.get(&pk)?;
            }
            p += 1;
        }
        Some(sign)
    }

    /// Writes the table back in the file format.
    pub fn to_text(&self) -> String {
        let mut s = format!("# level={}\n# weight={}\n# label={}\n", self.level, self.weight, self.label);
        if !self.provenance.is_empty() {
            s.push_str(&format!("# provenance={}\n", self.provenance));
        }
        for (q, e) in &self.al {
            s.push_str(&format!("# AL {q}={e:+}\n"));
        }
        for (n, a) in self.coeffs.iter().enumerate().skip(1) {
            s.push_str(&format!("{n} {a}\n"));
        }
        s
    }
}

/// Directory holding the bundled fixtures.
pub fn data_dir() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/newforms")
}

/// Bundled table by level (14, 15, 45, 49) or label such as `14.2.a.a`.
pub fn bundled(name: &str) -> Result<NewformTable> {
    let level = name.split('.').next().unwrap_or(name);
    let path = data_dir().join(format!("{level}.txt"));
    if !path.exists() {
        return Err(Error::Precondition(format!("no bundled newform '{name}'")));
    }
    NewformTable::load(&path)
}

/// Optional network fetch of an LMFDB newform into the text format. Only
/// available when the caller explicitly allows network access.
pub fn fetch_newform(label: &str, allow_network: bool) -> Result<String> {
    if !allow_network {
        return Err(Error::Precondition(format!(
            "fetching '{label}' needs network access; run without --offline"
        )));
    }
    Err(Error::Precondition(
        "no network client is built into this binary; use the bundled tables or write the file by hand".into(),
    ))
}
