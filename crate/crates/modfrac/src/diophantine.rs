//! Continued fractions, convergents and the class-restricted approximation
//! exponent `tau_x`.

use std::fmt;
use std::sync::Arc;

use num_integer::{Integer, Roots};
use serde::Serialize;

use crate::error::{pre, Error, Result};
use crate::modgroup::Cusp;

/// Partial quotient generator for numbers given by their continued fraction.
pub type QuotientFn = Arc<dyn Fn(usize) -> i64 + Send + Sync>;

#[derive(Clone)]
pub enum RealDescriptor {
    Rational { p: i64, q: i64 },
    /// `(a + b sqrt(d)) / c`
    QuadraticSurd { a: i64, b: i64, d: i64, c: i64 },
    /// `[a0; a1, a2, ...]` with `quotient(k)` returning `a_k` for `k >= 1`.
    CfDefined { a0: i64, quotient: QuotientFn, label: String },
    Float(f64),
}

impl fmt::Debug for RealDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RealDescriptor::Rational { p, q } => write!(f, "Rational({p}/{q})"),
            RealDescriptor::QuadraticSurd { a, b, d, c } => write!(f, "Surd(({a}+{b}*sqrt({d}))/{c})"),
            RealDescriptor::CfDefined { label, .. } => write!(f, "Cf({label})"),
            RealDescriptor::Float(x) => write!(f, "Float({x})"),
        }
    }
}

impl RealDescriptor {
    pub fn golden() -> Self {
        RealDescriptor::QuadraticSurd { a: 1, b: 1, d: 5, c: 2 }
    }

    pub fn sqrt2() -> Self {
        RealDescriptor::QuadraticSurd { a: 0, b: 1, d: 2, c: 1 }
    }

    /// Number with the given partial quotients; quotients past the end are 1.
    pub fn from_quotients(quotients: Vec<i64>, label: &str) -> Self {
        let a0 = quotients.first().copied().unwrap_or(0);
        let rest = Arc::new(quotients);
        RealDescriptor::CfDefined {
            a0,
            quotient: Arc::new(move |k| rest.get(k).copied().unwrap_or(1)),
            label: label.to_string(),
        }
    }

    /// A number in (0, 1) whose convergent denominators satisfy
    /// `q_{k+1} ~ q_k^(tau-1)`, so its approximation exponent is `tau`.
    pub fn with_exponent(tau: f64, depth: usize) -> Self {
        let mut quots = vec![0i64, 1];
        let (mut q_prev, mut q) = (1i128, 1i128);
        for _ in 0..depth {
            let next = (q as f64).powf(tau - 2.0).round().max(1.0);
            if next > 1e15 || (q as f64) > 1e30 {
                break;
            }
            let a = next as i64;
            quots.push(a);
            let q_next = a as i128 * q + q_prev;
            q_prev = q;
            q = q_next;
        }
        RealDescriptor::from_quotients(quots, &format!("tau={tau}"))
    }

    /// Parses `golden`, `sqrt2`, `p/q`, or a decimal.
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "golden" | "phi" => Ok(Self::golden()),
            "sqrt2" => Ok(Self::sqrt2()),
            t => {
                if let Some((p, q)) = t.split_once('/') {
                    let (p, q) = (p.trim().parse::<i64>(), q.trim().parse::<i64>());
                    if let (Ok(p), Ok(q)) = (p, q) {
                        if q != 0 {
                            return Ok(RealDescriptor::Rational { p, q });
                        }
                    }
                    return pre(format!("cannot parse point '{s}'"));
                }
                t.parse::<f64>()
                    .map(RealDescriptor::Float)
                    .map_err(|_| Error::Precondition(format!("cannot parse point '{s}'")))
            }
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, RealDescriptor::Rational { .. })
    }

    pub fn value(&self) -> f64 {
        match self {
            RealDescriptor::Rational { p, q } => *p as f64 / *q as f64,
            RealDescriptor::QuadraticSurd { a, b, d, c } => {
                (*a as f64 + *b as f64 * (*d as f64).sqrt()) / *c as f64
            }
            RealDescriptor::Float(x) => *x,
            RealDescriptor::CfDefined { .. } => {
                let (p, q) = self.approximant().expect("cf numbers have approximants");
                p as f64 / q as f64
            }
        }
    }

    /// Rational `P/Q` with `|x - P/Q| < 1/Q^2` and `Q` large (about 1e16
    /// for irrationals; the exact value for rationals and floats).
    pub fn approximant(&self) -> Result<(i128, i128)> {
        match self {
            RealDescriptor::Rational { p, q } => {
                let c = Cusp::new(*p, *q);
                let (p, q) = c.as_pair();
                Ok((p as i128, q as i128))
            }
            RealDescriptor::Float(x) => {
                if !x.is_finite() {
                    return pre("non-finite float");
                }
                let scale = 2f64.powi(60);
                let p = (x * scale).round() as i128;
                let g = p.gcd(&(1i128 << 60)).max(1);
                Ok((p / g, (1i128 << 60) / g))
            }
            _ => {
                let cf = self.cf_expand(200)?;
                let (mut p0, mut q0, mut p1, mut q1) = (1i128, 0i128, cf[0] as i128, 1i128);
                for &a in &cf[1..] {
                    let p2 = (a as i128).checked_mul(p1).and_then(|v| v.checked_add(p0));
                    let q2 = (a as i128).checked_mul(q1).and_then(|v| v.checked_add(q0));
                    match (p2, q2) {
                        (Some(p2), Some(q2)) if q2 < 10i128.pow(24) => {
                            p0 = p1;
                            q0 = q1;
                            p1 = p2;
                            q1 = q2;
                        }
                        _ => break,
                    }
                    if q1 > 10i128.pow(16) {
                        break;
                    }
                }
                Ok((p1, q1))
            }
        }
    }

    /// Partial quotients `[a0, a1, ...]`, at most `depth` of them.
    pub fn cf_expand(&self, depth: usize) -> Result<Vec<i64>> {
        if depth == 0 {
            return pre("depth must be at least 1");
        }
        match self {
            RealDescriptor::Rational { p, q } => {
                if *q == 0 {
                    return pre("zero denominator");
                }
                Ok(cf_rational(*p as i128, *q as i128, depth))
            }
            RealDescriptor::QuadraticSurd { a, b, d, c } => cf_surd(*a, *b, *d, *c, depth),
            RealDescriptor::CfDefined { a0, quotient, .. } => {
                let mut v = vec![*a0];
                for k in 1..depth {
                    let ak = quotient(k);
                    if ak < 1 {
                        return pre("partial quotients after the first must be >= 1");
                    }
                    v.push(ak);
                }
                Ok(v)
            }
            RealDescriptor::Float(x) => {
                let trusted = float_trusted_cf(*x);
                if depth > trusted.len() {
                    return Err(Error::Precondition(format!(
                        "float {x} only determines {} partial quotients",
                        trusted.len()
                    )));
                }
                Ok(trusted[..depth].to_vec())
            }
        }
    }
}

fn cf_rational(mut p: i128, mut q: i128, depth: usize) -> Vec<i64> {
    let mut out = Vec::new();
    if q < 0 {
        p = -p;
        q = -q;
    }
    while q != 0 && out.len() < depth {
        let a = Integer::div_floor(&p, &q);
        out.push(a as i64);
        let r = p - a * q;
        p = q;
        q = r;
    }
    out
}

/// Exact expansion of `(a + b sqrt d)/c` by the (P + sqrt D)/Q recursion.
fn cf_surd(a: i64, b: i64, d: i64, c: i64, depth: usize) -> Result<Vec<i64>> {
    if d <= 0 || c == 0 || Roots::sqrt(&(d as i128)).pow(2) == d as i128 || b == 0 {
        return pre("quadratic surd needs d > 0 non-square, b != 0, c != 0");
    }
    let s = if b > 0 { 1i128 } else { -1 };
    let mut big_d = (b as i128) * (b as i128) * d as i128;
    let mut p = s * a as i128;
    let mut q = s * c as i128;
    if (big_d - p * p) % q != 0 {
        big_d *= q * q;
        p *= q.abs();
        q *= q.abs();
    }
    let r = Roots::sqrt(&big_d);
    let mut out = Vec::with_capacity(depth);
    while out.len() < depth {
        let ak = if q > 0 {
            Integer::div_floor(&(p + r), &q)
        } else {
            -(Integer::div_floor(&(p + r), &(-q)) + 1)
        };
        out.push(ak as i64);
        p = ak * q - p;
        q = (big_d - p * p) / q;
    }
    Ok(out)
}

/// Common prefix of the expansions of the float and its two neighbours.
fn float_trusted_cf(x: f64) -> Vec<i64> {
    let exact = |v: f64| -> Vec<i64> {
        let scale = 1i128 << 62;
        cf_rational((v * scale as f64).round() as i128, scale, 64)
    };
    let lo = exact(f64::from_bits(x.to_bits().wrapping_sub(1)));
    let mid = exact(x);
    let hi = exact(f64::from_bits(x.to_bits() + 1));
    let mut n = 0;
    while n < mid.len() && n < lo.len() && n < hi.len() && lo[n] == mid[n] && hi[n] == mid[n] {
        n += 1;
    }
    // the last common quotient may still be truncated
    mid[..n.saturating_sub(1).max(1)].to_vec()
}

/// Convergents `p_k/q_k`; stops early if the next one overflows i64.
pub fn convergents(cf: &[i64]) -> Vec<Cusp> {
    let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
    let mut out = Vec::with_capacity(cf.len());
    for &a in cf {
        let p2 = a as i128 * p1 + p0;
        let q2 = a as i128 * q1 + q0;
        if p2.abs() > i64::MAX as i128 || q2 > i64::MAX as i128 {
            break;
        }
        out.push(Cusp::new(p2 as i64, q2 as i64));
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct TauEstimate {
    pub tau_hat: f64,
    /// Record approximants `(p, q, -ln|x - p/q| / ln q)`: admissible
    /// fractions closer to x than every admissible fraction of smaller
    /// denominator.
    pub witnesses: Vec<(i64, i64, f64)>,
    pub q_max: i64,
}

/// Heuristic `tau_x` from admissible fractions with `2 <= q <= q_max`.
///
/// The raw exponent `-ln|x - p/q| / ln q` converges slowly because of the
/// implied constant (about 2.11 for sqrt 2 at q near 1e4), so the estimate
/// is the slope of `-ln|x - p/q|` against `ln q` along the upper convex
/// hull of the record approximants, floored at 2. With fewer than two hull
/// points the largest raw exponent is used.
pub fn tau_estimate(
    x: &RealDescriptor,
    classifier: &dyn Fn(&Cusp) -> bool,
    q_max: i64,
) -> Result<TauEstimate> {
    if x.is_rational() {
        return pre("tau_x is only defined for irrational x");
    }
    if q_max < 2 {
        return pre("q_max must be at least 2");
    }
    let (big_p, big_q) = x.approximant()?;
    let mut best_dist = f64::INFINITY;
    let mut witnesses = Vec::new();
    for q in 2..=q_max {
        let qq = q as i128;
        let center = Integer::div_floor(&(big_p * qq + big_q / 2), &big_q);
        for p in (center - 1)..=(center + 1) {
            let p = p as i64;
            if p.gcd(&q) != 1 {
                continue;
            }
            let num = (big_p * qq - p as i128 * big_q).abs();
            let dist = num as f64 / (big_q as f64 * q as f64);
            if dist == 0.0 || dist > 1.0 / q as f64 || dist >= best_dist {
                continue;
            }
            if !classifier(&Cusp::new(p, q)) {
                continue;
            }
            best_dist = dist;
            witnesses.push((p, q, -dist.ln() / (q as f64).ln()));
        }
    }
    let pts: Vec<(f64, f64)> = witnesses
        .iter()
        .map(|&(_, q, e)| ((q as f64).ln(), e * (q as f64).ln()))
        .collect();
    let hull = upper_hull(&pts);
    let slope = if hull.len() >= 2 {
        least_squares_slope(&hull)
    } else {
        witnesses.iter().map(|w| w.2).fold(2.0, f64::max)
    };
    Ok(TauEstimate {
        tau_hat: slope.max(2.0),
        witnesses,
        q_max,
    })
}

fn upper_hull(pts: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for &p in pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Non-cuspidal classes of the theta function: p/q not both odd.
pub fn theta_noncuspidal(c: &Cusp) -> bool {
    match *c {
        Cusp::Infinity => true,
        Cusp::Rational { p, q } => !(p.rem_euclid(2) == 1 && q % 2 == 1),
    }
}
