//! Level-one forms E4, E6 and Delta.

use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use serde::Serialize;

use crate::point::HPoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Level1 {
    E4,
    E6,
    Delta,
}

impl Level1 {
    pub fn weight(&self) -> u32 {
        match self {
            Level1::E4 => 4,
            Level1::E6 => 6,
            Level1::Delta => 12,
        }
    }

    /// Bound |a_n| <= c n^e for n >= 1.
    pub fn coef_bound(&self) -> (f64, f64) {
        match self {
            // sigma_3(n) <= zeta(3) n^3, 240 zeta(3) < 289
            Level1::E4 => (289.0, 3.0),
            // sigma_5(n) <= zeta(5) n^5, 504 zeta(5) < 523
            Level1::E6 => (523.0, 5.0),
            // |tau(n)| <= d(n) n^{11/2} <= 2 n^6
            Level1::Delta => (2.0, 6.0),
        }
    }
}

fn sigma_table(n: usize, k: i32) -> Vec<f64> {
    let mut s = vec![0.0f64; n + 1];
    for d in 1..=n {
        let dk = (d as f64).powi(k);
        let mut m = d;
        while m <= n {
            s[m] += dk;
            m += d;
        }
    }
    s
}

/// Ramanujan tau(0..=n) (tau(0) = 0) from q (sum (-1)^k (2k+1) q^{k(k+1)/2})^8.
pub fn tau_exact(n: usize) -> Vec<i128> {
    let mut sparse: Vec<(usize, i128)> = Vec::new();
    let mut k = 0usize;
    while k * (k + 1) / 2 < n {
        let sign = if k % 2 == 0 { 1 } else { -1 };
        sparse.push((k * (k + 1) / 2, sign * (2 * k as i128 + 1)));
        k += 1;
    }
    // length n: the product is shifted by one
    let len = n;
    let mut acc = vec![0i128; len];
    for &(e, c) in &sparse {
        if e < len {
            acc[e] = c;
        }
    }
    for _ in 1..8 {
        let mut next = vec![0i128; len];
        for &(e, c) in &sparse {
            for i in 0..len.saturating_sub(e) {
                next[i + e] += c * acc[i];
            }
        }
        acc = next;
    }
    let mut tau = vec![0i128; n + 1];
    tau[1..(len + 1)].copy_from_slice(&acc[..len]);
    tau
}

struct Cache {
    e4: Arc<Vec<f64>>,
    e6: Arc<Vec<f64>>,
    delta: Arc<Vec<f64>>,
}

fn cache() -> &'static Mutex<Cache> {
    static C: OnceLock<Mutex<Cache>> = OnceLock::new();
    C.get_or_init(|| {
        Mutex::new(Cache {
            e4: Arc::new(Vec::new()),
            e6: Arc::new(Vec::new()),
            delta: Arc::new(Vec::new()),
        })
    })
}

/// Coefficients a_0..a_n (at least; the cache may hold more).
pub fn coefficients(f: Level1, n: usize) -> Arc<Vec<f64>> {
    let mut c = cache().lock().expect("coefficient cache poisoned");
    let slot = match f {
        Level1::E4 => &mut c.e4,
        Level1::E6 => &mut c.e6,
        Level1::Delta => &mut c.delta,
    };
    if slot.len() <= n {
        let target = n.max(64).max(slot.len() * 2);
        let v: Vec<f64> = match f {
            Level1::E4 => {
                let s = sigma_table(target, 3);
                (0..=target).map(|i| if i == 0 { 1.0 } else { 240.0 * s[i] }).collect()
            }
            Level1::E6 => {
                let s = sigma_table(target, 5);
                (0..=target).map(|i| if i == 0 { 1.0 } else { -504.0 * s[i] }).collect()
            }
            Level1::Delta => tau_exact(target).into_iter().map(|t| t as f64).collect(),
        };
        *slot = Arc::new(v);
    }
    slot.clone()
}

/// Direct q-series at z with q = e^{2 pi i z}. Returns (value, value minus
/// a_0, tail bound, terms).
pub fn series(f: Level1, z: Complex64, include_const: bool) -> (Complex64, f64, usize) {
    let y = z.im;
    let rho = (-2.0 * PI * y).exp();
    let (cb, e) = f.coef_bound();
    // smallest N whose geometric tail c N^e rho^N / (1 - rho') is negligible
    let mut n = 1usize;
    loop {
        let nf = n as f64;
        let ratio = rho * ((nf + 1.0) / nf).powf(e);
        if ratio < 0.9 {
            let tail = cb * nf.powf(e) * rho.powf(nf) / (1.0 - ratio);
            if tail < 1e-17 * (1.0 + rho.powf(1.0)) || tail < f64::MIN_POSITIVE {
                break;
            }
        }
        n += 1;
        if n > 5_000_000 {
            break;
        }
    }
    let a = coefficients(f, n);
    let q = (Complex64::i() * 2.0 * PI * z).exp();
    let mut acc = Complex64::new(0.0, 0.0);
    // Horner from the top
    for k in (1..=n).rev() {
        acc = (acc + a[k]) * q;
    }
    if include_const {
        acc += a[0];
    }
    let nf = (n + 1) as f64;
    let tail = cb * nf.powf(e) * rho.powf(nf) * 2.0;
    (acc, tail, n)
}

/// Reduction to the fundamental domain: f(z) = w^k f(w') chains.
/// Returns (value, value minus a_0, error, terms).
pub fn eval(f: Level1, p: &HPoint) -> (Complex64, Complex64, f64, usize) {
    let z = p.to_complex();
    let c0 = if f == Level1::Delta { 0.0 } else { 1.0 };
    if z.im >= 0.5 {
        let (tail_val, tail, n) = series(f, z, false);
        let v = tail_val + c0;
        return (v, tail_val, tail + 4.0 * f64::EPSILON * v.norm(), n);
    }
    let k = f.weight() as f64;
    // logarithmic multiplier: w^k overflows long before the product does
    let mut lmult = Complex64::new(0.0, 0.0);
    let mut p = *p;
    let mut steps = 0;
    for _ in 0..100_000 {
        let z = p.to_complex();
        let n = z.re.round();
        if n != 0.0 {
            p = p.translate(-(n as i128));
        }
        let z = p.to_complex();
        if z.norm_sqr() >= 1.0 - 1e-12 {
            break;
        }
        // f(z) = f(-1/w) = w^k f(w) with w = -1/z
        p = p.invert();
        lmult += p.to_complex().ln() * k;
        steps += 1;
    }
    let w = p.to_complex();
    let (v, tail, n) = series(f, w, true);
    let lv = if f == Level1::Delta {
        // Delta(w) = q * sum tau(n) q^{n-1}; the q factor stays logarithmic
        let q_log = Complex64::i() * 2.0 * PI * w;
        let a = coefficients(f, n);
        let q = q_log.exp();
        let mut s = Complex64::new(0.0, 0.0);
        for k in (1..=n).rev() {
            s = s * q + a[k];
        }
        q_log + s.ln()
    } else {
        v.ln()
    };
    let val = (lmult + lv).exp();
    let scale = (lmult.re + v.norm().max(tail).ln()).exp();
    let err = scale * (tail / v.norm().max(f64::MIN_POSITIVE)).min(1.0)
        + (8.0 + 4.0 * steps as f64) * f64::EPSILON * val.norm() * (1.0 + lmult.norm());
    (val, val - c0, err, n)
}
