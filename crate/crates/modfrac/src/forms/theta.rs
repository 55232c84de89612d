//! Jacobi theta functions in the variable z of e^{i pi z}:
//! theta_3 = sum e^{i pi n^2 z}, theta_4(z) = theta_3(z + 1),
//! theta_2 = sum e^{i pi (n + 1/2)^2 z}.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::point::HPoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ThetaMember {
    Two,
    Three,
    Four,
}

impl ThetaMember {
    pub fn name(&self) -> &'static str {
        match self {
            ThetaMember::Two => "theta2",
            ThetaMember::Three => "theta3",
            ThetaMember::Four => "theta4",
        }
    }

    /// Member g with g(w) related to self(w + 1).
    fn shifted(self) -> ThetaMember {
        match self {
            ThetaMember::Three => ThetaMember::Four,
            ThetaMember::Four => ThetaMember::Three,
            ThetaMember::Two => ThetaMember::Two,
        }
    }

    /// Member g with self(-1/w) = sqrt(-i w) g(w).
    fn inverted(self) -> ThetaMember {
        match self {
            ThetaMember::Three => ThetaMember::Three,
            ThetaMember::Four => ThetaMember::Two,
            ThetaMember::Two => ThetaMember::Four,
        }
    }
}

/// Direct summation. Returns (value, value minus constant term, terms used).
pub fn theta_direct(member: ThetaMember, z: Complex64) -> (Complex64, Complex64, usize) {
    let y = z.im;
    let mut tail = Complex64::new(0.0, 0.0);
    let mut k = 0usize;
    let shift = if member == ThetaMember::Two { 0.5 } else { 0.0 };
    let start = if member == ThetaMember::Two { 0 } else { 1 };
    let mut n = start;
    loop {
        let e = n as f64 + shift;
        if PI * e * e * y > 45.0 && n > start {
            break;
        }
        let mut term = (Complex64::i() * PI * e * e * z).exp() * 2.0;
        if member == ThetaMember::Four && n % 2 == 1 {
            term = -term;
        }
        tail += term;
        n += 1;
        k += 1;
        if k > 10_000_000 {
            break;
        }
    }
    let c0 = if member == ThetaMember::Two { 0.0 } else { 1.0 };
    (tail + c0, tail, k)
}

/// Reduces `p` to the region |Re| <= 1/2, |z| >= 1 (or Im z >= `stop`),
/// returning (multiplier, member, reduced point) with
/// member_in(p) = multiplier * member_out(reduced).
pub fn reduce(member: ThetaMember, p: &HPoint, stop: f64) -> (Complex64, ThetaMember, HPoint, usize) {
    let mut mult = Complex64::new(1.0, 0.0);
    let mut mem = member;
    let mut p = *p;
    let mut steps = 0;
    for _ in 0..100_000 {
        let z = p.to_complex();
        let n = z.re.round();
        if n != 0.0 {
            let n = n as i128;
            p = p.translate(-n);
            let odd = n.rem_euclid(2) == 1;
            if mem == ThetaMember::Two {
                mult *= Complex64::from_polar(1.0, PI / 4.0 * n.rem_euclid(8) as f64);
            } else if odd {
                mem = mem.shifted();
            }
        }
        let z = p.to_complex();
        if z.im >= stop || z.norm_sqr() >= 1.0 - 1e-12 {
            break;
        }
        p = p.invert();
        let w = p.to_complex();
        mult *= (-Complex64::i() * w).sqrt();
        mem = mem.inverted();
        steps += 1;
    }
    (mult, mem, p, steps)
}

/// Value of the member at an exact point. Returns (value, value minus the
/// constant term at infinity, error estimate, terms).
pub fn theta_eval(member: ThetaMember, p: &HPoint) -> (Complex64, Complex64, f64, usize) {
    let z = p.to_complex();
    if z.im >= 0.5 {
        let (v, tail, k) = theta_direct(member, z);
        let err = 4.0 * f64::EPSILON * v.norm().max(1.0);
        return (v, tail, err, k);
    }
    let (mult, mem, q, steps) = reduce(member, p, 2.0);
    let (v, _, k) = theta_direct(mem, q.to_complex());
    let val = mult * v;
    let c0 = if member == ThetaMember::Two { 0.0 } else { 1.0 };
    let err = (8.0 + 4.0 * steps as f64) * f64::EPSILON * val.norm();
    (val, val - c0, err, k)
}
