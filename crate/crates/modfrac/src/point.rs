//! Points of the upper half-plane written as `r + off` with `r` an exact
//! rational and `off` a small complex float.
//!
//! Modular reductions act on `r` exactly; only the offset picks up rounding,
//! and its error stays relative to `off` itself. This keeps evaluations
//! accurate at heights far below what `x + it` in plain floats can resolve.

use num_complex::Complex64;
use num_integer::Integer;

use crate::modgroup::IntMatrix2;

/// Denominator used when a float real part is snapped to a dyadic rational.
const SNAP_BITS: u32 = 60;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HPoint {
    pub num: i128,
    pub den: i128,
    pub off: Complex64,
}

fn normalize(num: i128, den: i128) -> (i128, i128) {
    let g = num.gcd(&den);
    let s = if den < 0 { -1 } else { 1 };
    (s * num / g, s * den / g)
}

impl HPoint {
    pub fn rational(p: i128, q: i128, off: Complex64) -> HPoint {
        let (num, den) = normalize(p, q);
        HPoint { num, den, off }
    }

    /// `x + i t` with the float `x` split into a dyadic rational and an
    /// exactly representable remainder.
    pub fn from_real(x: f64, t: f64) -> HPoint {
        Self::from_complex(Complex64::new(x, t))
    }

    pub fn from_complex(z: Complex64) -> HPoint {
        let n = z.re.floor();
        let frac = z.re - n;
        let scale = (1u64 << SNAP_BITS) as f64;
        let k = (frac * scale).round();
        let rem = frac - k / scale;
        let num = (n as i128) * (1i128 << SNAP_BITS) + k as i128;
        let (num, den) = normalize(num, 1i128 << SNAP_BITS);
        HPoint {
            num,
            den,
            off: Complex64::new(rem, z.im),
        }
    }

    pub fn r(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn to_complex(&self) -> Complex64 {
        self.off + self.r()
    }

    pub fn im(&self) -> f64 {
        self.off.im
    }

    /// `z + n`
    pub fn translate(&self, n: i128) -> HPoint {
        HPoint {
            num: self.num + n * self.den,
            den: self.den,
            off: self.off,
        }
    }

    /// Moves the integer part of the offset's real part into `r`.
    fn absorb(mut self) -> HPoint {
        let n = self.off.re.round();
        if n != 0.0 && n.abs() < 1e30 {
            self.off.re -= n;
            self.num += n as i128 * self.den;
        }
        self
    }

    /// `-1/z`
    pub fn invert(&self) -> HPoint {
        self.moebius(&IntMatrix2::s())
    }

    /// `g z` for an integer matrix of positive determinant.
    pub fn moebius(&self, g: &IntMatrix2) -> HPoint {
        let (a, b, c, d) = (g.a as i128, g.b as i128, g.c as i128, g.d as i128);
        let det = (a * d - b * c) as f64;
        let e = c * self.num + d * self.den;
        // distance from r to the pole -d/c, compared with the offset size
        let near_pole = c != 0 && (e as f64 / (c as f64 * self.den as f64)).abs() < self.off.norm();
        if e != 0 && !near_pole {
            let (num, den) = normalize(a * self.num + b * self.den, e);
            // g(r + off) - g(r) = det * off / (j(r) j(r + off))
            let jr = e as f64 / self.den as f64;
            let off = self.off * det / (jr * (self.off * c as f64 + jr));
            HPoint { num, den, off }.absorb()
        } else {
            // anchor at the pole: z = -d/c + off', g(z) = a/c - det / (c^2 off')
            let off = self.off + e as f64 / (c as f64 * self.den as f64);
            let (num, den) = normalize(a, c);
            let off = -det / (off * (c * c) as f64);
            HPoint { num, den, off }.absorb()
        }
    }

    /// `k z`
    pub fn scale(&self, k: i128) -> HPoint {
        let (num, den) = normalize(self.num * k, self.den);
        HPoint {
            num,
            den,
            off: self.off * k as f64,
        }
        .absorb()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1.0)
    }

    #[test]
    fn roundtrip() {
        for x in [0.0, 0.5, -0.3, 1.0 / 3.0, 123.456, -7.25e-9] {
            let p = HPoint::from_real(x, 0.1);
            assert!((p.to_complex().re - x).abs() <= 1e-15 * x.abs().max(1.0));
        }
    }

    #[test]
    fn moebius_matches_float() {
        let z = Complex64::new(0.37, 0.21);
        let p = HPoint::from_complex(z);
        for g in [IntMatrix2::s(), IntMatrix2::raw(2, 1, 1, 1), IntMatrix2::raw(7, 3, 14, 7), IntMatrix2::raw(1, 0, -3, 1)] {
            assert!(close(p.moebius(&g).to_complex(), g.apply(z), 1e-14), "{g}");
        }
    }

    #[test]
    fn tiny_offsets_keep_relative_accuracy() {
        // 1/3 + i t mapped by [[1,0],[-3,1]] sends 1/3 to infinity
        let t = 1e-20;
        let p = HPoint::rational(1, 3, Complex64::new(0.0, t));
        let w = p.moebius(&IntMatrix2::raw(1, 0, -3, 1));
        // exact image: -1/3 + i / (9 t)
        let exact = Complex64::new(-1.0 / 3.0, 1.0 / (9.0 * t));
        assert!((w.to_complex() - exact).norm() / exact.norm() < 1e-14);
        let back = w.moebius(&IntMatrix2::raw(1, 0, 3, 1));
        assert_eq!((back.num, back.den), (1, 3));
        assert!((back.off - Complex64::new(0.0, t)).norm() < 1e-14 * t);
    }
}
