//! Exact 2x2 integer matrices, cusps, cusp classes and widths for SL2(Z),
//! the theta group and Gamma0(N), Atkin-Lehner matrices and the normalizer
//! orbit computation.

use std::collections::BTreeSet;
use std::fmt;

use num_complex::Complex64;
use num_integer::Integer;
use serde::Serialize;

use crate::error::{pre, Result};

/// Integer matrix `[[a, b], [c, d]]` with positive determinant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct IntMatrix2 {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl IntMatrix2 {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        let m = IntMatrix2 { a, b, c, d };
        if m.det() <= 0 {
            return pre(format!("matrix {m} must have positive determinant"));
        }
        Ok(m)
    }

    /// Builds a matrix without the determinant check. Callers guarantee det > 0.
    pub const fn raw(a: i64, b: i64, c: i64, d: i64) -> Self {
        IntMatrix2 { a, b, c, d }
    }

    pub const fn identity() -> Self {
        Self::raw(1, 0, 0, 1)
    }

    /// z -> -1/z
    pub const fn s() -> Self {
        Self::raw(0, -1, 1, 0)
    }

    /// z -> z + k
    pub const fn t(k: i64) -> Self {
        Self::raw(1, k, 0, 1)
    }

    pub fn det(&self) -> i128 {
        self.a as i128 * self.d as i128 - self.b as i128 * self.c as i128
    }

    pub fn mul(&self, o: &IntMatrix2) -> IntMatrix2 {
        IntMatrix2 {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    /// Adjugate; `m.mul(&m.adjugate()) == det * I`.
    pub fn adjugate(&self) -> IntMatrix2 {
        IntMatrix2::raw(self.d, -self.b, -self.c, self.a)
    }

    pub fn neg(&self) -> IntMatrix2 {
        IntMatrix2::raw(-self.a, -self.b, -self.c, -self.d)
    }

    /// Exact action on cusps. The pole goes to infinity.
    pub fn apply_cusp(&self, x: &Cusp) -> Cusp {
        let (p, q) = x.as_pair();
        let (p, q) = (p as i128, q as i128);
        let num = self.a as i128 * p + self.b as i128 * q;
        let den = self.c as i128 * p + self.d as i128 * q;
        Cusp::from_i128(num, den)
    }

    /// Moebius action on a complex point.
    pub fn apply(&self, z: Complex64) -> Complex64 {
        (z * self.a as f64 + self.b as f64) / self.j(z)
    }

    /// `j(z) = cz + d`
    pub fn j(&self, z: Complex64) -> Complex64 {
        z * self.c as f64 + self.d as f64
    }
}

impl fmt::Display for IntMatrix2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{},{}],[{},{}]]", self.a, self.b, self.c, self.d)
    }
}

/// A rational cusp `p/q` in lowest terms with `q > 0`, or infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Cusp {
    Infinity,
    Rational { p: i64, q: i64 },
}

impl Cusp {
    /// Normalizes sign and common factors; `q == 0` gives infinity.
    pub fn new(p: i64, q: i64) -> Cusp {
        Cusp::from_i128(p as i128, q as i128)
    }

    fn from_i128(p: i128, q: i128) -> Cusp {
        if q == 0 {
            return Cusp::Infinity;
        }
        let g = p.gcd(&q);
        let (mut p, mut q) = (p / g, q / g);
        if q < 0 {
            p = -p;
            q = -q;
        }
        Cusp::Rational {
            p: p as i64,
            q: q as i64,
        }
    }

    pub fn integer(n: i64) -> Cusp {
        Cusp::Rational { p: n, q: 1 }
    }

    /// Column vector `(p, q)`, with infinity as `(1, 0)`.
    pub fn as_pair(&self) -> (i64, i64) {
        match *self {
            Cusp::Infinity => (1, 0),
            Cusp::Rational { p, q } => (p, q),
        }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, Cusp::Infinity)
    }

    pub fn to_f64(&self) -> f64 {
        match *self {
            Cusp::Infinity => f64::INFINITY,
            Cusp::Rational { p, q } => p as f64 / q as f64,
        }
    }

    /// Parses `p/q`, an integer, or `inf`.
    pub fn parse(s: &str) -> Result<Cusp> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s == "∞" || s == "1/0" {
            return Ok(Cusp::Infinity);
        }
        let (p, q) = match s.split_once('/') {
            Some((p, q)) => (p.trim().parse::<i64>(), q.trim().parse::<i64>()),
            None => (s.parse::<i64>(), Ok(1)),
        };
        match (p, q) {
            (Ok(p), Ok(q)) if q != 0 => Ok(Cusp::new(p, q)),
            _ => pre(format!("cannot parse cusp '{s}'")),
        }
    }
}

impl fmt::Display for Cusp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cusp::Infinity => write!(f, "inf"),
            Cusp::Rational { p, q } => write!(f, "{p}/{q}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum GroupId {
    SL2Z,
    GammaTheta,
    Gamma0(u64),
    /// Gamma^0(N): upper-right entry divisible by N.
    Gamma0Upper(u64),
}

impl GroupId {
    /// Membership test for determinant-one matrices.
    pub fn contains(&self, m: &IntMatrix2) -> bool {
        if m.det() != 1 {
            return false;
        }
        match *self {
            GroupId::SL2Z => true,
            GroupId::Gamma0(n) => m.c.rem_euclid(n as i64) == 0,
            GroupId::Gamma0Upper(n) => m.b.rem_euclid(n as i64) == 0,
            GroupId::GammaTheta => {
                let par = |v: i64| v.rem_euclid(2);
                let pat = (par(m.a), par(m.b), par(m.c), par(m.d));
                pat == (1, 0, 0, 1) || pat == (0, 1, 1, 0)
            }
        }
    }

    /// Index in SL2(Z); an upper bound for every cusp width.
    pub fn index(&self) -> u64 {
        match *self {
            GroupId::SL2Z => 1,
            GroupId::GammaTheta => 3,
            GroupId::Gamma0(n) | GroupId::Gamma0Upper(n) => {
                let mut idx = n;
                for p in prime_factors(n) {
                    idx = idx / p * (p + 1);
                }
                idx
            }
        }
    }

    /// Parses `sl2z`, `theta`, `gamma0:N`.
    pub fn parse(s: &str) -> Result<GroupId> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "sl2z" => Ok(GroupId::SL2Z),
            "theta" | "gammatheta" => Ok(GroupId::GammaTheta),
            _ => {
                if let Some(Ok(n)) = s.strip_prefix("gamma0:").map(|n| n.parse::<u64>()) {
                    if n >= 1 {
                        return Ok(GroupId::Gamma0(n));
                    }
                }
                if let Some(Ok(n)) = s.strip_prefix("gamma0upper:").map(|n| n.parse::<u64>()) {
                    if n >= 1 {
                        return Ok(GroupId::Gamma0Upper(n));
                    }
                }
                pre(format!("unknown group '{s}'"))
            }
        }
    }
}

impl fmt::Display for GroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupId::SL2Z => write!(f, "sl2z"),
            GroupId::GammaTheta => write!(f, "theta"),
            GroupId::Gamma0(n) => write!(f, "gamma0:{n}"),
            GroupId::Gamma0Upper(n) => write!(f, "gamma0upper:{n}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CuspClass {
    pub group: GroupId,
    pub label: Cusp,
}

pub fn moebius_apply_cusp(m: &IntMatrix2, x: &Cusp) -> Cusp {
    m.apply_cusp(x)
}

pub fn moebius_apply(m: &IntMatrix2, z: Complex64) -> Complex64 {
    m.apply(z)
}

pub fn j_factor(m: &IntMatrix2, z: Complex64) -> Complex64 {
    m.j(z)
}

/// Canonical orbit label.
///
/// Gamma0(N): the cusp a/c has invariants d = gcd(c, N) and
/// a * (c/d) mod gcd(d, N/d); the label is the smallest a' >= 0 in that
/// residue class with gcd(a', d) = 1, written a'/d (infinity when d = N).
pub fn cusp_class(g: GroupId, x: &Cusp) -> CuspClass {
    let label = match g {
        GroupId::SL2Z => Cusp::Infinity,
        GroupId::GammaTheta => match *x {
            Cusp::Rational { p, q } if p.rem_euclid(2) == 1 && q % 2 == 1 => Cusp::integer(1),
            _ => Cusp::integer(0),
        },
        GroupId::Gamma0(n) => {
            let n = n as i64;
            let (p, q) = x.as_pair();
            let q = if q == 0 { n } else { q };
            let d = q.gcd(&n);
            if d == n {
                Cusp::Infinity
            } else {
                let g = d.gcd(&(n / d));
                let r = ((p as i128 * (q / d) as i128).rem_euclid(g as i128)) as i64;
                let mut a = r;
                while a.gcd(&d) != 1 {
                    a += g;
                }
                Cusp::new(a, d)
            }
        }
        // S^-1 Gamma0(N) S = Gamma^0(N)
        GroupId::Gamma0Upper(n) => {
            let s = IntMatrix2::s();
            let inner = cusp_class(GroupId::Gamma0(n), &s.apply_cusp(x)).label;
            s.adjugate().apply_cusp(&inner)
        }
    };
    CuspClass { group: g, label }
}

/// One-sided oracle: searches group elements with entries bounded by
/// `bound` that send `x` to `y`.
pub fn cusp_equivalent_bruteforce(g: GroupId, x: &Cusp, y: &Cusp, bound: i64) -> bool {
    match (x.is_infinity(), y.is_infinity()) {
        (true, true) => true,
        (false, true) => search_from_infinity(g, x, bound),
        (true, false) => search_from_infinity(g, y, bound),
        (false, false) => search_finite(g, x, y, bound),
    }
}

/// Is there gamma with gamma(inf) = y?
fn search_from_infinity(g: GroupId, y: &Cusp, bound: i64) -> bool {
    let (p, q) = y.as_pair();
    for s in [1i64, -1] {
        let (a, c) = (s * p, s * q);
        if a.abs() > bound || c.abs() > bound {
            continue;
        }
        // a d0 - b0 c = 1
        let e = a.extended_gcd(&c);
        if e.gcd.abs() != 1 {
            continue;
        }
        let (d0, b0) = (e.x * e.gcd, -e.y * e.gcd);
        // general solution: d = d0 + k c, b = b0 + k a
        let span = bound / a.abs().max(c.abs()).max(1) + 2;
        let shift = if c != 0 { -d0 / c } else if a != 0 { -b0 / a } else { 0 };
        for k in (shift - span)..=(shift + span) {
            let m = IntMatrix2::raw(a, b0 + k * a, c, d0 + k * c);
            if m.b.abs() <= bound && m.d.abs() <= bound && g.contains(&m) {
                return true;
            }
        }
    }
    false
}

fn search_finite(g: GroupId, x: &Cusp, y: &Cusp, bound: i64) -> bool {
    let (p, q) = x.as_pair();
    let (p2, q2) = y.as_pair();
    let step = match g {
        GroupId::Gamma0(n) => n as i64,
        _ => 1,
    };
    let mut c = -(bound / step) * step;
    while c <= bound {
        for s in [1i64, -1] {
            // c p + d q = s q2
            let num = s * q2 - c * p;
            if num % q != 0 {
                continue;
            }
            let d = num / q;
            if d.abs() > bound {
                continue;
            }
            // a p + b q = s p2 and a d - b c = 1; determinant -s q2
            let det = -(s * q2) as i128;
            let (p, q, c128, d128) = (p as i128, q as i128, c as i128, d as i128);
            let rhs1 = (s * p2) as i128;
            let a_num = rhs1 * (-c128) - q;
            let b_num = p - d128 * rhs1;
            if a_num % det != 0 || b_num % det != 0 {
                continue;
            }
            let (a, b) = (a_num / det, b_num / det);
            if a.abs() > bound as i128 || b.abs() > bound as i128 {
                continue;
            }
            let m = IntMatrix2::raw(a as i64, b as i64, c, d as i64);
            if g.contains(&m) && m.apply_cusp(x) == *y {
                return true;
            }
        }
        c += step;
    }
    false
}

/// Cusp width: the smallest k with gamma T^k gamma^-1 in the group, where
/// gamma in SL2(Z) sends infinity to `x`.
pub fn cusp_width(g: GroupId, x: &Cusp) -> u64 {
    let gamma = sl2z_to_cusp(x);
    let inv = gamma.adjugate();
    (1..=g.index())
        .find(|&k| g.contains(&gamma.mul(&IntMatrix2::t(k as i64)).mul(&inv)))
        .expect("width is bounded by the index")
}

/// Cusp width for Gamma0(N) by the closed formula N / gcd(c^2, N).
pub fn gamma0_width(n: u64, x: &Cusp) -> u64 {
    match *x {
        Cusp::Infinity => 1,
        Cusp::Rational { q, .. } => {
            let q = q as u64;
            n / (q * q).gcd(&n)
        }
    }
}

/// `gamma` has determinant one and sends infinity to the cusp; the width
/// is attached separately (the full scaling matrix is gamma * diag(sqrt m, 1/sqrt m)).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ScalingMatrix {
    pub gamma: IntMatrix2,
    pub width: u64,
}

/// Canonical gamma in SL2(Z) with gamma(inf) = x and c < 0 (or gamma = I at
/// infinity). Among the translates we keep the one with -q < d <= 0.
pub fn sl2z_to_cusp(x: &Cusp) -> IntMatrix2 {
    match *x {
        Cusp::Infinity => IntMatrix2::identity(),
        Cusp::Rational { p, q } => {
            // -p d + b q = 1  =>  d = -p^{-1} mod q
            let d = if q == 1 {
                0
            } else {
                let e = p.rem_euclid(q).extended_gcd(&q);
                let inv = e.x.rem_euclid(q);
                let d = (-inv).rem_euclid(q);
                if d == 0 {
                    0
                } else {
                    d - q
                }
            };
            let b = (1 + p as i128 * d as i128) / q as i128;
            IntMatrix2::raw(-p, b as i64, -q, d)
        }
    }
}

pub fn scaling_matrix(g: GroupId, x: &Cusp) -> ScalingMatrix {
    ScalingMatrix {
        gamma: sl2z_to_cusp(x),
        width: cusp_width(g, x),
    }
}

/// Atkin-Lehner matrix of determinant Q for Gamma0(N).
///
/// Representatives have the form [[Q x, y], [N z, Q w]]. The canonical
/// choice takes x = z = 1 and the smallest y >= 0, which forces
/// Q w - (N/Q) y = 1; for Q = 1 it is the identity.
pub fn atkin_lehner(n: u64, q: u64) -> Result<IntMatrix2> {
    if q == 0 || n == 0 || n % q != 0 {
        return pre(format!("Q={q} does not divide N={n}"));
    }
    let r = n / q;
    if q.gcd(&r) != 1 {
        return pre(format!("gcd(Q, N/Q) != 1 for N={n}, Q={q}"));
    }
    if q == 1 {
        return Ok(IntMatrix2::identity());
    }
    let (qi, ri) = (q as i64, r as i64);
    // r y = -1 mod Q
    let e = ri.rem_euclid(qi).extended_gcd(&qi);
    let y = (-e.x).rem_euclid(qi);
    let w = (1 + ri * y) / qi;
    Ok(IntMatrix2::raw(qi, y, n as i64, qi * w))
}

/// Checks the Atkin-Lehner shape [[Qx, y], [Nz, Qw]] with det Q.
pub fn is_atkin_lehner(n: u64, q: u64, m: &IntMatrix2) -> bool {
    let (ni, qi) = (n as i64, q as i64);
    m.det() == q as i128
        && m.a.rem_euclid(qi) == 0
        && m.d.rem_euclid(qi) == 0
        && m.c.rem_euclid(ni) == 0
}

/// True iff Q^{-1} m^2 lies in Gamma0(N).
pub fn squares_into_gamma0(n: u64, q: u64, m: &IntMatrix2) -> bool {
    let sq = m.mul(m);
    let qi = q as i64;
    if [sq.a, sq.b, sq.c, sq.d].iter().any(|v| v % qi != 0) {
        return false;
    }
    let red = IntMatrix2::raw(sq.a / qi, sq.b / qi, sq.c / qi, sq.d / qi);
    GroupId::Gamma0(n).contains(&red)
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn valuation(mut n: u64, p: u64) -> u32 {
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

/// Closed-form transitivity predicate: N = 2^a 3^b N' with a < 8, b < 4 and
/// N' squarefree and prime to 6.
pub fn normalizer_transitive(n: u64) -> bool {
    let a = valuation(n, 2);
    let b = valuation(n, 3);
    let rest = n / 2u64.pow(a) / 3u64.pow(b);
    a < 8 && b < 4 && prime_factors(rest).iter().all(|&p| rest % (p * p) != 0)
}

/// All Gamma0(N) cusp classes, ordered.
pub fn gamma0_cusp_classes(n: u64) -> Vec<CuspClass> {
    let g = GroupId::Gamma0(n);
    let mut set = BTreeSet::new();
    for d in (1..=n).filter(|d| n % d == 0) {
        let gg = d.gcd(&(n / d));
        for a in 0..gg.max(1) {
            if gg > 1 && a.gcd(&gg) != 1 {
                continue;
            }
            let mut a2 = a as i64;
            while a2.gcd(&(d as i64)) != 1 {
                a2 += gg as i64;
            }
            set.insert(cusp_class(g, &Cusp::new(a2, d as i64)));
        }
    }
    set.into_iter().collect()
}

/// Generators of the normalizer beyond Gamma0(N): the Atkin-Lehner
/// matrices for the prime-power divisors and the translations S_n, written
/// as integer matrices acting by Moebius transformation.
pub fn normalizer_generators(n: u64) -> Vec<IntMatrix2> {
    let mut gens: Vec<IntMatrix2> = prime_factors(n)
        .into_iter()
        .map(|p| {
            let q = p.pow(valuation(n, p));
            atkin_lehner(n, q).expect("prime power parts are exact divisors")
        })
        .collect();
    let v2 = valuation(n, 2);
    let trans = |k: i64| IntMatrix2::raw(k, 1, 0, k);
    if v2 == 2 || v2 == 3 {
        gens.push(trans(2));
    }
    if v2 == 4 || v2 == 5 {
        gens.push(trans(4));
    }
    if v2 >= 6 {
        gens.push(trans(8));
    }
    if valuation(n, 3) >= 2 {
        gens.push(trans(3));
    }
    gens
}

/// Orbits of the normalizer generators on the Gamma0(N) cusp classes (BFS).
pub fn normalizer_orbit_classes(n: u64) -> Vec<Vec<CuspClass>> {
    let g = GroupId::Gamma0(n);
    let classes = gamma0_cusp_classes(n);
    let gens = normalizer_generators(n);
    let mut seen = BTreeSet::new();
    let mut orbits = Vec::new();
    for start in &classes {
        if seen.contains(start) {
            continue;
        }
        let mut orbit = BTreeSet::new();
        let mut stack = vec![*start];
        seen.insert(*start);
        while let Some(c) = stack.pop() {
            orbit.insert(c);
            for m in &gens {
                let img = cusp_class(g, &m.apply_cusp(&c.label));
                if seen.insert(img) {
                    stack.push(img);
                }
            }
        }
        orbits.push(orbit.into_iter().collect());
    }
    orbits
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FordCircle {
    pub p: i64,
    pub q: i64,
    pub delta: f64,
    pub center: (f64, f64),
    pub radius: f64,
}

impl FordCircle {
    pub fn contains(&self, z: Complex64) -> bool {
        let c = Complex64::new(self.center.0, self.center.1);
        (z - c).norm() <= self.radius * (1.0 + 1e-12)
    }
}

pub fn ford_circle(p: i64, q: i64, delta: f64) -> Result<FordCircle> {
    if q <= 0 || p.gcd(&q) != 1 || delta <= 0.0 {
        return pre("ford_circle needs q > 0, gcd(p,q) = 1, delta > 0");
    }
    let r = delta / (2.0 * (q * q) as f64);
    Ok(FordCircle {
        p,
        q,
        delta,
        center: (p as f64 / q as f64, r),
        radius: r,
    })
}

/// Finds a Ford circle of parameter `delta` containing `z`, scanning all
/// denominators that can reach height Im z.
pub fn find_ford_circle(z: Complex64, delta: f64) -> Option<FordCircle> {
    if z.im <= 0.0 {
        return None;
    }
    let qmax = (delta / z.im).sqrt().ceil() as i64 + 1;
    for q in 1..=qmax {
        let p0 = (z.re * q as f64).round() as i64;
        for p in (p0 - 1)..=(p0 + 1) {
            if p.gcd(&q) != 1 {
                continue;
            }
            let fc = ford_circle(p, q, delta).ok()?;
            if fc.contains(z) {
                return Some(fc);
            }
        }
    }
    None
}
