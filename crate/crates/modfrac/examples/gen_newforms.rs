//! Writes the weight-2 newform fixtures under `data/newforms/`.
//!
//! Coefficients come from the attached elliptic curves: a_p = p - #affine
//! points mod p for every prime (this also gives the right value at bad
//! primes), then the Hecke recursion and multiplicativity. Atkin-Lehner
//! signs at primes exactly dividing the level are -a_p; the sign at 9 for
//! level 45 follows from the global sign -1 (analytic rank 0).
//!
//! Usage: cargo run --release --example gen_newforms -- [count] [outdir]

use std::fmt::Write as _;
use std::path::PathBuf;

struct Curve {
    level: u64,
    label: &'static str,
    ainv: [i64; 5],
    /// (Q, sign) pairs not derived from a_p.
    extra_al: &'static [(u64, i8)],
}

fn affine_count(ainv: &[i64; 5], p: i64) -> i64 {
    let [a1, a2, a3, a4, a6] = ainv.map(|a| a.rem_euclid(p));
    if p == 2 {
        let mut n = 0;
        for x in 0..2 {
            for y in 0..2 {
                let l = y * y + a1 * x * y + a3 * y;
                let r = x * x * x + a2 * x * x + a4 * x + a6;
                if (l - r).rem_euclid(2) == 0 {
                    n += 1;
                }
            }
        }
        return n;
    }
    let mut chi = vec![-1i8; p as usize];
    chi[0] = 0;
    for y in 1..p {
        chi[((y * y) % p) as usize] = 1;
    }
    let mut n = 0i64;
    for x in 0..p {
        // (2y + a1 x + a3)^2 = (a1 x + a3)^2 + 4 (x^3 + a2 x^2 + a4 x + a6)
        let b = (a1 * x + a3) % p;
        let r = (((x * x % p) * x + a2 * x % p * x + a4 * x + a6) % p + p) % p;
        let disc = (b * b + 4 * r) % p;
        n += 1 + chi[disc as usize] as i64;
    }
    n
}

fn primes_upto(n: usize) -> Vec<usize> {
    let mut sieve = vec![true; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if sieve[i] {
            out.push(i);
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
    }
    out
}

fn coefficients(c: &Curve, n: usize) -> Vec<i64> {
    let mut a = vec![0i64; n + 1];
    let mut done = vec![false; n + 1];
    a[1] = 1;
    done[1] = true;
    for &p in &primes_upto(n) {
        let ap = p as i64 - affine_count(&c.ainv, p as i64);
        let bad = c.level % p as u64 == 0;
        // prime powers
        let mut pk = vec![1i64, ap];
        let mut q = p;
        while q <= n / p {
            q *= p;
            let k = pk.len();
            let next = if bad { ap * pk[k - 1] } else { ap * pk[k - 1] - p as i64 * pk[k - 2] };
            pk.push(next);
        }
        // multiply into every m with gcd(m, p) = 1 already known
        let mut m = n / p;
        loop {
            if done[m] && m % p != 0 {
                let mut q = p;
                let mut k = 1;
                while m * q <= n {
                    a[m * q] = a[m] * pk[k];
                    done[m * q] = true;
                    q *= p;
                    k += 1;
                }
            }
            if m == 1 {
                break;
            }
            m -= 1;
        }
    }
    a
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let count: usize = args.get(1).map(|s| s.parse().expect("count")).unwrap_or(20000);
    let out = args
        .get(2)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/newforms"));
    let curves = [
        Curve { level: 14, label: "14.2.a.a", ainv: [1, 0, 1, 4, -6], extra_al: &[] },
        Curve { level: 15, label: "15.2.a.a", ainv: [1, 1, 1, -10, -10], extra_al: &[] },
        Curve { level: 45, label: "45.2.a.a", ainv: [1, -1, 0, 0, -5], extra_al: &[(9, -1)] },
        Curve { level: 49, label: "49.2.a.a", ainv: [1, -1, 0, -2, -1], extra_al: &[(49, -1)] },
    ];
    std::fs::create_dir_all(&out).expect("create output dir");
    for c in &curves {
        let a = coefficients(c, count);
        let mut s = String::new();
        writeln!(s, "# level={}", c.level).unwrap();
        writeln!(s, "# weight=2").unwrap();
        writeln!(s, "# label={}", c.label).unwrap();
        let ainv: Vec<String> = c.ainv.iter().map(|v| v.to_string()).collect();
        writeln!(s, "# provenance=point counts on the curve [{}] with Hecke recursion", ainv.join(",")).unwrap();
        let mut n = c.level;
        let mut p = 2;
        while n > 1 {
            if n % p == 0 {
                let mut q = 1;
                while n % p == 0 {
                    n /= p;
                    q *= p;
                }
                if q == p {
                    writeln!(s, "# AL {}={:+}", q, -a[p as usize]).unwrap();
                }
            }
            p += 1;
        }
        for &(q, e) in c.extra_al {
            writeln!(s, "# AL {}={:+}", q, e).unwrap();
        }
        for (i, v) in a.iter().enumerate().skip(1) {
            writeln!(s, "{i} {v}").unwrap();
        }
        let path = out.join(format!("{}.txt", c.level));
        std::fs::write(&path, s).expect("write fixture");
        println!("{} -> {}", c.label, path.display());
    }
}
