//! Weighted complex least squares.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct LstsqFit {
    pub coef: Vec<Complex64>,
    /// Unweighted residuals `y - A coef`.
    pub residuals: Vec<Complex64>,
    pub condition: f64,
}

/// Minimizes `sum w_i^2 |y_i - (A c)_i|^2` by SVD. `rows[i]` is the i-th
/// row of A.
pub fn weighted_lstsq(rows: &[Vec<Complex64>], y: &[Complex64], w: &[f64]) -> Result<LstsqFit> {
    let n = rows.len();
    let k = rows.first().map(|r| r.len()).unwrap_or(0);
    if n < k || k == 0 || y.len() != n || w.len() != n {
        return Err(Error::Numeric("least squares system is underdetermined".into()));
    }
    // column scaling keeps the condition number meaningful
    let mut scale = vec![0.0f64; k];
    for (r, &wi) in rows.iter().zip(w) {
        for j in 0..k {
            scale[j] = scale[j].max((r[j] * wi).norm());
        }
    }
    let a = DMatrix::from_fn(n, k, |i, j| rows[i][j] * w[i] / scale[j].max(f64::MIN_POSITIVE));
    let b = DVector::from_fn(n, |i, _| y[i] * w[i]);
    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition = smax / smin;
    if !condition.is_finite() || condition > 1e14 {
        return Err(Error::Numeric(format!("ill-conditioned design matrix (cond {condition:.3e})")));
    }
    let mut sol = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::Numeric(format!("svd solve failed: {e}")))?;
    // iterative refinement against the weighted residual
    for _ in 0..2 {
        let res = &b - &a * &sol;
        let dx = svd
            .solve(&res, 0.0)
            .map_err(|e| Error::Numeric(format!("svd solve failed: {e}")))?;
        sol += dx;
    }
    let coef: Vec<Complex64> = (0..k).map(|j| sol[j] / scale[j]).collect();
    let residuals = rows
        .iter()
        .zip(y)
        .map(|(r, &yi)| yi - r.iter().zip(&coef).map(|(a, c)| a * c).sum::<Complex64>())
        .collect();
    Ok(LstsqFit {
        coef,
        residuals,
        condition,
    })
}

/// Ordinary least-squares line `y = a + b x`; returns `(a, b, stderr_b)`.
pub fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let sse: f64 = x.iter().zip(y).map(|(u, v)| (v - a - b * u).powi(2)).sum();
    let se = if n > 2.0 { (sse / (n - 2.0) / sxx).sqrt() } else { f64::NAN };
    (a, b, se)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_coefficients() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64 / 10.0).collect();
        let c = [Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.25)];
        let rows: Vec<Vec<Complex64>> = xs.iter().map(|&x| vec![1.0.into(), Complex64::new(x, x * x)]).collect();
        let y: Vec<Complex64> = rows.iter().map(|r| r[0] * c[0] + r[1] * c[1]).collect();
        let fit = weighted_lstsq(&rows, &y, &vec![1.0; xs.len()]).unwrap();
        for j in 0..2 {
            assert!((fit.coef[j] - c[j]).norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_dependent_columns() {
        let rows: Vec<Vec<Complex64>> = (0..5).map(|i| vec![(i as f64).into(), (2.0 * i as f64).into()]).collect();
        let y = vec![Complex64::new(1.0, 0.0); 5];
        assert!(weighted_lstsq(&rows, &y, &[1.0; 5]).is_err());
    }

    #[test]
    fn line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let (a, b, _) = line_fit(&x, &y);
        assert!((a - 1.0).abs() < 1e-12 && (b - 2.0).abs() < 1e-12);
    }
}
