//! Binomial intervals, a Kolmogorov–Smirnov statistic and small weighted
//! least-squares solves.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A binomial proportion with its Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub count: u64,
    pub total: u64,
    pub estimate: f64,
    /// Binomial standard error `sqrt(p(1-p)/n)` at the point estimate.
    pub sigma: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Proportion {
    /// Wilson interval at `z` standard deviations.
    pub fn wilson(count: u64, total: u64, z: f64) -> Self {
        if total == 0 {
            return Proportion { count, total, estimate: 0.0, sigma: 0.0, lo: 0.0, hi: 1.0 };
        }
        let n = total as f64;
        let p = count as f64 / n;
        let z2 = z * z;
        let denom = 1.0 + z2 / n;
        let centre = (p + z2 / (2.0 * n)) / denom;
        let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        Proportion {
            count,
            total,
            estimate: p,
            sigma: (p * (1.0 - p) / n).sqrt(),
            lo: (centre - half).max(0.0),
            hi: (centre + half).min(1.0),
        }
    }
}

/// Kolmogorov–Smirnov distance of a sample from U(0, 1).
pub fn ks_uniform(samples: &[f64]) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter().enumerate().fold(0.0_f64, |d, (i, &x)| {
        let lo = x - i as f64 / n;
        let hi = (i + 1) as f64 / n - x;
        d.max(lo).max(hi)
    })
}

/// Asymptotic 1% critical value of the one-sample KS statistic.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

/// Weighted linear least squares `y ≈ X β` with per-row standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub coef: Vec<f64>,
    /// Standard errors propagated from the row uncertainties.
    pub stderr: Vec<f64>,
    pub residual_ss: f64,
}

pub fn weighted_least_squares(rows: &[Vec<f64>], y: &[f64], sigma: &[f64]) -> Result<LinearFit> {
    let m = rows.first().map(Vec::len).unwrap_or(0);
    if m == 0 || rows.len() < m || rows.len() != y.len() || y.len() != sigma.len() {
        return Err(Error::invalid("least squares needs at least as many rows as unknowns"));
    }
    let mut ata = vec![vec![0.0; m]; m];
    let mut aty = vec![0.0; m];
    for ((row, &yi), &si) in rows.iter().zip(y).zip(sigma) {
        let w = 1.0 / (si * si);
        for i in 0..m {
            aty[i] += w * row[i] * yi;
            for j in 0..m {
                ata[i][j] += w * row[i] * row[j];
            }
        }
    }
    let inv = invert(&ata)?;
    let coef: Vec<f64> = (0..m).map(|i| (0..m).map(|j| inv[i][j] * aty[j]).sum()).collect();
    let stderr = (0..m).map(|i| inv[i][i].max(0.0).sqrt()).collect();
    let residual_ss = rows
        .iter()
        .zip(y)
        .zip(sigma)
        .map(|((row, &yi), &si)| {
            let pred: f64 = row.iter().zip(&coef).map(|(a, b)| a * b).sum();
            ((yi - pred) / si).powi(2)
        })
        .sum();
    Ok(LinearFit { coef, stderr, residual_ss })
}

/// Ordinary least-squares slope of `y` against `x`.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn invert(a: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = a.len();
    let scale = a.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .expect("non-empty");
        if m[piv][col].abs() <= 1e-13 * scale {
            return Err(Error::numeric("degenerate design matrix"));
        }
        m.swap(col, piv);
        let p = m[col][col];
        for v in m[col].iter_mut() {
            *v /= p;
        }
        for r in 0..n {
            if r != col {
                let factor = m[r][col];
                if factor != 0.0 {
                    for c in 0..2 * n {
                        m[r][c] -= factor * m[col][c];
                    }
                }
            }
        }
    }
    Ok(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_contains_estimate() {
        let p = Proportion::wilson(30, 100, 1.96);
        assert!(p.lo < 0.3 && 0.3 < p.hi);
        let z = Proportion::wilson(0, 100, 1.96);
        assert_eq!(z.lo, 0.0);
        assert!(z.hi > 0.0);
    }

    #[test]
    fn exact_line_recovered() {
        let rows: Vec<Vec<f64>> = (0..5).map(|i| vec![1.0, i as f64]).collect();
        let y: Vec<f64> = (0..5).map(|i| 2.0 + 3.0 * i as f64).collect();
        let fit = weighted_least_squares(&rows, &y, &[1.0; 5]).unwrap();
        assert!((fit.coef[0] - 2.0).abs() < 1e-12);
        assert!((fit.coef[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn collinear_design_rejected() {
        let rows: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
        assert!(weighted_least_squares(&rows, &[0.0, 1.0, 2.0, 3.0], &[1.0; 4]).is_err());
    }
}
