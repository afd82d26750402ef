//! Fit of `log m(ε) = α log ε + β log|ln ε| + γ`.

use serde::{Deserialize, Serialize};

use super::run::SurveyResult;
use crate::error::{Error, Result};
use crate::numeric::stats::weighted_least_squares;

/// One measured point `(ε, m, σ_m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub epsilon: f64,
    pub measure: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub alpha: f64,
    /// `|α̂ − α| / se(α̂)` in the reduced fit.
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub points: Vec<ScalingPoint>,
    pub alpha: f64,
    pub alpha_se: f64,
    pub beta: f64,
    pub beta_se: f64,
    pub gamma: f64,
    pub gamma_se: f64,
    /// `log m = α log ε + γ` without the log-log term.
    pub reduced_alpha: f64,
    pub reduced_alpha_se: f64,
    pub chi2: f64,
    pub reduced_chi2: f64,
    /// `α = 1` (linear in ε) and `α = ½` (square-root law).
    pub hypotheses: Vec<Hypothesis>,
    pub preferred: f64,
}

fn design(eps: f64, with_loglog: bool) -> Vec<f64> {
    if with_loglog {
        vec![eps.ln(), eps.ln().abs().ln(), 1.0]
    } else {
        vec![eps.ln(), 1.0]
    }
}

/// Weighted fit on the logarithms; `σ_log = σ_m / m`.
pub fn fit_points(points: &[ScalingPoint]) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(Error::invalid("scaling fit needs at least three ε values"));
    }
    for p in points {
        if !(p.epsilon > 0.0 && p.epsilon < 1.0) {
            return Err(Error::invalid(format!("ε must lie in (0, 1), got {}", p.epsilon)));
        }
        if !(p.measure > 0.0) || !(p.sigma > 0.0) {
            return Err(Error::invalid(format!(
                "measure at ε = {} is {} ± {}: a logarithmic fit needs a positive measure and uncertainty",
                p.epsilon, p.measure, p.sigma
            )));
        }
    }
    let (lo, hi) = points.iter().fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p.epsilon), b.max(p.epsilon)));
    if (hi / lo).log10() < 1.5 - 1e-9 {
        return Err(Error::invalid(format!("ε values span {:.2} decades; at least 1.5 required", (hi / lo).log10())));
    }
    let y: Vec<f64> = points.iter().map(|p| p.measure.ln()).collect();
    let s: Vec<f64> = points.iter().map(|p| p.sigma / p.measure).collect();
    let full_rows: Vec<Vec<f64>> = points.iter().map(|p| design(p.epsilon, true)).collect();
    let full = weighted_least_squares(&full_rows, &y, &s).map_err(|e| Error::numeric(format!("degenerate design matrix: {e}")))?;
    let red_rows: Vec<Vec<f64>> = points.iter().map(|p| design(p.epsilon, false)).collect();
    let red = weighted_least_squares(&red_rows, &y, &s)?;
    let dof = points.len().saturating_sub(3);
    let hypotheses: Vec<Hypothesis> = [1.0, 0.5]
        .iter()
        .map(|&a| Hypothesis { alpha: a, z: (red.coef[0] - a).abs() / red.stderr[0] })
        .collect();
    let preferred = if hypotheses[0].z <= hypotheses[1].z { 1.0 } else { 0.5 };
    Ok(ScalingFit {
        points: points.to_vec(),
        alpha: full.coef[0],
        alpha_se: full.stderr[0],
        beta: full.coef[1],
        beta_se: full.stderr[1],
        gamma: full.coef[2],
        gamma_se: full.stderr[2],
        reduced_alpha: red.coef[0],
        reduced_alpha_se: red.stderr[0],
        chi2: full.residual_ss,
        reduced_chi2: if dof > 0 { full.residual_ss / dof as f64 } else { f64::NAN },
        hypotheses,
        preferred,
    })
}

/// Fit the non-torus-plus-undecided fraction of quotable surveys.
pub fn scaling_fit(results: &[SurveyResult]) -> Result<ScalingFit> {
    if let Some(r) = results.iter().find(|r| !r.quotable) {
        return Err(Error::invalid(format!("survey at ε = {} is not quotable", r.epsilon)));
    }
    let pts: Vec<ScalingPoint> = results
        .iter()
        .map(|r| {
            let p = r.off_torus();
            ScalingPoint { epsilon: r.epsilon, measure: p.estimate, sigma: p.sigma }
        })
        .collect();
    fit_points(&pts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synth(law: impl Fn(f64) -> f64) -> Vec<ScalingPoint> {
        (0..7)
            .map(|i| {
                let eps = 10f64.powf(-1.0 - 0.5 * i as f64);
                let m = law(eps);
                ScalingPoint { epsilon: eps, measure: m, sigma: 0.01 * m }
            })
            .collect()
    }

    #[test]
    fn recovers_log_corrected_linear_law() {
        let fit = fit_points(&synth(|e: f64| e * e.ln().abs().powi(3))).unwrap();
        assert!((fit.alpha - 1.0).abs() < 1e-8 && (fit.alpha - 1.0).abs() <= 3.0 * fit.alpha_se.max(1e-12));
        assert!((fit.beta - 3.0).abs() < 1e-7, "{fit:?}");
        assert!(fit.chi2 < 1e-12);
    }

    #[test]
    fn recovers_square_root_law() {
        let fit = fit_points(&synth(f64::sqrt)).unwrap();
        assert!((fit.alpha - 0.5).abs() < 1e-8);
        assert!(fit.beta.abs() < 1e-7);
        assert!((fit.reduced_alpha - 0.5).abs() < 1e-10);
        assert_eq!(fit.preferred, 0.5);
    }

    #[test]
    fn rejects_short_span_and_empty_measures() {
        let pts: Vec<ScalingPoint> = [1e-2, 5e-3, 2e-3]
            .iter()
            .map(|&e| ScalingPoint { epsilon: e, measure: e, sigma: 0.1 * e })
            .collect();
        assert!(fit_points(&pts).is_err());
        let mut pts = synth(|e| e);
        pts[0].measure = 0.0;
        assert!(fit_points(&pts).is_err());
    }
}
