//! Two measure estimates: the phase-space area of an energy band around a
//! critical level, and the sublevel measure `{|g| ≤ θ}` of an analytic
//! function on an interval.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::integrals::QUAD;
use crate::class::{critical_points, MorseTolerances};
use crate::error::{Error, Result};
use crate::fourier::OneDProfile;
use crate::numeric::quad::{integrate, integrate_sqrt_endpoint, QuadResult};
use crate::numeric::roots::brent;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandMeasure {
    pub e0: f64,
    pub theta: f64,
    /// `meas{(ξ, η) ∈ T × R : |η²/2 + F(ξ) − E₀| ≤ θ}`.
    pub measure: f64,
    pub error: f64,
}

/// Phase-space measure of the band `|E − E₀| ≤ θ` around a critical value
/// `E₀`, by exact fibre integration
/// `∫ 2(√(2(E₀+θ−F))₊ − √(2(E₀−θ−F))₊) dξ`.
pub fn critical_band_measure(f: &OneDProfile, e0: f64, theta: f64) -> Result<BandMeasure> {
    if !(theta > 0.0 && theta < (-1.0f64).exp()) {
        return Err(Error::invalid(format!("band half-width θ must lie in (0, 1/e), got {theta}")));
    }
    if f.is_zero() {
        if e0.abs() > 1e-12 {
            return Err(Error::invalid(format!("E₀ = {e0} is not a critical value of F = 0")));
        }
        return Ok(BandMeasure { e0, theta, measure: 2.0 * TAU * (2.0 * theta).sqrt(), error: 0.0 });
    }
    let cps = critical_points(f, &MorseTolerances::default())?;
    let scale = 1.0 + f.amplitude();
    if !cps.iter().any(|c| (c.value - e0).abs() <= 1e-9 * scale) {
        return Err(Error::invalid(format!("E₀ = {e0} is not a critical value of F")));
    }
    let mut nodes: Vec<f64> = cps.iter().map(|c| c.xi).collect();
    nodes.push(nodes[0] + TAU);

    let mut total = QuadResult::zero();
    for w in nodes.windows(2) {
        let (a, b) = (w[0], w[1]);
        // L − F(ξ) anchored at the nearer critical endpoint
        let fa = f.value(a);
        let fb = f.value(b);
        let rest = |lev: f64, x: f64| -> f64 {
            if x - a <= b - x {
                (lev - fa) - f.increment(a, x - a)
            } else {
                (lev - fb) - f.increment(b, x - b)
            }
        };
        let up_lev = e0 + theta;
        let dn_lev = e0 - theta;
        let g = |x: f64| -> f64 {
            let up = rest(up_lev, x);
            let dn = rest(dn_lev, x);
            if up <= 0.0 {
                0.0
            } else if dn <= 0.0 {
                2.0 * (2.0 * up).sqrt()
            } else {
                // √(2u) − √(2d) without cancellation
                2.0 * 2.0 * (up - dn) / ((2.0 * up).sqrt() + (2.0 * dn).sqrt())
            }
        };
        let mut cuts = vec![(a, false)];
        for lev in [up_lev, dn_lev] {
            let (ra, rb) = (rest(lev, a), rest(lev, b));
            if ra * rb < 0.0 {
                let r = brent(|x| rest(lev, x), a, b, 1e-15 * (1.0 + a.abs()))?;
                cuts.push((r, true));
            }
        }
        cuts.push((b, false));
        cuts.sort_by(|x, y| x.0.total_cmp(&y.0));
        for c in cuts.windows(2) {
            let ((x0, s0), (x1, s1)) = (c[0], c[1]);
            let part = match (s0, s1) {
                (false, false) => integrate(g, x0, x1, QUAD),
                (true, false) => integrate_sqrt_endpoint(|h| g(x0 + h), x1 - x0, QUAD),
                (false, true) => integrate_sqrt_endpoint(|h| g(x1 - h), x1 - x0, QUAD),
                (true, true) => {
                    let m = 0.5 * (x0 + x1);
                    let l = integrate_sqrt_endpoint(|h| g(x0 + h), m - x0, QUAD);
                    let r = integrate_sqrt_endpoint(|h| g(x1 - h), x1 - m, QUAD);
                    QuadResult { value: l.value + r.value, error: l.error + r.error, evals: l.evals + r.evals, converged: l.converged && r.converged }
                }
            };
            total = QuadResult {
                value: total.value + part.value,
                error: total.error + part.error,
                evals: total.evals + part.evals,
                converged: total.converged && part.converged,
            };
        }
    }
    if !total.converged {
        return Err(Error::numeric(format!("band quadrature did not converge (error {:.3e})", total.error)));
    }
    Ok(BandMeasure { e0, theta, measure: total.value, error: total.error })
}

/// A real-analytic function on an interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LevelFunction {
    Profile(OneDProfile),
    /// Coefficients `c₀ + c₁x + c₂x² + …`.
    Polynomial(Vec<f64>),
}

impl LevelFunction {
    pub fn value(&self, x: f64) -> f64 {
        match self {
            LevelFunction::Profile(p) => p.value(x),
            LevelFunction::Polynomial(c) => c.iter().rev().fold(0.0, |acc, &a| acc * x + a),
        }
    }

    pub fn deriv(&self, x: f64) -> f64 {
        match self {
            LevelFunction::Profile(p) => p.d1(x),
            LevelFunction::Polynomial(c) => {
                c.iter().enumerate().skip(1).rev().fold(0.0, |acc, (i, &a)| acc * x + i as f64 * a)
            }
        }
    }
}

const LEVEL_GRID: usize = 4096;

/// `meas{x ∈ [x1, x2] : |g(x)| ≤ θ}`, exact up to root-finding tolerance:
/// the interval is split at the zeros of `g′` and the crossings of `±θ` are
/// bracketed on each monotone piece.
pub fn level_set_measure(g: &LevelFunction, x1: f64, x2: f64, theta: f64) -> Result<f64> {
    if !(x1 < x2) || !x1.is_finite() || !x2.is_finite() {
        return Err(Error::invalid(format!("level set needs a finite interval x1 < x2, got [{x1}, {x2}]")));
    }
    if !(theta > 0.0) {
        return Err(Error::invalid(format!("θ must be positive, got {theta}")));
    }
    // analytic: vanishing on a subinterval means vanishing identically
    let zero = match g {
        LevelFunction::Profile(p) => p.is_zero(),
        LevelFunction::Polynomial(c) => c.iter().all(|&a| a == 0.0),
    };
    if zero {
        return Err(Error::invalid("g vanishes identically; zero is not isolated"));
    }
    let xs: Vec<f64> = (0..=LEVEL_GRID).map(|i| x1 + (x2 - x1) * i as f64 / LEVEL_GRID as f64).collect();
    let xtol = 1e-15 * (1.0 + x1.abs().max(x2.abs()));
    let mut nodes = vec![x1];
    let ders: Vec<f64> = xs.iter().map(|&x| g.deriv(x)).collect();
    for i in 0..LEVEL_GRID {
        if ders[i + 1] == 0.0 && i + 1 < LEVEL_GRID {
            nodes.push(xs[i + 1]);
        } else if ders[i] * ders[i + 1] < 0.0 {
            nodes.push(brent(|x| g.deriv(x), xs[i], xs[i + 1], xtol)?);
        }
    }
    nodes.push(x2);
    nodes.dedup();

    let mut total = 0.0;
    for w in nodes.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (ga, gb) = (g.value(a), g.value(b));
        let sign = if gb >= ga { 1.0 } else { -1.0 };
        // on the piece s·g is non-decreasing
        let h = |x: f64| sign * g.value(x);
        let (ha, hb) = (sign * ga, sign * gb);
        if ha > theta || hb < -theta {
            continue;
        }
        let lo = if ha >= -theta { a } else { brent(|x| h(x) + theta, a, b, xtol)? };
        let hi = if hb <= theta { b } else { brent(|x| h(x) - theta, a, b, xtol)? };
        total += (hi - lo).max(0.0);
    }
    Ok(total)
}

/// `4π√(2θ)`, the band measure of the free rotor.
pub fn free_rotor_band(theta: f64) -> f64 {
    4.0 * PI * (2.0 * theta).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pendulum() -> OneDProfile {
        OneDProfile::from_trig(&[1.0], &[])
    }

    #[test]
    fn free_rotor_band_closed_form() {
        for &t in &[1e-2, 1e-4, 1e-6] {
            let m = critical_band_measure(&OneDProfile::zero(), 0.0, t).unwrap();
            assert!((m.measure / free_rotor_band(t) - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn minimum_band_is_an_ellipse() {
        // near the bottom of cos the band is ≈ an ellipse of area 2πθ/ω
        let t = 1e-6;
        let m = critical_band_measure(&pendulum(), -1.0, t).unwrap();
        assert!((m.measure / (TAU * t) - 1.0).abs() < 1e-5, "{}", m.measure);
    }

    #[test]
    fn separatrix_band_is_theta_log_theta() {
        let ratios: Vec<f64> = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6]
            .iter()
            .map(|&t: &f64| critical_band_measure(&pendulum(), 1.0, t).unwrap().measure / (t * t.ln().abs()))
            .collect();
        let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
        let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
        assert!(max / min < 2.0, "{ratios:?}");
    }

    #[test]
    fn separatrix_band_matches_monte_carlo() {
        use rand::{Rng, SeedableRng};
        let t = 0.05;
        let f = pendulum();
        let m = critical_band_measure(&f, 1.0, t).unwrap().measure;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let ymax = (2.0 * (2.0 + t)).sqrt();
        let n = 200_000;
        let hits = (0..n)
            .filter(|_| {
                let x: f64 = rng.random_range(0.0..TAU);
                let y: f64 = rng.random_range(-ymax..ymax);
                (0.5 * y * y + x.cos() - 1.0).abs() <= t
            })
            .count();
        let area = TAU * 2.0 * ymax;
        let p = hits as f64 / n as f64;
        let sigma = area * (p * (1.0 - p) / n as f64).sqrt();
        assert!((p * area - m).abs() < 4.0 * sigma, "{} vs {m} ± {sigma}", p * area);
    }

    #[test]
    fn doubling_bound() {
        let f = pendulum();
        for &t in &[1e-3, 1e-5] {
            let a = critical_band_measure(&f, 1.0, t).unwrap().measure;
            let b = critical_band_measure(&f, 1.0, 2.0 * t).unwrap().measure;
            assert!(b <= 2.0 * a * (1.0 + 2.0 / t.ln().abs()), "{a} {b}");
        }
    }

    #[test]
    fn non_critical_level_rejected() {
        assert!(critical_band_measure(&pendulum(), 0.3, 1e-3).is_err());
        assert!(critical_band_measure(&pendulum(), 1.0, 0.5).is_err());
    }

    #[test]
    fn monomial_level_sets() {
        for m in 1..=5usize {
            let mut c = vec![0.0; m + 1];
            c[m] = 1.0;
            let g = LevelFunction::Polynomial(c);
            for &t in &[1e-2, 1e-4, 1e-6] {
                let got = level_set_measure(&g, -1.0, 1.0, t).unwrap();
                let want = 2.0 * t.powf(1.0 / m as f64);
                assert!((got - want).abs() < 1e-12 + 1e-9 * want, "m={m} θ={t}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn sine_level_set() {
        let g = LevelFunction::Profile(OneDProfile::from_trig(&[], &[1.0]));
        for &t in &[0.3, 1e-3, 1e-7] {
            let got = level_set_measure(&g, 0.0, TAU, t).unwrap();
            assert!((got - 4.0 * t.asin()).abs() < 1e-12, "{got}");
        }
    }

    #[test]
    fn zero_function_rejected() {
        assert!(level_set_measure(&LevelFunction::Polynomial(vec![0.0, 0.0]), 0.0, 1.0, 0.1).is_err());
        assert!(level_set_measure(&LevelFunction::Profile(OneDProfile::zero()), 0.0, 1.0, 0.1).is_err());
    }
}
