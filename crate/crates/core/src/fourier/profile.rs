use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::wave::WaveVector;
use crate::error::{Error, Result};

/// A one-variable periodic analytic function
/// `F(ξ) = Σ_{j≥1} c_j e^{ijξ} + c.c.`, the projection of a potential onto
/// the harmonics `j·k` of a star wave vector `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneDProfile {
    pub base: WaveVector,
    /// `coeffs[j-1] = c_j`.
    pub coeffs: Vec<Complex64>,
    /// Analyticity width `|k|s`.
    pub width: f64,
    /// When the projection was cut at a finite harmonic, the coefficients
    /// beyond it are known only to satisfy `|c_j| ≤ e^{-j·width}`.
    #[serde(default)]
    pub truncated: bool,
}

/// All derivatives `F, F′, …, F⁗` at one point.
pub type Jet = [f64; 5];

impl OneDProfile {
    pub fn new(base: WaveVector, coeffs: Vec<Complex64>, width: f64) -> Self {
        OneDProfile { base, coeffs, width, truncated: false }
    }

    /// Profile from real Fourier series `Σ a_j cos jξ + b_j sin jξ`
    /// (`cos[j-1] = a_j`), on the unit one-dimensional base.
    pub fn from_trig(cos: &[f64], sin: &[f64]) -> Self {
        let len = cos.len().max(sin.len());
        let coeffs = (0..len)
            .map(|i| {
                let a = cos.get(i).copied().unwrap_or(0.0);
                let b = sin.get(i).copied().unwrap_or(0.0);
                Complex64::new(0.5 * a, -0.5 * b)
            })
            .collect();
        OneDProfile::new(WaveVector::new(vec![1]), coeffs, 1.0)
    }

    pub fn zero() -> Self {
        OneDProfile::new(WaveVector::new(vec![1]), Vec::new(), 1.0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.norm() == 0.0)
    }

    pub fn harmonics(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, j: usize) -> Complex64 {
        if j == 0 {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs.get(j - 1).copied().unwrap_or_default()
    }

    /// `2 Σ j^d |c_j|`, the sup bound of the d-th derivative.
    pub fn moment(&self, d: u32) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| 2.0 * ((i + 1) as f64).powi(d as i32) * c.norm())
            .sum()
    }

    /// Bound on the neglected harmonics of a truncated projection for the
    /// d-th derivative; zero for exact finite profiles.
    pub fn truncation_bound(&self, d: u32) -> f64 {
        if !self.truncated {
            return 0.0;
        }
        let start = self.coeffs.len() + 1;
        let mut sum = 0.0;
        for j in start..start + 4000 {
            let term = 2.0 * (j as f64).powi(d as i32) * (-(j as f64) * self.width).exp();
            sum += term;
            if term < 1e-300 || term < 1e-18 * sum {
                break;
            }
        }
        sum
    }

    /// Value and first four derivatives at `xi`.
    pub fn jet(&self, xi: f64) -> Jet {
        let w = Complex64::from_polar(1.0, xi);
        let mut p = w;
        let mut out = [0.0; 5];
        for (i, c) in self.coeffs.iter().enumerate() {
            let j = (i + 1) as f64;
            let z = c * p;
            let (a, b) = (z.re, z.im);
            let j2 = j * j;
            out[0] += 2.0 * a;
            out[1] -= 2.0 * j * b;
            out[2] -= 2.0 * j2 * a;
            out[3] += 2.0 * j2 * j * b;
            out[4] += 2.0 * j2 * j2 * a;
            p *= w;
        }
        out
    }

    /// d-th derivative at `xi`, `d ≤ 4`.
    pub fn eval(&self, xi: f64, d: usize) -> Result<f64> {
        if d > 4 {
            return Err(Error::DerivativeOrder(d));
        }
        Ok(self.jet(xi)[d])
    }

    pub fn value(&self, xi: f64) -> f64 {
        let w = Complex64::from_polar(1.0, xi);
        let mut p = w;
        let mut v = 0.0;
        for c in &self.coeffs {
            v += 2.0 * (c * p).re;
            p *= w;
        }
        v
    }

    pub fn d1(&self, xi: f64) -> f64 {
        self.jet(xi)[1]
    }

    /// `F(a + h) - F(a)` without cancellation for small `h`:
    /// `e^{ijh} - 1 = 2i sin(jh/2) e^{ijh/2}`.
    pub fn increment(&self, a: f64, h: f64) -> f64 {
        let mut v = 0.0;
        for (i, c) in self.coeffs.iter().enumerate() {
            let j = (i + 1) as f64;
            let phase = Complex64::from_polar(1.0, j * (a + 0.5 * h));
            let diff = Complex64::new(0.0, 2.0 * (0.5 * j * h).sin()) * phase;
            v += 2.0 * (c * diff).re;
        }
        v
    }

    pub fn scaled(&self, factor: f64) -> Self {
        OneDProfile { coeffs: self.coeffs.iter().map(|c| c * factor).collect(), ..self.clone() }
    }

    /// The profile with its first harmonic removed (the `G` of the
    /// critical-curve constructions).
    pub fn without_first(&self) -> Self {
        let mut g = self.clone();
        if let Some(c) = g.coeffs.first_mut() {
            *c = Complex64::new(0.0, 0.0);
        }
        g
    }

    /// The profile with its first harmonic set to `zeta`.
    pub fn with_first(&self, zeta: Complex64) -> Self {
        let mut g = self.clone();
        if g.coeffs.is_empty() {
            g.coeffs.push(zeta);
        } else {
            g.coeffs[0] = zeta;
        }
        g
    }

    /// Largest magnitude amplitude scale, `2 Σ |c_j|`.
    pub fn amplitude(&self) -> f64 {
        self.moment(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn cosine_derivatives() {
        let f = OneDProfile::from_trig(&[1.0], &[]);
        assert!((f.eval(PI, 0).unwrap() + 1.0).abs() < 1e-15);
        assert!((f.eval(PI, 2).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(f.eval(0.0, 5), Err(Error::DerivativeOrder(5))));
    }

    #[test]
    fn degenerate_example_has_flat_derivative() {
        // F′ = −sin ξ (1 + cos ξ)
        let f = OneDProfile::from_trig(&[1.0, 0.25], &[]);
        assert!(f.eval(PI, 1).unwrap().abs() < 1e-15);
        for &x in &[0.3f64, 1.1, 2.5] {
            let expect = -x.sin() * (1.0 + x.cos());
            assert!((f.eval(x, 1).unwrap() - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn sine_coefficient_convention() {
        let f = OneDProfile::from_trig(&[], &[1.0]);
        for &x in &[0.1, 0.7, 2.0] {
            assert!((f.value(x) - x.sin()).abs() < 1e-15);
        }
    }

    #[test]
    fn increment_matches_difference() {
        let f = OneDProfile::from_trig(&[1.0, 0.3], &[0.2]);
        let (a, h) = (0.4, 1e-3);
        assert!((f.increment(a, h) - (f.value(a + h) - f.value(a))).abs() < 1e-15);
        // tiny offsets keep full relative precision
        let tiny = f.increment(a, 1e-14);
        assert!((tiny / 1e-14 - f.d1(a)).abs() < 1e-6 * f.d1(a).abs());
    }

    fn arb_profile() -> impl Strategy<Value = OneDProfile> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..5).prop_map(|c| {
            let coeffs = c.iter().enumerate().map(|(i, &(re, im))| Complex64::new(re, im) * 0.5f64.powi(i as i32)).collect();
            OneDProfile::new(WaveVector::new(vec![1]), coeffs, 1.0)
        })
    }

    proptest! {
        // central differences of F^(d-1) converge to F^(d) at second order
        #[test]
        fn derivatives_match_central_differences(f in arb_profile(), xi in 0.0f64..6.28, d in 1usize..=4) {
            // leading error term is F^(d+2) h²/6; skip points where it nearly vanishes
            let lead: f64 = f.coeffs.iter().enumerate().map(|(i, c)| {
                let j = (i + 1) as f64;
                let z = Complex64::new(0.0, j).powu((d + 2) as u32) * c * Complex64::from_polar(1.0, j * xi);
                2.0 * z.re
            }).sum();
            prop_assume!(lead.abs() > 0.05 * f.moment((d + 2) as u32));
            let fd = |h: f64| (f.eval(xi + h, d - 1).unwrap() - f.eval(xi - h, d - 1).unwrap()) / (2.0 * h);
            let exact = f.eval(xi, d).unwrap();
            let hs = [2e-2, 1e-2, 5e-3];
            let errs: Vec<f64> = hs.iter().map(|&h| (fd(h) - exact).abs()).collect();
            let order = (errs[0] / errs[2]).log2() / 2.0;
            prop_assert!(order >= 1.9, "order {order} errs {errs:?}");
        }
    }
}
