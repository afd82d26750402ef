//! Random potentials: the product measures `μ_s` (each `z_k` uniform on the
//! unit disk) and `ν_s` (`z_k` uniform on the disk of radius `1/|k|`), with
//! `f_k = z_k e^{−|k|s}`, and Monte Carlo checks of the class probabilities.
//!
//! Sampled potentials are truncated at `K_max` and carry that cutoff, so
//! class checks only quote modes with `|k| ≤ K_max`.

use std::f64::consts::{LN_10, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::class::{check_p1, classify_at, cutoff_k, ClassConfig};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::fourier::{count_with_norm, sharp_up_to, sharp_with_norm, FourierPotential};
use crate::numeric::stats::Proportion;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    MuS,
    NuS,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureSpec {
    pub kind: MeasureKind,
    pub n: usize,
    pub s: f64,
    pub k_max: u64,
    pub seed: u64,
}

/// Smallest `K` with `e^{−Ks} < 10⁻¹²`.
pub fn default_k_max(s: f64) -> u64 {
    ((12.0 * LN_10 / s).ceil() as u64).max(1)
}

impl MeasureSpec {
    pub fn new(kind: MeasureKind, n: usize, s: f64, seed: u64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::invalid(format!("analyticity width must be positive, got {s}")));
        }
        MeasureSpec { kind, n, s, k_max: default_k_max(s), seed }.validated()
    }

    pub fn with_k_max(self, k_max: u64) -> Result<Self> {
        MeasureSpec { k_max, ..self }.validated()
    }

    fn validated(self) -> Result<Self> {
        if self.n == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        if self.k_max == 0 {
            return Err(Error::invalid("K_max must be at least 1"));
        }
        if !(self.s > 0.0 && self.s.is_finite()) {
            return Err(Error::invalid(format!("analyticity width must be positive, got {}", self.s)));
        }
        Ok(self)
    }

    /// Radius of the disk `z_k` is drawn from.
    pub fn radius(&self, norm: u64) -> f64 {
        match self.kind {
            MeasureKind::MuS => 1.0,
            MeasureKind::NuS => 1.0 / norm as f64,
        }
    }

    fn rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }
}

/// Uniform point on the disk of radius `r`: polar with area-correct radius.
fn disk<R: Rng>(rng: &mut R, r: f64) -> Complex64 {
    let rho = r * rng.random::<f64>().sqrt();
    let phi = TAU * rng.random::<f64>();
    Complex64::from_polar(rho, phi)
}

/// Draw number `index` of the measure; draw 0 is [`sample`].
pub fn sample_indexed(spec: &MeasureSpec, index: u64) -> Result<FourierPotential> {
    let spec = spec.validated()?;
    let mut rng = spec.rng(index);
    let mut f = FourierPotential::new(spec.n, spec.s)?.with_k_max(Some(spec.k_max));
    for k in sharp_up_to(spec.n, spec.k_max) {
        let m = k.l1();
        let z = disk(&mut rng, spec.radius(m));
        f.set(k, z * (-(m as f64) * spec.s).exp())?;
    }
    Ok(f)
}

pub fn sample(spec: &MeasureSpec) -> Result<FourierPotential> {
    sample_indexed(spec, 0)
}

/// `Σ_{k ∈ Zⁿ∖0} |k|^{−(n+3)}`.
pub fn c_n(n: usize) -> f64 {
    let p = (n + 3) as i32;
    let terms = 20_000u64;
    let head: f64 = (1..=terms).map(|m| count_with_norm(n, m) / (m as f64).powi(p)).sum();
    // count ~ 2ⁿ m^{n−1}/(n−1)!, tail ≈ ∫ of that
    let lead = 2f64.powi(n as i32) / (1..n).map(|i| i as f64).product::<f64>();
    head + lead / (3.0 * (terms as f64).powi(3))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct P1FailureEstimate {
    pub delta: f64,
    pub k_cut: f64,
    pub k_max: u64,
    /// Star modes with `K_s(δ) < |k| ≤ K_max`.
    pub modes_tested: usize,
    pub failures: Proportion,
    /// `Σ δ²|k|^{−(n+3)}` over the tested modes.
    pub union_bound: f64,
    /// `1 − Π(1 − δ²|k|^{−(n+3)})` over the tested modes.
    pub exact: f64,
    /// `c_n δ²`.
    pub global_bound: f64,
}

/// Fraction of `draws` samples violating the (P1) lower bound at level `δ`.
pub fn p1_failure_probability(delta: f64, spec: &MeasureSpec, draws: usize, exec: Exec) -> Result<P1FailureEstimate> {
    if spec.kind != MeasureKind::MuS {
        return Err(Error::invalid("P1 failure probability is defined for μ_s"));
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::invalid(format!("δ must lie in [0, 1), got {delta}")));
    }
    let spec = spec.validated()?;
    if delta == 0.0 {
        return Ok(P1FailureEstimate {
            delta,
            k_cut: f64::INFINITY,
            k_max: spec.k_max,
            modes_tested: 0,
            failures: Proportion::wilson(0, draws as u64, 1.0),
            union_bound: 0.0,
            exact: 0.0,
            global_bound: 0.0,
        });
    }
    let cfg = ClassConfig::default();
    let k_cut = cutoff_k(delta, spec.s, cfg.c_k_for(spec.n))?;
    if (spec.k_max as f64) <= k_cut {
        return Err(Error::invalid(format!(
            "K_max = {} does not exceed K_s(δ) = {k_cut:.3}: no mode to test",
            spec.k_max
        )));
    }
    let first = k_cut.floor() as u64 + 1;
    let p = (spec.n + 3) as i32;
    let mut modes = 0usize;
    let (mut union, mut keep) = (0.0, 1.0);
    for m in first..=spec.k_max {
        let q = (delta * delta / (m as f64).powi(p)).min(1.0);
        let c = sharp_with_norm(spec.n, m).into_iter().filter(|k| k.is_star()).count();
        modes += c;
        union += c as f64 * q;
        keep *= (1.0 - q).powi(c as i32);
    }
    let fails: Vec<bool> = exec.map(draws, |i| {
        sample_indexed(&spec, i as u64).and_then(|f| check_p1(&f, delta, &cfg)).map(|r| !r.pass).unwrap_or(true)
    });
    let count = fails.iter().filter(|&&b| b).count() as u64;
    Ok(P1FailureEstimate {
        delta,
        k_cut,
        k_max: spec.k_max,
        modes_tested: modes,
        failures: Proportion::wilson(count, draws as u64, 1.0),
        union_bound: union,
        exact: 1.0 - keep,
        global_bound: c_n(spec.n) * delta * delta,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassProbability {
    pub delta: f64,
    pub draws: usize,
    pub in_class: Proportion,
    pub p1_failures: u64,
    pub p2_failures: u64,
    pub p3_failures: u64,
    /// Draws whose check ended in a numerical error.
    pub errors: u64,
}

/// Fraction of samples (optionally translated by `shift`) in the class at
/// level `δ`. Draw `i` uses sub-stream `i`, so translated and plain runs
/// are paired.
pub fn class_probability(
    delta: f64,
    spec: &MeasureSpec,
    draws: usize,
    shift: Option<&FourierPotential>,
    cfg: &ClassConfig,
    exec: Exec,
) -> Result<ClassProbability> {
    let spec = spec.validated()?;
    cutoff_k(delta, spec.s, cfg.c_k_for(spec.n))?;
    let inner = ClassConfig { exec: Exec::Sequential, ..cfg.clone() };
    let outcomes = exec.map(draws, |i| -> Result<(bool, bool, bool, bool)> {
        let mut f = sample_indexed(&spec, i as u64)?;
        if let Some(g) = shift {
            f = f.add(g)?;
        }
        let r = classify_at(&f, delta, &inner)?;
        Ok((r.verdict, !r.p1.pass, r.p2_failures() > 0, r.p3_failures() > 0))
    });
    let mut out = ClassProbability { delta, draws, in_class: Proportion::wilson(0, 0, 1.0), p1_failures: 0, p2_failures: 0, p3_failures: 0, errors: 0 };
    let mut good = 0u64;
    for o in outcomes {
        match o {
            Ok((v, p1, p2, p3)) => {
                good += v as u64;
                out.p1_failures += p1 as u64;
                out.p2_failures += p2 as u64;
                out.p3_failures += p3 as u64;
            }
            Err(e) if e.is_numeric() => out.errors += 1,
            Err(e) => return Err(e),
        }
    }
    out.in_class = Proportion::wilson(good, draws as u64, 1.0);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::WaveVector;
    use crate::numeric::stats::{ks_critical_1pct, ks_uniform};

    fn spec(kind: MeasureKind, s: f64) -> MeasureSpec {
        MeasureSpec::new(kind, 2, s, 42).unwrap()
    }

    #[test]
    fn default_truncation_is_negligible() {
        for s in [0.1, 0.5, 2.0] {
            let k = default_k_max(s);
            assert!((-(k as f64) * s).exp() < 1e-12);
            assert!((-((k - 1) as f64) * s).exp() >= 1e-12);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let sp = spec(MeasureKind::MuS, 1.0);
        assert_eq!(sample(&sp).unwrap(), sample(&sp).unwrap());
        assert_eq!(sample_indexed(&sp, 9).unwrap(), sample_indexed(&sp, 9).unwrap());
        assert_ne!(sample_indexed(&sp, 9).unwrap(), sample_indexed(&sp, 10).unwrap());
        let other = MeasureSpec { seed: 43, ..sp };
        assert_ne!(sample(&sp).unwrap(), sample(&other).unwrap());
    }

    #[test]
    fn mu_samples_in_unit_ball_and_nu_samples_below_one_over_k() {
        let mu = spec(MeasureKind::MuS, 0.7);
        let nu = spec(MeasureKind::NuS, 0.7);
        for i in 0..20 {
            let f = sample_indexed(&mu, i).unwrap();
            assert!(f.norm_s() <= 1.0);
            assert_eq!(f.k_max(), Some(mu.k_max));
            let g = sample_indexed(&nu, i).unwrap();
            for (k, c) in g.modes() {
                assert!(c.norm() * (k.l1() as f64 * 0.7).exp() <= 1.0 / k.l1() as f64 * (1.0 + 1e-12));
            }
        }
    }

    fn mode_draws(sp: &MeasureSpec, k: &WaveVector, n: u64) -> Vec<Complex64> {
        let scale = (k.l1() as f64 * sp.s).exp();
        (0..n).map(|i| sample_indexed(sp, i).unwrap().coeff(k) * scale).collect()
    }

    #[test]
    fn disk_moments_and_phases() {
        let sp = spec(MeasureKind::MuS, 3.0);
        let k = WaveVector::new(vec![1, 2]);
        let z = mode_draws(&sp, &k, 10_000);
        let r2: Vec<f64> = z.iter().map(|c| c.norm_sqr()).collect();
        let mean = r2.iter().sum::<f64>() / r2.len() as f64;
        // Var |z|² = 1/3 − 1/4
        let sigma = (1.0 / 12.0 / r2.len() as f64).sqrt();
        assert!((mean - 0.5).abs() < 3.0 * sigma, "{mean}");
        let small = Proportion::wilson(z.iter().filter(|c| c.norm() < 0.1).count() as u64, z.len() as u64, 1.0);
        assert!((small.estimate - 0.01).abs() < 3.0 * (0.01f64 * 0.99 / z.len() as f64).sqrt(), "{small:?}");
        let phases: Vec<f64> = z.iter().map(|c| c.arg().rem_euclid(TAU) / TAU).collect();
        assert!(ks_uniform(&phases) < ks_critical_1pct(phases.len()));
    }

    #[test]
    fn c_n_matches_zeta() {
        // n = 2: 4 m vectors of norm m, Σ 4m·m⁻⁵ = 4ζ(4) = 4π⁴/90
        let want = 4.0 * std::f64::consts::PI.powi(4) / 90.0;
        assert!((c_n(2) - want).abs() < 1e-10, "{}", c_n(2));
    }

    #[test]
    fn p1_failures_match_independent_mode_law() {
        let sp = spec(MeasureKind::MuS, 2.0);
        let est = p1_failure_probability(0.5, &sp, 10_000, Exec::Sequential).unwrap();
        assert!(est.modes_tested > 0);
        let sig = (est.exact * (1.0 - est.exact) / 10_000.0).sqrt();
        assert!((est.failures.estimate - est.exact).abs() < 3.0 * sig, "{est:?}");
        assert!(est.failures.estimate <= est.union_bound + 3.0 * sig);
        assert!(est.union_bound <= est.global_bound);
        let zero = p1_failure_probability(0.0, &sp, 100, Exec::Sequential).unwrap();
        assert_eq!(zero.failures.count, 0);
    }

    #[test]
    fn p1_needs_a_testable_mode() {
        let sp = spec(MeasureKind::MuS, 2.0).with_k_max(2).unwrap();
        assert!(p1_failure_probability(0.5, &sp, 10, Exec::Sequential).is_err());
    }

    #[test]
    fn class_probability_trend_and_no_degenerate_draws() {
        let sp = spec(MeasureKind::MuS, 2.0);
        let cfg = ClassConfig::default();
        let mut last = 0.0;
        for d in [0.2, 0.1, 0.05] {
            let r = class_probability(d, &sp, 200, None, &cfg, Exec::Sequential).unwrap();
            assert_eq!(r.p2_failures, 0);
            assert_eq!(r.p3_failures, 0);
            assert!(r.in_class.estimate >= last - 3.0 * r.in_class.sigma, "{r:?}");
            last = r.in_class.estimate;
        }
    }

    #[test]
    fn translated_class_is_not_smaller() {
        let sp = spec(MeasureKind::NuS, 2.0);
        let e = |m: f64| (-2.0 * m).exp();
        let g = FourierPotential::new(2, 2.0)
            .unwrap()
            .with_mode(vec![1i64, 0], Complex64::new(0.3 * e(1.0), 0.0))
            .unwrap()
            .with_mode(vec![0i64, 1], Complex64::new(0.0, 0.2 * e(1.0)))
            .unwrap()
            .with_mode(vec![1i64, 1], Complex64::new(-0.4 * e(2.0), 0.1 * e(2.0)))
            .unwrap();
        assert!(g.norm_s() <= 1.0);
        let cfg = ClassConfig::default();
        let plain = class_probability(0.1, &sp, 300, None, &cfg, Exec::Sequential).unwrap();
        let moved = class_probability(0.1, &sp, 300, Some(&g), &cfg, Exec::Sequential).unwrap();
        let sigma = plain.in_class.sigma.max(moved.in_class.sigma).max(1.0 / 300.0);
        assert!(moved.in_class.estimate >= plain.in_class.estimate - 3.0 * sigma, "{plain:?} {moved:?}");
    }
}
