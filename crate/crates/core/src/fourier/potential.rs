use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::profile::OneDProfile;
use super::wave::{count_with_norm, star_up_to, WaveVector};
use crate::error::{Error, Result};

/// Rule for the Fourier coefficients that are not stored explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Tail {
    /// Unlisted coefficients vanish.
    Zero,
    /// Every unlisted star mode `k` carries the real coefficient
    /// `delta0 · e^{-|k|s}`; unlisted non-primitive modes vanish.
    Floor { delta0: f64 },
}

/// A real-analytic zero-average potential on `Tⁿ` in Fourier space.
///
/// Only sharp wave vectors are stored; the coefficient at `-k` is the
/// conjugate of the one at `k`, so `f(x) = Σ 2 Re(f_k e^{ik·x})`.
/// Serialises in the potential file format of [`super::io`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "super::io::PotentialFile", try_from = "super::io::PotentialFile")]
pub struct FourierPotential {
    n: usize,
    s: f64,
    coeffs: BTreeMap<WaveVector, Complex64>,
    tail: Tail,
    /// Support cutoff of a sampled (truncated) potential: modes with
    /// `|k| > k_max` are unknown rather than zero, and class checks only
    /// look at `|k| ≤ k_max`.
    k_max: Option<u64>,
}

/// A point value together with a bound on the neglected tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub truncation_bound: f64,
}

impl FourierPotential {
    pub fn new(n: usize, s: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::invalid(format!("analyticity width must be positive, got {s}")));
        }
        Ok(FourierPotential { n, s, coeffs: BTreeMap::new(), tail: Tail::Zero, k_max: None })
    }

    pub fn with_tail(mut self, tail: Tail) -> Result<Self> {
        if let Tail::Floor { delta0 } = tail {
            if !(delta0 >= 0.0 && delta0.is_finite()) {
                return Err(Error::invalid(format!("floor tail needs delta0 ≥ 0, got {delta0}")));
            }
        }
        self.tail = tail;
        Ok(self)
    }

    pub fn with_k_max(mut self, k_max: Option<u64>) -> Self {
        self.k_max = k_max;
        self
    }

    /// Store `f_k`. `k` must be sharp and of the right dimension.
    pub fn set(&mut self, k: WaveVector, value: Complex64) -> Result<()> {
        self.check_mode(&k)?;
        self.coeffs.insert(k, value);
        Ok(())
    }

    /// Builder form of [`set`](Self::set); rejects duplicates.
    pub fn with_mode(mut self, k: impl Into<WaveVector>, value: Complex64) -> Result<Self> {
        let k = k.into();
        self.check_mode(&k)?;
        if self.coeffs.contains_key(&k) {
            return Err(Error::Format(format!("duplicate mode {k}")));
        }
        self.coeffs.insert(k, value);
        Ok(self)
    }

    fn check_mode(&self, k: &WaveVector) -> Result<()> {
        if k.dim() != self.n {
            return Err(Error::Dimension { expected: self.n, got: k.dim() });
        }
        if !k.is_sharp() {
            return Err(Error::invalid(format!("mode {k} is not sharp (first nonzero component must be positive)")));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn width(&self) -> f64 {
        self.s
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn k_max(&self) -> Option<u64> {
        self.k_max
    }

    pub fn modes(&self) -> impl Iterator<Item = (&WaveVector, &Complex64)> {
        self.coeffs.iter()
    }

    pub fn stored(&self, k: &WaveVector) -> Option<Complex64> {
        self.coeffs.get(k).copied()
    }

    pub fn num_modes(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficient at a sharp `k`, resolving the tail rule.
    pub fn coeff(&self, k: &WaveVector) -> Complex64 {
        if let Some(c) = self.coeffs.get(k) {
            return *c;
        }
        match self.tail {
            Tail::Floor { delta0 } if k.is_star() => Complex64::new(delta0 * (-(k.l1() as f64) * self.s).exp(), 0.0),
            _ => Complex64::new(0.0, 0.0),
        }
    }

    /// Weighted sup norm `sup |f_k| e^{|k|s}`.
    pub fn norm_s(&self) -> f64 {
        let stored = self
            .coeffs
            .iter()
            .map(|(k, c)| c.norm() * (k.l1() as f64 * self.s).exp())
            .fold(0.0_f64, f64::max);
        match self.tail {
            Tail::Zero => stored,
            Tail::Floor { delta0 } => stored.max(delta0),
        }
    }

    /// Multiply by a non-negative real scalar (a floor tail cannot change
    /// sign) or any real scalar for a zero tail.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let tail = match self.tail {
            Tail::Zero => Tail::Zero,
            Tail::Floor { delta0 } if c >= 0.0 => Tail::Floor { delta0: delta0 * c },
            Tail::Floor { .. } => return Err(Error::invalid("floor tail cannot be scaled by a negative factor")),
        };
        Ok(FourierPotential {
            coeffs: self.coeffs.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
            tail,
            ..self.clone()
        })
    }

    /// Sum of two potentials on the same space. Tail coefficients are
    /// materialised wherever the other operand stores a mode.
    pub fn add(&self, other: &FourierPotential) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::Dimension { expected: self.n, got: other.n });
        }
        if (self.s - other.s).abs() > 1e-15 * self.s {
            return Err(Error::invalid("cannot add potentials with different analyticity widths"));
        }
        let mut coeffs = BTreeMap::new();
        for k in self.coeffs.keys().chain(other.coeffs.keys()) {
            coeffs.insert(k.clone(), self.coeff(k) + other.coeff(k));
        }
        let tail = match (self.tail, other.tail) {
            (Tail::Zero, Tail::Zero) => Tail::Zero,
            (Tail::Floor { delta0 }, Tail::Zero) | (Tail::Zero, Tail::Floor { delta0 }) => Tail::Floor { delta0 },
            (Tail::Floor { delta0: a }, Tail::Floor { delta0: b }) => Tail::Floor { delta0: a + b },
        };
        let k_max = match (self.k_max, other.k_max) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        Ok(FourierPotential { n: self.n, s: self.s, coeffs, tail, k_max })
    }

    /// Largest 1-norm among stored modes.
    pub fn max_stored_norm(&self) -> u64 {
        self.coeffs.keys().map(WaveVector::l1).max().unwrap_or(0)
    }

    /// The one-dimensional projection `F_k` on the star vector `k`.
    pub fn profile(&self, k: &WaveVector) -> Result<OneDProfile> {
        if k.dim() != self.n {
            return Err(Error::Dimension { expected: self.n, got: k.dim() });
        }
        if !k.is_star() {
            return Err(Error::invalid(format!("profile base {k} must be a star vector")));
        }
        let norm = k.l1();
        let reach = self.k_max.unwrap_or_else(|| self.max_stored_norm()).max(norm);
        let jmax = (reach / norm) as usize;
        let mut coeffs: Vec<Complex64> = (1..=jmax).map(|j| self.coeff(&k.scaled(j as i64))).collect();
        if self.k_max.is_none() {
            while coeffs.last().is_some_and(|c| c.norm() == 0.0) {
                coeffs.pop();
            }
        }
        let mut p = OneDProfile::new(k.clone(), coeffs, norm as f64 * self.s);
        p.truncated = self.k_max.is_some();
        Ok(p)
    }

    /// Group the stored coefficients by primitive direction:
    /// `f(x) = Σ_k F_k(k·x)`.
    pub fn decompose(&self) -> BTreeMap<WaveVector, OneDProfile> {
        let mut bases: BTreeMap<WaveVector, ()> = BTreeMap::new();
        for k in self.coeffs.keys() {
            let (base, _) = k.canonical_class().expect("stored modes are nonzero");
            bases.insert(base, ());
        }
        bases
            .into_keys()
            .map(|b| {
                let p = self.profile(&b).expect("bases are star vectors of the right dimension");
                (b, p)
            })
            .collect()
    }

    /// Bound on `Σ_{|k| > k_eval} 2|f_k|` for the floor tail.
    pub fn tail_bound(&self, k_eval: u64) -> f64 {
        match self.tail {
            Tail::Zero => 0.0,
            Tail::Floor { delta0 } => {
                let mut sum = 0.0;
                for m in (k_eval + 1)..(k_eval + 100_000) {
                    let term = delta0 * count_with_norm(self.n, m) * (-(m as f64) * self.s).exp();
                    sum += term;
                    if term < 1e-18 * sum.max(1e-300) {
                        break;
                    }
                }
                sum
            }
        }
    }

    /// Finite potential containing every stored mode plus the tail modes
    /// with `|k| ≤ k_eval`.
    pub fn materialize(&self, k_eval: u64) -> FourierPotential {
        let mut out = FourierPotential { tail: Tail::Zero, ..self.clone() };
        if let Tail::Floor { .. } = self.tail {
            for k in star_up_to(self.n, k_eval) {
                if !self.coeffs.contains_key(&k) {
                    let c = self.coeff(&k);
                    out.coeffs.insert(k, c);
                }
            }
        }
        out
    }

    /// `f(x)`; a floor tail requires an evaluation cutoff.
    pub fn eval(&self, x: &[f64], k_eval: Option<u64>) -> Result<Evaluation> {
        if x.len() != self.n {
            return Err(Error::Dimension { expected: self.n, got: x.len() });
        }
        let mut value: f64 = self.coeffs.iter().map(|(k, c)| 2.0 * (c * Complex64::from_polar(1.0, k.dot(x))).re).sum();
        let mut bound = 0.0;
        if let Tail::Floor { .. } = self.tail {
            let k_eval = k_eval.ok_or_else(|| Error::invalid("floor-tail potentials need an evaluation cutoff"))?;
            for k in star_up_to(self.n, k_eval) {
                if !self.coeffs.contains_key(&k) {
                    value += 2.0 * self.coeff(&k).re * k.dot(x).cos();
                }
            }
            bound = self.tail_bound(k_eval);
        }
        Ok(Evaluation { value, truncation_bound: bound })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{E, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cos_x1() -> FourierPotential {
        FourierPotential::new(2, 1.0).unwrap().with_mode(vec![1, 0], c(0.5, 0.0)).unwrap()
    }

    #[test]
    fn norm_examples() {
        assert!((cos_x1().norm_s() - 0.5 * E).abs() < 1e-15);
        assert_eq!(FourierPotential::new(2, 1.0).unwrap().norm_s(), 0.0);
        let f = FourierPotential::new(2, 0.5)
            .unwrap()
            .with_tail(Tail::Floor { delta0: 0.3 })
            .unwrap()
            .with_mode(vec![1, 1], c(0.1, 0.0))
            .unwrap();
        // 0.1 e^{1} ≈ 0.2718 < 0.3
        assert!((f.norm_s() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn eval_cosine() {
        let v = cos_x1().eval(&[PI, 0.0], None).unwrap();
        assert!((v.value + 1.0).abs() < 1e-15);
        assert_eq!(v.truncation_bound, 0.0);
    }

    #[test]
    fn floor_tail_needs_cutoff() {
        let f = cos_x1().with_tail(Tail::Floor { delta0: 0.1 }).unwrap();
        assert!(f.eval(&[0.0, 0.0], None).is_err());
        let e = f.eval(&[0.3, 0.2], Some(12)).unwrap();
        let e_ref = f.eval(&[0.3, 0.2], Some(30)).unwrap();
        assert!((e.value - e_ref.value).abs() <= e.truncation_bound);
    }

    #[test]
    fn rejects_non_sharp_and_duplicates() {
        let f = FourierPotential::new(2, 1.0).unwrap();
        assert!(f.clone().with_mode(vec![-1, 0], c(1.0, 0.0)).is_err());
        assert!(f.clone().with_mode(vec![1, 0, 0], c(1.0, 0.0)).is_err());
        let g = f.with_mode(vec![1, 0], c(1.0, 0.0)).unwrap();
        assert!(g.with_mode(vec![1, 0], c(1.0, 0.0)).is_err());
    }

    #[test]
    fn decompose_examples() {
        let f = cos_x1();
        let d = f.decompose();
        assert_eq!(d.len(), 1);
        let p = &d[&WaveVector::new(vec![1, 0])];
        assert!((p.value(0.4) - 0.4f64.cos()).abs() < 1e-15);

        let g = FourierPotential::new(2, 1.0)
            .unwrap()
            .with_mode(vec![1, 1], c(0.5, 0.0))
            .unwrap()
            .with_mode(vec![2, 2], c(0.5, 0.0))
            .unwrap();
        let d = g.decompose();
        assert_eq!(d.len(), 1);
        let p = &d[&WaveVector::new(vec![1, 1])];
        assert!((p.value(0.7) - (0.7f64.cos() + 1.4f64.cos())).abs() < 1e-15);

        let h = cos_x1().with_mode(vec![0, 1], c(0.0, -0.5)).unwrap();
        let d = h.decompose();
        assert_eq!(d.len(), 2);
        assert!((d[&WaveVector::new(vec![0, 1])].value(0.3) - 0.3f64.sin()).abs() < 1e-15);
    }

    fn arb_potential() -> impl Strategy<Value = FourierPotential> {
        proptest::collection::vec((proptest::collection::vec(-4i64..=4, 3), -1.0f64..1.0, -1.0f64..1.0), 1..12).prop_map(|modes| {
            let mut f = FourierPotential::new(3, 0.7).unwrap();
            for (k, re, im) in modes {
                let k = WaveVector::new(k);
                if k.is_sharp() {
                    f.set(k, c(re, im)).unwrap();
                }
            }
            f
        })
    }

    proptest! {
        #[test]
        fn reconstruction_from_profiles(f in arb_potential(), pts in proptest::collection::vec(proptest::collection::vec(0.0f64..6.3, 3), 100)) {
            let profiles = f.decompose();
            for x in &pts {
                let direct = f.eval(x, None).unwrap().value;
                let summed: f64 = profiles.iter().map(|(k, p)| p.value(k.dot(x))).sum();
                prop_assert!((direct - summed).abs() < 1e-12);
            }
        }

        #[test]
        fn profiles_partition_coefficients(f in arb_potential()) {
            let mut seen = BTreeMap::new();
            for (base, p) in f.decompose() {
                for (i, cj) in p.coeffs.iter().enumerate() {
                    if cj.norm() != 0.0 {
                        let k = base.scaled(i as i64 + 1);
                        prop_assert!(seen.insert(k, *cj).is_none());
                    }
                }
            }
            let stored: BTreeMap<_, _> = f.modes().filter(|(_, v)| v.norm() != 0.0).map(|(k, v)| (k.clone(), *v)).collect();
            prop_assert_eq!(seen, stored);
        }

        #[test]
        fn norm_is_homogeneous(f in arb_potential(), s in -3.0f64..3.0) {
            let scaled = f.scaled(s).unwrap().norm_s();
            prop_assert!((scaled - s.abs() * f.norm_s()).abs() <= 4.0 * f64::EPSILON * scaled.max(1.0));
        }
    }
}
