use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An integer wave vector `k ∈ Zⁿ`.
///
/// Ordering is lexicographic on the components, which gives every map keyed
/// by wave vectors a deterministic iteration order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WaveVector(Vec<i64>);

impl WaveVector {
    pub fn new(components: Vec<i64>) -> Self {
        WaveVector(components)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[i64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// 1-norm `|k|`.
    pub fn l1(&self) -> u64 {
        self.0.iter().map(|c| c.unsigned_abs()).sum()
    }

    /// Squared Euclidean norm `‖k‖²`.
    pub fn l2_sq(&self) -> u64 {
        self.0.iter().map(|&c| (c * c) as u64).sum()
    }

    pub fn l2(&self) -> f64 {
        (self.l2_sq() as f64).sqrt()
    }

    /// Nonzero with first non-null component positive.
    pub fn is_sharp(&self) -> bool {
        self.0.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0)
    }

    /// Sharp and primitive (components coprime).
    pub fn is_star(&self) -> bool {
        self.is_sharp() && self.content() == 1
    }

    /// gcd of the components (0 for the zero vector).
    pub fn content(&self) -> u64 {
        self.0.iter().fold(0, |g, &c| gcd(g, c.unsigned_abs()))
    }

    pub fn dot(&self, x: &[f64]) -> f64 {
        self.0.iter().zip(x).map(|(&k, &xi)| k as f64 * xi).sum()
    }

    pub fn scaled(&self, j: i64) -> WaveVector {
        WaveVector(self.0.iter().map(|&c| c * j).collect())
    }

    pub fn neg(&self) -> WaveVector {
        self.scaled(-1)
    }

    /// Factor `k = j · k*` with `k*` star.
    pub fn canonical_class(&self) -> Result<(WaveVector, i64)> {
        let g = self.content();
        if g == 0 {
            return Err(Error::ZeroVector);
        }
        let g = g as i64;
        let base = WaveVector(self.0.iter().map(|&c| c / g).collect());
        if base.is_sharp() {
            Ok((base, g))
        } else {
            Ok((base.neg(), -g))
        }
    }
}

impl From<Vec<i64>> for WaveVector {
    fn from(v: Vec<i64>) -> Self {
        WaveVector(v)
    }
}

impl fmt::Display for WaveVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl std::str::FromStr for WaveVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim().trim_start_matches('(').trim_end_matches(')');
        trimmed
            .split(',')
            .map(|t| t.trim().parse::<i64>().map_err(|_| Error::invalid(format!("bad wave vector '{s}'"))))
            .collect::<Result<Vec<_>>>()
            .map(WaveVector)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Number of vectors in `Zⁿ` with 1-norm exactly `m`.
pub fn count_with_norm(n: usize, m: u64) -> f64 {
    if m == 0 {
        return 1.0;
    }
    (1..=(n as u64).min(m))
        .map(|i| 2f64.powi(i as i32) * binomial(n as u64, i) * binomial(m - 1, i - 1))
        .sum()
}

/// All sharp vectors of dimension `n` with 1-norm exactly `m`, sorted.
pub fn sharp_with_norm(n: usize, m: u64) -> Vec<WaveVector> {
    let mut out = Vec::new();
    let mut buf = Vec::with_capacity(n);
    push_sharp(n, m as i64, &mut buf, &mut out);
    out.sort();
    out
}

fn push_sharp(n: usize, m: i64, buf: &mut Vec<i64>, out: &mut Vec<WaveVector>) {
    if n == 0 {
        return;
    }
    // first component zero: rest must itself be sharp
    buf.push(0);
    push_sharp(n - 1, m, buf, out);
    buf.pop();
    for a in 1..=m {
        buf.push(a);
        push_any(n - 1, m - a, buf, out);
        buf.pop();
    }
}

fn push_any(n: usize, m: i64, buf: &mut Vec<i64>, out: &mut Vec<WaveVector>) {
    if n == 0 {
        if m == 0 {
            out.push(WaveVector(buf.clone()));
        }
        return;
    }
    if n == 1 {
        buf.push(m);
        out.push(WaveVector(buf.clone()));
        buf.pop();
        if m != 0 {
            buf.push(-m);
            out.push(WaveVector(buf.clone()));
            buf.pop();
        }
        return;
    }
    for a in -m..=m {
        buf.push(a);
        push_any(n - 1, m - a.abs(), buf, out);
        buf.pop();
    }
}

/// Sharp vectors with `1 ≤ |k| ≤ kmax`, ordered by norm then lexicographically.
pub fn sharp_up_to(n: usize, kmax: u64) -> Vec<WaveVector> {
    (1..=kmax).flat_map(|m| sharp_with_norm(n, m)).collect()
}

/// Star (primitive sharp) vectors with `1 ≤ |k| ≤ kmax`.
pub fn star_up_to(n: usize, kmax: u64) -> Vec<WaveVector> {
    (1..=kmax).flat_map(|m| sharp_with_norm(n, m).into_iter().filter(WaveVector::is_star)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn wv(v: &[i64]) -> WaveVector {
        WaveVector::new(v.to_vec())
    }

    #[test]
    fn canonical_class_examples() {
        assert_eq!(wv(&[2, -4]).canonical_class().unwrap(), (wv(&[1, -2]), 2));
        assert_eq!(wv(&[-1, 0]).canonical_class().unwrap(), (wv(&[1, 0]), -1));
        assert_eq!(wv(&[0, 3]).canonical_class().unwrap(), (wv(&[0, 1]), 3));
        assert!(matches!(wv(&[0, 0]).canonical_class(), Err(Error::ZeroVector)));
    }

    #[test]
    fn sharpness_predicates() {
        assert!(wv(&[0, 2]).is_sharp());
        assert!(!wv(&[0, 2]).is_star());
        assert!(!wv(&[-1, 3]).is_sharp());
        assert!(wv(&[1, -3]).is_star());
    }

    #[test]
    fn enumeration_counts_match_formula() {
        for n in 1..=4 {
            for m in 1..=7 {
                let sharp = sharp_with_norm(n, m);
                assert_eq!(sharp.len() as f64 * 2.0, count_with_norm(n, m), "n={n} m={m}");
                assert!(sharp.iter().all(|k| k.is_sharp() && k.l1() == m));
            }
        }
    }

    #[test]
    fn star_up_to_two_in_plane() {
        let s = star_up_to(2, 2);
        assert_eq!(s, vec![wv(&[0, 1]), wv(&[1, 0]), wv(&[1, -1]), wv(&[1, 1])]);
    }

    proptest! {
        #[test]
        fn canonical_class_factors(v in proptest::collection::vec(-9i64..=9, 1..5)) {
            let k = WaveVector::new(v);
            prop_assume!(!k.is_zero());
            let (base, j) = k.canonical_class().unwrap();
            prop_assert!(base.is_star());
            prop_assert!(base.is_sharp());
            prop_assert_eq!(base.scaled(j), k);
        }
    }
}
