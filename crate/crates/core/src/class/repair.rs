//! Repair of a potential into the open good set: high modes lifted to the
//! floor `δ e^{-|k|s}`, low modes whose projection fails the Morse or
//! fourth-order check moved off the critical curves.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{check_profile, critical_curve_p2, cutoff_k, low_modes, nearest_on_curves, ClassConfig};
use crate::error::{Error, Result};
use crate::fourier::{FourierPotential, OneDProfile, Tail, WaveVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeRepair {
    pub k: WaveVector,
    pub before: Complex64,
    pub after: Complex64,
    /// `|f̃_k − f_k| e^{|k|s}`.
    pub change: f64,
    /// Distance of `f_k` to the nearest critical curve before the move.
    pub curve_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepairOutcome {
    pub potential: FourierPotential,
    pub theta: f64,
    pub delta: f64,
    pub k_cut: f64,
    /// High modes raised to the floor.
    pub lifted: Vec<WaveVector>,
    /// Low modes moved off the critical curves.
    pub moved: Vec<ModeRepair>,
    /// `max_k |f̃_k − f_k| e^{|k|s}` over stored modes and the tail.
    pub max_change: f64,
}

const CURVE_SAMPLES: usize = 2048;
const RADII: [f64; 4] = [0.9, 0.7, 0.5, 0.3];
const DIRECTIONS: usize = 24;

/// Repair `f` with budget `θ` per mode (in the weighted norm), targeting
/// the class at `δ = θ/4`.
///
/// A support cutoff `k_max` on `f` is read as "all modes beyond are zero";
/// the result drops the cutoff and carries a `Floor(δ)` tail (or keeps a
/// larger floor already present).
pub fn repair_to_good_set(f: &FourierPotential, theta: f64, cfg: &ClassConfig) -> Result<RepairOutcome> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::invalid(format!("repair budget θ must lie in (0, 1), got {theta}")));
    }
    let norm = f.norm_s();
    if norm > 1.0 + 1e-12 {
        return Err(Error::invalid(format!("repair expects a unit-ball potential, |f|_s = {norm}")));
    }
    let s = f.width();
    let delta = theta / 4.0;
    let k_cut = cutoff_k(delta, s, cfg.c_k_for(f.dim()))?;
    let weight = |k: &WaveVector| (k.l1() as f64 * s).exp();

    let (tail, tail_change) = match (f.tail(), f.k_max()) {
        (Tail::Floor { delta0 }, None) if delta0 >= delta => (Tail::Floor { delta0 }, 0.0),
        (Tail::Floor { delta0 }, None) => (Tail::Floor { delta0: delta }, delta - delta0),
        _ => (Tail::Floor { delta0: delta }, delta),
    };
    let mut g = FourierPotential::new(f.dim(), s)?.with_tail(tail)?;
    let mut lifted = Vec::new();
    for (k, c) in f.modes() {
        let mut c = *c;
        if k.is_star() && (k.l1() as f64) > k_cut && c.norm() * weight(k) < delta {
            let target = delta / weight(k);
            c = if c.norm() > 0.0 { c * (target / c.norm()) } else { Complex64::new(target, 0.0) };
            lifted.push(k.clone());
        }
        g.set(k.clone(), c)?;
    }

    let mut moved = Vec::new();
    for k in low_modes(&g, k_cut) {
        let p = g.profile(&k)?;
        if passes(&p, cfg) {
            continue;
        }
        let budget = theta / weight(&k);
        let zeta = p.coeff(1);
        let (dist, near) = nearest_on_curves(&p, zeta, CURVE_SAMPLES);
        let fixed = exit_curves(&p, zeta, near, budget, cfg).ok_or_else(|| {
            Error::numeric(format!("repair budget θe^(-|k|s) = {budget:.3e} too small to leave the critical curves at k = {k}"))
        })?;
        g.set(k.clone(), fixed)?;
        moved.push(ModeRepair {
            k: k.clone(),
            before: f.coeff(&k),
            after: fixed,
            change: (fixed - f.coeff(&k)).norm() * weight(&k),
            curve_distance: dist,
        });
    }

    let mut max_change = tail_change;
    for (k, c) in g.modes() {
        let before = if f.k_max().is_some_and(|m| k.l1() > m) { Complex64::new(0.0, 0.0) } else { f.coeff(k) };
        max_change = max_change.max((c - before).norm() * weight(k));
    }
    if max_change > theta * (1.0 + 1e-12) {
        return Err(Error::numeric(format!("repair exceeded its budget: {max_change} > {theta}")));
    }
    Ok(RepairOutcome { potential: g, theta, delta, k_cut, lifted, moved, max_change })
}

fn passes(p: &OneDProfile, cfg: &ClassConfig) -> bool {
    let r = check_profile(p, &cfg.tol);
    r.p2_pass && r.p3_pass
}

/// Move `zeta` by at most `budget`, first along the normal through the
/// nearest curve point, then over a fan of directions and shorter radii.
/// Candidates that keep the first harmonic inside the unit ball are tried
/// before the others.
fn exit_curves(p: &OneDProfile, zeta: Complex64, near: Complex64, budget: f64, cfg: &ClassConfig) -> Option<Complex64> {
    let away = zeta - near;
    let normal = if away.norm() > 1e-9 * budget {
        away / away.norm()
    } else {
        curve_normal(p, near).unwrap_or(Complex64::new(1.0, 0.0))
    };
    let mut candidates = Vec::new();
    for &r in &RADII {
        candidates.push(zeta + normal * (r * budget));
        candidates.push(zeta - normal * (r * budget));
        for d in 1..DIRECTIONS {
            let rot = Complex64::from_polar(1.0, TAU * d as f64 / DIRECTIONS as f64);
            candidates.push(zeta + normal * rot * (r * budget));
        }
    }
    let unit = (-p.width).exp();
    let inside = |z: &Complex64| z.norm() <= unit;
    let try_set = |z: &Complex64| passes(&p.with_first(*z), cfg);
    candidates
        .iter()
        .filter(|z| inside(z))
        .find(|z| try_set(z))
        .or_else(|| candidates.iter().filter(|z| !inside(z)).find(|z| try_set(z)))
        .copied()
}

/// Unit normal of the critical curve through `near`, from a symmetric
/// difference of the curve parametrisation.
fn curve_normal(p: &OneDProfile, near: Complex64) -> Option<Complex64> {
    let g = p.without_first();
    let (xi, _) = (0..CURVE_SAMPLES)
        .filter_map(|i| {
            let xi = TAU * i as f64 / CURVE_SAMPLES as f64;
            Some((xi, (critical_curve_p2(&g, xi).ok()? - near).norm()))
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))?;
    let h = 1e-5;
    let a = critical_curve_p2(&g, xi - h).ok()?;
    let b = critical_curve_p2(&g, xi + h).ok()?;
    let t = b - a;
    (t.norm() > 1e-14).then(|| Complex64::new(-t.im, t.re) / t.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::class::{classify_at, openness_radius};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn members_are_left_unchanged() {
        let f = FourierPotential::new(2, 1.0)
            .unwrap()
            .with_tail(Tail::Floor { delta0: 0.2 })
            .unwrap()
            .with_mode(vec![1, 0], c(0.3))
            .unwrap()
            .with_mode(vec![0, 1], c(0.1))
            .unwrap();
        let cfg = ClassConfig::default();
        let out = repair_to_good_set(&f, 0.1, &cfg).unwrap();
        assert_eq!(out.potential, f);
        assert!(out.moved.is_empty() && out.lifted.is_empty());
        assert_eq!(out.max_change, 0.0);
    }

    #[test]
    fn degenerate_diagonal_mode_is_moved() {
        let f = FourierPotential::new(2, 0.1)
            .unwrap()
            .with_mode(vec![1, 1], c(0.5))
            .unwrap()
            .with_mode(vec![2, 2], c(0.125))
            .unwrap();
        let cfg = ClassConfig::default();
        let before = classify_at(&f, 0.025, &cfg).unwrap();
        let diag = before.modes.iter().find(|m| m.k == WaveVector::new(vec![1, 1])).unwrap();
        assert!(!diag.p2_pass);
        let out = repair_to_good_set(&f, 0.1, &cfg).unwrap();
        assert!(out.moved.iter().any(|m| m.k == WaveVector::new(vec![1, 1])));
        assert!(out.max_change <= 0.1);
        let after = classify_at(&out.potential, out.delta, &cfg).unwrap();
        assert!(after.verdict);
    }

    fn random_unit_ball(rng: &mut ChaCha8Rng) -> FourierPotential {
        let mut f = FourierPotential::new(2, 1.0).unwrap();
        for k in crate::fourier::sharp_up_to(2, 8) {
            let r = rng.random::<f64>().sqrt();
            let phi = rng.random::<f64>() * TAU;
            let z = Complex64::from_polar(r, phi) * (-(k.l1() as f64)).exp();
            f.set(k, z).unwrap();
        }
        f.with_k_max(Some(8))
    }

    #[test]
    fn repaired_random_potentials_pass_and_stay_open() {
        let cfg = ClassConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..4 {
            let f = random_unit_ball(&mut rng);
            let out = repair_to_good_set(&f, 0.1, &cfg).unwrap();
            assert!(out.max_change <= 0.1);
            let report = classify_at(&out.potential, out.delta, &cfg).unwrap();
            assert!(report.verdict, "{:?}", report.p1);
            let rho = openness_radius(&out.potential, &report).unwrap();
            assert!(rho > 0.0);
            for _ in 0..3 {
                let mut g = FourierPotential::new(2, 1.0).unwrap();
                for k in crate::fourier::sharp_up_to(2, 10) {
                    let r = 0.99 * rho * rng.random::<f64>().sqrt();
                    let z = Complex64::from_polar(r, rng.random::<f64>() * TAU) * (-(k.l1() as f64)).exp();
                    g.set(k, z).unwrap();
                }
                let h = out.potential.add(&g).unwrap();
                assert!(classify_at(&h, out.delta - rho, &cfg).unwrap().verdict);
            }
        }
    }
}
