//! Action, period and its energy derivative on one orbit of
//! `η²/2 + F(ξ) = E`.
//!
//! Librations are split into two turning-point pieces and a middle piece.
//! Turning-point pieces use `ξ = ξ_turn ± u²`, which removes the inverse
//! square-root singularity, and evaluate `E − F` as `(E − F(ξ_turn)) −
//! (F(ξ) − F(ξ_turn))` with the increment computed without cancellation.
//! The derivative `T′(E)` of the (divergent-looking) turning-point pieces is
//! regularised by one integration by parts.

use std::f64::consts::{PI, SQRT_2, TAU};

use serde::{Deserialize, Serialize};

use super::components::{ComponentKind, Edge, LiftedPoint, PhaseComponent};
use crate::error::{Error, Result};
use crate::fourier::OneDProfile;
use crate::numeric::quad::{integrate, integrate_pieces, QuadOptions, QuadResult};
use crate::numeric::roots::brent;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitIntegrals {
    pub energy: f64,
    /// `p = (1/2π) ∮ η dξ`.
    pub action: f64,
    /// `T = ∮ dξ / η`.
    pub period: f64,
    /// `dT/dE`.
    pub dperiod: f64,
    /// `ω = E′(p) = 2π/T`.
    pub omega: f64,
    /// `E″(p) = −(2π)² T′ / T³`.
    pub e2: f64,
    /// Largest relative error estimate of the quadratures involved.
    pub rel_error: f64,
}

pub(crate) const QUAD: QuadOptions = QuadOptions { abs_tol: 1e-300, rel_tol: 1e-12, max_intervals: 2000 };

fn check_range(comp: &PhaseComponent, e: f64, closed: bool) -> Result<()> {
    let inside = if closed { e >= comp.e_a && e <= comp.e_b } else { comp.contains_energy(e) };
    if !e.is_finite() || !inside {
        return Err(Error::invalid(format!(
            "energy {e} outside component {} range ({}, {})",
            comp.id, comp.e_a, comp.e_b
        )));
    }
    Ok(())
}

/// `E − F(ξ)` referenced to the closest of a set of anchor points, so that
/// values near anchors keep full relative accuracy.
struct Gap<'a> {
    f: &'a OneDProfile,
    e: f64,
    anchors: Vec<(f64, f64)>,
}

impl<'a> Gap<'a> {
    fn new(f: &'a OneDProfile, e: f64, points: &[f64]) -> Self {
        Gap { f, e, anchors: points.iter().map(|&x| (x, e - f.value(x))).collect() }
    }

    fn at(&self, xi: f64) -> f64 {
        let (x0, r0) = self
            .anchors
            .iter()
            .min_by(|a, b| (a.0 - xi).abs().total_cmp(&(b.0 - xi).abs()))
            .copied()
            .unwrap_or((xi, self.e - self.f.value(xi)));
        r0 - self.f.increment(x0, xi - x0)
    }
}

/// Turning point on the monotone stretch between a maximum `hi` and a
/// minimum `lo` (in either order) at energy `e`.
fn turning_point(f: &OneDProfile, e: f64, hi: &LiftedPoint, lo: &LiftedPoint) -> Result<f64> {
    let g = |x: f64| f.value(x) - e;
    if g(hi.xi) <= 0.0 {
        return Ok(hi.xi);
    }
    if g(lo.xi) >= 0.0 {
        return Ok(lo.xi);
    }
    brent(g, hi.xi, lo.xi, 1e-15).map_err(|_| Error::numeric(format!("turning point at E = {e} not bracketed; profile not Morse?")))
}

fn rel(q: &QuadResult) -> f64 {
    if q.value == 0.0 {
        0.0
    } else {
        q.error / q.value.abs()
    }
}

fn finish(e: f64, action: f64, period: f64, dperiod: f64, rel_error: f64) -> OrbitIntegrals {
    let omega = TAU / period;
    let e2 = -TAU * TAU * dperiod / period.powi(3);
    OrbitIntegrals { energy: e, action, period, dperiod, omega, e2, rel_error }
}

/// All integrals at an energy strictly inside the component's range.
pub fn orbit_integrals(f: &OneDProfile, comp: &PhaseComponent, e: f64) -> Result<OrbitIntegrals> {
    check_range(comp, e, false)?;
    match comp.kind {
        ComponentKind::Libration => libration(f, comp, e, true),
        _ => rotation(f, comp, e, true),
    }
}

/// `p(E)` on the closed range: zero at a minimum edge, the separatrix
/// action at a maximum edge.
pub fn action_of_energy(f: &OneDProfile, comp: &PhaseComponent, e: f64) -> Result<f64> {
    check_range(comp, e, true)?;
    if comp.kind == ComponentKind::Libration && comp.edge_a == Edge::Min && e == comp.e_a && comp.minima().count() == 1 {
        return Ok(0.0);
    }
    let r = match comp.kind {
        ComponentKind::Libration => libration(f, comp, e, false)?,
        _ => rotation(f, comp, e, false)?,
    };
    Ok(r.action)
}

/// Period at an energy strictly inside the range.
pub fn period(f: &OneDProfile, comp: &PhaseComponent, e: f64) -> Result<f64> {
    Ok(orbit_integrals(f, comp, e)?.period)
}

/// `E″` by Richardson-extrapolated central differences of `ω(E)`:
/// `E″ = ω dω/dE`.
pub fn e2_richardson(f: &OneDProfile, comp: &PhaseComponent, e: f64, h: f64) -> Result<f64> {
    let w = |x: f64| -> Result<f64> { Ok(orbit_integrals(f, comp, x)?.omega) };
    let d = |h: f64| -> Result<f64> { Ok((w(e + h)? - w(e - h)?) / (2.0 * h)) };
    let d1 = d(h)?;
    let d2 = d(0.5 * h)?;
    Ok(w(e)? * (4.0 * d2 - d1) / 3.0)
}

fn libration(f: &OneDProfile, comp: &PhaseComponent, e: f64, derivs: bool) -> Result<OrbitIntegrals> {
    let ch = &comp.chain;
    let n = ch.len();
    let xl = turning_point(f, e, &ch[0], &ch[1])?;
    let xr = turning_point(f, e, &ch[n - 1], &ch[n - 2])?;
    let a = 0.5 * (xl + ch[1].xi);
    let b = 0.5 * (ch[n - 2].xi + xr);
    let inner: Vec<f64> = ch[1..n - 1].iter().map(|c| c.xi).collect();
    let gap = Gap::new(f, e, &inner);
    let mut mids = vec![a];
    mids.extend(&inner);
    mids.push(b);

    // turning-point pieces in u, ξ = x_turn ± u²; the level is taken as
    // exactly F(x_turn): a residual of one ulp below zero would open a
    // spurious singular window at u ≈ 0
    let left_gap = |u2: f64| (-f.increment(xl, u2)).max(0.0);
    let right_gap = |u2: f64| (-f.increment(xr, -u2)).max(0.0);
    let ul = (a - xl).max(0.0).sqrt();
    let ur = (xr - b).max(0.0).sqrt();

    let pl = integrate(|u| 2.0 * u * left_gap(u * u).sqrt(), 0.0, ul, QUAD);
    let pr = integrate(|u| 2.0 * u * right_gap(u * u).sqrt(), 0.0, ur, QUAD);
    let pm = integrate_pieces(|x| gap.at(x).max(0.0).sqrt(), &mids, QUAD);
    let action = SQRT_2 / PI * (pl.value + pm.value + pr.value);
    let mut err = rel(&pl).max(rel(&pr)).max(rel(&pm));
    if !derivs {
        return Ok(OrbitIntegrals { energy: e, action, period: f64::NAN, dperiod: f64::NAN, omega: f64::NAN, e2: f64::NAN, rel_error: err });
    }

    let inv = |g: f64| if g > 0.0 { 1.0 / g.sqrt() } else { 0.0 };
    let tl = integrate(|u| 2.0 * u * inv(left_gap(u * u)), 0.0, ul, QUAD);
    let tr = integrate(|u| 2.0 * u * inv(right_gap(u * u)), 0.0, ur, QUAD);
    let tm = integrate_pieces(|x| inv(gap.at(x)), &mids, QUAD);
    let period = SQRT_2 * (tl.value + tm.value + tr.value);

    let kernel = |x: f64, g: f64| {
        let j = f.jet(x);
        j[2] / (j[1] * j[1]) * inv(g)
    };
    let dl_int = integrate(|u| 2.0 * u * kernel(xl + u * u, left_gap(u * u)), 0.0, ul, QUAD);
    let dr_int = integrate(|u| 2.0 * u * kernel(xr - u * u, right_gap(u * u)), 0.0, ur, QUAD);
    let ga = left_gap(ul * ul);
    let gb = right_gap(ur * ur);
    let dl = 1.0 / (f.d1(a).abs() * ga.sqrt()) - dl_int.value;
    let dr = 1.0 / (f.d1(b).abs() * gb.sqrt()) - dr_int.value;
    let dm = integrate_pieces(|x| -0.5 * inv(gap.at(x)).powi(3), &mids, QUAD);
    let dperiod = SQRT_2 * (dl + dm.value + dr);
    for q in [&tl, &tr, &tm, &dl_int, &dr_int, &dm] {
        err = err.max(rel(q));
    }
    Ok(finish(e, action, period, dperiod, err))
}

fn rotation(f: &OneDProfile, comp: &PhaseComponent, e: f64, derivs: bool) -> Result<OrbitIntegrals> {
    let pts: Vec<f64> = comp.chain.iter().map(|c| c.xi).collect();
    let gap = Gap::new(f, e, &pts);
    let pm = integrate_pieces(|x| gap.at(x).max(0.0).sqrt(), &pts, QUAD);
    let action = SQRT_2 / TAU * pm.value;
    if !derivs {
        return Ok(OrbitIntegrals { energy: e, action, period: f64::NAN, dperiod: f64::NAN, omega: f64::NAN, e2: f64::NAN, rel_error: rel(&pm) });
    }
    let tm = integrate_pieces(|x| gap.at(x).powf(-0.5), &pts, QUAD);
    let dm = integrate_pieces(|x| gap.at(x).powf(-1.5), &pts, QUAD);
    let period = tm.value / SQRT_2;
    let dperiod = -dm.value / (2.0 * SQRT_2);
    let err = rel(&pm).max(rel(&tm)).max(rel(&dm));
    Ok(finish(e, action, period, dperiod, err))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::one_dof::components::component_graph;

    /// Complete elliptic integral of the first kind by the AGM.
    fn ellip_k(k: f64) -> f64 {
        let (mut a, mut b) = (1.0f64, (1.0 - k * k).sqrt());
        for _ in 0..40 {
            let t = 0.5 * (a + b);
            b = (a * b).sqrt();
            a = t;
        }
        PI / (2.0 * a)
    }

    fn pendulum() -> (OneDProfile, Vec<PhaseComponent>) {
        let f = OneDProfile::from_trig(&[1.0], &[]);
        let c = component_graph(&f).unwrap();
        (f, c)
    }

    #[test]
    fn pendulum_period_matches_elliptic_oracle() {
        let (f, c) = pendulum();
        let oracle = 4.0 * ellip_k(0.5f64.sqrt());
        assert!((oracle - 7.416298709205487).abs() < 1e-12);
        let t = period(&f, &c[0], 0.0).unwrap();
        assert!((t - oracle).abs() < 1e-10, "{t} vs {oracle}");
        // general energy: T = 4K(k) with k² = (1 + E)/2
        for e in [-0.9, -0.3, 0.5, 0.99] {
            let k = ((1.0 + e) / 2.0f64).sqrt();
            let t = period(&f, &c[0], e).unwrap();
            assert!((t / (4.0 * ellip_k(k)) - 1.0).abs() < 1e-10, "E = {e}");
        }
    }

    #[test]
    fn pendulum_harmonic_and_separatrix_limits() {
        let (f, c) = pendulum();
        let t = period(&f, &c[0], -1.0 + 1e-8).unwrap();
        assert!((t - TAU).abs() < 1e-6);
        for j in [10, 20, 30] {
            let d = 2f64.powi(-j);
            let t = period(&f, &c[0], 1.0 - d).unwrap();
            assert!((t - 2.0 * (32.0 / d).ln()).abs() < 1e-3 * t, "{t}");
        }
    }

    #[test]
    fn separatrix_area_is_sixteen() {
        let (f, c) = pendulum();
        let p = action_of_energy(&f, &c[0], 1.0).unwrap();
        assert!((TAU * p - 16.0).abs() < 1e-10, "{}", TAU * p);
        assert!((p - 2.546479089470325).abs() < 1e-10);
        assert_eq!(action_of_energy(&f, &c[0], -1.0).unwrap(), 0.0);
        let near = action_of_energy(&f, &c[0], -1.0 + 1e-6).unwrap();
        assert!((near / 1e-6 - 1.0).abs() < 1e-5);
    }

    #[test]
    fn free_rotor() {
        let f = OneDProfile::zero();
        let c = component_graph(&f).unwrap();
        for e in [0.01, 0.5, 3.0] {
            let r = orbit_integrals(&f, &c[0], e).unwrap();
            assert!((r.action - (2.0 * e).sqrt()).abs() < 1e-13);
            assert!((r.e2 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn analytic_and_richardson_second_derivative_agree() {
        let g = OneDProfile::from_trig(&[1.0], &[0.0, 0.6]);
        let comps = component_graph(&g).unwrap();
        for (f, comps) in [(pendulum().0, pendulum().1), (g.clone(), comps)] {
            for c in &comps {
                let top = if c.e_b.is_finite() { c.e_b } else { c.e_a + 2.0 };
                for t in [0.2, 0.5, 0.8] {
                    let e = c.e_a + t * (top - c.e_a);
                    let r = orbit_integrals(&f, c, e).unwrap();
                    let h = 1e-3 * (top - c.e_a);
                    let fd = e2_richardson(&f, c, e, h).unwrap();
                    assert!((r.e2 - fd).abs() < 1e-6 * r.e2.abs().max(1e-3), "comp {} E {e}: {} vs {fd}", c.id, r.e2);
                }
            }
        }
    }

    #[test]
    fn dp_de_is_period_over_two_pi() {
        let g = OneDProfile::from_trig(&[1.0, 0.1], &[0.0, 0.6]);
        let comps = component_graph(&g).unwrap();
        for c in &comps {
            let top = if c.e_b.is_finite() { c.e_b } else { c.e_a + 2.0 };
            for t in [0.3, 0.6] {
                let e = c.e_a + t * (top - c.e_a);
                let h = 1e-4 * (top - c.e_a);
                let p = |x| action_of_energy(&g, c, x).unwrap();
                let d1 = (p(e + h) - p(e - h)) / (2.0 * h);
                let d2 = (p(e + 0.5 * h) - p(e - 0.5 * h)) / h;
                let dp = (4.0 * d2 - d1) / 3.0;
                let t_over = period(&g, c, e).unwrap() / TAU;
                assert!((dp / t_over - 1.0).abs() < 1e-6, "comp {}: {dp} vs {t_over}", c.id);
            }
        }
    }

    #[test]
    fn energy_outside_range_rejected() {
        let (f, c) = pendulum();
        assert!(orbit_integrals(&f, &c[0], 1.5).is_err());
        assert!(orbit_integrals(&f, &c[1], 0.5).is_err());
    }
}
