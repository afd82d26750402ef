//! Tabulated action-angle energy `p ↦ E(p)` on one component, with
//! `E′ = ω` and `E″`, and the Kolmogorov margin `|E″| ≥ θ^c`.

use serde::{Deserialize, Serialize};

use super::components::{Edge, PhaseComponent};
use super::integrals::{action_of_energy, orbit_integrals, OrbitIntegrals};
use crate::error::{Error, Result};
use crate::fourier::OneDProfile;
use crate::numeric::roots::brent;

/// `θ = ε^{a|ln ε|} = exp(−a (ln ε)²)`.
pub fn theta_scale(eps: f64, a: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) || !(a > 0.0) {
        return Err(Error::invalid(format!("θ needs ε in (0, 1) and a > 0, got ε = {eps}, a = {a}")));
    }
    Ok((-a * eps.ln().powi(2)).exp())
}

/// The exponent `a` for which `θ = 10⁻¹²` at `ε`.
pub fn default_a(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("ε must lie in (0, 1), got {eps}")));
    }
    Ok(12.0 * 10f64.ln() / eps.ln().powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridOptions {
    /// Uniformly spaced interior energies.
    pub interior: usize,
    /// Dyadic depth of the refinement toward a minimum edge.
    pub min_depth: u32,
    /// Dyadic depth of the refinement toward a separatrix.
    pub max_depth: u32,
    /// Energy span tabulated above the bottom of a rotation band; defaults
    /// to `max(2, 2 (max F − min F))`.
    pub rotation_span: Option<f64>,
    /// Width of the action collars excluded at separatrix edges.
    pub collar: f64,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions { interior: 24, min_depth: 20, max_depth: 36, rotation_span: None, collar: 1e-12 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionPoint {
    pub energy: f64,
    pub action: f64,
    pub omega: f64,
    pub e2: f64,
    pub period: f64,
    /// Outside the collars at separatrix edges.
    pub valid: bool,
}

impl ActionPoint {
    fn from(r: &OrbitIntegrals, valid: bool) -> Self {
        ActionPoint { energy: r.energy, action: r.action, omega: r.omega, e2: r.e2, period: r.period, valid }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionProfile {
    pub component: PhaseComponent,
    pub profile: OneDProfile,
    pub points: Vec<ActionPoint>,
    /// Action at the lower and upper edge (upper is the top of the
    /// tabulated range for rotations).
    pub p_a: f64,
    pub p_b: f64,
    /// Validity range in action.
    pub valid_lo: f64,
    pub valid_hi: f64,
    pub options: GridOptions,
}

fn dyadic(depth: u32) -> impl Iterator<Item = f64> {
    (1..=depth).map(|i| 0.5f64.powi(i as i32))
}

fn edge_depth(edge: Edge, opts: &GridOptions) -> u32 {
    match edge {
        Edge::Min => opts.min_depth,
        Edge::Max => opts.max_depth,
        Edge::Infinity => 0,
    }
}

/// Tabulate `E(p)`, `ω` and `E″` on a grid graded geometrically toward the
/// singular ends of the component's energy range.
pub fn energy_of_action(f: &OneDProfile, comp: &PhaseComponent, opts: &GridOptions) -> Result<ActionProfile> {
    let (e_lo, e_hi) = energy_window(f, comp, opts);
    let span = e_hi - e_lo;
    let mut ts: Vec<f64> = dyadic(edge_depth(comp.edge_a, opts)).collect();
    if comp.edge_b != Edge::Infinity {
        ts.extend(dyadic(edge_depth(comp.edge_b, opts)).map(|t| 1.0 - t));
    } else {
        ts.push(1.0);
    }
    ts.extend((1..=opts.interior).map(|j| j as f64 / (opts.interior + 1) as f64));
    ts.sort_by(f64::total_cmp);
    ts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let energies: Vec<f64> = ts
        .iter()
        .map(|&t| if t > 0.5 && comp.edge_b != Edge::Infinity { e_hi - span * (1.0 - t) } else { e_lo + span * t })
        .filter(|&e| e > comp.e_a && e < comp.e_b)
        .collect();

    let p_a = action_of_energy(f, comp, comp.e_a)?;
    let p_b = if comp.e_b.is_finite() { action_of_energy(f, comp, comp.e_b)? } else { action_of_energy(f, comp, e_hi)? };
    let valid_lo = if comp.edge_a == Edge::Max { p_a + opts.collar } else { p_a };
    let valid_hi = if comp.edge_b == Edge::Max { p_b - opts.collar } else { p_b };

    let mut points = Vec::with_capacity(energies.len());
    for e in energies {
        let r = orbit_integrals(f, comp, e)?;
        let valid = r.action >= valid_lo && r.action <= valid_hi;
        points.push(ActionPoint::from(&r, valid));
    }
    for w in points.windows(2) {
        if !(w[1].action > w[0].action) {
            return Err(Error::numeric(format!(
                "tabulated action not increasing at E = {} (component {}); quadrature failure",
                w[1].energy, comp.id
            )));
        }
    }
    if let Some(p) = points.iter().find(|p| !(p.omega > 0.0)) {
        return Err(Error::numeric(format!("non-positive frequency at E = {}", p.energy)));
    }
    Ok(ActionProfile { component: comp.clone(), profile: f.clone(), points, p_a, p_b, valid_lo, valid_hi, options: *opts })
}

fn energy_window(f: &OneDProfile, comp: &PhaseComponent, opts: &GridOptions) -> (f64, f64) {
    if comp.e_b.is_finite() {
        return (comp.e_a, comp.e_b);
    }
    let range = comp.chain.iter().map(|c| c.value).fold(f64::NEG_INFINITY, f64::max)
        - comp.chain.iter().map(|c| c.value).fold(f64::INFINITY, f64::min);
    let span = opts.rotation_span.unwrap_or_else(|| (2.0 * range).max(2.0).max(2.0 * f.amplitude()));
    (comp.e_a, comp.e_a + span)
}

impl ActionProfile {
    /// Exact evaluation at an energy inside the component.
    pub fn at_energy(&self, e: f64) -> Result<ActionPoint> {
        let r = orbit_integrals(&self.profile, &self.component, e)?;
        Ok(ActionPoint::from(&r, r.action >= self.valid_lo && r.action <= self.valid_hi))
    }

    /// `E(p)` by inverting `p(E)` within the tabulated range.
    pub fn at_action(&self, p: f64) -> Result<ActionPoint> {
        let first = self.points.first().ok_or_else(|| Error::numeric("empty action profile"))?;
        let last = self.points.last().expect("non-empty");
        if !(p > self.p_a && p <= last.action.max(self.p_b)) {
            return Err(Error::invalid(format!("action {p} outside ({}, {}]", self.p_a, self.p_b)));
        }
        let (mut lo, mut hi) = (self.component.e_a, self.energy_upper());
        if p >= first.action {
            for w in self.points.windows(2) {
                if w[0].action <= p && p <= w[1].action {
                    lo = w[0].energy;
                    hi = w[1].energy;
                    break;
                }
            }
        } else {
            hi = first.energy;
        }
        let g = |e: f64| action_of_energy(&self.profile, &self.component, e).map_or(f64::NAN, |a| a - p);
        let e = brent(g, lo, hi, 1e-15 * (1.0 + lo.abs()))?;
        let e = e.clamp(self.component.e_a.next_up(), self.component.e_b.next_down());
        self.at_energy(e)
    }

    fn energy_upper(&self) -> f64 {
        if self.component.e_b.is_finite() {
            self.component.e_b
        } else {
            self.points.last().map_or(self.component.e_a + 1.0, |p| p.energy)
        }
    }

    /// `E″` at the grid point closest to the lower edge.
    pub fn lower_edge_e2(&self) -> Option<f64> {
        self.points.first().map(|p| p.e2)
    }

    /// `E″` at the grid point closest to the upper edge.
    pub fn upper_edge_e2(&self) -> Option<f64> {
        self.points.last().map(|p| p.e2)
    }

    pub fn valid_points(&self) -> impl Iterator<Item = &ActionPoint> {
        self.points.iter().filter(|p| p.valid)
    }
}

/// Measure of `{p in the validity range : |E″(p)| < θ^c}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KolmogorovMargin {
    pub theta: f64,
    pub c_exp: f64,
    pub threshold: f64,
    pub bad_measure: f64,
    pub valid_measure: f64,
    /// Bad intervals in action.
    pub intervals: Vec<(f64, f64)>,
    /// `bad_measure ≤ θ`.
    pub pass: bool,
}

const REFINE_DEPTH: u32 = 8;
const PROBES: usize = 3;

/// Accumulate the set where `|E″| < θ^c` cell by cell over the valid grid.
/// Cells whose interior probes disagree with a single crossing are split;
/// crossings are located in energy by Brent and mapped to action.
pub fn kolmogorov_margin(profile: &ActionProfile, theta: f64, c_exp: f64) -> Result<KolmogorovMargin> {
    if !(theta > 0.0 && theta < 1.0) || !(c_exp > 0.0) {
        return Err(Error::invalid(format!("Kolmogorov margin needs θ in (0, 1) and c > 0, got θ = {theta}, c = {c_exp}")));
    }
    let tau = theta.powf(c_exp);
    let valid: Vec<ActionPoint> = profile.valid_points().copied().collect();
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    let phi = |e: f64| -> Result<f64> { Ok(profile.at_energy(e)?.e2.abs() - tau) };
    // sliver between a minimum edge and the first grid point
    if let Some(first) = valid.first() {
        if profile.component.edge_a == Edge::Min && first.e2.abs() < tau {
            intervals.push((profile.p_a, first.action));
        }
    }
    for w in valid.windows(2) {
        cell(profile, &phi, (w[0], w[0].e2.abs() - tau), (w[1], w[1].e2.abs() - tau), 0, &mut intervals)?;
    }
    // merge touching pieces
    intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for iv in intervals {
        match merged.last_mut() {
            Some(last) if iv.0 <= last.1 => last.1 = last.1.max(iv.1),
            _ => merged.push(iv),
        }
    }
    let bad: f64 = merged.iter().map(|(a, b)| b - a).sum();
    let valid_measure = match (valid.first(), valid.last()) {
        (Some(a), Some(b)) => b.action - if profile.component.edge_a == Edge::Min { profile.p_a } else { a.action },
        _ => 0.0,
    };
    Ok(KolmogorovMargin { theta, c_exp, threshold: tau, bad_measure: bad, valid_measure, intervals: merged, pass: bad <= theta })
}

fn cell<P: Fn(f64) -> Result<f64>>(
    profile: &ActionProfile,
    phi: &P,
    a: (ActionPoint, f64),
    b: (ActionPoint, f64),
    depth: u32,
    out: &mut Vec<(f64, f64)>,
) -> Result<()> {
    let (ea, eb) = (a.0.energy, b.0.energy);
    let probes: Vec<(f64, f64)> = (1..=PROBES)
        .map(|i| {
            let e = ea + (eb - ea) * i as f64 / (PROBES + 1) as f64;
            phi(e).map(|v| (e, v))
        })
        .collect::<Result<_>>()?;
    let mut signs = vec![a.1 < 0.0];
    signs.extend(probes.iter().map(|(_, v)| *v < 0.0));
    signs.push(b.1 < 0.0);
    let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
    if changes > 1 {
        if depth >= REFINE_DEPTH {
            return Err(Error::numeric(format!(
                "E″ oscillates around the threshold between E = {ea} and {eb}; grid too coarse"
            )));
        }
        let em = 0.5 * (ea + eb);
        let m = profile.at_energy(em)?;
        let vm = phi(em)?;
        cell(profile, phi, a, (m, vm), depth + 1, out)?;
        return cell(profile, phi, (m, vm), b, depth + 1, out);
    }
    match (a.1 < 0.0, b.1 < 0.0) {
        (true, true) => out.push((a.0.action, b.0.action)),
        (false, false) => {}
        (inside_a, _) => {
            let e = brent(|e| phi(e).unwrap_or(f64::NAN), ea, eb, 1e-15 * (1.0 + ea.abs()))?;
            let p = action_of_energy(&profile.profile, &profile.component, e)?;
            if inside_a {
                out.push((a.0.action, p));
            } else {
                out.push((p, b.0.action));
            }
        }
    }
    Ok(())
}
