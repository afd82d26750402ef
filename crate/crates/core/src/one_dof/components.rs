//! Connected components of the regular energy levels of `η²/2 + F(ξ)`.
//!
//! Wells are tracked through a merge tree over the critical values: each
//! minimum opens a libration band, each non-global maximum closes the two
//! bands it separates and opens the band of the merged well, and the
//! global maximum closes the last well and opens the two rotation bands.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::class::{critical_points, CriticalKind, MorseTolerances};
use crate::error::{Error, Result};
use crate::fourier::OneDProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    Libration,
    RotationUpper,
    RotationLower,
}

/// Nature of an end of the energy range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Edge {
    /// Elliptic end: the orbit shrinks to a minimum (also used for the
    /// bottom of the free rotor `F ≡ 0`).
    Min,
    /// Hyperbolic end: the orbit reaches a separatrix.
    Max,
    Infinity,
}

/// A critical point in lifted coordinates (`ξ` not reduced mod 2π).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiftedPoint {
    pub xi: f64,
    pub value: f64,
    pub is_min: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseComponent {
    pub id: usize,
    pub kind: ComponentKind,
    pub e_a: f64,
    pub e_b: f64,
    pub edge_a: Edge,
    pub edge_b: Edge,
    /// Librations: the alternating chain max, min, …, min, max bounding and
    /// filling the well, increasing in `ξ`. Rotations: one period
    /// `[ξ_M, ξ_M + 2π]` starting at the global maximum, with every critical
    /// point in between.
    pub chain: Vec<LiftedPoint>,
}

impl PhaseComponent {
    pub fn contains_energy(&self, e: f64) -> bool {
        e > self.e_a && e < self.e_b
    }

    pub fn is_rotation(&self) -> bool {
        self.kind != ComponentKind::Libration
    }

    /// Minima enclosed by a libration well.
    pub fn minima(&self) -> impl Iterator<Item = &LiftedPoint> {
        self.chain.iter().filter(|c| c.is_min)
    }
}

struct Well {
    /// chain from the left bounding max to the right bounding max
    chain: Vec<LiftedPoint>,
    e_a: f64,
    edge_a: Edge,
}

/// Phase components of `η²/2 + F(ξ)` for a Morse profile `F`.
pub fn component_graph(f: &OneDProfile) -> Result<Vec<PhaseComponent>> {
    if f.is_zero() {
        return Ok(rotations(0, 0.0, Edge::Min, vec![LiftedPoint { xi: 0.0, value: 0.0, is_min: false }]));
    }
    let cps = critical_points(f, &MorseTolerances::default())?;
    if let Some(d) = cps.iter().find(|c| c.kind == CriticalKind::Degenerate) {
        return Err(Error::invalid(format!("degenerate critical point at ξ = {:.12}; component graph needs a Morse profile", d.xi)));
    }
    let m = cps.len();
    if m < 2 || m % 2 == 1 {
        return Err(Error::numeric(format!("{m} critical points on the circle; expected an even number ≥ 2")));
    }
    let pts: Vec<LiftedPoint> =
        cps.iter().map(|c| LiftedPoint { xi: c.xi, value: c.value, is_min: c.kind == CriticalKind::Min }).collect();
    for i in 0..m {
        if pts[i].is_min == pts[(i + 1) % m].is_min {
            return Err(Error::numeric("critical points do not alternate between minima and maxima"));
        }
    }
    let at = |i: isize| -> LiftedPoint {
        let q = i.div_euclid(m as isize);
        let r = i.rem_euclid(m as isize) as usize;
        LiftedPoint { xi: pts[r].xi + TAU * q as f64, ..pts[r] }
    };
    let scale = f.amplitude();
    let tie = 1e-12 * scale;

    let mut out = Vec::new();
    let mut wells: Vec<Option<Well>> = Vec::new();
    // well on each side of every maximum (indexed by position in `pts`)
    let mut left_of = vec![usize::MAX; m];
    let mut right_of = vec![usize::MAX; m];
    for i in 0..m {
        if pts[i].is_min {
            let id = wells.len();
            wells.push(Some(Well {
                chain: vec![at(i as isize - 1), at(i as isize), at(i as isize + 1)],
                e_a: pts[i].value,
                edge_a: Edge::Min,
            }));
            right_of[(i + m - 1) % m] = id;
            left_of[(i + 1) % m] = id;
        }
    }
    let mut maxima: Vec<usize> = (0..m).filter(|&i| !pts[i].is_min).collect();
    maxima.sort_by(|&a, &b| pts[a].value.total_cmp(&pts[b].value).then(a.cmp(&b)));

    let close = |w: Well, e_b: f64, out: &mut Vec<PhaseComponent>| {
        if e_b - w.e_a > tie {
            out.push(PhaseComponent {
                id: out.len(),
                kind: ComponentKind::Libration,
                e_a: w.e_a,
                e_b,
                edge_a: w.edge_a,
                edge_b: Edge::Max,
                chain: w.chain,
            });
        }
    };
    let last = maxima.len() - 1;
    for (rank, &i) in maxima.iter().enumerate() {
        let value = pts[i].value;
        let (lw, rw) = (left_of[i], right_of[i]);
        if rank == last {
            if lw != rw {
                return Err(Error::numeric("merge tree did not collapse to a single well at the global maximum"));
            }
            let w = wells[lw].take().expect("live well");
            close(w, value, &mut out);
            break;
        }
        let w1 = wells[lw].take().expect("live well");
        let w2 = wells[rw].take().expect("live well");
        let shift = w1.chain.last().expect("chain").xi - w2.chain[0].xi;
        let shift = TAU * (shift / TAU).round();
        let mut chain = w1.chain.clone();
        chain.extend(w2.chain.iter().skip(1).map(|p| LiftedPoint { xi: p.xi + shift, ..*p }));
        let lmax = index_of(&pts, chain[0].xi);
        let rmax = index_of(&pts, chain.last().expect("chain").xi);
        close(w1, value, &mut out);
        close(w2, value, &mut out);
        let id = wells.len();
        wells.push(Some(Well { chain, e_a: value, edge_a: Edge::Max }));
        right_of[lmax] = id;
        left_of[rmax] = id;
    }
    let top = maxima[last];
    let window: Vec<LiftedPoint> = (0..=m as isize).map(|j| at(top as isize + j)).collect();
    let base = out.len();
    out.extend(rotations(base, pts[top].value, Edge::Max, window));
    Ok(out)
}

fn index_of(pts: &[LiftedPoint], xi: f64) -> usize {
    let r = xi.rem_euclid(TAU);
    (0..pts.len())
        .min_by(|&a, &b| {
            let da = (pts[a].xi - r).abs().min(TAU - (pts[a].xi - r).abs());
            let db = (pts[b].xi - r).abs().min(TAU - (pts[b].xi - r).abs());
            da.total_cmp(&db)
        })
        .expect("non-empty")
}

fn rotations(base: usize, e_a: f64, edge_a: Edge, window: Vec<LiftedPoint>) -> Vec<PhaseComponent> {
    let mut chain = window;
    if chain.len() == 1 {
        chain.push(LiftedPoint { xi: chain[0].xi + TAU, ..chain[0] });
    }
    [ComponentKind::RotationUpper, ComponentKind::RotationLower]
        .into_iter()
        .enumerate()
        .map(|(j, kind)| PhaseComponent {
            id: base + j,
            kind,
            e_a,
            e_b: f64::INFINITY,
            edge_a,
            edge_b: Edge::Infinity,
            chain: chain.clone(),
        })
        .collect()
}
