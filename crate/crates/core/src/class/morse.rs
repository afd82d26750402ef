//! Morse quality `β = min (|F′| + |F″|)`, critical points of a profile and
//! the fourth-order margin at its minima.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::OneDProfile;
use crate::numeric::roots::{brent, golden_min};

/// Relative tolerances used to certify strict inequalities on a profile.
/// Each is multiplied by the matching derivative scale of the profile so the
/// checks are invariant under rescaling `F → cF`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MorseTolerances {
    pub beta: f64,
    pub margin: f64,
    /// Root polishing tolerance in `ξ`.
    pub root: f64,
}

impl Default for MorseTolerances {
    fn default() -> Self {
        MorseTolerances { beta: 1e-10, margin: 1e-10, root: 1e-12 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CriticalKind {
    Min,
    Max,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub xi: f64,
    pub kind: CriticalKind,
    /// `F″(ξ)`.
    pub f2: f64,
    /// `F(ξ)`.
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MorseBeta {
    pub beta: f64,
    pub argmin: f64,
    /// Bound on `|β_reported − β|` from refinement and truncation.
    pub error_bound: f64,
    /// Certified lower bound from the grid alone (Lipschitz bound).
    pub grid_lower_bound: f64,
    pub grid_points: usize,
    /// Scale `M₁ + M₂` the tolerance is measured against.
    pub scale: f64,
    /// Set when the profile is identically zero (β = 0 by convention).
    pub empty: bool,
}

/// Grid size for a profile: step `h` with `M₃h²/8 ≤ 10⁻³ M₁` and at least
/// 16 points per period of the highest harmonic.
pub fn grid_size(f: &OneDProfile) -> usize {
    let m1 = f.moment(1);
    let m3 = f.moment(3);
    let by_bound = if m1 > 0.0 && m3 > 0.0 { (TAU / (8e-3 * m1 / m3).sqrt()).ceil() as usize } else { 0 };
    by_bound.max(16 * f.harmonics()).clamp(512, 1 << 16)
}

fn gap(f: &OneDProfile, xi: f64) -> f64 {
    let j = f.jet(xi);
    j[1].abs() + j[2].abs()
}

/// Sign-change brackets of `g` on a uniform cyclic grid of `n` cells, plus
/// grid points where `g` vanishes exactly.
fn sign_brackets<G: Fn(f64) -> f64>(g: &G, n: usize) -> (Vec<(f64, f64)>, Vec<f64>) {
    let h = TAU / n as f64;
    let vals: Vec<f64> = (0..n).map(|i| g(i as f64 * h)).collect();
    let mut brackets = Vec::new();
    let mut exact = Vec::new();
    for i in 0..n {
        let a = vals[i];
        let b = vals[(i + 1) % n];
        if a == 0.0 {
            exact.push(i as f64 * h);
        } else if b != 0.0 && a.signum() != b.signum() {
            brackets.push((i as f64 * h, (i + 1) as f64 * h));
        }
    }
    (brackets, exact)
}

fn wrap(xi: f64) -> f64 {
    let w = xi.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

fn cyclic_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Global minimum of `|F′| + |F″|` over the circle.
pub fn morse_beta(f: &OneDProfile) -> MorseBeta {
    let scale = f.moment(1) + f.moment(2);
    if f.is_zero() {
        return MorseBeta {
            beta: 0.0,
            argmin: 0.0,
            error_bound: f.truncation_bound(1) + f.truncation_bound(2),
            grid_lower_bound: 0.0,
            grid_points: 0,
            scale,
            empty: true,
        };
    }
    let n = grid_size(f);
    let h = TAU / n as f64;
    let vals: Vec<f64> = (0..n).map(|i| gap(f, i as f64 * h)).collect();
    let lipschitz = f.moment(2) + f.moment(3);
    let grid_min = vals.iter().copied().fold(f64::INFINITY, f64::min);

    let mut best = (0.0, f64::INFINITY);
    let mut consider = |x: f64, v: f64| {
        if v < best.1 {
            best = (wrap(x), v);
        }
    };
    // refine every local grid minimum
    let mut minima: Vec<usize> = (0..n)
        .filter(|&i| vals[i] <= vals[(i + n - 1) % n] && vals[i] <= vals[(i + 1) % n])
        .collect();
    minima.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    minima.truncate(256);
    for i in minima {
        let x = i as f64 * h;
        consider(x, vals[i]);
        let (xm, vm) = golden_min(|t| gap(f, t), x - h, x + h, 1e-14);
        consider(xm, vm);
    }
    // kinks of |F′| + |F″| sit on roots of F′ and F″
    for d in [1usize, 2] {
        let g = |t: f64| f.jet(t)[d];
        let (brackets, exact) = sign_brackets(&g, n);
        for x in exact {
            consider(x, gap(f, x));
        }
        for (a, b) in brackets {
            if let Ok(r) = brent(g, a, b, 1e-15) {
                consider(r, gap(f, r));
            }
        }
    }
    let trunc = f.truncation_bound(1) + f.truncation_bound(2);
    MorseBeta {
        beta: best.1,
        argmin: best.0,
        error_bound: lipschitz * 1e-14 + trunc,
        grid_lower_bound: (grid_min - 0.5 * lipschitz * h - trunc).max(0.0),
        grid_points: n,
        scale,
        empty: false,
    }
}

fn critical_brackets(f: &OneDProfile, n: usize) -> (Vec<(f64, f64)>, Vec<f64>) {
    sign_brackets(&|t: f64| f.jet(t)[1], n)
}

/// All critical points of `F` on `[0, 2π)`, polished and classified.
///
/// Roots of `F′` are located from sign changes at two grid resolutions,
/// which must agree; touching double roots are caught as near-zero local
/// minima of `|F′| + |F″|` and reported as degenerate.
pub fn critical_points(f: &OneDProfile, tol: &MorseTolerances) -> Result<Vec<CriticalPoint>> {
    if f.is_zero() {
        return Err(Error::numeric("profile vanishes identically; every point is critical"));
    }
    let n = grid_size(f);
    let (coarse, coarse_exact) = critical_brackets(f, n);
    let (fine, fine_exact) = critical_brackets(f, 2 * n);
    let count_coarse = coarse.len() + coarse_exact.len();
    let count_fine = fine.len() + fine_exact.len();
    if count_coarse != count_fine {
        return Err(Error::numeric(format!(
            "critical point count unstable under grid refinement ({count_coarse} vs {count_fine}); profile under-resolved"
        )));
    }
    let m2 = f.moment(2);
    let deg_tol = tol.beta * (f.moment(1) + m2);
    let h = TAU / (2 * n) as f64;
    let d1 = |t: f64| f.jet(t)[1];

    let mut roots: Vec<f64> = fine_exact;
    for (a, b) in fine {
        roots.push(brent(d1, a, b, tol.root)?);
    }
    // touching roots of F′ (no sign change)
    let beta = morse_beta(f);
    if beta.beta <= deg_tol && !roots.iter().any(|&r| cyclic_distance(r, beta.argmin) < 2.0 * h) {
        roots.push(beta.argmin);
    }

    let mut out: Vec<CriticalPoint> = Vec::new();
    for r in roots {
        let mut xi = wrap(r);
        let mut jet = f.jet(xi);
        if jet[2].abs() <= 1e-6 * m2 {
            // nearly flat: sign-based polishing stalls, minimise |F′| + |F″|
            let (xm, vm) = golden_min(|t| gap(f, t), xi - h, xi + h, 1e-15);
            if vm <= jet[1].abs() + jet[2].abs() {
                xi = wrap(xm);
                jet = f.jet(xi);
            }
        }
        let kind = if jet[2].abs() <= deg_tol {
            CriticalKind::Degenerate
        } else if jet[2] > 0.0 {
            CriticalKind::Min
        } else {
            CriticalKind::Max
        };
        if out.iter().any(|c| cyclic_distance(c.xi, xi) < 1e-9) {
            continue;
        }
        out.push(CriticalPoint { xi, kind, f2: jet[2], value: jet[0] });
    }
    out.sort_by(|a, b| a.xi.total_cmp(&b.xi));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct P3Margin {
    pub xi: f64,
    /// `|3F″F⁗ − 5(F‴)²|` at the minimum.
    pub margin: f64,
    /// `3M₂M₄ + 5M₃²`, the scale the tolerance is measured against.
    pub scale: f64,
}

/// `|3F″F⁗ − 5F‴²|` at `ξ`.
pub fn p3_margin_at(f: &OneDProfile, xi: f64) -> f64 {
    let j = f.jet(xi);
    (3.0 * j[2] * j[4] - 5.0 * j[3] * j[3]).abs()
}

/// Fourth-order margins at every minimum. Degenerate critical points are
/// rejected: the margin is only meaningful once the Morse check passed.
pub fn check_p3(f: &OneDProfile, points: &[CriticalPoint]) -> Result<Vec<P3Margin>> {
    if let Some(d) = points.iter().find(|c| c.kind == CriticalKind::Degenerate) {
        return Err(Error::invalid(format!("degenerate critical point at ξ = {}; Morse check fails first", d.xi)));
    }
    let scale = 3.0 * f.moment(2) * f.moment(4) + 5.0 * f.moment(3).powi(2);
    Ok(points
        .iter()
        .filter(|c| c.kind == CriticalKind::Min)
        .map(|c| P3Margin { xi: c.xi, margin: p3_margin_at(f, c.xi), scale })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::roots::brent;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn cosine() -> OneDProfile {
        OneDProfile::from_trig(&[1.0], &[])
    }

    /// Dense-grid oracle for β: brute force with no refinement.
    fn dense_beta(f: &OneDProfile, n: usize) -> f64 {
        (0..n).map(|i| gap(f, TAU * i as f64 / n as f64)).fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn beta_of_cosine_is_one() {
        let b = morse_beta(&cosine());
        assert!((b.beta - 1.0).abs() < 1e-12, "{b:?}");
        assert!((dense_beta(&cosine(), 1 << 16) - 1.0).abs() < 1e-9);
        assert!(b.grid_lower_bound <= b.beta);
    }

    #[test]
    fn beta_scales_with_amplitude() {
        let b = morse_beta(&OneDProfile::from_trig(&[2.0], &[]));
        assert!((b.beta - 2.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_profile_has_zero_beta() {
        let f = OneDProfile::from_trig(&[1.0, 0.25], &[]);
        let b = morse_beta(&f);
        assert!(b.beta < 1e-12, "{b:?}");
        assert!(cyclic_distance(b.argmin, PI) < 1e-5);
    }

    #[test]
    fn empty_profile_flagged() {
        let b = morse_beta(&OneDProfile::zero());
        assert!(b.empty);
        assert_eq!(b.beta, 0.0);
    }

    #[test]
    fn cosine_critical_points() {
        let cps = critical_points(&cosine(), &MorseTolerances::default()).unwrap();
        assert_eq!(cps.len(), 2);
        assert!(cps[0].xi.abs() < 1e-12 && cps[0].kind == CriticalKind::Max);
        assert!((cps[1].xi - PI).abs() < 1e-12 && cps[1].kind == CriticalKind::Min);
    }

    fn dense_root_count(f: &OneDProfile) -> usize {
        let n = 1 << 18;
        (0..n)
            .filter(|&i| {
                let a = f.d1(TAU * i as f64 / n as f64);
                let b = f.d1(TAU * (i + 1) as f64 / n as f64);
                a.signum() != b.signum()
            })
            .count()
    }

    #[test]
    fn critical_count_matches_dense_oracle() {
        // F′ = −sin ξ + 2a cos 2ξ has four roots iff a ≥ 1/2
        for (a, expected) in [(0.3, 2usize), (0.6, 4)] {
            let f = OneDProfile::from_trig(&[1.0], &[0.0, a]);
            assert_eq!(dense_root_count(&f), expected);
            let cps = critical_points(&f, &MorseTolerances::default()).unwrap();
            assert_eq!(cps.len(), expected);
            assert_eq!(cps.iter().filter(|c| c.kind == CriticalKind::Min).count(), expected / 2);
            assert_eq!(cps.iter().filter(|c| c.kind == CriticalKind::Max).count(), expected / 2);
            for c in &cps {
                assert!(f.d1(c.xi).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn degenerate_point_flagged_at_pi() {
        let f = OneDProfile::from_trig(&[1.0, 0.25], &[]);
        let cps = critical_points(&f, &MorseTolerances::default()).unwrap();
        let d: Vec<_> = cps.iter().filter(|c| c.kind == CriticalKind::Degenerate).collect();
        assert_eq!(d.len(), 1);
        assert!(cyclic_distance(d[0].xi, PI) < 1e-5);
        let j = f.jet(d[0].xi);
        assert!(j[1].abs() < 1e-10 && j[2].abs() < 1e-10);
        assert!(check_p3(&f, &cps).is_err());
    }

    #[test]
    fn p3_margins_of_cosines() {
        let cps = critical_points(&cosine(), &MorseTolerances::default()).unwrap();
        let m = check_p3(&cosine(), &cps).unwrap();
        assert_eq!(m.len(), 1);
        assert!((m[0].margin - 3.0).abs() < 1e-12);
        let two = OneDProfile::from_trig(&[2.0], &[]);
        let m2 = check_p3(&two, &critical_points(&two, &MorseTolerances::default()).unwrap()).unwrap();
        assert!((m2[0].margin - 12.0).abs() < 1e-11);
    }

    #[test]
    fn p3_violation_found_by_parameter_search() {
        // F = cos ξ + a cos 2ξ has its minimum at π for small a; root-find the
        // margin 3F″F⁗ − 5F‴² in a and check the analytic value a = 1/16.
        let signed = |a: f64| {
            let f = OneDProfile::from_trig(&[1.0, a], &[]);
            let j = f.jet(PI);
            3.0 * j[2] * j[4] - 5.0 * j[3] * j[3]
        };
        let a = brent(signed, 0.0, 0.2, 1e-15).unwrap();
        assert!((a - 1.0 / 16.0).abs() < 1e-13);
        let f = OneDProfile::from_trig(&[1.0, a], &[]);
        let cps = critical_points(&f, &MorseTolerances::default()).unwrap();
        let m = check_p3(&f, &cps).unwrap();
        assert_eq!(m.len(), 1);
        assert!(m[0].margin < 1e-12);
    }

    fn arb_profile() -> impl Strategy<Value = OneDProfile> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..4).prop_map(|c| {
            let cos: Vec<f64> = c.iter().enumerate().map(|(i, p)| p.0 * 0.4f64.powi(i as i32)).collect();
            let sin: Vec<f64> = c.iter().enumerate().map(|(i, p)| p.1 * 0.4f64.powi(i as i32)).collect();
            OneDProfile::from_trig(&cos, &sin)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn beta_is_homogeneous(f in arb_profile(), c in 0.1f64..10.0) {
            let b = morse_beta(&f).beta;
            let bc = morse_beta(&f.scaled(c)).beta;
            prop_assert!((bc - c * b).abs() <= 1e-9 * (1.0 + c * b));
        }

        #[test]
        fn beta_matches_dense_oracle(f in arb_profile()) {
            let b = morse_beta(&f);
            let dense = dense_beta(&f, 1 << 15);
            // refined minimum can only undercut the dense grid by its spacing
            prop_assert!(b.beta <= dense + 1e-12);
            prop_assert!(dense - b.beta <= (f.moment(2) + f.moment(3)) * TAU / (1 << 15) as f64);
        }

        #[test]
        fn margin_is_quadratic(f in arb_profile(), c in 0.1f64..10.0) {
            let tol = MorseTolerances::default();
            if let (Ok(a), Ok(b)) = (critical_points(&f, &tol), critical_points(&f.scaled(c), &tol)) {
                if let (Ok(ma), Ok(mb)) = (check_p3(&f, &a), check_p3(&f.scaled(c), &b)) {
                    prop_assert_eq!(ma.len(), mb.len());
                    for (x, y) in ma.iter().zip(&mb) {
                        prop_assert!((y.margin - c * c * x.margin).abs() <= 1e-9 * (c * c * x.margin).max(1e-3 * x.scale * c * c));
                    }
                }
            }
        }
    }
}
