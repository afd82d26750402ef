//! Critical curves in the plane of the first harmonic `ζ = f_k`.
//!
//! Writing `F(ξ) = ζe^{iξ} + ζ̄e^{-iξ} + G(ξ)` with `G` the harmonics
//! `|j| ≥ 2`, the values of `ζ` for which `F` has a degenerate critical
//! point (resp. violates the fourth-order condition at a critical point)
//! form closed curves parametrised by the location of that point.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::OneDProfile;
use crate::numeric::roots::golden_min;

fn check_no_first(g: &OneDProfile) -> Result<()> {
    if g.coeff(1).norm() != 0.0 {
        return Err(Error::invalid("critical curves take G without its first harmonic"));
    }
    Ok(())
}

/// `ζ` for which `F` has a degenerate critical point at `ξ₀`:
/// `ζ = ½ e^{-iξ₀} (i G′(ξ₀) + G″(ξ₀))`.
pub fn critical_curve_p2(g: &OneDProfile, xi0: f64) -> Result<Complex64> {
    check_no_first(g)?;
    Ok(p2_point(g, xi0))
}

fn p2_point(g: &OneDProfile, xi0: f64) -> Complex64 {
    let j = g.jet(xi0);
    0.5 * Complex64::from_polar(1.0, -xi0) * Complex64::new(j[2], j[1])
}

/// `ζ` values for which `F` has a critical point at `ξ` where
/// `3F″F⁗ = 5F‴²`; empty when `b² < c`.
pub fn critical_curve_p3(g: &OneDProfile, xi: f64) -> Result<Vec<Complex64>> {
    check_no_first(g)?;
    Ok(p3_points(g, xi))
}

fn p3_points(g: &OneDProfile, xi: f64) -> Vec<Complex64> {
    let j = g.jet(xi);
    let b = 0.5 * (j[4] - j[2]);
    let c = -j[2] * j[4] + 5.0 * (j[1] + j[3]).powi(2) / 3.0;
    let disc = b * b - c;
    if disc < 0.0 {
        return Vec::new();
    }
    let rot = Complex64::from_polar(1.0, -xi);
    let root = disc.sqrt();
    [-b + root, -b - root].iter().map(|&u| 0.5 * Complex64::new(u, j[1]) * rot).collect()
}

/// Distance from `zeta` to the union of the P2 curve and both P3 branches,
/// with the nearest curve point. The curves are sampled at `samples`
/// parameter values and the best sample refined by golden section.
pub fn nearest_on_curves(g: &OneDProfile, zeta: Complex64, samples: usize) -> (f64, Complex64) {
    let g = g.without_first();
    let branch = |xi: f64, which: usize| -> Option<Complex64> {
        match which {
            0 => Some(p2_point(&g, xi)),
            b => p3_points(&g, xi).get(b - 1).copied(),
        }
    };
    let h = TAU / samples as f64;
    let mut best = (f64::INFINITY, Complex64::new(0.0, 0.0));
    for which in 0..3 {
        let mut best_xi = None;
        let mut best_d = f64::INFINITY;
        for i in 0..samples {
            let xi = i as f64 * h;
            if let Some(p) = branch(xi, which) {
                let d = (p - zeta).norm();
                if d < best_d {
                    best_d = d;
                    best_xi = Some(xi);
                }
            }
        }
        if let Some(x0) = best_xi {
            let dist = |xi: f64| branch(xi, which).map_or(f64::INFINITY, |p| (p - zeta).norm());
            let (xr, dr) = golden_min(dist, x0 - h, x0 + h, 1e-13);
            let (d, p) = if dr < best_d { (dr, branch(xr, which).expect("finite distance")) } else { (best_d, branch(x0, which).expect("sampled")) };
            if d < best.0 {
                best = (d, p);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::class::morse::{morse_beta, p3_margin_at};
    use std::f64::consts::PI;

    #[test]
    fn p2_curve_of_zero_is_origin() {
        let z = critical_curve_p2(&OneDProfile::zero(), 1.3).unwrap();
        assert_eq!(z, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn p2_curve_reproduces_degenerate_cosine() {
        let g = OneDProfile::from_trig(&[0.0, 0.25], &[]);
        let z = critical_curve_p2(&g, PI).unwrap();
        assert!((z - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        let f = g.with_first(z);
        assert!(morse_beta(&f).beta < 1e-12);
    }

    #[test]
    fn p2_curve_is_closed() {
        let g = OneDProfile::from_trig(&[0.0, 0.3, -0.1], &[0.0, 0.2]);
        let a = critical_curve_p2(&g, 0.0).unwrap();
        let b = critical_curve_p2(&g, TAU).unwrap();
        assert!((a - b).norm() < 1e-14);
    }

    #[test]
    fn first_harmonic_rejected() {
        assert!(critical_curve_p2(&OneDProfile::from_trig(&[1.0], &[]), 0.0).is_err());
    }

    #[test]
    fn p3_curve_of_zero_is_origin() {
        let z = critical_curve_p3(&OneDProfile::zero(), 0.4).unwrap();
        assert_eq!(z.len(), 2);
        assert!(z.iter().all(|w| w.norm() == 0.0));
    }

    #[test]
    fn p3_curve_for_second_harmonic_at_pi() {
        // G = ¼cos 2ξ at π: G′ = G‴ = 0, G″ = −1, G⁗ = 4, so b = 5/2, c = 4,
        // b² − c = 9/4 and the branches are ζ = ½ and ζ = 2.
        let g = OneDProfile::from_trig(&[0.0, 0.25], &[]);
        let mut z = critical_curve_p3(&g, PI).unwrap();
        z.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((z[0] - Complex64::new(0.5, 0.0)).norm() < 1e-14);
        assert!((z[1] - Complex64::new(2.0, 0.0)).norm() < 1e-14);
        for w in z {
            let f = g.with_first(w);
            assert!(f.d1(PI).abs() < 1e-14);
            assert!(p3_margin_at(&f, PI) < 1e-13);
        }
    }

    #[test]
    fn p3_branches_coincide_on_zero_discriminant() {
        // pick ξ where b² = c by scanning a one-parameter family
        let g = OneDProfile::from_trig(&[0.0, 0.25], &[0.0, 0.0, 0.1]);
        let disc = |xi: f64| {
            let j = g.jet(xi);
            let b = 0.5 * (j[4] - j[2]);
            b * b - (-j[2] * j[4] + 5.0 * (j[1] + j[3]).powi(2) / 3.0)
        };
        let n = 4096;
        let i = (0..n).find(|&i| disc(TAU * i as f64 / n as f64).signum() != disc(TAU * (i + 1) as f64 / n as f64).signum()).unwrap();
        let x = crate::numeric::roots::brent(disc, TAU * i as f64 / n as f64, TAU * (i + 1) as f64 / n as f64, 1e-15).unwrap();
        let z = critical_curve_p3(&g, x).unwrap();
        if z.len() == 2 {
            assert!((z[0] - z[1]).norm() < 1e-6);
        }
    }

    #[test]
    fn nearest_point_lies_on_curve() {
        let g = OneDProfile::from_trig(&[0.0, 0.25], &[]);
        let (d, p) = nearest_on_curves(&g, Complex64::new(0.5, 0.0), 512);
        assert!(d < 1e-9, "{d} {p}");
    }
}
