//! Finite-time torus detection: frequencies from weighted Birkhoff averages
//! of the angle increments over two consecutive windows; an orbit whose
//! frequency vector does not move between windows is counted as lying on a
//! torus.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::integrator::{ForceField, Propagator, Scheme, Trajectory};
use crate::error::{Error, Result};
use crate::fourier::{star_up_to, WaveVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSettings {
    pub dt: f64,
    pub scheme: Scheme,
    /// Minimum window length.
    pub window: f64,
    /// Windows are stretched to at least `window_periods · 2π/√ε` so the
    /// slow resonant motion is resolved.
    pub window_periods: f64,
    /// Orbits not resolved as tori are re-examined with the window doubled,
    /// at most this many times.
    pub max_doublings: u32,
    /// `tol_freq = tol_c / T_w²`.
    pub tol_c: f64,
    /// Drift above `escalation · tol_freq` is non-torus.
    pub escalation: f64,
    /// Largest acceptable `max |ΔH| / ε`.
    pub energy_tol: f64,
    /// Order of the nearest-resonance search.
    pub resonance_order: u64,
}

impl Default for ClassifierSettings {
    fn default() -> Self {
        ClassifierSettings {
            dt: 0.2,
            scheme: Scheme::Yoshida4,
            window: 500.0,
            window_periods: 5.0,
            max_doublings: 6,
            tol_c: 1.0,
            escalation: 10.0,
            energy_tol: 1e-4,
            resonance_order: 6,
        }
    }
}

impl ClassifierSettings {
    pub fn window_for(&self, eps: f64) -> f64 {
        if eps > 0.0 {
            self.window.max(self.window_periods * TAU / eps.sqrt())
        } else {
            self.window
        }
    }

    pub fn steps_per_window(&self, eps: f64) -> usize {
        (self.window_for(eps) / self.dt).ceil() as usize
    }

    pub fn tol_freq(&self, eps: f64) -> f64 {
        self.tol_for_steps(self.steps_per_window(eps))
    }

    fn tol_for_steps(&self, steps: usize) -> f64 {
        let t = steps as f64 * self.dt;
        self.tol_c / (t * t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.window > 0.0 && self.window_periods >= 0.0) {
            return Err(Error::invalid("classifier needs dt > 0, window > 0 and window_periods ≥ 0"));
        }
        if !(self.tol_c > 0.0 && self.escalation >= 1.0 && self.energy_tol > 0.0) {
            return Err(Error::invalid("classifier needs tol_c > 0, escalation ≥ 1, energy_tol > 0"));
        }
        if self.window < 4.0 * self.dt {
            return Err(Error::invalid("window shorter than four time steps"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Torus,
    NonTorus,
    Undecided,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::Torus => "torus",
            Verdict::NonTorus => "non_torus",
            Verdict::Undecided => "undecided",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitClassification {
    pub y0: Vec<f64>,
    pub x0: Vec<f64>,
    pub verdict: Verdict,
    pub omega_first: Vec<f64>,
    pub omega_second: Vec<f64>,
    /// `max_j |ω_j(first) − ω_j(second)|`.
    pub drift: f64,
    pub tol_freq: f64,
    pub energy_drift: f64,
    /// Star mode minimising `|ω·k|` up to the configured order.
    pub nearest_resonance: Option<WaveVector>,
    pub resonance_defect: f64,
    /// `ω·k` vanishes to within `tol_freq`: rational winding, the
    /// signature of a secondary torus when the verdict is torus.
    pub locked: bool,
    /// Mean winding number per unit time, `x_end / (2π t)`.
    pub winding: Vec<f64>,
    pub note: Option<String>,
}

/// `C∞` bump vanishing to all orders at 0 and 1.
fn bump(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        (-1.0 / (t * (1.0 - t))).exp()
    }
}

/// Weighted Birkhoff average of the angular velocity of coordinate `d` over
/// increments `[start, start + len)`.
pub fn weighted_frequency(increments: &[f64], n: usize, d: usize, start: usize, len: usize, dt: f64) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..len {
        let w = bump((i as f64 + 0.5) / len as f64);
        num += w * increments[(start + i) * n + d];
        den += w;
    }
    num / (den * dt)
}

/// Classify a trajectory of exactly two windows.
pub fn classify_orbit(tr: &Trajectory, tol_freq: f64, settings: &ClassifierSettings) -> Result<OrbitClassification> {
    let view = View { y0: &tr.y0, x0: &tr.x0, x_end: &tr.x_end, dt: tr.dt, steps: tr.steps, energy_drift: tr.energy_drift, increments: &tr.increments };
    classify_view(&view, tol_freq, settings)
}

struct View<'a> {
    y0: &'a [f64],
    x0: &'a [f64],
    x_end: &'a [f64],
    dt: f64,
    steps: usize,
    energy_drift: f64,
    increments: &'a [f64],
}

fn classify_view(tr: &View, tol_freq: f64, settings: &ClassifierSettings) -> Result<OrbitClassification> {
    let n = tr.y0.len();
    if n == 0 || tr.increments.len() != tr.steps * n {
        return Err(Error::invalid("trajectory carries no angle increments"));
    }
    let len = tr.steps / 2;
    if len < 4 {
        return Err(Error::invalid("trajectory too short for two analysis windows"));
    }
    let dt = tr.dt;
    let wa: Vec<f64> = (0..n).map(|d| weighted_frequency(tr.increments, n, d, 0, len, dt)).collect();
    let wb: Vec<f64> = (0..n).map(|d| weighted_frequency(tr.increments, n, d, len, len, dt)).collect();
    let drift = wa.iter().zip(&wb).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let t_total = tr.steps as f64 * dt;
    let winding: Vec<f64> = tr.x_end.iter().zip(tr.x0).map(|(e, s)| (e - s) / (TAU * t_total)).collect();

    let (nearest, defect) = star_up_to(n, settings.resonance_order)
        .into_iter()
        .map(|k| {
            let v = k.components().iter().zip(&wb).map(|(&a, w)| a as f64 * w).sum::<f64>().abs();
            (k, v)
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map_or((None, f64::INFINITY), |(k, v)| (Some(k), v));

    let mut note = None;
    let window = len as f64 * dt;
    let slowest = wa.iter().chain(&wb).map(|w| w.abs()).fold(f64::INFINITY, f64::min);
    let verdict = if tr.energy_drift > settings.energy_tol {
        note = Some(format!("energy drift {:.3e} above {:.1e}", tr.energy_drift, settings.energy_tol));
        Verdict::Undecided
    } else if slowest > 0.0 && TAU / slowest > 0.5 * window && drift > tol_freq {
        note = Some("window shorter than twice the slowest period".into());
        Verdict::Undecided
    } else if drift < tol_freq {
        Verdict::Torus
    } else if drift > settings.escalation * tol_freq {
        Verdict::NonTorus
    } else {
        Verdict::Undecided
    };
    Ok(OrbitClassification {
        y0: tr.y0.to_vec(),
        x0: tr.x0.to_vec(),
        verdict,
        omega_first: wa,
        omega_second: wb,
        drift,
        tol_freq,
        energy_drift: tr.energy_drift,
        nearest_resonance: nearest,
        resonance_defect: defect,
        locked: defect < tol_freq,
        winding,
        note,
    })
}

/// Integrate two windows from `(y0, x0)` and classify; orbits not resolved
/// as tori are continued and re-examined with doubled windows.
pub fn run_orbit(field: &ForceField, eps: f64, y0: &[f64], x0: &[f64], settings: &ClassifierSettings) -> Result<OrbitClassification> {
    settings.validate()?;
    let mut prop = Propagator::new(field, eps, y0, x0, settings.dt, settings.scheme)?;
    let mut window = settings.steps_per_window(eps);
    let mut doublings = 0;
    loop {
        prop.extend_to(2 * window);
        let st = prop.state();
        let view = View {
            y0: prop.y0(),
            x0: prop.x0(),
            x_end: &st.x,
            dt: prop.dt(),
            steps: prop.steps(),
            energy_drift: prop.energy_drift(),
            increments: prop.increments(),
        };
        let c = classify_view(&view, settings.tol_for_steps(window), settings)?;
        if c.verdict == Verdict::Torus || doublings >= settings.max_doublings || c.energy_drift > settings.energy_tol {
            return Ok(c);
        }
        window *= 2;
        doublings += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::FourierPotential;
    use crate::survey::integrator::fli;
    use num_complex::Complex64;

    fn field(modes: &[(Vec<i64>, f64)]) -> ForceField {
        let n = modes[0].0.len();
        let f = modes.iter().fold(FourierPotential::new(n, 1.0).unwrap(), |f, (k, c)| f.with_mode(k.clone(), Complex64::new(*c, 0.0)).unwrap());
        ForceField::new(&f).unwrap()
    }

    #[test]
    fn free_flight_is_a_torus() {
        let fl = field(&[(vec![1, 0], 0.5), (vec![0, 1], 0.5)]);
        let st = ClassifierSettings::default();
        let golden = 0.5 * (5f64.sqrt() - 1.0);
        let c = run_orbit(&fl, 0.0, &[1.0, golden], &[0.0, 0.0], &st).unwrap();
        assert_eq!(c.verdict, Verdict::Torus);
        assert!(c.drift < 1e-12, "{}", c.drift);
        assert!((c.omega_second[1] - golden).abs() < 1e-12);
    }

    #[test]
    fn pendulum_libration_is_a_locked_torus() {
        let fl = field(&[(vec![1], 0.5)]);
        let c = run_orbit(&fl, 0.01, &[0.0], &[3.6], &ClassifierSettings::default()).unwrap();
        assert_eq!(c.verdict, Verdict::Torus, "{c:?}");
        assert!(c.locked);
        assert!(c.winding[0].abs() < 1e-3);
        // a rotation above the separatrix is an unlocked torus
        let r = run_orbit(&fl, 0.01, &[0.5], &[0.0], &ClassifierSettings::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Torus);
        assert!(!r.locked);
    }

    #[test]
    fn chaotic_seed_from_fli_prescan_is_non_torus() {
        let fl = field(&[(vec![1, 0], 0.5), (vec![0, 1], 0.5), (vec![1, 1], 0.25), (vec![1, -1], 0.25)]);
        let eps = 0.05;
        let mut best = (f64::MIN, [0.0, 0.0]);
        for i in 0..8 {
            for j in 0..8 {
                let y = [-0.35 + 0.1 * i as f64, -0.35 + 0.1 * j as f64];
                let v = fli(&fl, eps, &y, &[0.1, 0.2], 0.1, 2000, Scheme::Yoshida4).unwrap();
                if v > best.0 {
                    best = (v, y);
                }
            }
        }
        // regular orbits grow like ln t ≈ 5.3
        assert!(best.0 > 10.0, "{best:?}");
        let c = run_orbit(&fl, eps, &best.1, &[0.1, 0.2], &ClassifierSettings::default()).unwrap();
        assert_eq!(c.verdict, Verdict::NonTorus, "{c:?}");
    }

    #[test]
    fn energy_violation_is_flagged() {
        let fl = field(&[(vec![1], 0.5)]);
        let st = ClassifierSettings { energy_tol: 1e-14, ..Default::default() };
        let c = run_orbit(&fl, 0.01, &[0.5], &[0.0], &st).unwrap();
        assert_eq!(c.verdict, Verdict::Undecided);
        assert!(c.note.unwrap().contains("energy"));
    }

    #[test]
    fn bump_weights_vanish_at_ends() {
        assert_eq!(bump(0.0), 0.0);
        assert_eq!(bump(1.0), 0.0);
        assert!(bump(1e-3) < 1e-300);
        assert!((bump(0.5) - (-4.0f64).exp()).abs() < 1e-15);
    }
}
