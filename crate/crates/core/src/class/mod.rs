//! Membership of a potential in the good class: a lower bound on the
//! high Fourier modes (P1), the Morse property of the derivative of every
//! low projection (P2), and a non-vanishing fourth-order margin at every
//! minimum of the low projections (P3).

pub mod curves;
pub mod morse;
mod repair;

use serde::{Deserialize, Serialize};

pub use curves::{critical_curve_p2, critical_curve_p3, nearest_on_curves};
pub use morse::{check_p3, critical_points, morse_beta, CriticalKind, CriticalPoint, MorseBeta, MorseTolerances, P3Margin};
pub use repair::{repair_to_good_set, ModeRepair, RepairOutcome};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::fourier::{sharp_with_norm, star_up_to, FourierPotential, OneDProfile, Tail, WaveVector};

/// Knobs of the class checks. `c_k` is the constant in the cutoff
/// `K_s(δ) = (2/s) ln(c_K/δ)`; it defaults to `2n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassConfig {
    pub c_k: Option<f64>,
    pub tol: MorseTolerances,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for ClassConfig {
    fn default() -> Self {
        ClassConfig { c_k: None, tol: MorseTolerances::default(), exec: Exec::Sequential }
    }
}

impl ClassConfig {
    pub fn c_k_for(&self, n: usize) -> f64 {
        self.c_k.unwrap_or(2.0 * n as f64)
    }
}

/// `K_s(δ) = (2/s) ln(c_K/δ)`.
pub fn cutoff_k(delta: f64, s: f64, c_k: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::invalid(format!("analyticity width must be positive, got {s}")));
    }
    if !(c_k > 1.0) {
        return Err(Error::invalid(format!("cutoff constant must exceed 1, got {c_k}")));
    }
    if !(delta > 0.0 && delta < c_k) {
        return Err(Error::invalid(format!("cutoff needs 0 < δ < c_K = {c_k}, got δ = {delta}")));
    }
    Ok(2.0 / s * (c_k / delta).ln())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct P1Violation {
    pub k: WaveVector,
    /// `|f_k| e^{|k|s}`.
    pub scaled_amplitude: f64,
    /// `δ |k|^{-(n+3)/2}`.
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct P1Report {
    pub pass: bool,
    /// First violations (capped), smallest norm first.
    pub violations: Vec<P1Violation>,
    pub violation_count: u64,
    /// How the modes beyond the stored support were treated.
    pub tail_note: String,
}

const MAX_LISTED: usize = 32;

/// Lower bound `|f_k| ≥ δ|k|^{-(n+3)/2} e^{-|k|s}` for star `|k| > K_s(δ)`.
///
/// Stored modes are checked directly. Unlisted modes follow the tail rule:
/// a floor tail is checked analytically at the smallest unlisted norm (the
/// threshold decreases with `|k|`); a zero tail fails at the first unlisted
/// star mode, unless the potential carries a support cutoff `k_max`, in
/// which case only `K_s(δ) < |k| ≤ k_max` is examined.
pub fn check_p1(f: &FourierPotential, delta: f64, cfg: &ClassConfig) -> Result<P1Report> {
    let n = f.dim();
    let s = f.width();
    let kcut = cutoff_k(delta, s, cfg.c_k_for(n))?;
    let exponent = -((n + 3) as f64) / 2.0;
    let threshold = |norm: u64| delta * (norm as f64).powf(exponent);
    let first = kcut.floor() as u64 + 1;

    let mut violations = Vec::new();
    let mut count = 0u64;
    let mut record = |k: &WaveVector, amp: f64, thr: f64| {
        count += 1;
        if violations.len() < MAX_LISTED {
            violations.push(P1Violation { k: k.clone(), scaled_amplitude: amp, threshold: thr });
        }
    };

    let limit = f.k_max();
    let mut stored: Vec<(&WaveVector, f64)> = f
        .modes()
        .filter(|(k, _)| k.is_star() && (k.l1() as f64) > kcut && limit.is_none_or(|m| k.l1() <= m))
        .map(|(k, c)| (k, c.norm() * (k.l1() as f64 * s).exp()))
        .collect();
    stored.sort_by_key(|(k, _)| k.l1());
    for (k, amp) in stored {
        let thr = threshold(k.l1());
        if amp < thr {
            record(k, amp, thr);
        }
    }

    let tail_note = match (f.tail(), limit) {
        (tail, Some(kmax)) => {
            for m in first..=kmax {
                for k in sharp_with_norm(n, m).into_iter().filter(|k| k.is_star() && f.stored(k).is_none()) {
                    let amp = match tail {
                        Tail::Zero => 0.0,
                        Tail::Floor { delta0 } => delta0,
                    };
                    if amp < threshold(m) {
                        record(&k, amp, threshold(m));
                    }
                }
            }
            format!("support cutoff k_max = {kmax}: modes with {first} ≤ |k| ≤ {kmax} examined")
        }
        (Tail::Zero, None) => {
            let k = smallest_unlisted_star(f, first);
            record(&k, 0.0, threshold(k.l1()));
            format!("zero tail: unlisted star mode {k} vanishes")
        }
        (Tail::Floor { delta0 }, None) => {
            let k = smallest_unlisted_star(f, first);
            let thr = threshold(k.l1());
            if delta0 < thr {
                record(&k, delta0, thr);
                format!("floor tail δ₀ = {delta0} below threshold from |k| = {}", k.l1())
            } else {
                format!("floor tail δ₀ = {delta0} clears threshold {thr:.3e} at |k| = {}", k.l1())
            }
        }
    };
    Ok(P1Report { pass: count == 0, violations, violation_count: count, tail_note })
}

fn smallest_unlisted_star(f: &FourierPotential, from: u64) -> WaveVector {
    (from..)
        .find_map(|m| sharp_with_norm(f.dim(), m).into_iter().find(|k| k.is_star() && f.stored(k).is_none()))
        .expect("a finite potential always leaves star modes unlisted")
}

/// Morse and fourth-order analysis of one low projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeReport {
    pub k: WaveVector,
    pub beta: MorseBeta,
    pub critical_points: Vec<CriticalPoint>,
    pub p3: Vec<P3Margin>,
    pub p2_pass: bool,
    pub p3_pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Check P2 and P3 on a single profile.
pub fn check_profile(f: &OneDProfile, tol: &MorseTolerances) -> ModeReport {
    let beta = morse_beta(f);
    let mut report = ModeReport {
        k: f.base.clone(),
        beta,
        critical_points: Vec::new(),
        p3: Vec::new(),
        p2_pass: false,
        p3_pass: false,
        note: None,
    };
    if beta.empty {
        report.note = Some("empty projection: β = 0 by convention".into());
        return report;
    }
    report.p2_pass = beta.beta > tol.beta * beta.scale;
    match critical_points(f, tol) {
        Ok(cps) => {
            report.critical_points = cps;
            if !report.p2_pass {
                report.note = Some(format!("degenerate critical point near ξ = {:.6}", beta.argmin));
                return report;
            }
            match check_p3(f, &report.critical_points) {
                Ok(m) => {
                    report.p3_pass = m.iter().all(|x| x.margin > tol.margin * x.scale);
                    report.p3 = m;
                }
                Err(e) => {
                    report.p2_pass = false;
                    report.note = Some(e.to_string());
                }
            }
        }
        Err(e) => {
            report.p2_pass = false;
            report.note = Some(e.to_string());
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub delta: f64,
    pub k_cut: f64,
    pub c_k: f64,
    pub s: f64,
    pub n: usize,
    pub tolerances: MorseTolerances,
    pub p1: P1Report,
    pub modes: Vec<ModeReport>,
    pub norm_s: f64,
    pub in_unit_ball: bool,
    /// P1, every β and every fourth-order margin pass. The unit-ball
    /// condition is reported separately in `in_unit_ball`.
    pub verdict: bool,
}

impl ClassReport {
    pub fn p2_failures(&self) -> usize {
        self.modes.iter().filter(|m| !m.p2_pass).count()
    }

    pub fn p3_failures(&self) -> usize {
        self.modes.iter().filter(|m| m.p2_pass && !m.p3_pass).count()
    }

    pub fn failures(&self) -> u64 {
        self.p1.violation_count + self.p2_failures() as u64 + self.p3_failures() as u64
    }

    pub fn min_beta(&self) -> f64 {
        self.modes.iter().map(|m| m.beta.beta).fold(f64::INFINITY, f64::min)
    }
}

/// Star modes whose projections are subject to P2 and P3 at `δ`.
pub fn low_modes(f: &FourierPotential, kcut: f64) -> Vec<WaveVector> {
    let top = (kcut.floor().max(0.0) as u64).min(f.k_max().unwrap_or(u64::MAX));
    star_up_to(f.dim(), top)
}

/// Run P1–P3 at a single `δ`.
pub fn classify_at(f: &FourierPotential, delta: f64, cfg: &ClassConfig) -> Result<ClassReport> {
    let c_k = cfg.c_k_for(f.dim());
    let k_cut = cutoff_k(delta, f.width(), c_k)?;
    let p1 = check_p1(f, delta, cfg)?;
    let modes_k = low_modes(f, k_cut);
    let profiles: Vec<OneDProfile> = modes_k.iter().map(|k| f.profile(k)).collect::<Result<_>>()?;
    let modes = cfg.exec.map(profiles.len(), |i| check_profile(&profiles[i], &cfg.tol));
    let verdict = p1.pass && modes.iter().all(|m| m.p2_pass && m.p3_pass);
    let norm_s = f.norm_s();
    Ok(ClassReport {
        delta,
        k_cut,
        c_k,
        s: f.width(),
        n: f.dim(),
        tolerances: cfg.tol,
        p1,
        modes,
        norm_s,
        in_unit_ball: norm_s <= 1.0 + 1e-12,
        verdict,
    })
}

/// Run the checks over a grid of `δ` and return the passing report with the
/// largest `δ`, or the nearest miss (fewest failures, then largest `δ`).
pub fn classify(f: &FourierPotential, delta_grid: &[f64], cfg: &ClassConfig) -> Result<ClassReport> {
    if delta_grid.is_empty() {
        return Err(Error::invalid("δ grid must not be empty"));
    }
    if let Some(d) = delta_grid.iter().find(|d| !(**d > 0.0 && **d < 1.0)) {
        return Err(Error::invalid(format!("δ values must lie in (0, 1), got {d}")));
    }
    let reports: Vec<ClassReport> = delta_grid.iter().map(|&d| classify_at(f, d, cfg)).collect::<Result<_>>()?;
    let best = reports
        .iter()
        .filter(|r| r.verdict)
        .max_by(|a, b| a.delta.total_cmp(&b.delta))
        .or_else(|| reports.iter().min_by(|a, b| a.failures().cmp(&b.failures()).then(b.delta.total_cmp(&a.delta))))
        .expect("non-empty grid");
    Ok(best.clone())
}

/// A perturbation radius `ρ` such that every `g` with `|g|_s < ρ` keeps
/// `f + g` in the class at `δ − ρ`, for a potential satisfying the strong
/// floor condition `|f_k| e^{|k|s} ≥ δ` beyond `K_s(δ)`.
///
/// `ρ` keeps the integer part of the cutoff unchanged and is shrunk until
/// first-order bounds on the change of every `β_k` and every fourth-order
/// margin stay below half their value.
pub fn openness_radius(f: &FourierPotential, report: &ClassReport) -> Result<f64> {
    if !report.verdict {
        return Err(Error::invalid("openness radius needs a passing class report"));
    }
    let s = f.width();
    let kfloor = report.k_cut.floor();
    let rho_k = report.delta - report.c_k * (-s * (kfloor + 1.0) / 2.0).exp();
    let mut rho = 0.5 * rho_k;
    // sums S_d(k) = 2 Σ_j j^d e^{-j|k|s}: derivative bounds of a unit perturbation
    let sums = |width: f64, d: i32| -> f64 {
        (1..200).map(|j| 2.0 * (j as f64).powi(d) * (-(j as f64) * width).exp()).sum()
    };
    for m in &report.modes {
        let p = f.profile(&m.k)?;
        let w = p.width;
        let (s1, s2, s3, s4) = (sums(w, 1), sums(w, 2), sums(w, 3), sums(w, 4));
        let beta_rho = m.beta.beta / (2.0 * (s1 + s2));
        rho = rho.min(beta_rho);
        let (m2, m3, m4, m5) = (p.moment(2), p.moment(3), p.moment(4), p.moment(5));
        for (margin, cp) in m.p3.iter().zip(m.critical_points.iter().filter(|c| c.kind == CriticalKind::Min)) {
            let lm = 3.0 * (m3 * m4 + m2 * m5) + 10.0 * m3 * m4;
            let fixed = 3.0 * (m2 * s4 + m4 * s2) + 10.0 * m3 * s3;
            // shift of the minimum: |Δξ| ≤ 2ρ S₁ / |F″(ξ̄)|
            let per_rho = fixed + lm * 2.0 * s1 / cp.f2.abs();
            rho = rho.min(margin.margin / (2.0 * per_rho));
            // keep the minimum well separated from degeneracy
            rho = rho.min(cp.f2.abs() / (4.0 * s2));
        }
    }
    if !(rho > 0.0) {
        return Err(Error::numeric("openness radius collapsed to zero"));
    }
    Ok(rho)
}
