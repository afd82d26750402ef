//! Non-torus fraction over `B × Tⁿ` with a per-zone breakdown.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::classify::{run_orbit, ClassifierSettings, Verdict};
use super::integrator::ForceField;
use crate::class::ClassReport;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::fourier::FourierPotential;
use crate::numeric::stats::Proportion;
use crate::resonance::{ActionRegion, ZoneConfig, ZoneDecomposition};

pub const MIN_ORBITS: usize = 500;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveySettings {
    pub classifier: ClassifierSettings,
    /// Zone knobs for the breakdown.
    pub zones: ZoneConfig,
    /// Results with at least this undecided fraction are not quotable.
    pub undecided_limit: f64,
}

impl Default for SurveySettings {
    fn default() -> Self {
        SurveySettings {
            classifier: ClassifierSettings::default(),
            zones: ZoneConfig { mode_exponent: 1.0, width_exponent: Some(0.0), ..ZoneConfig::default() },
            undecided_limit: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub index: usize,
    pub y0: Vec<f64>,
    pub x0: Vec<f64>,
    pub verdict: Verdict,
    pub drift: f64,
    pub energy_drift: f64,
    pub zone: String,
    pub winding: Vec<f64>,
    pub locked: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneTally {
    pub zone: String,
    pub orbits: u64,
    pub torus: u64,
    pub non_torus: u64,
    pub undecided: u64,
}

impl ZoneTally {
    fn new(zone: &str) -> Self {
        ZoneTally { zone: zone.into(), orbits: 0, torus: 0, non_torus: 0, undecided: 0 }
    }

    /// Share of this zone's orbits that are not classified as tori.
    pub fn off_torus_rate(&self) -> Proportion {
        Proportion::wilson(self.non_torus + self.undecided, self.orbits, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyResult {
    pub epsilon: f64,
    pub samples: usize,
    pub seed: u64,
    pub region: ActionRegion,
    pub torus: Proportion,
    pub non_torus: Proportion,
    pub undecided: Proportion,
    pub settings: SurveySettings,
    pub tol_freq: f64,
    pub window: f64,
    pub field_modes: usize,
    /// Class level and verdict of the surveyed potential.
    pub class_delta: f64,
    pub class_verdict: bool,
    /// Rows `B0`, `B1`, `B2`.
    pub zones: Vec<ZoneTally>,
    pub quotable: bool,
    pub orbits: Vec<OrbitRecord>,
}

impl SurveyResult {
    /// Non-torus plus undecided.
    pub fn off_torus(&self) -> Proportion {
        Proportion::wilson(self.non_torus.count + self.undecided.count, self.samples as u64, 1.0)
    }

    pub fn zone(&self, label: &str) -> Option<&ZoneTally> {
        self.zones.iter().find(|z| z.zone == label)
    }
}

/// Classify `orbits` uniform initial conditions in `region × Tⁿ`. Orbit `i`
/// draws from sub-stream `i` of `seed`.
#[allow(clippy::too_many_arguments)]
pub fn nontorus_fraction(
    f: &FourierPotential,
    report: &ClassReport,
    eps: f64,
    region: &ActionRegion,
    orbits: usize,
    seed: u64,
    settings: &SurveySettings,
    exec: Exec,
) -> Result<SurveyResult> {
    if orbits < MIN_ORBITS {
        return Err(Error::invalid(format!("a survey needs at least {MIN_ORBITS} orbits, got {orbits}")));
    }
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::invalid(format!("ε must lie in [0, 1), got {eps}")));
    }
    if region.dim() != f.dim() {
        return Err(Error::Dimension { expected: f.dim(), got: region.dim() });
    }
    if !(settings.undecided_limit > 0.0 && settings.undecided_limit <= 1.0) {
        return Err(Error::invalid("undecided limit must lie in (0, 1]"));
    }
    settings.classifier.validate()?;
    let field = ForceField::new(f)?;
    let zones = if eps > 0.0 { Some(ZoneDecomposition::new(eps, f.dim(), &settings.zones)?) } else { None };
    let n = f.dim();
    let cls = settings.classifier;
    let outcomes: Vec<Result<OrbitRecord>> = exec.map(orbits, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let y0 = region.sample(&mut rng);
        let x0: Vec<f64> = (0..n).map(|_| TAU * rng.random::<f64>()).collect();
        let zone = zones.as_ref().map_or("B0", |z| z.classify(&y0).zone.label()).to_string();
        match run_orbit(&field, eps, &y0, &x0, &cls) {
            Ok(c) => Ok(OrbitRecord {
                index: i,
                y0,
                x0,
                verdict: c.verdict,
                drift: c.drift,
                energy_drift: c.energy_drift,
                zone,
                winding: c.winding,
                locked: c.locked,
                note: c.note,
            }),
            Err(e) if e.is_numeric() => Ok(OrbitRecord {
                index: i,
                y0,
                x0,
                verdict: Verdict::Undecided,
                drift: f64::NAN,
                energy_drift: f64::NAN,
                zone,
                winding: vec![f64::NAN; n],
                locked: false,
                note: Some(e.to_string()),
            }),
            Err(e) => Err(e),
        }
    });
    let records: Vec<OrbitRecord> = outcomes.into_iter().collect::<Result<_>>()?;
    let mut tallies: Vec<ZoneTally> = ["B0", "B1", "B2"].iter().map(|z| ZoneTally::new(z)).collect();
    let (mut t, mut nt, mut u) = (0u64, 0u64, 0u64);
    for r in &records {
        let tally = tallies.iter_mut().find(|z| z.zone == r.zone).expect("known zone label");
        tally.orbits += 1;
        match r.verdict {
            Verdict::Torus => {
                t += 1;
                tally.torus += 1;
            }
            Verdict::NonTorus => {
                nt += 1;
                tally.non_torus += 1;
            }
            Verdict::Undecided => {
                u += 1;
                tally.undecided += 1;
            }
        }
    }
    let total = orbits as u64;
    let undecided = Proportion::wilson(u, total, 1.0);
    Ok(SurveyResult {
        epsilon: eps,
        samples: orbits,
        seed,
        region: region.clone(),
        torus: Proportion::wilson(t, total, 1.0),
        non_torus: Proportion::wilson(nt, total, 1.0),
        undecided,
        settings: settings.clone(),
        tol_freq: cls.tol_freq(eps),
        window: cls.steps_per_window(eps) as f64 * cls.dt,
        field_modes: field.num_modes(),
        class_delta: report.delta,
        class_verdict: report.verdict,
        zones: tallies,
        quotable: undecided.estimate < settings.undecided_limit,
        orbits: records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::class::{classify_at, ClassConfig};
    use crate::fourier::Tail;
    use num_complex::Complex64;

    fn potential() -> FourierPotential {
        let e = |m: f64| (-m).exp();
        FourierPotential::new(2, 1.0)
            .unwrap()
            .with_mode(vec![1, 0], Complex64::new(0.4 * e(1.0), 0.0))
            .unwrap()
            .with_mode(vec![0, 1], Complex64::new(0.0, 0.3 * e(1.0)))
            .unwrap()
            .with_mode(vec![1, -1], Complex64::new(0.5 * e(2.0), 0.2 * e(2.0)))
            .unwrap()
            .with_tail(Tail::Zero)
            .unwrap()
    }

    fn report(f: &FourierPotential) -> ClassReport {
        classify_at(f, 0.1, &ClassConfig::default()).unwrap()
    }

    fn region() -> ActionRegion {
        ActionRegion::cube(2, 0.6, 1.4).unwrap()
    }

    #[test]
    fn unperturbed_survey_is_all_tori() {
        let f = potential();
        let r = nontorus_fraction(&f, &report(&f), 0.0, &region(), 500, 3, &SurveySettings::default(), Exec::Sequential).unwrap();
        assert_eq!(r.torus.count, 500);
        assert!(r.quotable);
        assert_eq!(r.zone("B0").unwrap().orbits, 500);
    }

    #[test]
    fn too_few_orbits_rejected() {
        let f = potential();
        assert!(nontorus_fraction(&f, &report(&f), 0.01, &region(), 100, 3, &SurveySettings::default(), Exec::Sequential).is_err());
    }

    #[test]
    fn reproducible_and_strategy_independent() {
        let f = potential();
        let rep = report(&f);
        let run = |exec| nontorus_fraction(&f, &rep, 0.01, &region(), 500, 9, &SurveySettings::default(), exec).unwrap();
        let a = run(Exec::Sequential);
        let b = run(Exec::Sequential);
        let c = run(Exec::Parallel);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&c).unwrap());
        let total = a.torus.count + a.non_torus.count + a.undecided.count;
        assert_eq!(total, 500);
        assert_eq!(a.zones.iter().map(|z| z.orbits).sum::<u64>(), 500);
    }

    #[test]
    fn doubling_the_window_rarely_flips_verdicts() {
        let f = potential();
        let rep = report(&f);
        let base = SurveySettings::default();
        let long = SurveySettings { classifier: ClassifierSettings { window: 2.0 * base.classifier.window, window_periods: 2.0 * base.classifier.window_periods, ..base.classifier }, ..base.clone() };
        let a = nontorus_fraction(&f, &rep, 0.01, &region(), 500, 21, &base, Exec::Sequential).unwrap();
        let b = nontorus_fraction(&f, &rep, 0.01, &region(), 500, 21, &long, Exec::Sequential).unwrap();
        let flips = a
            .orbits
            .iter()
            .zip(&b.orbits)
            .filter(|(x, y)| x.verdict != Verdict::Undecided && y.verdict != Verdict::Undecided && x.verdict != y.verdict)
            .count();
        assert!(flips <= 10, "{flips} of 500 flipped");
    }
}
