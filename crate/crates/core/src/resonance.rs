//! Resonant modes, the zones `R_k = {y ∈ B : |y·k| ≤ w}` and the split of an
//! action region into non-resonant (`B0`), simply resonant (`B1`) and
//! multiply resonant (`B2`) parts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::fourier::{count_with_norm, star_up_to, WaveVector};
use crate::numeric::stats::Proportion;

/// Axis-aligned box in action space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionRegion {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl ActionRegion {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::invalid("region bounds must be non-empty and of equal length"));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a.is_finite() && b.is_finite() && a < b)) {
            return Err(Error::invalid("region needs finite bounds with lo < hi in every coordinate"));
        }
        Ok(ActionRegion { lo, hi })
    }

    /// `[a, b]^n`.
    pub fn cube(n: usize, a: f64, b: f64) -> Result<Self> {
        Self::new(vec![a; n], vec![b; n])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    pub fn diameter(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| (b - a).powi(2)).sum::<f64>().sqrt()
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        y.len() == self.dim() && y.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| *a <= *v && *v <= *b)
    }

    /// Uniform point of the box.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| a + (b - a) * rng.random::<f64>()).collect()
    }
}

/// Knobs of the zone construction. Modes are the star vectors with
/// `|k| ≤ ⌊|ln ε|^mode_exponent⌋`; zones have half-width
/// `√ε |ln ε|^width_exponent` with `width_exponent` defaulting to `2n + 6`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZoneConfig {
    pub mode_exponent: f64,
    pub width_exponent: Option<f64>,
    /// Largest number of modes enumerated before giving up.
    pub budget: u64,
}

impl Default for ZoneConfig {
    fn default() -> Self {
        ZoneConfig { mode_exponent: 2.0, width_exponent: None, budget: 1_000_000 }
    }
}

impl ZoneConfig {
    pub fn width_exponent_for(&self, n: usize) -> f64 {
        self.width_exponent.unwrap_or(default_width_exponent(n))
    }
}

/// `c_n = 2n + 6`.
pub fn default_width_exponent(n: usize) -> f64 {
    (2 * n + 6) as f64
}

fn log_scale(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("ε must lie in (0, 1), got {eps}")));
    }
    Ok(-eps.ln())
}

/// `⌊|ln ε|^exponent⌋`, robust to the representation error of `ε = e^{-m}`.
pub fn mode_cutoff(eps: f64, exponent: f64) -> Result<u64> {
    let l = log_scale(eps)?;
    let raw = l.powf(exponent);
    Ok((raw * (1.0 + 1e-12)).floor() as u64)
}

/// Star modes with `|k| ≤ ⌊|ln ε|²⌋`.
pub fn resonant_modes(eps: f64, n: usize) -> Result<Vec<WaveVector>> {
    resonant_modes_with(eps, n, &ZoneConfig::default())
}

pub fn resonant_modes_with(eps: f64, n: usize, cfg: &ZoneConfig) -> Result<Vec<WaveVector>> {
    if n == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    let cutoff = mode_cutoff(eps, cfg.mode_exponent)?;
    // sharp vectors bound the star ones; check before enumerating
    let mut bound = 0.0;
    for m in 1..=cutoff {
        bound += count_with_norm(n, m);
        if bound > cfg.budget as f64 {
            return Err(Error::Budget { count: bound as u64, budget: cfg.budget });
        }
    }
    Ok(star_up_to(n, cutoff))
}

/// `√ε |ln ε|^{width_exponent}`.
pub fn zone_width(eps: f64, width_exponent: f64) -> Result<f64> {
    let l = log_scale(eps)?;
    Ok(eps.sqrt() * l.powf(width_exponent))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "zone", content = "k")]
pub enum Zone {
    B0,
    B1(WaveVector),
    B2,
}

impl Zone {
    pub fn label(&self) -> &'static str {
        match self {
            Zone::B0 => "B0",
            Zone::B1(_) => "B1",
            Zone::B2 => "B2",
        }
    }

    pub fn is_resonant(&self) -> bool {
        !matches!(self, Zone::B0)
    }
}

/// Zone of a point with the closest resonance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointZone {
    pub zone: Zone,
    /// Mode minimising `|y·k|`.
    pub nearest: Option<WaveVector>,
    /// `|y·k|` for the nearest mode.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneDecomposition {
    pub epsilon: f64,
    pub n: usize,
    pub modes: Vec<WaveVector>,
    pub width: f64,
}

impl ZoneDecomposition {
    pub fn new(eps: f64, n: usize, cfg: &ZoneConfig) -> Result<Self> {
        let modes = resonant_modes_with(eps, n, cfg)?;
        let width = zone_width(eps, cfg.width_exponent_for(n))?;
        Ok(ZoneDecomposition { epsilon: eps, n, modes, width })
    }

    pub fn from_parts(eps: f64, modes: Vec<WaveVector>, width: f64) -> Result<Self> {
        let n = modes.first().map(WaveVector::dim).ok_or_else(|| Error::invalid("zone decomposition needs a mode"))?;
        if modes.iter().any(|k| k.dim() != n || !k.is_star()) {
            return Err(Error::invalid("zone modes must be star vectors of one dimension"));
        }
        if !(width >= 0.0) {
            return Err(Error::invalid("zone width must be non-negative"));
        }
        Ok(ZoneDecomposition { epsilon: eps, n, modes, width })
    }

    /// Label of `y`; boundary points count as resonant.
    pub fn classify(&self, y: &[f64]) -> PointZone {
        let mut hits = 0usize;
        let mut first_hit = None;
        let mut nearest = None;
        let mut margin = f64::INFINITY;
        for (i, k) in self.modes.iter().enumerate() {
            let d = k.dot(y).abs();
            if d < margin {
                margin = d;
                nearest = Some(i);
            }
            if d <= self.width {
                hits += 1;
                first_hit.get_or_insert(i);
            }
        }
        let zone = match hits {
            0 => Zone::B0,
            1 => Zone::B1(self.modes[first_hit.expect("one hit")].clone()),
            _ => Zone::B2,
        };
        PointZone { zone, nearest: nearest.map(|i| self.modes[i].clone()), margin }
    }

    fn count_hits(&self, y: &[f64]) -> u8 {
        let mut hits = 0;
        for k in &self.modes {
            if k.dot(y).abs() <= self.width {
                hits += 1;
                if hits == 2 {
                    break;
                }
            }
        }
        hits
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneMeasures {
    pub samples: u64,
    pub seed: u64,
    pub b0: Proportion,
    pub b1: Proportion,
    pub b2: Proportion,
}

/// Samples per counter-based sub-stream.
pub const BLOCK: u64 = 4096;

/// Monte Carlo fractions of `B0`, `B1`, `B2` in `region`, with Wilson
/// intervals at one standard deviation. Sample `i` lives in sub-stream
/// `i / BLOCK` of the seeded generator, so results do not depend on `exec`.
pub fn zone_measures(
    zones: &ZoneDecomposition,
    region: &ActionRegion,
    samples: u64,
    seed: u64,
    exec: Exec,
) -> Result<ZoneMeasures> {
    if samples < 100 {
        return Err(Error::invalid(format!("zone measures need at least 100 samples, got {samples}")));
    }
    if region.dim() != zones.n {
        return Err(Error::Dimension { expected: zones.n, got: region.dim() });
    }
    let blocks = samples.div_ceil(BLOCK);
    let counts = exec.map(blocks as usize, |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(b as u64);
        let todo = BLOCK.min(samples - b as u64 * BLOCK);
        let mut c = [0u64; 3];
        for _ in 0..todo {
            let y = region.sample(&mut rng);
            c[zones.count_hits(&y) as usize] += 1;
        }
        c
    });
    let mut total = [0u64; 3];
    for c in counts {
        for i in 0..3 {
            total[i] += c[i];
        }
    }
    Ok(ZoneMeasures {
        samples,
        seed,
        b0: Proportion::wilson(total[0], samples, 1.0),
        b1: Proportion::wilson(total[1], samples, 1.0),
        b2: Proportion::wilson(total[2], samples, 1.0),
    })
}
