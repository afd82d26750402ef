use kamscope::class::{classify, classify_at, repair_to_good_set, ClassConfig, ClassReport};
use kamscope::fourier::{io, FourierPotential};
use kamscope::random::{sample_indexed, MeasureKind, MeasureSpec};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::args::Source;
use crate::error::{invalid, CliError, CliResult};

/// Sampler used by `survey` and `scaling` when no potential is given.
pub const DEFAULT_SAMPLE: &str = "mu,n=2,s=2,seed=1,index=0";
pub const DEFAULT_REPAIR: f64 = 0.1;

#[derive(Debug, Clone, Serialize)]
pub struct Resolved {
    pub origin: String,
    pub sample: Option<MeasureSpec>,
    pub sample_index: Option<u64>,
    pub repair_theta: Option<f64>,
    /// δ at which the repaired potential is guaranteed to classify.
    pub repair_delta: Option<f64>,
    pub c_k: f64,
    /// Hash of the potential actually used, in file format.
    pub potential_sha256: String,
}

pub struct Loaded {
    pub potential: FourierPotential,
    pub resolved: Resolved,
    pub config: ClassConfig,
}

pub fn parse_sample(spec: &str) -> CliResult<(MeasureSpec, u64)> {
    let mut parts = spec.split(',').map(str::trim);
    let kind = match parts.next() {
        Some("mu") => MeasureKind::MuS,
        Some("nu") => MeasureKind::NuS,
        other => return invalid(format!("sample spec must start with mu or nu, got {other:?} (e.g. {DEFAULT_SAMPLE})")),
    };
    let (mut n, mut s, mut seed, mut index, mut kmax) = (None, None, None, 0u64, None);
    for p in parts {
        let Some((key, value)) = p.split_once('=') else {
            return invalid(format!("sample spec entry '{p}' is not key=value"));
        };
        match key {
            "n" => n = Some(field(key, value)?),
            "s" => s = Some(field(key, value)?),
            "seed" => seed = Some(field(key, value)?),
            "index" => index = field(key, value)?,
            "kmax" => kmax = Some(field(key, value)?),
            _ => return invalid(format!("sample spec: unknown key '{key}' (expected n, s, seed, index, kmax)")),
        }
    }
    let (Some(n), Some(s), Some(seed)) = (n, s, seed) else {
        return invalid("sample spec needs n, s and seed");
    };
    let mut m = MeasureSpec::new(kind, n, s, seed)?;
    if let Some(k) = kmax {
        m = m.with_k_max(k)?;
    }
    Ok((m, index))
}

fn field<T: std::str::FromStr>(key: &str, value: &str) -> CliResult<T> {
    value.parse().map_err(|_| CliError::Validation(format!("sample spec: cannot parse {key}={value}")))
}

/// Load, sample and optionally repair. `fallback` supplies a default sampler
/// and repair when neither `--potential` nor `--sample` is given.
pub fn load(src: &Source, fallback: Option<(&str, f64)>) -> CliResult<Loaded> {
    let (mut f, origin, sample, index, theta) = match (&src.potential, &src.sample, fallback) {
        (Some(path), _, _) => (io::load(path)?, format!("file {}", path.display()), None, None, src.repair),
        (None, Some(spec), _) => {
            let (m, i) = parse_sample(spec)?;
            (sample_indexed(&m, i)?, format!("sample {spec}"), Some(m), Some(i), src.repair)
        }
        (None, None, Some((spec, th))) => {
            let (m, i) = parse_sample(spec)?;
            (sample_indexed(&m, i)?, format!("sample {spec}"), Some(m), Some(i), Some(src.repair.unwrap_or(th)))
        }
        (None, None, None) => return invalid("no potential: pass --potential FILE or --sample SPEC"),
    };
    let config = ClassConfig { c_k: src.c_k, ..ClassConfig::default() };
    let mut delta = None;
    if let Some(th) = theta {
        if !(th > 0.0 && th < 1.0) {
            return invalid(format!("--repair theta must lie in (0, 1), got {th}"));
        }
        let out = repair_to_good_set(&f, th, &config)?;
        delta = Some(out.delta);
        f = out.potential;
    }
    let hash = hash(&f);
    let c_k = config.c_k_for(f.dim());
    Ok(Loaded {
        potential: f,
        resolved: Resolved { origin, sample, sample_index: index, repair_theta: theta, repair_delta: delta, c_k, potential_sha256: hash },
        config,
    })
}

pub fn hash(f: &FourierPotential) -> String {
    hex::encode(Sha256::digest(io::to_json(f).as_bytes()))
}

/// Class report used to attach zones to surveys: at the repair δ if the
/// potential was repaired, otherwise the best δ on the grid.
pub fn report(loaded: &Loaded, grid: &[f64]) -> CliResult<ClassReport> {
    Ok(match loaded.resolved.repair_delta {
        Some(d) => classify_at(&loaded.potential, d, &loaded.config)?,
        None => classify(&loaded.potential, grid, &loaded.config)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_specs_parse() {
        let (m, i) = parse_sample("nu,n=3,s=1.5,seed=4,index=2,kmax=9").unwrap();
        assert_eq!((m.kind, m.n, m.s, m.seed, m.k_max, i), (MeasureKind::NuS, 3, 1.5, 4, 9, 2));
        let (m, i) = parse_sample(DEFAULT_SAMPLE).unwrap();
        assert_eq!((m.n, i), (2, 0));
    }

    #[test]
    fn bad_specs_rejected() {
        for s in ["xi,n=2,s=1,seed=1", "mu,n=2,s=1", "mu,n=2,s=1,seed=1,foo=3", "mu,n=two,s=1,seed=1", "mu,n=2,s=1,seed"] {
            assert!(parse_sample(s).is_err(), "{s}");
        }
    }
}
