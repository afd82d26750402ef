//! JSON potential files:
//!
//! ```json
//! { "n": 2, "s": 1.0,
//!   "tail": { "kind": "floor", "delta0": 0.025 },
//!   "modes": [ { "k": [1, 0], "re": 0.5, "im": 0.0 } ] }
//! ```
//!
//! `k_max` is an optional extra field recording the support cutoff of a
//! sampled potential.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::potential::{FourierPotential, Tail};
use super::wave::WaveVector;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailEntry {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta0: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeEntry {
    pub k: Vec<i64>,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PotentialFile {
    pub n: usize,
    pub s: f64,
    pub tail: TailEntry,
    pub modes: Vec<ModeEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<u64>,
}

impl From<&FourierPotential> for PotentialFile {
    fn from(f: &FourierPotential) -> Self {
        let tail = match f.tail() {
            Tail::Zero => TailEntry { kind: "zero".into(), delta0: None },
            Tail::Floor { delta0 } => TailEntry { kind: "floor".into(), delta0: Some(delta0) },
        };
        PotentialFile {
            n: f.dim(),
            s: f.width(),
            tail,
            modes: f.modes().map(|(k, c)| ModeEntry { k: k.components().to_vec(), re: c.re, im: c.im }).collect(),
            k_max: f.k_max(),
        }
    }
}

impl From<FourierPotential> for PotentialFile {
    fn from(f: FourierPotential) -> Self {
        PotentialFile::from(&f)
    }
}

impl TryFrom<PotentialFile> for FourierPotential {
    type Error = Error;

    fn try_from(file: PotentialFile) -> Result<Self> {
        let tail = match file.tail.kind.as_str() {
            "zero" => Tail::Zero,
            "floor" => Tail::Floor {
                delta0: file.tail.delta0.ok_or_else(|| Error::Format("floor tail needs delta0".into()))?,
            },
            other => return Err(Error::Format(format!("unknown tail kind '{other}' (expected zero|floor)"))),
        };
        let mut f = FourierPotential::new(file.n, file.s)?.with_tail(tail)?.with_k_max(file.k_max);
        for m in file.modes {
            if !(m.re.is_finite() && m.im.is_finite()) {
                return Err(Error::Format(format!("non-finite coefficient at {:?}", m.k)));
            }
            f = f.with_mode(WaveVector::new(m.k), Complex64::new(m.re, m.im)).map_err(|e| match e {
                Error::Format(_) => e,
                other => Error::Format(other.to_string()),
            })?;
        }
        Ok(f)
    }
}

pub fn to_json(f: &FourierPotential) -> String {
    serde_json::to_string_pretty(&PotentialFile::from(f)).expect("potential files always serialize")
}

pub fn from_json(text: &str) -> Result<FourierPotential> {
    let file: PotentialFile = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    file.try_into()
}

pub fn load(path: &Path) -> Result<FourierPotential> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Format(format!("cannot read {}: {e}", path.display())))?;
    from_json(&text).map_err(|e| match e {
        Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn save(f: &FourierPotential, path: &Path) -> Result<()> {
    std::fs::write(path, to_json(f) + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let f = FourierPotential::new(2, 1.5)
            .unwrap()
            .with_tail(Tail::Floor { delta0: 0.05 })
            .unwrap()
            .with_mode(vec![1, -1], Complex64::new(0.2, -0.1))
            .unwrap();
        assert_eq!(from_json(&to_json(&f)).unwrap(), f);
        // embedded in other documents through serde
        let v = serde_json::to_value(vec![f.clone()]).unwrap();
        let back: Vec<FourierPotential> = serde_json::from_value(v).unwrap();
        assert_eq!(back[0], f);
    }

    #[test]
    fn duplicate_modes_rejected() {
        let text = r#"{"n":2,"s":1,"tail":{"kind":"zero"},"modes":[{"k":[1,0],"re":1,"im":0},{"k":[1,0],"re":2,"im":0}]}"#;
        assert!(matches!(from_json(text), Err(Error::Format(m)) if m.contains("duplicate")));
    }

    #[test]
    fn non_sharp_rejected() {
        let text = r#"{"n":2,"s":1,"tail":{"kind":"zero"},"modes":[{"k":[0,-1],"re":1,"im":0}]}"#;
        assert!(matches!(from_json(text), Err(Error::Format(_))));
    }

    #[test]
    fn unknown_tail_rejected() {
        let text = r#"{"n":1,"s":1,"tail":{"kind":"gauss"},"modes":[]}"#;
        assert!(from_json(text).is_err());
    }
}
