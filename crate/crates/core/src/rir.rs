//! Sampled room impulse responses and their provenance sidecar.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dsp::{wav, AudioBuffer};
use crate::error::{Error, Result};
use crate::scene::Engine;

/// Crate version recorded in every provenance record.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Where an RIR came from and how it was made.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub room_id: String,
    pub condition_id: String,
    pub source_id: String,
    pub receiver_id: String,
    /// SHA-256 of the canonical engine configuration.
    pub config_hash: String,
    pub seed: u64,
    pub tool_version: String,
    /// Engine-specific extras (receiver radius, node-snap offsets, filter specs...).
    #[serde(default)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

/// Hex SHA-256 of the JSON serialization of `config`.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let json = serde_json::to_vec(config).expect("config serializes");
    hex::encode(Sha256::digest(&json))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rir {
    #[serde(skip)]
    pub samples: Vec<f64>,
    pub sample_rate: f64,
    pub engine: Engine,
    /// Highest frequency the samples are trusted to represent, in Hz.
    pub band_limit: f64,
    pub provenance: Provenance,
}

impl Rir {
    pub fn new(samples: Vec<f64>, sample_rate: f64, engine: Engine) -> Self {
        Self {
            samples,
            sample_rate,
            engine,
            band_limit: sample_rate / 2.0,
            provenance: Provenance {
                tool_version: TOOL_VERSION.to_string(),
                ..Default::default()
            },
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|x| x * x).sum()
    }

    /// Index of the largest-magnitude sample.
    pub fn peak_index(&self) -> usize {
        self.samples
            .iter()
            .enumerate()
            .fold(
                (0, 0.0),
                |(bi, bv), (i, &v)| if v.abs() > bv { (i, v.abs()) } else { (bi, bv) },
            )
            .0
    }

    pub fn to_audio(&self) -> AudioBuffer {
        AudioBuffer::new(self.samples.clone(), self.sample_rate)
    }

    pub fn validate(&self) -> Result<()> {
        self.to_audio().validate()
    }

    pub fn sidecar_path(wav_path: &Path) -> PathBuf {
        wav_path.with_extension("json")
    }

    /// Writes mono float32 WAV plus a JSON sidecar next to it.
    pub fn save(&self, wav_path: impl AsRef<Path>) -> Result<()> {
        let wav_path = wav_path.as_ref();
        wav::write_wav(wav_path, &self.to_audio())?;
        let side = Self::sidecar_path(wav_path);
        let text = serde_json::to_string_pretty(self).expect("Rir metadata serializes");
        std::fs::write(&side, text + "\n").map_err(|e| Error::io(&side, e))
    }

    /// Loads a WAV; metadata comes from the sidecar when present, otherwise the RIR is
    /// tagged as measured with a Nyquist band limit.
    pub fn load(wav_path: impl AsRef<Path>) -> Result<Self> {
        let wav_path = wav_path.as_ref();
        let audio = wav::read_wav(wav_path)?;
        let side = Self::sidecar_path(wav_path);
        let mut rir = if side.exists() {
            let text = std::fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
            let meta: Rir = serde_json::from_str(&text).map_err(|e| Error::parse(&side, e))?;
            if meta.sample_rate != audio.sample_rate {
                return Err(Error::SampleRateMismatch(
                    meta.sample_rate,
                    audio.sample_rate,
                ));
            }
            meta
        } else {
            Rir::new(Vec::new(), audio.sample_rate, Engine::Measured)
        };
        rir.samples = audio.samples;
        Ok(rir)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x/r.wav");
        let mut r = Rir::new(vec![0.0, 1.0, -0.5], 16000.0, Engine::Ism);
        r.provenance.seed = 9;
        r.band_limit = 7000.0;
        r.save(&p).unwrap();
        let back = Rir::load(&p).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.peak_index(), 1);
    }
}
