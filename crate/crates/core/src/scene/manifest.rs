use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::Vec3;
use crate::error::{Error, Result};

/// Tolerance between `true_distance` and the source/receiver geometry, in metres.
pub const DISTANCE_TOLERANCE: f64 = 1e-6;

/// Where an RIR came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Measured,
    Ism,
    Rt,
    Fdtd,
}

impl Engine {
    pub fn as_str(self) -> &'static str {
        match self {
            Engine::Measured => "measured",
            Engine::Ism => "ism",
            Engine::Rt => "rt",
            Engine::Fdtd => "fdtd",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Engine {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "measured" => Ok(Engine::Measured),
            "ism" => Ok(Engine::Ism),
            "rt" => Ok(Engine::Rt),
            "fdtd" => Ok(Engine::Fdtd),
            other => Err(Error::InvalidArgument(format!("unknown engine '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// RIR WAV path; relative paths are resolved against the manifest's directory.
    pub rir_path: PathBuf,
    pub engine: Engine,
    pub room_id: String,
    pub condition_id: String,
    pub source_id: String,
    pub receiver_id: String,
    pub source_pos: Vec3,
    pub receiver_pos: Vec3,
    pub true_distance: f64,
}

/// Uniqueness key of a manifest entry.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ManifestKey {
    pub engine: Engine,
    pub room_id: String,
    pub condition_id: String,
    pub source_id: String,
    pub receiver_id: String,
}

impl fmt::Display for ManifestKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {}, {}, {})",
            self.engine, self.room_id, self.condition_id, self.source_id, self.receiver_id
        )
    }
}

impl ManifestEntry {
    pub fn key(&self) -> ManifestKey {
        ManifestKey {
            engine: self.engine,
            room_id: self.room_id.clone(),
            condition_id: self.condition_id.clone(),
            source_id: self.source_id.clone(),
            receiver_id: self.receiver_id.clone(),
        }
    }

    pub fn resolve_rir_path(&self, base_dir: &Path) -> PathBuf {
        if self.rir_path.is_absolute() {
            self.rir_path.clone()
        } else {
            base_dir.join(&self.rir_path)
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    /// Checks geometry/distance consistency and key uniqueness.
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for (i, e) in self.entries.iter().enumerate() {
            let geometric = e.source_pos.distance(e.receiver_pos);
            let delta = (geometric - e.true_distance).abs();
            if !(delta <= DISTANCE_TOLERANCE) {
                return Err(Error::DistanceMismatch { index: i, delta });
            }
            let key = e.key();
            if !seen.insert(key.clone()) {
                return Err(Error::DuplicateKey(key.to_string()));
            }
        }
        Ok(())
    }

    pub fn from_json_str(text: &str, origin: &Path) -> Result<Self> {
        let m: DatasetManifest = serde_json::from_str(text).map_err(|e| Error::parse(origin, e))?;
        m.validate()?;
        Ok(m)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    /// Inserts `entry`, replacing any entry with the same key.
    pub fn upsert(&mut self, entry: ManifestEntry) {
        let key = entry.key();
        match self.entries.iter_mut().find(|e| e.key() == key) {
            Some(slot) => *slot = entry,
            None => self.entries.push(entry),
        }
    }

    pub fn find(&self, key: &ManifestKey) -> Option<&ManifestEntry> {
        self.entries.iter().find(|e| &e.key() == key)
    }
}

/// Reads and validates a manifest. Entries keep their file order.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    DatasetManifest::from_json_str(&text, path)
}
