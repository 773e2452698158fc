use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Header of the results store.
pub const RESULTS_HEADER: [&str; 8] = [
    "engine",
    "room_id",
    "condition_id",
    "source_id",
    "receiver_id",
    "algorithm",
    "metric",
    "value",
];

/// One evaluation score. `value` is `+inf` for the perfect-score sentinel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub engine: String,
    pub room_id: String,
    pub condition_id: String,
    pub source_id: String,
    pub receiver_id: String,
    pub algorithm: String,
    pub metric: String,
    pub value: f64,
}

/// Join key shared by reference and candidate rows: room, condition, source, receiver.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PairKey {
    pub room_id: String,
    pub condition_id: String,
    pub source_id: String,
    pub receiver_id: String,
}

impl std::fmt::Display for PairKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}/{}/{}/{}",
            self.room_id, self.condition_id, self.source_id, self.receiver_id
        )
    }
}

impl EvalResult {
    pub fn pair_key(&self) -> PairKey {
        PairKey {
            room_id: self.room_id.clone(),
            condition_id: self.condition_id.clone(),
            source_id: self.source_id.clone(),
            receiver_id: self.receiver_id.clone(),
        }
    }

    pub fn is_sentinel(&self) -> bool {
        self.value == f64::INFINITY
    }

    fn full_key(&self) -> String {
        format!(
            "{}/{}/{}/{}",
            self.engine,
            self.pair_key(),
            self.algorithm,
            self.metric
        )
    }
}

/// Formats a value for the store: shortest round-trip decimal, `inf` for the sentinel.
pub fn format_value(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".to_string()
    } else {
        format!("{v}")
    }
}

fn parse_value(s: &str) -> Option<f64> {
    match s.trim() {
        "inf" | "+inf" | "Infinity" | "+Infinity" => Some(f64::INFINITY),
        t => t.parse::<f64>().ok().filter(|v| v.is_finite()),
    }
}

/// Checks that no two rows share the full key.
pub fn check_unique(rows: &[EvalResult]) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    for r in rows {
        let k = r.full_key();
        if !seen.insert(k.clone()) {
            return Err(Error::DuplicateKey(k));
        }
    }
    Ok(())
}

pub fn write_results_csv(path: impl AsRef<Path>, rows: &[EvalResult]) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::parse(path, e))?;
    w.write_record(RESULTS_HEADER)
        .map_err(|e| Error::parse(path, e))?;
    for r in rows {
        w.write_record([
            r.engine.as_str(),
            &r.room_id,
            &r.condition_id,
            &r.source_id,
            &r.receiver_id,
            &r.algorithm,
            &r.metric,
            &format_value(r.value),
        ])
        .map_err(|e| Error::parse(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a results CSV; rows must have the store header and unique keys.
pub fn read_results_csv(path: impl AsRef<Path>) -> Result<Vec<EvalResult>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let header = r.headers().map_err(|e| Error::parse(path, e))?.clone();
    if header.iter().map(str::trim).ne(RESULTS_HEADER) {
        return Err(Error::parse(
            path,
            format!("expected header {}", RESULTS_HEADER.join(",")),
        ));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(path, e))?;
        let f = |k: usize| rec.get(k).unwrap_or("").trim().to_string();
        let value = parse_value(&f(7)).ok_or_else(|| {
            Error::parse(path, format!("row {}: invalid value {:?}", i + 2, f(7)))
        })?;
        rows.push(EvalResult {
            engine: f(0),
            room_id: f(1),
            condition_id: f(2),
            source_id: f(3),
            receiver_id: f(4),
            algorithm: f(5),
            metric: f(6),
            value,
        });
    }
    check_unique(&rows)?;
    Ok(rows)
}
