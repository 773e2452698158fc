use std::path::Path;

use super::{distance_error, MetricName};
use crate::agreement::{check_unique, EvalResult};
use crate::error::{Error, Result};
use crate::scene::{DatasetManifest, Engine, ManifestKey};

/// Metric label for rows holding predicted source distances in metres. They are
/// converted to `dist_err` against the manifest's true distance.
pub const DISTANCE_PREDICTION: &str = "distance_prediction";

const HEADER: [&str; 7] = [
    "engine",
    "room_id",
    "condition_id",
    "source_id",
    "receiver_id",
    "metric",
    "value",
];

/// Reads externally computed scores (e.g. PESQ, or a distance estimator's predictions).
///
/// The CSV has header `engine,room_id,condition_id,source_id,receiver_id,metric,value`.
/// Rows whose `metric` equals `metric_name` are range-checked, resolved against
/// `manifest` and returned as results tagged with `algorithm`; other rows are ignored.
pub fn ingest_external_scores(
    path: impl AsRef<Path>,
    metric_name: &str,
    manifest: &DatasetManifest,
    algorithm: &str,
) -> Result<Vec<EvalResult>> {
    let path = path.as_ref();
    let prediction = metric_name == DISTANCE_PREDICTION;
    let metric = if prediction {
        MetricName::DistErr
    } else {
        metric_name.parse::<MetricName>()?
    };
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let header = reader.headers().map_err(|e| Error::parse(path, e))?.clone();
    if header.iter().map(str::trim).ne(HEADER) {
        return Err(Error::parse(
            path,
            format!("expected header {}", HEADER.join(",")),
        ));
    }
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(path, e))?;
        let f = |k: usize| rec.get(k).unwrap_or("").trim();
        if f(5) != metric_name {
            continue;
        }
        let location = format!("{} row {}", path.display(), i + 2);
        let value: f64 = match f(6) {
            "inf" | "+inf" => f64::INFINITY,
            v => v
                .parse()
                .map_err(|_| Error::parse(path, format!("row {}: invalid value {v:?}", i + 2)))?,
        };
        let key = ManifestKey {
            engine: f(0).parse::<Engine>()?,
            room_id: f(1).to_string(),
            condition_id: f(2).to_string(),
            source_id: f(3).to_string(),
            receiver_id: f(4).to_string(),
        };
        let entry = manifest
            .find(&key)
            .ok_or_else(|| Error::UnknownKey(key.to_string()))?;
        let value = if prediction {
            distance_error(value, entry.true_distance)
                .map_err(|e| Error::OutOfRange {
                    location: location.clone(),
                    message: e.to_string(),
                })?
                .value
        } else {
            metric.check(value).map_err(|message| Error::OutOfRange {
                location: location.clone(),
                message,
            })?;
            value
        };
        out.push(EvalResult {
            engine: key.engine.to_string(),
            room_id: key.room_id,
            condition_id: key.condition_id,
            source_id: key.source_id,
            receiver_id: key.receiver_id,
            algorithm: algorithm.to_string(),
            metric: metric.as_str().to_string(),
            value,
        });
    }
    check_unique(&out)?;
    Ok(out)
}
