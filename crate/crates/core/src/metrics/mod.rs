//! Objective metrics: SI-SDR, ESTOI, distance-estimation error, and ingestion of
//! externally computed scores (PESQ, distance predictions).

mod estoi;
mod external;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use estoi::{
    estoi, estoi_slices, ESTOI_BANDS, ESTOI_DYN_RANGE_DB, ESTOI_FFT, ESTOI_FRAME, ESTOI_RATE,
    ESTOI_SEGMENT,
};
pub use external::{ingest_external_scores, DISTANCE_PREDICTION};

use crate::dsp::AudioBuffer;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricName {
    Pesq,
    Estoi,
    SiSdr,
    DistErr,
}

impl MetricName {
    pub fn as_str(self) -> &'static str {
        match self {
            MetricName::Pesq => "pesq",
            MetricName::Estoi => "estoi",
            MetricName::SiSdr => "si_sdr",
            MetricName::DistErr => "dist_err",
        }
    }

    /// Checks `value` against the metric's range. `+inf` is allowed only for SI-SDR.
    pub fn check(self, value: f64) -> std::result::Result<(), String> {
        let ok = match self {
            MetricName::Pesq => (1.0..=5.0).contains(&value),
            MetricName::Estoi => (-1.0..=1.0).contains(&value),
            MetricName::SiSdr => value.is_finite() || value == f64::INFINITY,
            MetricName::DistErr => value.is_finite() && value >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            let range = match self {
                MetricName::Pesq => "[1, 5]",
                MetricName::Estoi => "[-1, 1]",
                MetricName::SiSdr => "finite or +inf",
                MetricName::DistErr => ">= 0",
            };
            Err(format!("{} value {value} outside {range}", self.as_str()))
        }
    }
}

impl fmt::Display for MetricName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pesq" => Ok(MetricName::Pesq),
            "estoi" => Ok(MetricName::Estoi),
            "si_sdr" | "si-sdr" | "sisdr" => Ok(MetricName::SiSdr),
            "dist_err" | "distance_error" => Ok(MetricName::DistErr),
            other => Err(Error::InvalidArgument(format!("unknown metric {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sentinel {
    Finite,
    PlusInfinity,
}

/// A metric score. A perfect SI-SDR is `+inf` rather than a capped number.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricValue {
    pub name: MetricName,
    pub value: f64,
}

impl MetricValue {
    pub fn sentinel(&self) -> Sentinel {
        if self.value == f64::INFINITY {
            Sentinel::PlusInfinity
        } else {
            Sentinel::Finite
        }
    }
}

/// Residual energy at or below this fraction of the target counts as exactly zero.
const SI_SDR_ZERO_RESIDUAL: f64 = 1e-24;

/// Scale-invariant signal-to-distortion ratio in dB.
///
/// Means are removed, the estimate is projected onto the reference
/// (`alpha = <est, ref> / <ref, ref>`), and the score is `10 log10(|alpha ref|^2 / |alpha ref - est|^2)`.
pub fn si_sdr(estimate: &AudioBuffer, reference: &AudioBuffer) -> Result<MetricValue> {
    if estimate.sample_rate != reference.sample_rate {
        return Err(Error::SampleRateMismatch(
            estimate.sample_rate,
            reference.sample_rate,
        ));
    }
    si_sdr_slices(&estimate.samples, &reference.samples)
}

pub fn si_sdr_slices(estimate: &[f64], reference: &[f64]) -> Result<MetricValue> {
    if estimate.len() != reference.len() {
        return Err(Error::LengthMismatch(estimate.len(), reference.len()));
    }
    if estimate.is_empty() {
        return Err(Error::Degenerate("empty signals".into()));
    }
    let centred = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|x| x - m).collect::<Vec<f64>>()
    };
    let (e, s) = (centred(estimate), centred(reference));
    let ss: f64 = s.iter().map(|v| v * v).sum();
    if ss == 0.0 {
        return Err(Error::Degenerate(
            "SI-SDR reference is zero after mean removal".into(),
        ));
    }
    let alpha = e.iter().zip(&s).map(|(a, b)| a * b).sum::<f64>() / ss;
    let target: f64 = alpha * alpha * ss;
    let residual: f64 = e.iter().zip(&s).map(|(a, b)| (alpha * b - a).powi(2)).sum();
    if target == 0.0 {
        return Err(Error::Degenerate(
            "SI-SDR estimate is orthogonal to the reference".into(),
        ));
    }
    let value = if residual <= SI_SDR_ZERO_RESIDUAL * target {
        f64::INFINITY
    } else {
        10.0 * (target / residual).log10()
    };
    Ok(MetricValue {
        name: MetricName::SiSdr,
        value,
    })
}

/// Absolute distance-estimation error in metres.
pub fn distance_error(predicted_m: f64, true_m: f64) -> Result<MetricValue> {
    if !(predicted_m >= 0.0) || !(true_m >= 0.0) || !predicted_m.is_finite() || !true_m.is_finite()
    {
        return Err(Error::OutOfRange {
            location: "distance_error".into(),
            message: format!("distances must be finite and >= 0 (got {predicted_m}, {true_m})"),
        });
    }
    Ok(MetricValue {
        name: MetricName::DistErr,
        value: (predicted_m - true_m).abs(),
    })
}
