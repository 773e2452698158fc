//! Schroeder backward integration and reverberation-time fitting.

use super::db;
use crate::error::{Error, Result};

/// Backward-integrated energy decay in dB, normalized to 0 dB at the first sample.
pub fn schroeder_curve(samples: &[f64]) -> Vec<f64> {
    let energy: Vec<f64> = samples.iter().map(|x| x * x).collect();
    schroeder_curve_energy(&energy)
}

/// As [`schroeder_curve`] for a sequence that already holds energies (e.g. an echogram).
pub fn schroeder_curve_energy(energy: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut edc: Vec<f64> = energy
        .iter()
        .rev()
        .map(|e| {
            acc += e;
            acc
        })
        .collect();
    edc.reverse();
    let total = edc.first().copied().unwrap_or(0.0);
    edc.iter()
        .map(|&e| {
            if total > 0.0 && e > 0.0 {
                db(e / total)
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect()
}

/// Least-squares line through the decay curve between `upper_db` and `lower_db`
/// (e.g. -5 and -35), extrapolated to 60 dB of decay.
pub fn fit_decay_time(
    samples: &[f64],
    sample_rate: f64,
    upper_db: f64,
    lower_db: f64,
) -> Result<f64> {
    fit_curve(&schroeder_curve(samples), sample_rate, upper_db, lower_db)
}

/// T60 of an energy sequence sampled at `rate` values per second (-5 to -35 dB fit).
pub fn t60_from_energy(energy: &[f64], rate: f64) -> Result<f64> {
    fit_curve(&schroeder_curve_energy(energy), rate, -5.0, -35.0)
}

fn fit_curve(curve: &[f64], sample_rate: f64, upper_db: f64, lower_db: f64) -> Result<f64> {
    let start = curve.iter().position(|&v| v <= upper_db);
    let end = curve.iter().position(|&v| v <= lower_db);
    let (start, end) = match (start, end) {
        (Some(s), Some(e)) if e > s + 1 => (s, e),
        _ => {
            return Err(Error::Degenerate(format!(
                "decay curve does not span {upper_db} to {lower_db} dB"
            )))
        }
    };
    let n = (end - start) as f64;
    let (mut st, mut sy, mut stt, mut sty) = (0.0, 0.0, 0.0, 0.0);
    for (i, &y) in curve[start..end].iter().enumerate() {
        let t = (start + i) as f64 / sample_rate;
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
    }
    let slope = (n * sty - st * sy) / (n * stt - st * st);
    if !(slope < 0.0) {
        return Err(Error::Degenerate("decay curve is not decreasing".into()));
    }
    Ok(-60.0 / slope)
}

/// T60 from the -5 to -35 dB range of the Schroeder curve.
pub fn t60(samples: &[f64], sample_rate: f64) -> Result<f64> {
    fit_decay_time(samples, sample_rate, -5.0, -35.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_recovers_t60() {
        let fs = 8000.0;
        let t60_true = 0.5;
        // Energy drops 60 dB in t60: amplitude factor 10^(-3 t / t60).
        let x: Vec<f64> = (0..8000)
            .map(|n| 10f64.powf(-3.0 * n as f64 / fs / t60_true))
            .collect();
        let est = t60(&x, fs).unwrap();
        assert!((est - t60_true).abs() < 1e-3, "{est}");
    }

    #[test]
    fn silence_is_degenerate() {
        assert!(t60(&[0.0; 100], 8000.0).is_err());
    }
}
