//! Causal second-order sections.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use super::AudioBuffer;
use crate::error::{Error, Result};

/// Normalized biquad coefficients (`a0 = 1`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Biquad {
    /// Second-order Butterworth high-pass (bilinear transform with pre-warping).
    pub fn butterworth_highpass(cutoff_hz: f64, sample_rate: f64) -> Result<Self> {
        let nyquist = sample_rate / 2.0;
        if !(cutoff_hz > 0.0) || cutoff_hz >= nyquist {
            return Err(Error::CutoffAboveNyquist {
                cutoff_hz,
                nyquist_hz: nyquist,
            });
        }
        let w = 2.0 * PI * cutoff_hz / sample_rate;
        let (cos, alpha) = (w.cos(), w.sin() / (2.0 * FRAC_1_SQRT_2));
        let a0 = 1.0 + alpha;
        let g = (1.0 + cos) / 2.0 / a0;
        Ok(Self {
            b: [g, -2.0 * g, g],
            a: [-2.0 * cos / a0, (1.0 - alpha) / a0],
        })
    }

    /// Direct form I, zero initial state.
    pub fn filter(&self, x: &[f64]) -> Vec<f64> {
        let [b0, b1, b2] = self.b;
        let [a1, a2] = self.a;
        let (mut x1, mut x2, mut y1, mut y2) = (0.0, 0.0, 0.0, 0.0);
        x.iter()
            .map(|&x0| {
                let y0 = b0 * x0 + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
                (x2, x1, y2, y1) = (x1, x0, y1, y0);
                y0
            })
            .collect()
    }

    /// Magnitude response at `freq_hz`.
    pub fn magnitude(&self, freq_hz: f64, sample_rate: f64) -> f64 {
        let w = 2.0 * PI * freq_hz / sample_rate;
        let z = |k: f64| num_complex::Complex64::from_polar(1.0, -k * w);
        let num = self.b[0] + self.b[1] * z(1.0) + self.b[2] * z(2.0);
        let den = 1.0 + self.a[0] * z(1.0) + self.a[1] * z(2.0);
        (num / den).norm()
    }
}

/// Causal DC-blocking high-pass (second-order Butterworth).
pub fn highpass(signal: &AudioBuffer, cutoff_hz: f64) -> Result<AudioBuffer> {
    let bq = Biquad::butterworth_highpass(cutoff_hz, signal.sample_rate)?;
    Ok(AudioBuffer::new(
        bq.filter(&signal.samples),
        signal.sample_rate,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn butterworth_response() {
        let fs = 16000.0;
        let bq = Biquad::butterworth_highpass(20.0, fs).unwrap();
        assert!(bq.magnitude(0.0, fs) < 1e-12);
        assert!((bq.magnitude(20.0, fs) - FRAC_1_SQRT_2).abs() < 1e-9);
        assert!((bq.magnitude(1000.0, fs) - 1.0).abs() < 1e-5);
        assert!((bq.magnitude(fs / 2.0, fs) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn removes_a_constant() {
        let y = highpass(&AudioBuffer::new(vec![1.0; 32000], 16000.0), 20.0).unwrap();
        assert!(y.samples[y.len() - 100..].iter().all(|v| v.abs() < 1e-6));
        assert!(Biquad::butterworth_highpass(9000.0, 16000.0).is_err());
    }
}
