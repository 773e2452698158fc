//! Windowed-sinc FIR design.

use std::f64::consts::PI;

use super::{convolve, AudioBuffer};
use crate::error::{Error, Result};

/// Tap count of [`lowpass`].
pub const LOWPASS_TAPS: usize = 255;
/// Stopband attenuation target of [`lowpass`], in dB.
pub const LOWPASS_STOPBAND_DB: f64 = 60.0;

/// Zeroth-order modified Bessel function of the first kind.
pub fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let q = x * x / 4.0;
    for k in 1..200 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

/// Kaiser window shape parameter for a given stopband attenuation (dB).
pub fn kaiser_beta(atten_db: f64) -> f64 {
    if atten_db > 50.0 {
        0.1102 * (atten_db - 8.7)
    } else if atten_db >= 21.0 {
        0.5842 * (atten_db - 21.0).powf(0.4) + 0.07886 * (atten_db - 21.0)
    } else {
        0.0
    }
}

/// Kaiser window evaluated at `t` in `[-1, 1]` (0 outside).
pub fn kaiser(t: f64, beta: f64) -> f64 {
    if t.abs() > 1.0 {
        return 0.0;
    }
    bessel_i0(beta * (1.0 - t * t).max(0.0).sqrt()) / bessel_i0(beta)
}

pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        let px = PI * x;
        px.sin() / px
    }
}

/// Linear-phase low-pass: `num_taps` (odd) Kaiser-windowed sinc with -6 dB point at
/// `cutoff_hz`, normalized to unit DC gain.
pub fn design_lowpass(
    num_taps: usize,
    cutoff_hz: f64,
    sample_rate: f64,
    atten_db: f64,
) -> Vec<f64> {
    assert!(
        num_taps % 2 == 1,
        "linear-phase design needs an odd tap count"
    );
    let fc = cutoff_hz / sample_rate;
    let mid = (num_taps / 2) as f64;
    let beta = kaiser_beta(atten_db);
    let mut h: Vec<f64> = (0..num_taps)
        .map(|n| {
            let k = n as f64 - mid;
            2.0 * fc * sinc(2.0 * fc * k) * kaiser(k / mid.max(1.0), beta)
        })
        .collect();
    let dc: f64 = h.iter().sum();
    h.iter_mut().for_each(|x| *x /= dc);
    h
}

/// Filters with a symmetric FIR and removes its group delay; output has the input length.
pub fn filter_zero_delay(signal: &[f64], taps: &[f64]) -> Vec<f64> {
    let delay = taps.len() / 2;
    let full = convolve(signal, taps);
    (0..signal.len())
        .map(|n| full.get(n + delay).copied().unwrap_or(0.0))
        .collect()
}

/// Magnitude response of `taps` at `freq_hz`.
pub fn magnitude_response(taps: &[f64], freq_hz: f64, sample_rate: f64) -> f64 {
    let w = 2.0 * PI * freq_hz / sample_rate;
    let (mut re, mut im) = (0.0, 0.0);
    for (n, &h) in taps.iter().enumerate() {
        re += h * (w * n as f64).cos();
        im -= h * (w * n as f64).sin();
    }
    (re * re + im * im).sqrt()
}

/// Taps used by [`lowpass`] at the given cutoff and rate.
pub fn lowpass_taps(cutoff_hz: f64, sample_rate: f64) -> Vec<f64> {
    design_lowpass(LOWPASS_TAPS, cutoff_hz, sample_rate, LOWPASS_STOPBAND_DB)
}

/// 255-tap linear-phase Kaiser low-pass (-60 dB stopband), time-aligned with the input.
pub fn lowpass(signal: &AudioBuffer, cutoff_hz: f64) -> Result<AudioBuffer> {
    let nyquist = signal.sample_rate / 2.0;
    if !(cutoff_hz > 0.0) || cutoff_hz >= nyquist {
        return Err(Error::CutoffAboveNyquist {
            cutoff_hz,
            nyquist_hz: nyquist,
        });
    }
    let taps = lowpass_taps(cutoff_hz, signal.sample_rate);
    Ok(AudioBuffer::new(
        filter_zero_delay(&signal.samples, &taps),
        signal.sample_rate,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bessel_reference_values() {
        assert!((bessel_i0(0.0) - 1.0).abs() < 1e-15);
        assert!((bessel_i0(1.0) - 1.2660658777520082).abs() < 1e-13);
        assert!((bessel_i0(5.0) - 27.239871823604442).abs() < 1e-10);
    }

    #[test]
    fn lowpass_design_is_symmetric_with_unit_dc() {
        let h = lowpass_taps(7000.0, 16000.0);
        assert_eq!(h.len(), 255);
        for i in 0..h.len() {
            assert!((h[i] - h[h.len() - 1 - i]).abs() < 1e-15);
        }
        assert!((h.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
