use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{MetricName, MetricValue};
use crate::dsp::{resample_slice, AudioBuffer};
use crate::error::{Error, Result};

pub const ESTOI_RATE: f64 = 10000.0;
pub const ESTOI_FRAME: usize = 256;
pub const ESTOI_FFT: usize = 512;
pub const ESTOI_BANDS: usize = 15;
const ESTOI_MIN_FREQ: f64 = 150.0;
/// Frames per intermediate-intelligibility segment.
pub const ESTOI_SEGMENT: usize = 30;
/// Frames quieter than the loudest clean frame by more than this are dropped.
pub const ESTOI_DYN_RANGE_DB: f64 = 40.0;
const HOP: usize = ESTOI_FRAME / 2;

/// Extended short-time objective intelligibility of `processed` against `clean`.
pub fn estoi(clean: &AudioBuffer, processed: &AudioBuffer) -> Result<MetricValue> {
    if clean.sample_rate != processed.sample_rate {
        return Err(Error::SampleRateMismatch(
            clean.sample_rate,
            processed.sample_rate,
        ));
    }
    Ok(MetricValue {
        name: MetricName::Estoi,
        value: estoi_slices(&clean.samples, &processed.samples, clean.sample_rate)?,
    })
}

/// Hann window without the zero end points (`hanning(n + 2)[1..n + 1]`).
fn window() -> Vec<f64> {
    (0..ESTOI_FRAME)
        .map(|i| {
            0.5 - 0.5
                * (2.0 * std::f64::consts::PI * (i + 1) as f64 / (ESTOI_FRAME + 1) as f64).cos()
        })
        .collect()
}

fn frame_starts(len: usize) -> impl Iterator<Item = usize> {
    (0..len.saturating_sub(ESTOI_FRAME)).step_by(HOP)
}

/// Drops frames of both signals where `clean` is more than the dynamic range below its
/// loudest frame, then overlap-adds the kept windowed frames back into signals.
fn remove_silent_frames(x: &[f64], y: &[f64], w: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let starts: Vec<usize> = frame_starts(x.len()).collect();
    let energy: Vec<f64> = starts
        .iter()
        .map(|&s| {
            let n = x[s..s + ESTOI_FRAME]
                .iter()
                .zip(w)
                .map(|(v, w)| (v * w).powi(2))
                .sum::<f64>()
                .sqrt();
            20.0 * (n + f64::EPSILON).log10()
        })
        .collect();
    let max = energy.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let kept: Vec<usize> = starts
        .iter()
        .zip(&energy)
        .filter(|(_, &e)| max - ESTOI_DYN_RANGE_DB - e < 0.0)
        .map(|(&s, _)| s)
        .collect();
    let out_len = if kept.is_empty() {
        0
    } else {
        (kept.len() + 1) * HOP
    };
    let mut xs = vec![0.0; out_len];
    let mut ys = vec![0.0; out_len];
    for (j, &s) in kept.iter().enumerate() {
        for i in 0..ESTOI_FRAME {
            xs[j * HOP + i] += w[i] * x[s + i];
            ys[j * HOP + i] += w[i] * y[s + i];
        }
    }
    (xs, ys)
}

/// One-third-octave band edges as FFT bin ranges `[lo, hi)`.
fn third_octave_bins() -> Vec<(usize, usize)> {
    let nbins = ESTOI_FFT / 2 + 1;
    let f: Vec<f64> = (0..nbins)
        .map(|k| k as f64 * ESTOI_RATE / ESTOI_FFT as f64)
        .collect();
    let nearest = |target: f64| {
        let mut best = 0;
        for k in 1..nbins {
            if (f[k] - target).powi(2) < (f[best] - target).powi(2) {
                best = k;
            }
        }
        best
    };
    (0..ESTOI_BANDS)
        .map(|i| {
            let lo = ESTOI_MIN_FREQ * 2f64.powf((2.0 * i as f64 - 1.0) / 6.0);
            let hi = ESTOI_MIN_FREQ * 2f64.powf((2.0 * i as f64 + 1.0) / 6.0);
            (nearest(lo), nearest(hi))
        })
        .collect()
}

/// Band envelopes `[band][frame]`.
fn band_envelopes(x: &[f64], w: &[f64], bands: &[(usize, usize)]) -> Vec<Vec<f64>> {
    let fft = FftPlanner::<f64>::new().plan_fft_forward(ESTOI_FFT);
    let starts: Vec<usize> = frame_starts(x.len()).collect();
    let mut env = vec![Vec::with_capacity(starts.len()); bands.len()];
    let mut buf = vec![Complex64::default(); ESTOI_FFT];
    for &s in &starts {
        buf.iter_mut().for_each(|c| *c = Complex64::default());
        for i in 0..ESTOI_FRAME {
            buf[i] = Complex64::new(w[i] * x[s + i], 0.0);
        }
        fft.process(&mut buf);
        for (b, &(lo, hi)) in bands.iter().enumerate() {
            env[b].push(buf[lo..hi].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt());
        }
    }
    env
}

/// Mean- and norm-normalizes rows then columns of a `[band][frame]` segment.
fn normalize(seg: &mut [Vec<f64>]) {
    let scale = |v: &mut [f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter_mut().for_each(|x| *x -= m);
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.0 {
            v.iter_mut().for_each(|x| *x /= n);
        }
    };
    for row in seg.iter_mut() {
        scale(row);
    }
    let cols = seg[0].len();
    let mut col = vec![0.0; seg.len()];
    for t in 0..cols {
        for (b, row) in seg.iter().enumerate() {
            col[b] = row[t];
        }
        scale(&mut col);
        for (b, row) in seg.iter_mut().enumerate() {
            row[t] = col[b];
        }
    }
}

/// ESTOI on raw slices at `sample_rate`, resampled to 10 kHz first.
pub fn estoi_slices(clean: &[f64], processed: &[f64], sample_rate: f64) -> Result<f64> {
    if clean.len() != processed.len() {
        return Err(Error::LengthMismatch(clean.len(), processed.len()));
    }
    if clean.iter().all(|&v| v == 0.0) {
        return Err(Error::Degenerate("ESTOI clean signal is silent".into()));
    }
    if clean.iter().chain(processed).any(|v| !v.is_finite()) {
        return Err(Error::Numerical(
            "ESTOI input contains non-finite samples".into(),
        ));
    }
    let (x, y) = if sample_rate == ESTOI_RATE {
        (clean.to_vec(), processed.to_vec())
    } else {
        (
            resample_slice(clean, sample_rate, ESTOI_RATE),
            resample_slice(processed, sample_rate, ESTOI_RATE),
        )
    };
    let w = window();
    let (xs, ys) = remove_silent_frames(&x, &y, &w);
    let bands = third_octave_bins();
    let xe = band_envelopes(&xs, &w, &bands);
    let ye = band_envelopes(&ys, &w, &bands);
    let frames = xe[0].len();
    if frames < ESTOI_SEGMENT {
        return Err(Error::Degenerate(format!(
            "ESTOI needs at least {ESTOI_SEGMENT} non-silent frames, got {frames}"
        )));
    }
    let mut total = 0.0;
    let segments = frames - ESTOI_SEGMENT + 1;
    for m in ESTOI_SEGMENT..=frames {
        let mut xseg: Vec<Vec<f64>> = xe
            .iter()
            .map(|r| r[m - ESTOI_SEGMENT..m].to_vec())
            .collect();
        let mut yseg: Vec<Vec<f64>> = ye
            .iter()
            .map(|r| r[m - ESTOI_SEGMENT..m].to_vec())
            .collect();
        normalize(&mut xseg);
        normalize(&mut yseg);
        let dot: f64 = xseg
            .iter()
            .zip(&yseg)
            .map(|(a, b)| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>())
            .sum();
        total += dot / ESTOI_SEGMENT as f64;
    }
    Ok((total / segments as f64).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_layout() {
        let b = third_octave_bins();
        assert_eq!(b.len(), 15);
        // 150 Hz * 2^(-1/6) = 133.6 Hz is nearest to bin 7 (136.7 Hz).
        assert_eq!(b[0].0, 7);
        for w in b.windows(2) {
            assert_eq!(w[0].1, w[1].0);
        }
        assert!(b[14].1 <= 257);
    }
}
