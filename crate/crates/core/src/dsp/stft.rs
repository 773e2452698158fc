use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::AudioBuffer;
use crate::error::{Error, Result};

/// STFT parameters. The window is always a periodic Hann of length `fft_size`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StftSpec {
    pub fft_size: usize,
    pub hop: usize,
}

impl Default for StftSpec {
    fn default() -> Self {
        Self {
            fft_size: 512,
            hop: 128,
        }
    }
}

impl StftSpec {
    pub fn window(&self) -> Vec<f64> {
        let n = self.fft_size as f64;
        (0..self.fft_size)
            .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n).cos())
            .collect()
    }

    pub fn num_bins(&self) -> usize {
        self.fft_size / 2 + 1
    }

    /// Checks that the squared window overlap-adds to a constant, which makes the
    /// weighted overlap-add inverse exact.
    pub fn check_cola(&self) -> Result<()> {
        let bad = Error::NonCola {
            fft_size: self.fft_size,
            hop: self.hop,
        };
        if self.fft_size < 2 || self.hop == 0 || self.hop > self.fft_size {
            return Err(bad);
        }
        let w = self.window();
        let sums: Vec<f64> = (0..self.hop)
            .map(|r| w.iter().skip(r).step_by(self.hop).map(|x| x * x).sum())
            .collect();
        let max = sums.iter().cloned().fold(f64::MIN, f64::max);
        let min = sums.iter().cloned().fold(f64::MAX, f64::min);
        if min <= 0.0 || (max - min) > 1e-9 * max {
            return Err(bad);
        }
        Ok(())
    }

    fn pad(&self) -> usize {
        self.fft_size - self.hop
    }
}

/// One-sided spectra, `data[frame][bin]`.
#[derive(Clone, Debug, PartialEq)]
pub struct StftFrame {
    pub data: Vec<Vec<Complex64>>,
    pub spec: StftSpec,
    pub sample_rate: f64,
    /// Length of the analysed signal, used to trim the inverse.
    pub signal_len: usize,
}

impl StftFrame {
    pub fn num_frames(&self) -> usize {
        self.data.len()
    }

    pub fn num_bins(&self) -> usize {
        self.spec.num_bins()
    }
}

/// Short-time Fourier transform. The signal is zero-padded by `fft_size - hop` on both
/// sides so every sample is covered by the same number of frames.
pub fn stft(signal: &AudioBuffer, spec: StftSpec) -> Result<StftFrame> {
    spec.check_cola()?;
    let pad = spec.pad();
    let n = spec.fft_size;
    let total = signal.len() + 2 * pad;
    let num_frames = if total >= n {
        (total - n) / spec.hop + 1
    } else {
        1
    };
    let num_frames = if (num_frames - 1) * spec.hop + n < total {
        num_frames + 1
    } else {
        num_frames
    };
    let w = spec.window();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let mut buf = vec![Complex64::default(); n];
    let data = (0..num_frames)
        .map(|f| {
            for (i, b) in buf.iter_mut().enumerate() {
                let pos = (f * spec.hop + i) as isize - pad as isize;
                let x = if pos >= 0 && (pos as usize) < signal.len() {
                    signal.samples[pos as usize]
                } else {
                    0.0
                };
                *b = Complex64::new(x * w[i], 0.0);
            }
            fft.process(&mut buf);
            buf[..spec.num_bins()].to_vec()
        })
        .collect();
    Ok(StftFrame {
        data,
        spec,
        sample_rate: signal.sample_rate,
        signal_len: signal.len(),
    })
}

/// Weighted overlap-add inverse of [`stft`], trimmed to the original length.
pub fn istft(frames: &StftFrame) -> Result<AudioBuffer> {
    let spec = frames.spec;
    spec.check_cola()?;
    let n = spec.fft_size;
    let pad = spec.pad();
    let w = spec.window();
    let ifft = FftPlanner::<f64>::new().plan_fft_inverse(n);
    let total = (frames.num_frames().max(1) - 1) * spec.hop + n;
    let mut out = vec![0.0; total];
    let mut norm = vec![0.0; total];
    let mut buf = vec![Complex64::default(); n];
    for (f, row) in frames.data.iter().enumerate() {
        buf[..row.len()].copy_from_slice(row);
        for k in 1..n - row.len() + 1 {
            buf[n - k] = row[k].conj();
        }
        ifft.process(&mut buf);
        let start = f * spec.hop;
        for i in 0..n {
            out[start + i] += buf[i].re / n as f64 * w[i];
            norm[start + i] += w[i] * w[i];
        }
    }
    let samples = (0..frames.signal_len)
        .map(|t| {
            let j = t + pad;
            if j < total && norm[j] > 1e-12 {
                out[j] / norm[j]
            } else {
                0.0
            }
        })
        .collect();
    Ok(AudioBuffer::new(samples, frames.sample_rate))
}
