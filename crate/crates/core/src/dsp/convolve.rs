use num_complex::Complex64;
use rustfft::FftPlanner;

use super::AudioBuffer;
use crate::error::{Error, Result};
use crate::rir::Rir;

/// Full linear convolution of `signal` with an RIR; output length `n + m - 1`.
pub fn fft_convolve(signal: &AudioBuffer, rir: &Rir) -> Result<AudioBuffer> {
    if signal.sample_rate != rir.sample_rate {
        return Err(Error::SampleRateMismatch(
            signal.sample_rate,
            rir.sample_rate,
        ));
    }
    Ok(AudioBuffer::new(
        convolve(&signal.samples, &rir.samples),
        signal.sample_rate,
    ))
}

/// Full linear convolution. Short inputs use the direct sum, longer ones an FFT.
pub fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    if a.len().min(b.len()) <= 32 {
        return direct_convolve(a, b);
    }
    let out_len = a.len() + b.len() - 1;
    let n = out_len.next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);

    let mut fa: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fa.resize(n, Complex64::default());
    let mut fb: Vec<Complex64> = b.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fb.resize(n, Complex64::default());
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    inv.process(&mut fa);
    let scale = 1.0 / n as f64;
    fa[..out_len].iter().map(|c| c.re * scale).collect()
}

/// O(n m) reference convolution.
pub fn direct_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}
