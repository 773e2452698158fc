//! Signal-processing kernels: convolution, FIR and biquad filters, resampling, STFT, the octave
//! filterbank, WAV I/O and energy-decay analysis.
//!
//! Everything here is a pure function of its inputs.

mod convolve;
pub mod decay;
mod filterbank;
pub mod fir;
mod iir;
mod impulses;
mod resample;
mod stft;
pub mod wav;

pub use convolve::{convolve, direct_convolve, fft_convolve};
pub use filterbank::{octave_filterbank, OctaveFilterbank};
pub use fir::{lowpass, LOWPASS_TAPS};
pub use iir::{highpass, Biquad};
pub use impulses::{
    fractional_delay_kernel, render_band_impulses, BandImpulse, ImpulseAccumulator,
    FRACTIONAL_DELAY_TAPS,
};
pub use resample::{resample, resample_slice, Resampler};
pub use stft::{istft, stft, StftFrame, StftSpec};

use crate::error::{Error, Result};

/// Mono audio with its sample rate.
#[derive(Clone, Debug, PartialEq)]
pub struct AudioBuffer {
    pub samples: Vec<f64>,
    pub sample_rate: f64,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f64>, sample_rate: f64) -> Self {
        Self {
            samples,
            sample_rate,
        }
    }

    pub fn zeros(len: usize, sample_rate: f64) -> Self {
        Self::new(vec![0.0; len], sample_rate)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|x| x * x).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate > 0.0 && self.sample_rate.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "sample rate must be positive, got {}",
                self.sample_rate
            )));
        }
        if let Some(i) = self.samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::Numerical(format!("non-finite sample at index {i}")));
        }
        Ok(())
    }

    /// Truncates or zero-pads to `len` samples.
    pub fn with_len(mut self, len: usize) -> Self {
        self.samples.resize(len, 0.0);
        self
    }
}

/// Channel-major multichannel audio.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiChannelBuffer {
    pub channels: Vec<Vec<f64>>,
    pub sample_rate: f64,
}

impl MultiChannelBuffer {
    pub fn new(channels: Vec<Vec<f64>>, sample_rate: f64) -> Self {
        Self {
            channels,
            sample_rate,
        }
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn len(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channel(&self, i: usize) -> AudioBuffer {
        AudioBuffer::new(self.channels[i].clone(), self.sample_rate)
    }
}

/// Amplitude of a pure tone at `freq_hz` estimated by projection onto sin/cos.
pub fn tone_amplitude(samples: &[f64], sample_rate: f64, freq_hz: f64) -> f64 {
    let w = 2.0 * std::f64::consts::PI * freq_hz / sample_rate;
    let (mut s, mut c) = (0.0, 0.0);
    for (n, &x) in samples.iter().enumerate() {
        let ph = w * n as f64;
        s += x * ph.sin();
        c += x * ph.cos();
    }
    2.0 * (s * s + c * c).sqrt() / samples.len() as f64
}

pub(crate) fn db(x: f64) -> f64 {
    10.0 * x.log10()
}
