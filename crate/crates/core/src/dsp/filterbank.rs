use super::convolve;
use super::fir::design_lowpass;
use crate::bands::{crossover_frequencies, upper_band_edge, NUM_BANDS};
use crate::error::{Error, Result};

/// Six linear-phase octave band-pass filters (125 Hz to 4 kHz centres).
///
/// Band `k` is the difference of two equal-length low-pass designs at the crossovers
/// below and above it; the lowest band reaches down to DC and the highest up to Nyquist.
/// The bands therefore sum to a pure delay of `delay()` samples.
#[derive(Clone, Debug)]
pub struct OctaveFilterbank {
    pub sample_rate: f64,
    pub filters: Vec<Vec<f64>>,
}

/// Builds the bank for `sample_rate`. Filter length is `2 * round(0.032 fs) + 1`.
pub fn octave_filterbank(sample_rate: f64) -> Result<OctaveFilterbank> {
    let min_rate = 2.0 * upper_band_edge();
    if !(sample_rate >= min_rate) {
        return Err(Error::SampleRateTooLow(sample_rate, min_rate));
    }
    let len = 2 * (0.032 * sample_rate).round() as usize + 1;
    let lows: Vec<Vec<f64>> = crossover_frequencies()
        .iter()
        .map(|&fc| design_lowpass(len, fc, sample_rate, 70.0))
        .collect();
    let mid = len / 2;
    let mut filters = Vec::with_capacity(NUM_BANDS);
    for b in 0..NUM_BANDS {
        let mut h = if b < NUM_BANDS - 1 {
            lows[b].clone()
        } else {
            let mut d = vec![0.0; len];
            d[mid] = 1.0;
            d
        };
        if b > 0 {
            for (x, l) in h.iter_mut().zip(&lows[b - 1]) {
                *x -= l;
            }
        }
        filters.push(h);
    }
    Ok(OctaveFilterbank {
        sample_rate,
        filters,
    })
}

impl OctaveFilterbank {
    pub fn len(&self) -> usize {
        self.filters[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.filters.is_empty()
    }

    /// Group delay in samples, identical for every band.
    pub fn delay(&self) -> usize {
        self.len() / 2
    }

    /// Filters `signal` through band `band` with the group delay removed.
    pub fn filter_band(&self, signal: &[f64], band: usize) -> Vec<f64> {
        let full = convolve(signal, &self.filters[band]);
        let d = self.delay();
        (0..signal.len())
            .map(|n| full.get(n + d).copied().unwrap_or(0.0))
            .collect()
    }

    /// All six band signals, zero-delay.
    pub fn split(&self, signal: &[f64]) -> Vec<Vec<f64>> {
        (0..NUM_BANDS)
            .map(|b| self.filter_band(signal, b))
            .collect()
    }

    /// Share of a unit impulse's energy that falls in each band (`Σ h_b²`), normalized
    /// to sum to one.
    pub fn band_energy_fractions(&self) -> [f64; NUM_BANDS] {
        let mut w = [0.0; NUM_BANDS];
        for (x, f) in w.iter_mut().zip(&self.filters) {
            *x = f.iter().map(|t| t * t).sum();
        }
        let total: f64 = w.iter().sum();
        w.map(|x| x / total)
    }

    /// Single FIR whose response is `Σ gains[b] · band_b`, centred at `delay()`.
    pub fn combined(&self, gains: &[f64]) -> Vec<f64> {
        let mut h = vec![0.0; self.len()];
        for (f, &g) in self.filters.iter().zip(gains) {
            if g != 0.0 {
                for (x, t) in h.iter_mut().zip(f) {
                    *x += g * t;
                }
            }
        }
        h
    }
}
