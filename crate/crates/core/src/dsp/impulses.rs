use super::fir::sinc;
use super::octave_filterbank;
use crate::bands::{BandValues, NUM_BANDS};
use crate::error::Result;

/// Tap count of the fractional-delay interpolator.
pub const FRACTIONAL_DELAY_TAPS: usize = 81;

/// An arrival with a per-band amplitude.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BandImpulse {
    pub delay_s: f64,
    pub gains: BandValues,
}

/// 81-tap Hann-windowed sinc centred at fractional sample position `tau`.
/// Returns the index of the first tap and the taps, normalized to unit DC gain.
pub fn fractional_delay_kernel(tau: f64) -> (isize, [f64; FRACTIONAL_DELAY_TAPS]) {
    let half = (FRACTIONAL_DELAY_TAPS / 2) as isize;
    let centre = tau.round() as isize;
    let first = centre - half;
    let mut taps = [0.0; FRACTIONAL_DELAY_TAPS];
    let width = half as f64 + 1.0;
    for (j, t) in taps.iter_mut().enumerate() {
        let x = (first + j as isize) as f64 - tau;
        let w = 0.5 * (1.0 + (std::f64::consts::PI * x / width).cos());
        *t = sinc(x) * w;
    }
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    (first, taps)
}

fn place(out: &mut [f64], tau: f64, amp: f64, fractional: bool) {
    let len = out.len() as isize;
    if fractional {
        let (first, taps) = fractional_delay_kernel(tau);
        for (j, t) in taps.iter().enumerate() {
            let n = first + j as isize;
            if n >= 0 && n < len {
                out[n as usize] += amp * t;
            }
        }
    } else {
        let n = tau.round() as isize;
        if n >= 0 && n < len {
            out[n as usize] += amp;
        }
    }
}

/// Streaming renderer for band-weighted arrivals.
///
/// Arrivals with equal gains in every band go straight into a broadband train; others
/// go into per-band trains that are shaped by their octave filters in [`finish`]. The
/// filterbank sums to a pure delay, so both paths agree for flat gains.
///
/// [`finish`]: ImpulseAccumulator::finish
#[derive(Clone, Debug)]
pub struct ImpulseAccumulator {
    sample_rate: f64,
    fractional: bool,
    broadband: Vec<f64>,
    bands: Option<Vec<Vec<f64>>>,
}

impl ImpulseAccumulator {
    pub fn new(len: usize, sample_rate: f64, fractional: bool) -> Self {
        Self {
            sample_rate,
            fractional,
            broadband: vec![0.0; len],
            bands: None,
        }
    }

    pub fn add(&mut self, imp: &BandImpulse) {
        let tau = imp.delay_s * self.sample_rate;
        if imp.gains.iter().all(|&g| g == imp.gains[0]) {
            if imp.gains[0] != 0.0 {
                place(&mut self.broadband, tau, imp.gains[0], self.fractional);
            }
            return;
        }
        let len = self.broadband.len();
        let trains = self
            .bands
            .get_or_insert_with(|| vec![vec![0.0; len]; NUM_BANDS]);
        for (b, train) in trains.iter_mut().enumerate() {
            if imp.gains[b] != 0.0 {
                place(train, tau, imp.gains[b], self.fractional);
            }
        }
    }

    /// Sums the broadband train and the band-filtered trains.
    pub fn finish(self) -> Result<Vec<f64>> {
        let mut out = self.broadband;
        if let Some(trains) = self.bands {
            let bank = octave_filterbank(self.sample_rate)?;
            for (b, train) in trains.iter().enumerate() {
                if train.iter().all(|&v| v == 0.0) {
                    continue;
                }
                for (o, v) in out.iter_mut().zip(bank.filter_band(train, b)) {
                    *o += v;
                }
            }
        }
        Ok(out)
    }
}

/// Renders arrivals into a `len`-sample response at `sample_rate`, in the given order.
pub fn render_band_impulses(
    impulses: &[BandImpulse],
    sample_rate: f64,
    len: usize,
    fractional: bool,
) -> Result<Vec<f64>> {
    let mut acc = ImpulseAccumulator::new(len, sample_rate, fractional);
    for imp in impulses {
        acc.add(imp);
    }
    acc.finish()
}
