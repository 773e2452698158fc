use super::fir::{kaiser, sinc};
use super::AudioBuffer;

/// Lower-rate periods covered by each side of the interpolation kernel.
const HALF_WIDTH_PERIODS: f64 = 64.0;
/// Cutoff as a fraction of the lower of the two rates.
const CUTOFF_FRACTION: f64 = 0.475;
const KAISER_BETA: f64 = 8.0;
const MAX_POLYPHASE_PHASES: u64 = 4096;

/// Windowed-sinc sample-rate converter.
///
/// When both rates are integers whose reduced ratio has at most 4096 phases the kernel
/// is tabulated per phase (polyphase); otherwise it is evaluated per output sample.
/// Each phase is normalized to unit DC gain.
#[derive(Clone, Debug)]
pub struct Resampler {
    from: f64,
    to: f64,
    cutoff_hz: f64,
    half_width_s: f64,
    /// `(up, down)` and one kernel per phase for the rational case.
    polyphase: Option<(u64, u64, Vec<(isize, Vec<f64>)>)>,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl Resampler {
    pub fn new(from: f64, to: f64) -> Self {
        let low = from.min(to);
        let cutoff_hz = CUTOFF_FRACTION * low;
        let half_width_s = HALF_WIDTH_PERIODS / low;
        let mut r = Self {
            from,
            to,
            cutoff_hz,
            half_width_s,
            polyphase: None,
        };
        if from.fract() == 0.0 && to.fract() == 0.0 {
            let (a, b) = (from as u64, to as u64);
            let g = gcd(a, b);
            let (up, down) = (b / g, a / g);
            if up <= MAX_POLYPHASE_PHASES {
                let phases = (0..up).map(|p| r.kernel(p as f64 / up as f64)).collect();
                r.polyphase = Some((up, down, phases));
            }
        }
        r
    }

    /// Kernel for an output instant `frac` input samples after an integer input index.
    /// Returns the index offset of the first tap and the normalized taps.
    fn kernel(&self, frac: f64) -> (isize, Vec<f64>) {
        let half = self.half_width_s * self.from;
        let first = (frac - half).ceil() as isize;
        let last = (frac + half).floor() as isize;
        let fc = self.cutoff_hz / self.from;
        let mut taps: Vec<f64> = (first..=last)
            .map(|k| {
                let d = frac - k as f64;
                2.0 * fc * sinc(2.0 * fc * d) * kaiser(d / half, KAISER_BETA)
            })
            .collect();
        let sum: f64 = taps.iter().sum();
        if sum != 0.0 {
            taps.iter_mut().for_each(|t| *t /= sum);
        }
        (first, taps)
    }

    pub fn output_len(&self, input_len: usize) -> usize {
        (input_len as f64 * self.to / self.from).ceil() as usize
    }

    pub fn process(&self, input: &[f64]) -> Vec<f64> {
        if self.from == self.to {
            return input.to_vec();
        }
        let n_out = self.output_len(input.len());
        let n_in = input.len() as isize;
        let apply = |base: isize, first: isize, taps: &[f64]| {
            let mut acc = 0.0;
            for (j, &t) in taps.iter().enumerate() {
                let k = base + first + j as isize;
                if k >= 0 && k < n_in {
                    acc += t * input[k as usize];
                }
            }
            acc
        };
        match &self.polyphase {
            Some((up, down, phases)) => (0..n_out as u64)
                .map(|m| {
                    let pos = m * down;
                    let base = (pos / up) as isize;
                    let (first, taps) = &phases[(pos % up) as usize];
                    apply(base, *first, taps)
                })
                .collect(),
            None => (0..n_out)
                .map(|m| {
                    let pos = m as f64 * self.from / self.to;
                    let base = pos.floor();
                    let (first, taps) = self.kernel(pos - base);
                    apply(base as isize, first, &taps)
                })
                .collect(),
        }
    }
}

/// Resamples `input` from `from` Hz to `to` Hz.
pub fn resample_slice(input: &[f64], from: f64, to: f64) -> Vec<f64> {
    Resampler::new(from, to).process(input)
}

/// Resamples to `target_rate`; identical rates return the input unchanged.
pub fn resample(signal: &AudioBuffer, target_rate: f64) -> AudioBuffer {
    AudioBuffer::new(
        resample_slice(&signal.samples, signal.sample_rate, target_rate),
        target_rate,
    )
}
