//! Synthetic speech-like material for self-contained demos and tests.
//!
//! An utterance is a sequence of syllables separated by short pauses. Each syllable is
//! an excitation (a glottal pulse train with jittered pitch, or white noise for
//! unvoiced syllables) through three two-pole resonators at random formant
//! frequencies, shaped by a `sin^2` envelope. The result is peak-normalized to 0.5.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dsp::AudioBuffer;

const FORMANT_RANGES: [(f64, f64); 3] = [(300.0, 900.0), (900.0, 2500.0), (2500.0, 3500.0)];
const FORMANT_BANDWIDTH_HZ: f64 = 120.0;
const VOICED_PROBABILITY: f64 = 0.7;

/// Two-pole resonator, normalized to unit gain at its centre frequency.
struct Resonator {
    a1: f64,
    a2: f64,
    g: f64,
    y1: f64,
    y2: f64,
}

impl Resonator {
    fn new(freq: f64, bandwidth: f64, rate: f64) -> Self {
        let r = (-std::f64::consts::PI * bandwidth / rate).exp();
        let theta = 2.0 * std::f64::consts::PI * freq / rate;
        Self {
            a1: 2.0 * r * theta.cos(),
            a2: -r * r,
            g: 1.0 - r,
            y1: 0.0,
            y2: 0.0,
        }
    }

    fn step(&mut self, x: f64) -> f64 {
        let y = self.g * x + self.a1 * self.y1 + self.a2 * self.y2;
        self.y2 = self.y1;
        self.y1 = y;
        y
    }
}

/// A deterministic speech-like utterance of `seconds` at `sample_rate`.
pub fn speech_like(seed: u64, seconds: f64, sample_rate: f64) -> AudioBuffer {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = (seconds * sample_rate).round() as usize;
    let mut out = vec![0.0; len];
    let mut pos = (rng.gen_range(0.02..0.1) * sample_rate) as usize;
    while pos < len {
        let syl = (rng.gen_range(0.12..0.3) * sample_rate) as usize;
        let voiced = rng.gen_bool(VOICED_PROBABILITY);
        let pitch = rng.gen_range(95.0..220.0);
        let mut res: Vec<Resonator> = FORMANT_RANGES
            .iter()
            .map(|&(lo, hi)| {
                Resonator::new(rng.gen_range(lo..hi), FORMANT_BANDWIDTH_HZ, sample_rate)
            })
            .collect();
        let level = rng.gen_range(0.3..1.0);
        let mut phase = 0.0;
        for i in 0..syl.min(len - pos) {
            let excitation = if voiced {
                phase += pitch * (1.0 + 0.01 * rng.sample::<f64, _>(StandardNormal)) / sample_rate;
                if phase >= 1.0 {
                    phase -= 1.0;
                    1.0
                } else {
                    0.0
                }
            } else {
                0.3 * rng.sample::<f64, _>(StandardNormal)
            };
            let y: f64 = res.iter_mut().map(|r| r.step(excitation)).sum();
            let env = (std::f64::consts::PI * i as f64 / syl as f64).sin().powi(2);
            out[pos + i] = level * env * y;
        }
        pos += syl + (rng.gen_range(0.03..0.15) * sample_rate) as usize;
    }
    let peak = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        out.iter_mut().for_each(|v| *v *= 0.5 / peak);
    }
    AudioBuffer::new(out, sample_rate)
}
