use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::Echogram;
use crate::bands::NUM_BANDS;
use crate::dsp::{octave_filterbank, render_band_impulses, BandImpulse};
use crate::error::{Error, Result};
use crate::rir::Rir;
use crate::scene::Engine;

/// Renders an echogram as a pressure impulse response.
///
/// Each band gets its own seeded Gaussian noise, band-passed by the octave filterbank.
/// Echogram entries are energies of a flat-spectrum arrival measured in each band, the
/// convention shared with the image-source engine: an arrival of energy `E` in every band
/// is an impulse of energy `E`. Band `b` of bin `k` therefore receives `E[b][k] · w[b]`,
/// where `w` are the filterbank's normalized band energy fractions. Within every bin the
/// band signals are made mutually orthogonal (Gram-Schmidt, lowest band first) so the
/// bin energy of the sum is exactly `Σ_b E[b][k] · w[b]`. The direct sound is rendered
/// as a band-shaped impulse with per-band gains `sqrt(E[b])`, which has the same band
/// energies.
pub fn echogram_to_rir(echogram: &Echogram, seed: u64, sample_rate: f64) -> Result<Rir> {
    if echogram
        .energy
        .iter()
        .flatten()
        .any(|e| !e.is_finite() || *e < 0.0)
    {
        return Err(Error::Numerical(
            "echogram entries must be finite and non-negative".into(),
        ));
    }
    let bins = echogram.num_bins();
    let edge = |k: usize| (k as f64 * echogram.bin_width * sample_rate).round() as usize;
    let len = edge(bins);

    let mut targets = echogram.energy.clone();
    let mut out = vec![0.0; len];
    if let Some(d) = &echogram.direct {
        let k = echogram.bin_of(d.time);
        if k < bins {
            for b in 0..NUM_BANDS {
                targets[b][k] = (targets[b][k] - d.energy[b]).max(0.0);
            }
        }
        let pulse = BandImpulse {
            delay_s: d.time,
            gains: std::array::from_fn(|b| d.energy[b].sqrt()),
        };
        out = render_band_impulses(&[pulse], sample_rate, len, true)?;
    }

    if targets.iter().flatten().all(|&e| e == 0.0) {
        return Ok(finish(out, sample_rate));
    }
    let bank = octave_filterbank(sample_rate)?;
    let weights = bank.band_energy_fractions();
    let mut noise: Vec<Vec<f64>> = (0..NUM_BANDS)
        .map(|b| {
            if targets[b].iter().all(|&e| e == 0.0) {
                return vec![0.0; len];
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let white: Vec<f64> = (0..len).map(|_| StandardNormal.sample(&mut rng)).collect();
            bank.filter_band(&white, b)
        })
        .collect();

    for k in 0..bins {
        let (s, e) = (edge(k), edge(k + 1));
        if e <= s {
            continue;
        }
        let mut done: Vec<usize> = Vec::new();
        for b in 0..NUM_BANDS {
            let target = targets[b][k] * weights[b];
            if target == 0.0 {
                noise[b][s..e].iter_mut().for_each(|v| *v = 0.0);
                continue;
            }
            let raw_energy: f64 = noise[b][s..e].iter().map(|v| v * v).sum();
            for &p in &done {
                let (lo, hi) = noise.split_at_mut(b);
                let prev = &lo[p][s..e];
                let cur = &mut hi[0][s..e];
                let pp: f64 = prev.iter().map(|v| v * v).sum();
                let proj = prev.iter().zip(cur.iter()).map(|(a, c)| a * c).sum::<f64>() / pp;
                cur.iter_mut().zip(prev).for_each(|(c, a)| *c -= proj * a);
            }
            let mut energy: f64 = noise[b][s..e].iter().map(|v| v * v).sum();
            if energy <= 1e-12 * raw_energy || energy == 0.0 {
                // Bin shorter than the number of active bands: use a flat block instead.
                noise[b][s..e].iter_mut().for_each(|v| *v = 1.0);
                energy = (e - s) as f64;
            }
            let g = (target / energy).sqrt();
            noise[b][s..e].iter_mut().for_each(|v| *v *= g);
            done.push(b);
        }
    }
    for band in &noise {
        for (o, v) in out.iter_mut().zip(band) {
            *o += v;
        }
    }
    Ok(finish(out, sample_rate))
}

fn finish(samples: Vec<f64>, sample_rate: f64) -> Rir {
    Rir::new(samples, sample_rate, Engine::Rt)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_echogram_gives_zero_rir() {
        let e = Echogram::zeros("r", 50, 1e-3);
        let r = echogram_to_rir(&e, 1, 16000.0).unwrap();
        assert_eq!(r.len(), 800);
        assert!(r.samples.iter().all(|&v| v == 0.0));
    }
}
