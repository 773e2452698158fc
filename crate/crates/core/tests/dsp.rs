use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roomeval::dsp::fir::{lowpass_taps, magnitude_response};
use roomeval::dsp::{
    convolve, direct_convolve, fft_convolve, istft, lowpass, octave_filterbank, resample, stft,
    tone_amplitude, AudioBuffer, StftSpec,
};
use roomeval::rir::Rir;
use roomeval::scene::Engine;
use roomeval::Error;

fn noise(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn tone(f: f64, fs: f64, n: usize) -> AudioBuffer {
    AudioBuffer::new(
        (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * f * i as f64 / fs).sin())
            .collect(),
        fs,
    )
}

fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

#[test]
fn convolution_with_unit_impulse_is_identity() {
    let x = noise(500, 1);
    assert_eq!(direct_convolve(&x, &[1.0]), x);
    let y = convolve(&[1.0], &x);
    assert_eq!(y, x);
    let sig = AudioBuffer::new(vec![1.0], 16000.0);
    let rir = Rir::new(x.clone(), 16000.0, Engine::Ism);
    assert_eq!(fft_convolve(&sig, &rir).unwrap().samples, x);
}

#[test]
fn fft_convolution_matches_naive_oracle() {
    let a = noise(1000, 2);
    let b = noise(1000, 3);
    let fast = convolve(&a, &b);
    assert_eq!(fast.len(), 1999);
    // Oracle: textbook double loop written independently of the library.
    let mut slow = vec![0.0; 1999];
    for i in 0..1000 {
        for j in 0..1000 {
            slow[i + j] += a[i] * b[j];
        }
    }
    assert!(rel_l2(&fast, &slow) < 1e-9);
}

#[test]
fn convolution_rejects_rate_mismatch() {
    let sig = AudioBuffer::new(vec![1.0; 4], 16000.0);
    let rir = Rir::new(vec![1.0; 4], 48000.0, Engine::Ism);
    assert!(matches!(
        fft_convolve(&sig, &rir),
        Err(Error::SampleRateMismatch(..))
    ));
}

proptest! {
    #[test]
    fn convolution_is_linear(seed in 0u64..1000, a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let x = noise(300, seed);
        let y = noise(300, seed + 1);
        let h = noise(80, seed + 2);
        let mix: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let lhs = convolve(&mix, &h);
        let cx = convolve(&x, &h);
        let cy = convolve(&y, &h);
        for i in 0..lhs.len() {
            prop_assert!((lhs[i] - (a * cx[i] + b * cy[i])).abs() < 1e-9);
        }
    }
}

#[test]
fn lowpass_passband_and_stopband() {
    let fs = 16000.0;
    let pass = tone(1000.0, fs, 16000);
    let out = lowpass(&pass, 7000.0).unwrap();
    let (a, b) = (
        tone_amplitude(&pass.samples[2000..14000], fs, 1000.0),
        tone_amplitude(&out.samples[2000..14000], fs, 1000.0),
    );
    assert!((20.0 * (b / a).log10()).abs() < 0.1);

    let taps = lowpass_taps(7000.0, fs);
    let atten = -20.0 * magnitude_response(&taps, 7800.0, fs).log10();
    assert!(atten >= 40.0, "attenuation at 7.8 kHz = {atten} dB");

    let stop = tone(7800.0, fs, 16000);
    let y = lowpass(&stop, 7000.0).unwrap();
    let ratio = tone_amplitude(&y.samples[2000..14000], fs, 7800.0);
    assert!(20.0 * ratio.log10() <= -40.0);
}

#[test]
fn lowpass_impulse_returns_aligned_taps() {
    let mut x = vec![0.0; 600];
    x[300] = 1.0;
    let y = lowpass(&AudioBuffer::new(x, 16000.0), 7000.0).unwrap();
    let taps = lowpass_taps(7000.0, 16000.0);
    let mid = taps.len() / 2;
    for (k, t) in taps.iter().enumerate() {
        assert!((y.samples[300 + k - mid] - t).abs() < 1e-12);
    }
    assert_eq!(y.samples.len(), 600);
}

#[test]
fn lowpass_rejects_cutoff_at_nyquist() {
    let x = AudioBuffer::new(vec![0.0; 10], 16000.0);
    assert!(matches!(
        lowpass(&x, 8000.0),
        Err(Error::CutoffAboveNyquist { .. })
    ));
}

#[test]
fn resample_48k_to_16k_keeps_tone_level() {
    let x = tone(1000.0, 48000.0, 48000);
    let y = resample(&x, 16000.0);
    assert_eq!(y.sample_rate, 16000.0);
    assert_eq!(y.len(), 16000);
    let a = tone_amplitude(&x.samples[6000..42000], 48000.0, 1000.0);
    let b = tone_amplitude(&y.samples[2000..14000], 16000.0, 1000.0);
    assert!((20.0 * (b / a).log10()).abs() < 0.1);
}

#[test]
fn resample_passband_edge_within_tenth_db() {
    // 0.45 x min rate.
    let f = 0.45 * 16000.0 * 0.99;
    let x = tone(f, 44100.0, 44100);
    let y = resample(&x, 16000.0);
    let a = tone_amplitude(&x.samples[8000..36000], 44100.0, f);
    let b = tone_amplitude(&y.samples[3000..13000], 16000.0, f);
    assert!(
        (20.0 * (b / a).log10()).abs() < 0.1,
        "{}",
        20.0 * (b / a).log10()
    );
}

#[test]
fn resample_identity_and_dc() {
    let x = AudioBuffer::new(noise(1000, 4), 16000.0);
    let y = resample(&x, 16000.0);
    assert!(rel_l2(&y.samples, &x.samples) < 1e-9);

    let dc = AudioBuffer::new(vec![0.7; 3000], 16000.0);
    let up = resample(&dc, 44100.0);
    for v in &up.samples[400..up.len() - 400] {
        assert!((v - 0.7).abs() < 1e-9);
    }
}

#[test]
fn stft_round_trip_on_noise() {
    let x = AudioBuffer::new(noise(16000, 5), 16000.0);
    let y = istft(&stft(&x, StftSpec::default()).unwrap()).unwrap();
    assert!(rel_l2(&y.samples, &x.samples) < 1e-6);
}

#[test]
fn stft_of_silence_is_zero() {
    let s = stft(&AudioBuffer::zeros(2000, 16000.0), StftSpec::default()).unwrap();
    assert!(s.data.iter().flatten().all(|c| c.norm() == 0.0));
}

#[test]
fn stft_tone_energy_near_its_bin() {
    let fs = 16000.0;
    let f = 1000.0; // bin 32 at 512 points
    let s = stft(&tone(f, fs, 8000), StftSpec::default()).unwrap();
    let row = &s.data[s.num_frames() / 2];
    let total: f64 = row.iter().map(|c| c.norm_sqr()).sum();
    let near: f64 = row[31..=33].iter().map(|c| c.norm_sqr()).sum();
    assert!(near / total > 0.99);
}

#[test]
fn stft_rejects_non_cola() {
    let x = AudioBuffer::zeros(100, 16000.0);
    assert!(matches!(
        stft(
            &x,
            StftSpec {
                fft_size: 512,
                hop: 200
            }
        ),
        Err(Error::NonCola { .. })
    ));
}

#[test]
fn filterbank_is_power_complementary_on_white_noise() {
    let fs = 16000.0;
    let fb = octave_filterbank(fs).unwrap();
    let n = 1 << 16;
    let x = noise(n, 6);
    let bands = fb.split(&x);
    let sum: Vec<f64> = (0..n).map(|i| bands.iter().map(|b| b[i]).sum()).collect();
    // Compare energy in 100-5000 Hz via FFT of input and summed output.
    let spec = |v: &[f64]| {
        use rustfft::{num_complex::Complex64, FftPlanner};
        let mut buf: Vec<Complex64> = v.iter().map(|&r| Complex64::new(r, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        buf
    };
    let (sx, sy) = (spec(&x), spec(&sum));
    let lo = (100.0 / fs * n as f64) as usize;
    let hi = (5000.0 / fs * n as f64) as usize;
    let ex: f64 = sx[lo..hi].iter().map(|c| c.norm_sqr()).sum();
    let ey: f64 = sy[lo..hi].iter().map(|c| c.norm_sqr()).sum();
    let ratio_db = 10.0 * (ey / ex).log10();
    assert!(ratio_db.abs() <= 1.5, "{ratio_db} dB");
}

#[test]
fn filterbank_routes_1khz_to_its_band_and_silence_to_silence() {
    let fb = octave_filterbank(16000.0).unwrap();
    let x = tone(1000.0, 16000.0, 16000);
    let energies: Vec<f64> = fb
        .split(&x.samples)
        .iter()
        .map(|b| b[2000..14000].iter().map(|v| v * v).sum())
        .collect();
    let best = (0..6)
        .max_by(|&a, &b| energies[a].total_cmp(&energies[b]))
        .unwrap();
    assert_eq!(best, 3);
    assert!(fb.split(&[0.0; 500]).iter().flatten().all(|&v| v == 0.0));
    assert!(matches!(
        octave_filterbank(11000.0),
        Err(Error::SampleRateTooLow(..))
    ));
}
