use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roomeval::dsp::AudioBuffer;
use roomeval::metrics::{
    distance_error, estoi, estoi_slices, ingest_external_scores, si_sdr, si_sdr_slices, Sentinel,
    DISTANCE_PREDICTION,
};
use roomeval::scene::{DatasetManifest, Engine, ManifestEntry, Vec3};
use roomeval::Error;

fn noise(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn zero_mean(v: &mut [f64]) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= m);
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[test]
fn orthogonal_noise_at_one_hundredth_power_is_twenty_db() {
    let mut s = noise(1, 4000);
    zero_mean(&mut s);
    let mut n = noise(2, 4000);
    zero_mean(&mut n);
    let p = dot(&n, &s) / dot(&s, &s);
    n.iter_mut().zip(&s).for_each(|(a, b)| *a -= p * b);
    let g = (dot(&s, &s) / dot(&n, &n) / 100.0).sqrt();
    let est: Vec<f64> = s.iter().zip(&n).map(|(a, b)| a + g * b).collect();
    let v = si_sdr_slices(&est, &s).unwrap();
    assert!((v.value - 20.0).abs() < 1e-6, "{}", v.value);
}

#[test]
fn projection_sentinels() {
    let s = noise(3, 1000);
    let scaled: Vec<f64> = s.iter().map(|v| 2.7 * v).collect();
    let neg: Vec<f64> = s.iter().map(|v| -v).collect();
    assert_eq!(
        si_sdr_slices(&scaled, &s).unwrap().sentinel(),
        Sentinel::PlusInfinity
    );
    assert_eq!(si_sdr_slices(&neg, &s).unwrap().value, f64::INFINITY);
}

#[test]
fn si_sdr_errors() {
    assert!(matches!(
        si_sdr_slices(&[1.0, 2.0], &[1.0]),
        Err(Error::LengthMismatch(2, 1))
    ));
    assert!(matches!(
        si_sdr_slices(&[1.0, 2.0], &[0.0, 0.0]),
        Err(Error::Degenerate(_))
    ));
    let a = AudioBuffer::new(vec![1.0, 2.0], 16000.0);
    let b = AudioBuffer::new(vec![1.0, 2.0], 8000.0);
    assert!(matches!(si_sdr(&a, &b), Err(Error::SampleRateMismatch(..))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn si_sdr_ignores_scaling_of_either_signal(seed in 0u64..1000, beta in 0.01f64..100.0, gamma in 0.01f64..100.0, flip in any::<bool>()) {
        let s = noise(seed, 800);
        let e: Vec<f64> = s.iter().zip(noise(seed + 1, 800)).map(|(a, b)| a + 0.3 * b).collect();
        let beta = if flip { -beta } else { beta };
        let base = si_sdr_slices(&e, &s).unwrap().value;
        let eb: Vec<f64> = e.iter().map(|v| beta * v).collect();
        let sg: Vec<f64> = s.iter().map(|v| gamma * v).collect();
        prop_assert!((si_sdr_slices(&eb, &s).unwrap().value - base).abs() < 1e-9);
        prop_assert!((si_sdr_slices(&e, &sg).unwrap().value - base).abs() < 1e-9);
    }

    #[test]
    fn estoi_is_bounded(seed in 0u64..10_000, mix in -2.0f64..2.0) {
        let x = noise(seed, 5000);
        let y: Vec<f64> = x.iter().zip(noise(seed + 7, 5000)).map(|(a, b)| mix * a + b).collect();
        let v = estoi_slices(&x, &y, 10000.0).unwrap();
        prop_assert!((-1.0..=1.0).contains(&v));
    }
}

/// Deterministic test signals shared with the numpy transcription used as oracle.
fn oracle_signals() -> (Vec<f64>, Vec<f64>) {
    let len = 30000;
    let mut clean: Vec<f64> = (0..len)
        .map(|i| {
            let n = i as f64;
            (0.0731 * n).sin() * (1.0 + 0.8 * (0.0013 * n).sin())
                + 0.3 * (1e-5 * n * n).sin()
                + 0.2 * (0.9 * n).sin() * (0.0007 * n).sin()
        })
        .collect();
    clean[12000..15000].iter_mut().for_each(|v| *v *= 1e-3);
    let proc: Vec<f64> = (0..len)
        .map(|i| {
            let n = i as f64;
            0.6 * clean[i]
                + 0.25 * (1.7 * n + 0.3).sin()
                + 0.2 * clean[(i + len - 400) % len] * (0.002 * n).cos()
        })
        .collect();
    (clean, proc)
}

#[test]
fn estoi_matches_reference_transcription() {
    let (clean, proc) = oracle_signals();
    let v = estoi_slices(&clean, &proc, 10000.0).unwrap();
    assert!((v - 0.697910141236996).abs() < 1e-9, "{v}");
}

#[test]
fn estoi_identity_and_noise() {
    let (clean, _) = oracle_signals();
    let a = AudioBuffer::new(clean.clone(), 10000.0);
    assert!((estoi(&a, &a).unwrap().value - 1.0).abs() < 1e-9);
    let x = noise(11, 100_000);
    let y = noise(12, 100_000);
    let v = estoi_slices(&x, &y, 10000.0).unwrap();
    assert!(v < 0.2, "{v}");
    let resampled = estoi_slices(&noise(5, 48000), &noise(5, 48000), 16000.0).unwrap();
    assert!((resampled - 1.0).abs() < 1e-9);
}

#[test]
fn estoi_errors() {
    assert!(matches!(
        estoi_slices(&[0.0; 5000], &[1.0; 5000], 10000.0),
        Err(Error::Degenerate(_))
    ));
    assert!(matches!(
        estoi_slices(&noise(1, 2000), &noise(2, 2000), 10000.0),
        Err(Error::Degenerate(_))
    ));
    assert!(matches!(
        estoi_slices(&[1.0; 10], &[1.0; 11], 10000.0),
        Err(Error::LengthMismatch(..))
    ));
}

#[test]
fn distance_error_cases() {
    assert_eq!(distance_error(2.5, 2.5).unwrap().value, 0.0);
    assert_eq!(distance_error(1.0, 3.0).unwrap().value, 2.0);
    assert_eq!(distance_error(3.0, 1.0).unwrap().value, 2.0);
    assert!(matches!(
        distance_error(1.0, -0.1),
        Err(Error::OutOfRange { .. })
    ));
}

fn manifest() -> DatasetManifest {
    let (s, r) = (Vec3::new(1.0, 1.0, 1.0), Vec3::new(2.0, 3.0, 1.5));
    DatasetManifest {
        entries: vec![ManifestEntry {
            rir_path: "rirs/a.wav".into(),
            engine: Engine::Measured,
            room_id: "lab".into(),
            condition_id: "c1".into(),
            source_id: "s1".into(),
            receiver_id: "r1".into(),
            source_pos: s,
            receiver_pos: r,
            true_distance: 2.291288,
        }],
    }
}

fn write_scores(rows: &[&str]) -> (tempfile::TempDir, std::path::PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("scores.csv");
    let mut text = String::from("engine,room_id,condition_id,source_id,receiver_id,metric,value\n");
    for r in rows {
        text.push_str(r);
        text.push('\n');
    }
    std::fs::write(&p, text).unwrap();
    (dir, p)
}

#[test]
fn external_pesq_and_distance_rows() {
    let m = manifest();
    let (_d, p) = write_scores(&[
        "measured,lab,c1,s1,r1,pesq,4.2",
        "measured,lab,c1,s1,r1,distance_prediction,2.0",
    ]);
    let pesq = ingest_external_scores(&p, "pesq", &m, "wpe").unwrap();
    assert_eq!(pesq.len(), 1);
    assert_eq!(pesq[0].value, 4.2);
    assert_eq!(pesq[0].algorithm, "wpe");
    let dist = ingest_external_scores(&p, DISTANCE_PREDICTION, &m, "sde").unwrap();
    assert_eq!(dist[0].metric, "dist_err");
    assert!((dist[0].value - 0.291288).abs() < 1e-12);
}

#[test]
fn external_rows_are_validated() {
    let m = manifest();
    let (_d, p) = write_scores(&["measured,lab,c1,s1,r1,pesq,0.8"]);
    assert!(matches!(
        ingest_external_scores(&p, "pesq", &m, "wpe"),
        Err(Error::OutOfRange { .. })
    ));
    let (_d, p) = write_scores(&["measured,lab,c1,s1,r9,pesq,3.0"]);
    assert!(matches!(
        ingest_external_scores(&p, "pesq", &m, "wpe"),
        Err(Error::UnknownKey(_))
    ));
    let (_d, p) = write_scores(&["measured,lab,c1,s1,r1,distance_prediction,-1"]);
    assert!(matches!(
        ingest_external_scores(&p, DISTANCE_PREDICTION, &m, "sde"),
        Err(Error::OutOfRange { .. })
    ));
}
