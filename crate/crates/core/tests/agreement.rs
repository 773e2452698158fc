use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use roomeval::agreement::{
    build_report, pair_results, pearson, read_results_csv, rmse, write_results_csv, EvalResult,
    Pooling,
};
use roomeval::Error;

fn row(engine: &str, room: &str, src: usize, rcv: usize, metric: &str, value: f64) -> EvalResult {
    EvalResult {
        engine: engine.into(),
        room_id: room.into(),
        condition_id: "c".into(),
        source_id: format!("s{src}"),
        receiver_id: format!("r{rcv}"),
        algorithm: "wpe".into(),
        metric: metric.into(),
        value,
    }
}

/// Twenty rows: two sources by ten receivers.
fn bricks(engine: &str, metric: &str, f: impl Fn(usize) -> f64) -> Vec<EvalResult> {
    (0..20)
        .map(|i| row(engine, "bricks", i / 10, i % 10, metric, f(i)))
        .collect()
}

#[test]
fn hand_computed_correlations() {
    assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-12);
    assert!((pearson(&[1.0, 2.0, 3.0], &[6.0, 4.0, 2.0]).unwrap() + 1.0).abs() < 1e-12);
    assert!((pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap() - 0.8).abs() < 1e-12);
    assert!((rmse(&[1.0, 2.0], &[2.0, 4.0]).unwrap() - 1.5811388300841898).abs() < 1e-12);
    assert_eq!(rmse(&[1.0, 5.0], &[1.0, 5.0]).unwrap(), 0.0);
    assert!((rmse(&[1.0, 5.0, -2.0], &[1.5, 5.5, -1.5]).unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn zero_variance_is_an_error() {
    assert!(matches!(
        pearson(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]),
        Err(Error::ZeroVariance(_))
    ));
    assert!(matches!(
        pearson(&[1.0, 2.0, 3.0], &[0.5; 3]),
        Err(Error::ZeroVariance(_))
    ));
}

#[test]
fn twenty_matching_rows_pair_fully() {
    let r = bricks("measured", "estoi", |i| i as f64 * 0.01);
    let c = bricks("ism", "estoi", |i| i as f64 * 0.02);
    let s = pair_results(&r, &c, "wpe", "estoi").unwrap();
    assert_eq!(s.n(), 20);
    assert_eq!(s.excluded, 0);
    assert!((s.mean_x() - 0.095).abs() < 1e-12);
}

#[test]
fn disjoint_keys_fail_and_sentinels_are_excluded() {
    let r: Vec<EvalResult> = (0..10)
        .map(|i| row("measured", "lab", 0, i, "si_sdr", i as f64))
        .collect();
    let other: Vec<EvalResult> = (0..10)
        .map(|i| row("ism", "lab", 1, i, "si_sdr", i as f64))
        .collect();
    assert!(matches!(
        pair_results(&r, &other, "wpe", "si_sdr"),
        Err(Error::TooFewPairs { matched: 0 })
    ));
    let mut c: Vec<EvalResult> = (0..10)
        .map(|i| row("ism", "lab", 0, i, "si_sdr", i as f64 + 1.0))
        .collect();
    c[4].value = f64::INFINITY;
    let s = pair_results(&r, &c, "wpe", "si_sdr").unwrap();
    assert_eq!((s.n(), s.excluded), (9, 1));
}

#[test]
fn self_comparison_is_perfect() {
    let mut r = bricks("measured", "estoi", |i| 0.5 + 0.01 * (i as f64).sin());
    r.extend(bricks("measured", "si_sdr", |i| 3.0 + i as f64));
    let rep = build_report(&r, &r, Pooling::Pooled).unwrap();
    assert_eq!(rep.rows.len(), 2);
    for row in &rep.rows {
        assert_eq!(row.rho, Some(1.0));
        assert_eq!(row.rmse, Some(0.0));
    }
}

#[test]
fn report_has_one_row_per_engine_algorithm_metric() {
    let metrics = ["estoi", "si_sdr", "pesq"];
    let mut reference = Vec::new();
    let mut candidates = Vec::new();
    for m in metrics {
        reference.extend(bricks("measured", m, |i| 1.0 + i as f64 * 0.1));
        for (k, e) in ["ism", "rt", "fdtd"].iter().enumerate() {
            candidates.extend(bricks(e, m, |i| {
                1.0 + i as f64 * 0.1 + 0.05 * k as f64 * (i as f64).cos()
            }));
        }
    }
    let rep = build_report(&reference, &candidates, Pooling::Pooled).unwrap();
    assert_eq!(rep.rows.len(), 9);
    assert!(rep.rows.iter().all(|r| r.n == 20 && r.error.is_none()));
    let table = rep.render_table();
    assert_eq!(table.lines().count(), 11);
    assert_eq!(rep.scatter.len(), 9 * 20);
}

#[test]
fn per_dataset_rows_split_by_room() {
    let mut r = bricks("measured", "estoi", |i| i as f64);
    r.extend((0..10).map(|i| row("measured", "lab", 0, i, "estoi", (i * i) as f64)));
    let mut c = bricks("ism", "estoi", |i| 2.0 * i as f64);
    c.extend((0..10).map(|i| row("ism", "lab", 0, i, "estoi", i as f64)));
    let rep = build_report(&r, &c, Pooling::PerDataset).unwrap();
    let datasets: Vec<_> = rep
        .rows
        .iter()
        .map(|r| r.dataset.clone().unwrap())
        .collect();
    assert_eq!(datasets, vec!["bricks", "lab"]);
    assert_eq!(rep.rows[0].n, 20);
    assert_eq!(rep.rows[1].n, 10);
    assert!((rep.rows[0].rho.unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn failed_rows_are_marked_not_fatal() {
    let r = bricks("measured", "estoi", |i| i as f64);
    let c: Vec<EvalResult> = (0..1)
        .map(|i| row("rt", "bricks", 0, i, "estoi", 1.0))
        .collect();
    let rep = build_report(&r, &c, Pooling::Pooled).unwrap();
    assert!(rep.rows[0]
        .error
        .as_deref()
        .unwrap()
        .contains("fewer than 2"));
    assert!(rep.rows[0].rho.is_none());
}

#[test]
fn rmse_recovers_noise_level() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let normal = Normal::new(0.0, 0.3).unwrap();
    let r: Vec<EvalResult> = (0..100)
        .map(|i| row("measured", "lab", 0, i, "estoi", i as f64 / 100.0))
        .collect();
    let c: Vec<EvalResult> = r
        .iter()
        .map(|x| EvalResult {
            engine: "rt".into(),
            value: x.value + normal.sample(&mut rng),
            ..x.clone()
        })
        .collect();
    let s = pair_results(&r, &c, "wpe", "estoi").unwrap();
    let e = s.rmse().unwrap();
    assert!((e - 0.3).abs() / 0.3 < 0.2, "{e}");
}

#[test]
fn report_files_are_written() {
    let r = bricks("measured", "estoi", |i| i as f64);
    let c = bricks("ism", "estoi", |i| i as f64 + 0.5);
    let rep = build_report(&r, &c, Pooling::Pooled).unwrap();
    let dir = tempfile::tempdir().unwrap();
    rep.write_to_dir(dir.path(), true).unwrap();
    for f in [
        "report.json",
        "report.txt",
        "scatter.csv",
        "scatter_ism_wpe_estoi.svg",
    ] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let svg = std::fs::read_to_string(dir.path().join("scatter_ism_wpe_estoi.svg")).unwrap();
    assert_eq!(svg.matches("<circle").count(), 20);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert_eq!(json["reference_line"]["slope"], 1.0);
    assert!((json["rows"][0]["rmse"].as_f64().unwrap() - 0.5).abs() < 1e-12);

    let p = dir.path().join("results.csv");
    write_results_csv(&p, &r).unwrap();
    assert_eq!(read_results_csv(&p).unwrap(), r);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]
    #[test]
    fn pearson_is_affine_invariant(
        x in prop::collection::vec(-100.0f64..100.0, 3..40),
        noise in prop::collection::vec(-5.0f64..5.0, 40),
        a in 0.01f64..50.0,
        b in -100.0f64..100.0,
    ) {
        let y: Vec<f64> = x.iter().zip(&noise).map(|(v, n)| 0.5 * v + n).collect();
        prop_assume!(pearson(&x, &y).is_ok());
        let base = pearson(&x, &y).unwrap();
        let ax: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let nx: Vec<f64> = x.iter().map(|v| -a * v + b).collect();
        prop_assert!((pearson(&ax, &y).unwrap() - base).abs() < 1e-12);
        prop_assert!((pearson(&nx, &y).unwrap() + base).abs() < 1e-12);
        prop_assert_eq!(rmse(&x, &y).unwrap(), rmse(&y, &x).unwrap());
    }

    #[test]
    fn pairing_ignores_row_order(seed in 0u64..1000) {
        use rand::seq::SliceRandom;
        let r = bricks("measured", "estoi", |i| (i as f64 * 1.3).sin());
        let c = bricks("ism", "estoi", |i| (i as f64 * 1.1).cos());
        let mut rs = r.clone();
        let mut cs = c.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rs.shuffle(&mut rng);
        cs.shuffle(&mut rng);
        prop_assert_eq!(
            build_report(&r, &c, Pooling::Pooled).unwrap(),
            build_report(&rs, &cs, Pooling::Pooled).unwrap()
        );
    }
}
