use std::path::Path;

use roomeval::agreement::{read_results_csv, EvalResult};
use roomeval::dsp::wav;
use roomeval::fdtd::FdtdConfig;
use roomeval::ism::IsmConfig;
use roomeval::pipeline::{
    conform_rir, gen_demo, merge_results, run_evaluate, run_simulate, simulate_scene,
    PipelineConfig, SceneRun, DEMO_UTTERANCES,
};
use roomeval::rir::Rir;
use roomeval::scene::{load_manifest, Directivity, Engine, Material, RoomScene, Vec3};
use roomeval::wpe::DereverbEvalConfig;
use roomeval::Error;

fn config_for(dir: &Path, scene: &RoomScene, engines: Vec<Engine>) -> PipelineConfig {
    let p = dir.join("scene.json");
    scene.save(&p).unwrap();
    PipelineConfig {
        scenes: vec![SceneRun { path: p, engines }],
        ism: IsmConfig {
            max_order: 8,
            duration: 0.3,
            ..Default::default()
        },
        out: dir.join("out"),
        ..Default::default()
    }
}

#[test]
fn lab_scene_gives_twenty_rirs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_for(dir.path(), &RoomScene::lab_room(0.3), vec![Engine::Ism]);
    let summary = run_simulate(&cfg).unwrap();
    assert_eq!(summary.written.len(), 20);
    assert!(summary.warnings.is_empty());
    let m = load_manifest(cfg.manifest_path()).unwrap();
    assert_eq!(m.entries.len(), 20);
    let first = &m.entries[0];
    assert_eq!(first.rir_path, Path::new("rirs/ism/lab_default_s1_r01.wav"));
    let rir = Rir::load(first.resolve_rir_path(&cfg.out)).unwrap();
    assert_eq!(rir.sample_rate, 16000.0);
    assert_eq!(rir.band_limit, 7000.0);
    assert_eq!(rir.provenance.config_hash.len(), 64);

    // Rerun: identical bytes, manifest entries replaced rather than duplicated.
    let before = std::fs::read(&summary.written[7]).unwrap();
    run_simulate(&cfg).unwrap();
    assert_eq!(std::fs::read(&summary.written[7]).unwrap(), before);
    assert_eq!(
        load_manifest(cfg.manifest_path()).unwrap().entries.len(),
        20
    );
}

#[test]
fn ism_refuses_boxes_verbatim() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_for(
        dir.path(),
        &RoomScene::lab_room_with_bricks(0.3),
        vec![Engine::Ism],
    );
    let err = run_simulate(&cfg).unwrap_err();
    assert!(
        err.to_string()
            .contains("ISM supports empty shoeboxes only"),
        "{err}"
    );
}

#[test]
fn wave_solver_band_limit_is_recorded_with_warning() {
    let scene = RoomScene::shoebox(Vec3::new(2.0, 1.5, 1.2), Material::uniform("w", 0.3, 0.0))
        .with_source("s", Vec3::new(0.6, 0.5, 0.6), Directivity::omni())
        .with_receiver("r", Vec3::new(1.4, 1.0, 0.7));
    let cfg = PipelineConfig {
        fdtd: FdtdConfig {
            duration: 0.05,
            ..Default::default()
        },
        ..Default::default()
    };
    let (rirs, warnings) = simulate_scene(&scene, Engine::Fdtd, &cfg, 0).unwrap();
    assert_eq!(rirs.len(), 1);
    assert!(
        (rirs[0].band_limit - 1188.2).abs() < 0.5,
        "{}",
        rirs[0].band_limit
    );
    assert_eq!(warnings.len(), 1);
    assert!(warnings[0].contains("below the 7000 Hz cap"));
}

#[test]
fn conform_lowpasses_and_resamples() {
    let mut samples = vec![0.0; 4800];
    samples[100] = 1.0;
    let rir = Rir::new(samples, 48000.0, Engine::Ism);
    let (out, w) = conform_rir(rir, None, 7000.0, 16000.0).unwrap();
    assert!(w.is_none());
    assert_eq!(out.sample_rate, 16000.0);
    assert_eq!(out.len(), 1600);
    assert_eq!(out.band_limit, 7000.0);
    assert!(matches!(
        conform_rir(Rir::new(vec![1.0; 10], 16000.0, Engine::Ism), Some(20.0), 9000.0, 16000.0)
            .map(|(r, _)| r.band_limit),
        Ok(b) if b == 8000.0
    ));
}

#[test]
fn stored_image_source_rirs_have_no_offset() {
    let scene = RoomScene::shoebox(Vec3::new(4.5, 3.5, 2.7), Material::uniform("w", 0.12, 0.3))
        .with_source("s", Vec3::new(0.9, 1.0, 1.5), Directivity::omni())
        .with_receiver("r", Vec3::new(2.0, 0.6, 1.0));
    let mut cfg = PipelineConfig {
        ism: IsmConfig {
            max_order: 40,
            duration: 0.6,
            ..Default::default()
        },
        band_cap: 1100.0,
        ..Default::default()
    };
    let direct = (Vec3::new(0.9, 1.0, 1.5).distance(Vec3::new(2.0, 0.6, 1.0)) / 343.0 * 16000.0)
        .round() as usize;
    let (rirs, _) = simulate_scene(&scene, Engine::Ism, &cfg, 0).unwrap();
    assert!(
        rirs[0].peak_index().abs_diff(direct) <= 1,
        "{} vs {direct}",
        rirs[0].peak_index()
    );
    let mean = rirs[0].samples.iter().sum::<f64>() / rirs[0].len() as f64;
    assert!(mean.abs() < 1e-4, "{mean}");

    // Without the high-pass the late offset outgrows the band-limited direct sound.
    cfg.highpass_hz = None;
    let (raw, _) = simulate_scene(&scene, Engine::Ism, &cfg, 0).unwrap();
    assert!(raw[0].peak_index() > direct + 100);
}

fn twelve_receiver_scene() -> RoomScene {
    let mut s = RoomScene::shoebox(Vec3::new(6.0, 4.0, 2.6), Material::uniform("w", 0.25, 0.1))
        .with_source("s1", Vec3::new(1.2, 1.5, 1.4), Directivity::omni());
    s.id = "room".into();
    for i in 0..12 {
        s = s.with_receiver(
            &format!("r{i:02}"),
            Vec3::new(2.4 + 0.3 * i as f64, 1.0 + 0.2 * (i % 6) as f64, 1.2),
        );
    }
    s
}

fn write_corpus(dir: &Path, n: usize) {
    std::fs::create_dir_all(dir).unwrap();
    for i in 0..n {
        wav::write_wav(
            dir.join(format!("u{i}.wav")),
            &roomeval::demo::speech_like(40 + i as u64, 3.0, 16000.0),
        )
        .unwrap();
    }
}

#[test]
fn evaluate_writes_one_row_per_rir_and_metric() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config_for(dir.path(), &twelve_receiver_scene(), vec![Engine::Ism]);
    cfg.corpus = Some(dir.path().join("corpus"));
    cfg.dereverb = DereverbEvalConfig {
        n_support: 4,
        ..Default::default()
    };
    write_corpus(&dir.path().join("corpus"), 2);
    run_simulate(&cfg).unwrap();
    let rows = run_evaluate(&cfg, None).unwrap();
    assert_eq!(rows.len(), 24);
    assert_eq!(read_results_csv(cfg.results_path()).unwrap(), rows);

    // Self-check rows are added next to the WPE rows.
    cfg.dereverb.self_check = true;
    let check = run_evaluate(&cfg, None).unwrap();
    assert!(check
        .iter()
        .filter(|r| r.metric == "estoi")
        .all(|r| (r.value - 1.0).abs() < 1e-9));
    assert_eq!(read_results_csv(cfg.results_path()).unwrap().len(), 48);

    cfg.corpus = Some(dir.path().join("missing"));
    assert_eq!(
        run_evaluate(&cfg, None).unwrap_err().kind(),
        "corpus_not_found"
    );
}

#[test]
fn merge_replaces_matching_rows() {
    let r = |rcv: &str, v: f64| EvalResult {
        engine: "ism".into(),
        room_id: "a".into(),
        condition_id: "c".into(),
        source_id: "s".into(),
        receiver_id: rcv.into(),
        algorithm: "wpe".into(),
        metric: "estoi".into(),
        value: v,
    };
    let merged = merge_results(
        vec![r("1", 0.1), r("2", 0.2)],
        vec![r("2", 0.5), r("3", 0.3)],
    );
    assert_eq!(merged, vec![r("1", 0.1), r("2", 0.5), r("3", 0.3)]);
}

#[test]
fn demo_workspace_is_seeded() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    let files = gen_demo(a.path(), 4).unwrap();
    gen_demo(b.path(), 4).unwrap();
    gen_demo(c.path(), 5).unwrap();
    assert_eq!(files.len(), DEMO_UTTERANCES + 4);
    for f in &files {
        let rel = f.strip_prefix(a.path()).unwrap();
        assert_eq!(
            std::fs::read(f).unwrap(),
            std::fs::read(b.path().join(rel)).unwrap(),
            "{rel:?}"
        );
    }
    let utt = "corpus/utt_00.wav";
    assert_ne!(
        std::fs::read(a.path().join(utt)).unwrap(),
        std::fs::read(c.path().join(utt)).unwrap()
    );
    let cfg = PipelineConfig::load(a.path().join("pipeline.json")).unwrap();
    assert_eq!(cfg.scenes[0].engines, vec![Engine::Ism, Engine::Rt]);
    assert_eq!(cfg.out, a.path().join("out"));
    let lab = RoomScene::load(a.path().join("scenes/lab.json")).unwrap();
    let t60 = lab.eyring_t60(3).unwrap();
    assert!((t60 - 0.6).abs() < 0.01, "{t60}");
}

#[test]
fn missing_config_is_reported() {
    let err = PipelineConfig::load("/nonexistent/pipeline.json").unwrap_err();
    assert!(matches!(err, Error::MissingInput { what: "config", .. }));
    assert_eq!(err.exit_code(), 2);
}
