//! File-level orchestration behind the command-line tool: simulate RIR datasets,
//! run the dereverberation evaluation, and write the demo workspace.
//!
//! Commands communicate only through files. All relative paths in a [`PipelineConfig`]
//! are resolved against the directory of the config file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agreement::{read_results_csv, write_results_csv, EvalResult};
use crate::demo::speech_like;
use crate::dsp::{highpass, lowpass, resample, wav};
use crate::error::{Error, Result};
use crate::fdtd::{simulate_fdtd, simulate_fdtd_per_band, FdtdConfig};
use crate::ism::{render_rir_ism, IsmConfig};
use crate::metrics::ingest_external_scores;
use crate::raytrace::{echogram_to_rir, trace, RtConfig};
use crate::rir::{config_hash, Rir};
use crate::scene::{
    load_manifest, validate_scene, DatasetManifest, Engine, ManifestEntry, RoomScene,
};
use crate::wpe::{run_dereverb_eval, DereverbEvalConfig, SpeechCorpus};

pub const DEFAULT_BAND_CAP_HZ: f64 = 7000.0;
pub const DEFAULT_SAMPLE_RATE: f64 = 16000.0;
/// DC-blocking high-pass applied to every stored RIR.
pub const DEFAULT_HIGHPASS_HZ: f64 = 20.0;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const RESULTS_FILE: &str = "results.csv";

/// One scene and the engines to run on it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneRun {
    pub path: PathBuf,
    pub engines: Vec<Engine>,
}

/// An external score file to merge into the results.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExternalScores {
    pub path: PathBuf,
    /// Metric label in the file, e.g. `pesq` or `distance_prediction`.
    pub metric: String,
    pub algorithm: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub scenes: Vec<SceneRun>,
    pub ism: IsmConfig,
    pub rt: RtConfig,
    pub fdtd: FdtdConfig,
    /// Run the wave solver once per octave band with per-band admittances.
    pub fdtd_per_band: bool,
    pub corpus: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: u64,
    /// Every stored RIR is low-passed to `min(engine band limit, band_cap)`.
    pub band_cap: f64,
    /// Every stored RIR is high-passed at this frequency; `None` keeps DC.
    pub highpass_hz: Option<f64>,
    /// Every stored RIR is resampled to this rate.
    pub sample_rate: f64,
    pub dereverb: DereverbEvalConfig,
    pub external: Vec<ExternalScores>,
    /// Skip the in-process dereverberation run in `evaluate` (external scores only).
    pub external_only: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            scenes: Vec::new(),
            ism: IsmConfig::default(),
            rt: RtConfig {
                n_rays: 20_000,
                ..Default::default()
            },
            fdtd: FdtdConfig::default(),
            fdtd_per_band: false,
            corpus: None,
            out: PathBuf::from("out"),
            seed: 0,
            band_cap: DEFAULT_BAND_CAP_HZ,
            highpass_hz: Some(DEFAULT_HIGHPASS_HZ),
            sample_rate: DEFAULT_SAMPLE_RATE,
            dereverb: DereverbEvalConfig::default(),
            external: Vec::new(),
            external_only: false,
        }
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl PipelineConfig {
    /// Reads a JSON config and makes its paths absolute relative to the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(Error::MissingInput {
                what: "config",
                path: path.to_path_buf(),
            });
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: PipelineConfig =
            serde_json::from_str(&text).map_err(|e| Error::parse(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        for s in &mut self.scenes {
            s.path = resolve(base, &s.path);
        }
        self.corpus = self.corpus.as_ref().map(|c| resolve(base, c));
        self.out = resolve(base, &self.out);
        for e in &mut self.external {
            e.path = resolve(base, &e.path);
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate > 0.0 && self.sample_rate.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "sample_rate must be positive, got {}",
                self.sample_rate
            )));
        }
        if !(self.band_cap > 0.0 && self.band_cap < self.sample_rate / 2.0) {
            return Err(Error::CutoffAboveNyquist {
                cutoff_hz: self.band_cap,
                nyquist_hz: self.sample_rate / 2.0,
            });
        }
        if let Some(hp) = self.highpass_hz {
            if !(hp > 0.0 && hp < self.band_cap) {
                return Err(Error::InvalidArgument(format!(
                    "highpass_hz must lie in (0, band_cap), got {hp}"
                )));
            }
        }
        Ok(())
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.out.join(MANIFEST_FILE)
    }

    pub fn results_path(&self) -> PathBuf {
        self.out.join(RESULTS_FILE)
    }
}

/// Low-passes `rir` to `min(rir.band_limit, cap)`, resamples it to `target_rate` and
/// applies the optional DC-blocking high-pass.
///
/// Image-source responses sum many same-signed impulses and so carry a slowly decaying
/// offset that no physical room response has; the high-pass removes it for every engine
/// alike. Returns a warning when the engine's own limit is below the cap.
pub fn conform_rir(
    mut rir: Rir,
    highpass_hz: Option<f64>,
    cap: f64,
    target_rate: f64,
) -> Result<(Rir, Option<String>)> {
    let limit = rir.band_limit.min(cap);
    let warning = (rir.band_limit < cap).then(|| {
        format!(
            "{} RIR {}/{}: band limit {:.1} Hz is below the {cap} Hz cap",
            rir.engine, rir.provenance.source_id, rir.provenance.receiver_id, rir.band_limit
        )
    });
    let mut audio = rir.to_audio();
    if limit < audio.sample_rate / 2.0 {
        audio = lowpass(&audio, limit)?;
    }
    if audio.sample_rate != target_rate {
        audio = resample(&audio, target_rate);
    }
    if let Some(hp) = highpass_hz {
        audio = highpass(&audio, hp)?;
        rir.provenance.extra.insert("highpass_hz".into(), hp.into());
    }
    rir.samples = audio.samples;
    rir.sample_rate = target_rate;
    rir.band_limit = limit.min(target_rate / 2.0);
    rir.provenance
        .extra
        .insert("band_cap_hz".into(), cap.into());
    Ok((rir, warning))
}

#[derive(Serialize)]
struct HashInput<'a, T: Serialize> {
    engine: Engine,
    engine_config: &'a T,
    scene: &'a RoomScene,
    band_cap: f64,
    highpass_hz: Option<f64>,
    sample_rate: f64,
}

fn run_hash<T: Serialize>(
    engine: Engine,
    engine_config: &T,
    scene: &RoomScene,
    config: &PipelineConfig,
) -> String {
    config_hash(&HashInput {
        engine,
        engine_config,
        scene,
        band_cap: config.band_cap,
        highpass_hz: config.highpass_hz,
        sample_rate: config.sample_rate,
    })
}

/// Every RIR of `scene` from one engine, conformed to the cap and target rate.
pub fn simulate_scene(
    scene: &RoomScene,
    engine: Engine,
    config: &PipelineConfig,
    seed: u64,
) -> Result<(Vec<Rir>, Vec<String>)> {
    let report = validate_scene(scene);
    if !report.is_valid() {
        return Err(Error::InvalidScene(report.to_string()));
    }
    let (raw, hash) = match engine {
        Engine::Ism => {
            let mut out = Vec::new();
            for s in 0..scene.sources.len() {
                for r in 0..scene.receivers.len() {
                    out.push(render_rir_ism(scene, s, r, &config.ism)?);
                }
            }
            (out, run_hash(engine, &config.ism, scene, config))
        }
        Engine::Rt => {
            let rt = RtConfig {
                seed,
                ..config.rt.clone()
            };
            let mut out = Vec::new();
            for s in 0..scene.sources.len() {
                let echograms = trace(scene, s, &rt)?;
                for (r, eg) in echograms.iter().enumerate() {
                    let synth_seed =
                        seed ^ ((s as u64) << 32 | r as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
                    let mut rir = echogram_to_rir(eg, synth_seed, config.sample_rate)?;
                    let p = &mut rir.provenance;
                    p.room_id = scene.id.clone();
                    p.condition_id = scene.condition.clone();
                    p.source_id = scene.sources[s].id.clone();
                    p.receiver_id = scene.receivers[r].id.clone();
                    p.extra
                        .insert("receiver_radius".into(), rt.receiver_radius.into());
                    p.extra.insert("n_rays".into(), rt.n_rays.into());
                    out.push(rir);
                }
            }
            (out, run_hash(engine, &rt, scene, config))
        }
        Engine::Fdtd => {
            let mut out = Vec::new();
            for s in 0..scene.sources.len() {
                if config.fdtd_per_band {
                    out.extend(simulate_fdtd_per_band(scene, s, &config.fdtd)?);
                } else {
                    out.extend(simulate_fdtd(scene, s, &config.fdtd)?.rirs);
                }
            }
            (out, run_hash(engine, &config.fdtd, scene, config))
        }
        Engine::Measured => {
            return Err(Error::InvalidArgument(
                "measured RIRs are imported, not simulated".into(),
            ));
        }
    };
    let mut rirs = Vec::with_capacity(raw.len());
    let mut warnings = Vec::new();
    for mut rir in raw {
        rir.provenance.seed = seed;
        rir.provenance.config_hash = hash.clone();
        let (rir, w) = conform_rir(rir, config.highpass_hz, config.band_cap, config.sample_rate)?;
        warnings.extend(w);
        rirs.push(rir);
    }
    Ok((rirs, warnings))
}

/// Relative location of an RIR inside the output directory.
pub fn rir_file_name(engine: Engine, rir: &Rir) -> PathBuf {
    let p = &rir.provenance;
    PathBuf::from("rirs").join(engine.as_str()).join(format!(
        "{}_{}_{}_{}.wav",
        p.room_id, p.condition_id, p.source_id, p.receiver_id
    ))
}

fn load_or_empty_manifest(path: &Path) -> Result<DatasetManifest> {
    if path.exists() {
        load_manifest(path)
    } else {
        Ok(DatasetManifest::default())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SimulateSummary {
    pub written: Vec<PathBuf>,
    pub warnings: Vec<String>,
    pub manifest: PathBuf,
}

/// Simulates every configured (scene, engine) pair, writes WAV + sidecar files under
/// `out/rirs/{engine}/` and upserts the entries into `out/manifest.json`.
pub fn run_simulate(config: &PipelineConfig) -> Result<SimulateSummary> {
    if config.scenes.is_empty() {
        return Err(Error::InvalidArgument("config lists no scenes".into()));
    }
    let manifest_path = config.manifest_path();
    let mut manifest = load_or_empty_manifest(&manifest_path)?;
    let mut summary = SimulateSummary {
        manifest: manifest_path.clone(),
        ..Default::default()
    };
    for run in &config.scenes {
        if !run.path.exists() {
            return Err(Error::MissingInput {
                what: "scene",
                path: run.path.clone(),
            });
        }
        let scene = RoomScene::load(&run.path)?;
        for &engine in &run.engines {
            let (rirs, warnings) = simulate_scene(&scene, engine, config, config.seed)?;
            summary.warnings.extend(warnings);
            for rir in rirs {
                let rel = rir_file_name(engine, &rir);
                let path = config.out.join(&rel);
                rir.save(&path)?;
                let p = &rir.provenance;
                let src = &scene.sources[scene
                    .source_index(&p.source_id)
                    .expect("source id from scene")];
                let rcv = &scene.receivers[scene
                    .receiver_index(&p.receiver_id)
                    .expect("receiver id from scene")];
                manifest.upsert(ManifestEntry {
                    rir_path: rel,
                    engine,
                    room_id: p.room_id.clone(),
                    condition_id: p.condition_id.clone(),
                    source_id: p.source_id.clone(),
                    receiver_id: p.receiver_id.clone(),
                    source_pos: src.position,
                    receiver_pos: rcv.position,
                    true_distance: src.position.distance(rcv.position),
                });
                summary.written.push(path);
            }
        }
    }
    manifest.validate()?;
    std::fs::create_dir_all(&config.out).map_err(|e| Error::io(&config.out, e))?;
    manifest.save(&manifest_path)?;
    Ok(summary)
}

/// Replaces rows of `existing` that share a key with `new` and appends the rest.
pub fn merge_results(existing: Vec<EvalResult>, new: Vec<EvalResult>) -> Vec<EvalResult> {
    let key = |r: &EvalResult| {
        (
            r.engine.clone(),
            r.pair_key(),
            r.algorithm.clone(),
            r.metric.clone(),
        )
    };
    let mut out = existing;
    for row in new {
        match out.iter_mut().find(|r| key(r) == key(&row)) {
            Some(slot) => *slot = row,
            None => out.push(row),
        }
    }
    out
}

/// Runs the dereverberation evaluation and external-score ingestion, merging the rows
/// into `results` (default `out/results.csv`). Returns the rows produced by this run.
pub fn run_evaluate(config: &PipelineConfig, results: Option<&Path>) -> Result<Vec<EvalResult>> {
    let manifest_path = config.manifest_path();
    if !manifest_path.exists() {
        return Err(Error::MissingInput {
            what: "manifest",
            path: manifest_path,
        });
    }
    let manifest = load_manifest(&manifest_path)?;
    let mut rows = Vec::new();
    if !config.external_only {
        let corpus_dir = config.corpus.clone().ok_or_else(|| Error::MissingInput {
            what: "corpus",
            path: PathBuf::from("<unset>"),
        })?;
        let corpus = SpeechCorpus::load_dir(&corpus_dir)?;
        rows.extend(run_dereverb_eval(
            &manifest,
            &config.out,
            &corpus,
            &config.dereverb,
            config.seed,
        )?);
    }
    for ext in &config.external {
        if !ext.path.exists() {
            return Err(Error::MissingInput {
                what: "scores",
                path: ext.path.clone(),
            });
        }
        rows.extend(ingest_external_scores(
            &ext.path,
            &ext.metric,
            &manifest,
            &ext.algorithm,
        )?);
    }
    let path = results
        .map(Path::to_path_buf)
        .unwrap_or_else(|| config.results_path());
    let existing = if path.exists() {
        read_results_csv(&path)?
    } else {
        Vec::new()
    };
    write_results_csv(&path, &merge_results(existing, rows.clone()))?;
    Ok(rows)
}

/// Number of utterances written by [`gen_demo`].
pub const DEMO_UTTERANCES: usize = 20;
pub const DEMO_UTTERANCE_S: f64 = 3.0;
/// Wall absorption of the demo lab room; Eyring T60 is about 0.6 s.
pub const DEMO_ABSORPTION: f64 = 0.161;

const DEMO_SCRIPT: &str = r#"#!/bin/sh
# Full demo pipeline: simulate with both engines, evaluate WPE, compare rt against ism.
set -e
cd "$(dirname "$0")"
BIN=${ROOMEVAL:-roomeval}
"$BIN" simulate --config pipeline.json
"$BIN" evaluate --config pipeline.json
"$BIN" compare out/results.csv --reference-engine ism --out out/report
"$BIN" report out/results.csv --out out/report
"#;

/// Writes a self-contained demo workspace to `dir`: the lab scene (empty, `alpha = 0.161`),
/// the same room with brick piles, a synthetic corpus, a pipeline config and a script.
pub fn gen_demo(dir: &Path, seed: u64) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let mkdir = |p: &Path| std::fs::create_dir_all(p).map_err(|e| Error::io(p, e));
    mkdir(&dir.join("scenes"))?;
    mkdir(&dir.join("corpus"))?;
    let lab = RoomScene::lab_room(DEMO_ABSORPTION);
    let bricks = RoomScene::lab_room_with_bricks(DEMO_ABSORPTION);
    for (name, scene) in [("lab.json", &lab), ("lab_bricks.json", &bricks)] {
        let p = dir.join("scenes").join(name);
        scene.save(&p)?;
        written.push(p);
    }
    for i in 0..DEMO_UTTERANCES {
        let utt_seed = seed.wrapping_mul(1000).wrapping_add(i as u64);
        let audio = speech_like(utt_seed, DEMO_UTTERANCE_S, DEFAULT_SAMPLE_RATE);
        let p = dir.join("corpus").join(format!("utt_{i:02}.wav"));
        wav::write_wav(&p, &audio)?;
        written.push(p);
    }
    let config = PipelineConfig {
        scenes: vec![SceneRun {
            path: "scenes/lab.json".into(),
            engines: vec![Engine::Ism, Engine::Rt],
        }],
        ism: IsmConfig {
            max_order: 20,
            ..Default::default()
        },
        corpus: Some("corpus".into()),
        seed,
        dereverb: DereverbEvalConfig {
            include_unprocessed: true,
            ..Default::default()
        },
        ..Default::default()
    };
    let p = dir.join("pipeline.json");
    let text = serde_json::to_string_pretty(&config).expect("config serializes");
    std::fs::write(&p, text + "\n").map_err(|e| Error::io(&p, e))?;
    written.push(p);
    let p = dir.join("run_demo.sh");
    std::fs::write(&p, DEMO_SCRIPT).map_err(|e| Error::io(&p, e))?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        std::fs::set_permissions(&p, std::fs::Permissions::from_mode(0o755))
            .map_err(|e| Error::io(&p, e))?;
    }
    written.push(p);
    Ok(written)
}
