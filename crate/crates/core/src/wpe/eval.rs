use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::groups::{build_eval_groups, EvalGroup, GroupFilter};
use super::{wpe_dereverb, WpeConfig};
use crate::agreement::EvalResult;
use crate::dsp::{convolve, resample, wav, AudioBuffer, MultiChannelBuffer};
use crate::error::{Error, Result};
use crate::metrics::{estoi, si_sdr, MetricName, MetricValue};
use crate::rir::Rir;
use crate::scene::{DatasetManifest, ManifestEntry};

/// Length kept after the direct-path peak when building the reference RIR, in seconds.
pub const DIRECT_WINDOW_S: f64 = 0.0025;

/// A speech-quality measure of a processed signal against a clean reference.
pub trait Metric: Send + Sync {
    fn name(&self) -> MetricName;
    fn score(&self, processed: &AudioBuffer, reference: &AudioBuffer) -> Result<MetricValue>;
}

pub struct SiSdrMetric;

impl Metric for SiSdrMetric {
    fn name(&self) -> MetricName {
        MetricName::SiSdr
    }
    fn score(&self, processed: &AudioBuffer, reference: &AudioBuffer) -> Result<MetricValue> {
        si_sdr(processed, reference)
    }
}

pub struct EstoiMetric;

impl Metric for EstoiMetric {
    fn name(&self) -> MetricName {
        MetricName::Estoi
    }
    fn score(&self, processed: &AudioBuffer, reference: &AudioBuffer) -> Result<MetricValue> {
        estoi(reference, processed)
    }
}

/// The metrics computed in-process. PESQ is supplied as external scores.
pub fn builtin_metric(name: MetricName) -> Result<Box<dyn Metric>> {
    match name {
        MetricName::SiSdr => Ok(Box::new(SiSdrMetric)),
        MetricName::Estoi => Ok(Box::new(EstoiMetric)),
        MetricName::Pesq => Err(Error::InvalidArgument(
            "pesq is not computed in-process; ingest scores with `evaluate --external`".into(),
        )),
        MetricName::DistErr => Err(Error::InvalidArgument(
            "dist_err comes from distance predictions; ingest them with `evaluate --external`"
                .into(),
        )),
    }
}

/// Clean utterances, in a fixed order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SpeechCorpus {
    pub utterances: Vec<(String, AudioBuffer)>,
}

impl SpeechCorpus {
    /// Loads every `.wav` in `dir` (sorted by file name), mixed down to mono.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        if !dir.is_dir() {
            return Err(Error::MissingInput {
                what: "corpus",
                path: dir.to_path_buf(),
            });
        }
        let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("wav")))
            .collect();
        paths.sort();
        let mut utterances = Vec::with_capacity(paths.len());
        for p in paths {
            let multi = wav::read_wav_multi(&p)?;
            let n = multi.num_channels() as f64;
            let mono: Vec<f64> = (0..multi.len())
                .map(|i| multi.channels.iter().map(|c| c[i]).sum::<f64>() / n)
                .collect();
            let name = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            utterances.push((name, AudioBuffer::new(mono, multi.sample_rate)));
        }
        if utterances.is_empty() {
            return Err(Error::Degenerate(format!(
                "corpus directory {} has no WAV files",
                dir.display()
            )));
        }
        Ok(Self { utterances })
    }

    pub fn len(&self) -> usize {
        self.utterances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.utterances.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DereverbEvalConfig {
    pub wpe: WpeConfig,
    pub n_support: usize,
    pub filter: GroupFilter,
    pub metrics: Vec<MetricName>,
    /// Algorithm label of the dereverberated rows.
    pub algorithm: String,
    /// Also score the unprocessed first channel, labelled `unprocessed`.
    pub include_unprocessed: bool,
    /// Score the reference against itself instead of running WPE, labelled `self_check`.
    pub self_check: bool,
}

impl Default for DereverbEvalConfig {
    fn default() -> Self {
        Self {
            wpe: WpeConfig::default(),
            n_support: 5,
            filter: GroupFilter::default(),
            metrics: vec![MetricName::Estoi, MetricName::SiSdr],
            algorithm: "wpe".into(),
            include_unprocessed: false,
            self_check: false,
        }
    }
}

/// Level below the global peak at which the direct sound's onset is detected.
pub const ONSET_THRESHOLD: f64 = 0.1;
/// The direct peak is the largest sample this long after the onset.
pub const ONSET_SEARCH_S: f64 = 0.002;

/// Index of the direct-sound peak: the largest-magnitude sample within `ONSET_SEARCH_S`
/// of the first sample reaching `ONSET_THRESHOLD` of the global peak.
///
/// In band-limited responses a later reflection can outgrow the direct sound, so the
/// global maximum alone is not the direct peak.
pub fn direct_peak_index(rir: &[f64], sample_rate: f64) -> usize {
    let argmax = |s: &[f64]| {
        s.iter().enumerate().fold(
            (0, 0.0),
            |(bi, bv), (i, &v)| if v.abs() > bv { (i, v.abs()) } else { (bi, bv) },
        )
    };
    let (_, max) = argmax(rir);
    let Some(onset) = rir.iter().position(|v| v.abs() >= ONSET_THRESHOLD * max) else {
        return 0;
    };
    let end = (onset + (ONSET_SEARCH_S * sample_rate).round() as usize + 1).min(rir.len());
    onset + argmax(&rir[onset..end]).0
}

/// The RIR truncated `DIRECT_WINDOW_S` after its direct peak (see [`direct_peak_index`]).
pub fn direct_path_rir(rir: &[f64], sample_rate: f64) -> Vec<f64> {
    let peak = direct_peak_index(rir, sample_rate);
    let end = (peak + (DIRECT_WINDOW_S * sample_rate).round() as usize + 1).min(rir.len());
    let mut out = rir.to_vec();
    out[end..].iter_mut().for_each(|v| *v = 0.0);
    out
}

fn load_rir(entry: &ManifestEntry, base_dir: &Path) -> Result<Rir> {
    let path = entry.resolve_rir_path(base_dir);
    if !path.exists() {
        return Err(Error::MissingInput { what: "rir", path });
    }
    Rir::load(path)
}

fn row(main: &ManifestEntry, algorithm: &str, m: &MetricValue) -> EvalResult {
    EvalResult {
        engine: main.engine.to_string(),
        room_id: main.room_id.clone(),
        condition_id: main.condition_id.clone(),
        source_id: main.source_id.clone(),
        receiver_id: main.receiver_id.clone(),
        algorithm: algorithm.to_string(),
        metric: m.name.as_str().to_string(),
        value: m.value,
    }
}

fn eval_group(
    index: usize,
    group: &EvalGroup,
    base_dir: &Path,
    corpus: &SpeechCorpus,
    config: &DereverbEvalConfig,
    metrics: &[Box<dyn Metric>],
    seed: u64,
) -> Result<Vec<EvalResult>> {
    let main = load_rir(&group.main, base_dir)?;
    let rate = main.sample_rate;
    let mut rirs = vec![main.samples.clone()];
    for s in &group.supports {
        let r = load_rir(s, base_dir)?;
        if r.sample_rate != rate {
            return Err(Error::SampleRateMismatch(rate, r.sample_rate));
        }
        rirs.push(r.samples);
    }
    let k = ((index as u64).wrapping_add(seed) % corpus.len() as u64) as usize;
    let utt = &corpus.utterances[k].1;
    let utt = if utt.sample_rate == rate {
        utt.clone()
    } else {
        resample(utt, rate)
    };
    let len = utt.len();
    let wet = |h: &[f64]| {
        let mut y = convolve(&utt.samples, h);
        y.resize(len, 0.0);
        y
    };
    let reference = AudioBuffer::new(wet(&direct_path_rir(&main.samples, rate)), rate);
    let mut rows = Vec::new();
    if config.self_check {
        for m in metrics {
            rows.push(row(
                &group.main,
                "self_check",
                &m.score(&reference, &reference)?,
            ));
        }
        return Ok(rows);
    }
    let mix = MultiChannelBuffer::new(rirs.iter().map(|h| wet(h)).collect(), rate);
    let out = wpe_dereverb(&mix, &config.wpe)?;
    for m in metrics {
        rows.push(row(
            &group.main,
            &config.algorithm,
            &m.score(&out, &reference)?,
        ));
    }
    if config.include_unprocessed {
        let raw = mix.channel(0);
        for m in metrics {
            rows.push(row(&group.main, "unprocessed", &m.score(&raw, &reference)?));
        }
    }
    Ok(rows)
}

/// Runs the main/support protocol: every selected RIR is main once, its supports become
/// extra channels of the same utterance, WPE restores the first channel, and each metric
/// scores it against the utterance convolved with the main RIR's direct path.
///
/// Rows come out in manifest order, metrics in configured order per group.
pub fn run_dereverb_eval(
    manifest: &DatasetManifest,
    base_dir: &Path,
    corpus: &SpeechCorpus,
    config: &DereverbEvalConfig,
    seed: u64,
) -> Result<Vec<EvalResult>> {
    let metrics: Vec<Box<dyn Metric>> = config
        .metrics
        .iter()
        .map(|&m| builtin_metric(m))
        .collect::<Result<_>>()?;
    run_dereverb_eval_with(manifest, base_dir, corpus, config, &metrics, seed)
}

/// As [`run_dereverb_eval`] with caller-supplied metrics (e.g. a PESQ binding);
/// `config.metrics` is ignored.
pub fn run_dereverb_eval_with(
    manifest: &DatasetManifest,
    base_dir: &Path,
    corpus: &SpeechCorpus,
    config: &DereverbEvalConfig,
    metrics: &[Box<dyn Metric>],
    seed: u64,
) -> Result<Vec<EvalResult>> {
    if corpus.is_empty() {
        return Err(Error::Degenerate("speech corpus is empty".into()));
    }
    if metrics.is_empty() {
        return Err(Error::InvalidArgument("no metrics selected".into()));
    }
    let groups = build_eval_groups(manifest, &config.filter, config.n_support, seed)?;
    let per_group: Vec<Vec<EvalResult>> = groups
        .par_iter()
        .enumerate()
        .map(|(i, g)| eval_group(i, g, base_dir, corpus, config, metrics, seed))
        .collect::<Result<_>>()?;
    Ok(per_group.into_iter().flatten().collect())
}
