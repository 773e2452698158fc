use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use roomeval::agreement::{
    build_report, read_results_csv, render_summary, summarize_results, EvalResult, Pooling,
};
use roomeval::dsp::{convolve, wav, AudioBuffer, MultiChannelBuffer};
use roomeval::pipeline::{gen_demo, run_evaluate, run_simulate, ExternalScores, PipelineConfig};
use roomeval::rir::Rir;
use roomeval::scene::{make_receiver_grid, Receiver, RoomScene};
use roomeval::wpe::{wpe_dereverb, WpeConfig};
use roomeval::{Error, Result};

/// Room impulse response simulation and simulation-vs-measurement evaluation.
#[derive(Parser)]
#[command(name = "roomeval", version)]
struct Cli {
    /// Pipeline config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (or file, where noted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads. Affects speed only.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate every configured scene/engine pair into out/rirs and out/manifest.json.
    Simulate,
    /// Convolve a signal with one or more RIRs (one output channel per RIR).
    Convolve(ConvolveArgs),
    /// Dereverberate the first channel of a multichannel WAV with WPE.
    Dereverb(DereverbArgs),
    /// Run the dereverberation evaluation and ingest external scores.
    Evaluate(EvaluateArgs),
    /// Agreement report of candidate result sets against a reference.
    Compare(CompareArgs),
    /// Per engine/algorithm/metric summary of result sets.
    Report(ReportArgs),
    /// Write a self-contained demo workspace.
    GenDemo,
    /// Replace a scene's receivers by a regular grid.
    Grid(GridArgs),
}

#[derive(Args)]
struct ConvolveArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long = "rir", required = true)]
    rirs: Vec<PathBuf>,
    /// Keep the input length instead of the full convolution.
    #[arg(long)]
    truncate: bool,
}

#[derive(Args)]
struct DereverbArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    taps: Option<usize>,
    #[arg(long)]
    delay: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Results CSV to merge into (default: <out>/results.csv).
    #[arg(long)]
    results: Option<PathBuf>,
    /// Score the reference against itself instead of running WPE.
    #[arg(long)]
    self_check: bool,
    /// External score file; repeat with matching --metric/--algorithm.
    #[arg(long)]
    external: Vec<PathBuf>,
    #[arg(long)]
    metric: Vec<String>,
    #[arg(long)]
    algorithm: Vec<String>,
    /// Only ingest external scores.
    #[arg(long)]
    external_only: bool,
}

#[derive(Args)]
struct CompareArgs {
    /// Reference results CSV followed by candidate CSVs; with --reference-engine, any
    /// number of files whose rows are split by engine.
    #[arg(required = true)]
    files: Vec<PathBuf>,
    #[arg(long)]
    reference_engine: Option<String>,
    /// Pool all datasets into one row per engine/algorithm/metric (default).
    #[arg(long, conflicts_with = "per_dataset")]
    pool: bool,
    /// One row per dataset (room).
    #[arg(long)]
    per_dataset: bool,
    /// Skip the SVG scatter plots.
    #[arg(long)]
    no_svg: bool,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(required = true)]
    files: Vec<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    scene: PathBuf,
    #[arg(long)]
    spacing: f64,
    #[arg(long, default_value_t = 1.2)]
    height: f64,
}

fn require(path: &Path, what: &'static str) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::MissingInput {
            what,
            path: path.to_path_buf(),
        })
    }
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("--config is required for this command".into()))?;
    let mut cfg = PipelineConfig::load(path)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    Ok(cfg)
}

fn optional_config(cli: &Cli) -> Result<Option<PipelineConfig>> {
    cli.config.as_ref().map(|_| load_config(cli)).transpose()
}

fn out_file(cli: &Cli, default: &str) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| PathBuf::from(default))
}

fn read_all(files: &[PathBuf]) -> Result<Vec<Vec<EvalResult>>> {
    files
        .iter()
        .map(|f| {
            require(f, "results")?;
            read_results_csv(f)
        })
        .collect()
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Simulate => {
            let cfg = load_config(cli)?;
            let summary = run_simulate(&cfg)?;
            for w in &summary.warnings {
                eprintln!("warning: {w}");
            }
            println!(
                "wrote {} RIRs; manifest {}",
                summary.written.len(),
                summary.manifest.display()
            );
        }
        Command::Convolve(a) => {
            require(&a.input, "input")?;
            let x = wav::read_wav(&a.input)?;
            let mut chans = Vec::new();
            for r in &a.rirs {
                require(r, "rir")?;
                let rir = Rir::load(r)?;
                if rir.sample_rate != x.sample_rate {
                    return Err(Error::SampleRateMismatch(x.sample_rate, rir.sample_rate));
                }
                let mut y = convolve(&x.samples, &rir.samples);
                if a.truncate {
                    y.truncate(x.len());
                }
                chans.push(y);
            }
            let len = chans.iter().map(Vec::len).max().unwrap_or(0);
            chans.iter_mut().for_each(|c| c.resize(len, 0.0));
            let path = out_file(cli, "convolved.wav");
            if chans.len() == 1 {
                wav::write_wav(&path, &AudioBuffer::new(chans.remove(0), x.sample_rate))?;
            } else {
                wav::write_wav_multi(&path, &MultiChannelBuffer::new(chans, x.sample_rate))?;
            }
            println!("wrote {}", path.display());
        }
        Command::Dereverb(a) => {
            require(&a.input, "input")?;
            let mut wpe = optional_config(cli)?.map_or_else(WpeConfig::default, |c| c.dereverb.wpe);
            wpe.taps = a.taps.unwrap_or(wpe.taps);
            wpe.delay = a.delay.unwrap_or(wpe.delay);
            wpe.iterations = a.iterations.unwrap_or(wpe.iterations);
            let input = wav::read_wav_multi(&a.input)?;
            let out = wpe_dereverb(&input, &wpe)?;
            let path = out_file(cli, "dereverbed.wav");
            wav::write_wav(&path, &out)?;
            println!("wrote {}", path.display());
        }
        Command::Evaluate(a) => {
            let mut cfg = load_config(cli)?;
            cfg.dereverb.self_check |= a.self_check;
            cfg.external_only |= a.external_only;
            if a.external.len() != a.metric.len() || a.external.len() != a.algorithm.len() {
                return Err(Error::InvalidArgument(
                    "each --external needs one --metric and one --algorithm".into(),
                ));
            }
            for ((path, metric), algorithm) in a.external.iter().zip(&a.metric).zip(&a.algorithm) {
                cfg.external.push(ExternalScores {
                    path: path.clone(),
                    metric: metric.clone(),
                    algorithm: algorithm.clone(),
                });
            }
            let rows = run_evaluate(&cfg, a.results.as_deref())?;
            let path = a.results.clone().unwrap_or_else(|| cfg.results_path());
            println!("{} result rows -> {}", rows.len(), path.display());
        }
        Command::Compare(a) => {
            let sets = read_all(&a.files)?;
            let (reference, candidates): (Vec<EvalResult>, Vec<EvalResult>) = match &a
                .reference_engine
            {
                Some(e) => sets.into_iter().flatten().partition(|r| &r.engine == e),
                None => {
                    if sets.len() < 2 {
                        return Err(Error::InvalidArgument(
                            "compare needs a reference and at least one candidate file (or --reference-engine)".into(),
                        ));
                    }
                    let mut it = sets.into_iter();
                    (it.next().unwrap_or_default(), it.flatten().collect())
                }
            };
            let pooling = if a.per_dataset {
                Pooling::PerDataset
            } else {
                Pooling::Pooled
            };
            let report = build_report(&reference, &candidates, pooling)?;
            let dir = out_file(cli, "report");
            report.write_to_dir(&dir, !a.no_svg)?;
            print!("{}", report.render_wide_table());
            println!("report written to {}", dir.display());
            if report.succeeded() == 0 {
                return Err(Error::Degenerate("no report row could be computed".into()));
            }
        }
        Command::Report(a) => {
            let rows: Vec<EvalResult> = read_all(&a.files)?.into_iter().flatten().collect();
            if rows.is_empty() {
                return Err(Error::Degenerate("result sets are empty".into()));
            }
            let summary = summarize_results(&rows);
            print!("{}", render_summary(&summary));
            if let Some(dir) = &cli.out {
                std::fs::create_dir_all(dir).map_err(|e| Error::Io {
                    path: dir.clone(),
                    source: e,
                })?;
                let p = dir.join("summary.json");
                let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
                std::fs::write(&p, text + "\n").map_err(|e| Error::Io { path: p, source: e })?;
            }
        }
        Command::GenDemo => {
            let dir = out_file(cli, "demo");
            let files = gen_demo(&dir, cli.seed.unwrap_or(0))?;
            println!("wrote {} files to {}", files.len(), dir.display());
        }
        Command::Grid(a) => {
            require(&a.scene, "scene")?;
            let mut scene = RoomScene::load(&a.scene)?;
            let points = make_receiver_grid(&scene, a.spacing, a.height)?;
            scene.receivers = points
                .iter()
                .enumerate()
                .map(|(i, &position)| Receiver {
                    id: format!("g{:04}", i + 1),
                    position,
                })
                .collect();
            let path = out_file(cli, "scene_grid.json");
            scene.save(&path)?;
            println!("{} grid receivers -> {}", points.len(), path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("warning: could not size the thread pool: {e}");
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = e.exit_code();
            let json = serde_json::json!({ "error": e.kind(), "message": e.to_string(), "exit_code": code });
            eprintln!("{json}");
            ExitCode::from(code as u8)
        }
    }
}
