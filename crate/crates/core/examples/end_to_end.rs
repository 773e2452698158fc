//! The demo pipeline in process: generate the workspace, simulate with ISM and ray
//! tracing, evaluate WPE, and compare ray tracing against ISM.
//!
//! cargo run --release --example end_to_end -- [dir]

use std::path::PathBuf;

use roomeval::agreement::{build_report, render_summary, summarize_results, Pooling};
use roomeval::pipeline::{gen_demo, run_evaluate, run_simulate, PipelineConfig};

fn main() -> roomeval::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "demo".into()));
    gen_demo(&dir, 0)?;
    let config = PipelineConfig::load(dir.join("pipeline.json"))?;
    let sim = run_simulate(&config)?;
    println!("simulated {} RIRs", sim.written.len());
    let rows = run_evaluate(&config, None)?;
    print!("{}", render_summary(&summarize_results(&rows)));

    let (reference, candidates): (Vec<_>, Vec<_>) =
        rows.into_iter().partition(|r| r.engine == "ism");
    let report = build_report(&reference, &candidates, Pooling::Pooled)?;
    print!("\n{}", report.render_wide_table());
    report.write_to_dir(config.out.join("report"), true)?;
    Ok(())
}
