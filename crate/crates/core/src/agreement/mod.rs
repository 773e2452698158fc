//! Agreement between a reference result set (e.g. measurements) and candidate result
//! sets (simulations): Pearson correlation, RMSE, report tables and scatter data.

mod results;
mod stats;
mod summary;
mod svg;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use results::{
    check_unique, format_value, read_results_csv, write_results_csv, EvalResult, PairKey,
    RESULTS_HEADER,
};
pub use stats::{pearson, rmse};
pub use summary::{render_summary, summarize_results, SummaryRow};
pub use svg::render_scatter_svg;

use crate::error::{Error, Result};

/// Reference and candidate values aligned by key.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairedSeries {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub keys: Vec<PairKey>,
    /// Matched pairs dropped because either value is the `+inf` sentinel.
    pub excluded: usize,
    pub unmatched_reference: Vec<PairKey>,
    pub unmatched_candidate: Vec<PairKey>,
}

impl PairedSeries {
    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn mean_x(&self) -> f64 {
        self.x.iter().sum::<f64>() / self.n() as f64
    }

    pub fn mean_y(&self) -> f64 {
        self.y.iter().sum::<f64>() / self.n() as f64
    }

    pub fn pearson(&self) -> Result<f64> {
        pearson(&self.x, &self.y)
    }

    pub fn rmse(&self) -> Result<f64> {
        rmse(&self.x, &self.y)
    }
}

fn select<'a>(
    rows: &'a [EvalResult],
    algorithm: &str,
    metric: &str,
) -> Result<BTreeMap<PairKey, &'a EvalResult>> {
    let mut map = BTreeMap::new();
    for r in rows
        .iter()
        .filter(|r| r.algorithm == algorithm && r.metric == metric)
    {
        if map.insert(r.pair_key(), r).is_some() {
            return Err(Error::DuplicateKey(format!(
                "{}/{algorithm}/{metric}",
                r.pair_key()
            )));
        }
    }
    Ok(map)
}

/// Inner join of the two sets on (room, condition, source, receiver) for one algorithm
/// and metric, in key order. Sentinel pairs are excluded and counted.
pub fn pair_results(
    reference: &[EvalResult],
    candidate: &[EvalResult],
    algorithm: &str,
    metric: &str,
) -> Result<PairedSeries> {
    let r = select(reference, algorithm, metric)?;
    let c = select(candidate, algorithm, metric)?;
    let mut s = PairedSeries {
        x: Vec::new(),
        y: Vec::new(),
        keys: Vec::new(),
        excluded: 0,
        unmatched_reference: Vec::new(),
        unmatched_candidate: c.keys().filter(|k| !r.contains_key(*k)).cloned().collect(),
    };
    for (k, rv) in &r {
        match c.get(k) {
            None => s.unmatched_reference.push(k.clone()),
            Some(cv) if rv.is_sentinel() || cv.is_sentinel() => s.excluded += 1,
            Some(cv) => {
                s.x.push(rv.value);
                s.y.push(cv.value);
                s.keys.push(k.clone());
            }
        }
    }
    if s.n() < 2 {
        return Err(Error::TooFewPairs { matched: s.n() });
    }
    Ok(s)
}

/// How rows from several datasets are combined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pooling {
    /// All datasets in one series per row.
    #[default]
    Pooled,
    /// One row per dataset, datasets identified by `room_id`.
    PerDataset,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub engine: String,
    pub algorithm: String,
    pub metric: String,
    pub dataset: Option<String>,
    pub n: usize,
    pub excluded: usize,
    pub unmatched: usize,
    pub rho: Option<f64>,
    pub rmse: Option<f64>,
    /// Why the row could not be computed.
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub engine: String,
    pub algorithm: String,
    pub metric: String,
    pub dataset: Option<String>,
    pub key: PairKey,
    pub reference: f64,
    pub candidate: f64,
}

/// The line on which reference and candidate results agree perfectly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceLine {
    pub slope: f64,
    pub intercept: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub pooling: Pooling,
    pub reference_engines: Vec<String>,
    pub rows: Vec<ReportRow>,
    pub reference_line: ReferenceLine,
    #[serde(skip)]
    pub scatter: Vec<ScatterPoint>,
}

/// One row per candidate engine x algorithm x metric (x dataset when not pooled).
///
/// Algorithm/metric pairs come from the reference set. Rows that cannot be computed
/// carry the error text instead of values.
pub fn build_report(
    reference: &[EvalResult],
    candidates: &[EvalResult],
    pooling: Pooling,
) -> Result<AgreementReport> {
    if reference.is_empty() {
        return Err(Error::Degenerate("reference result set is empty".into()));
    }
    if candidates.is_empty() {
        return Err(Error::Degenerate("candidate result set is empty".into()));
    }
    let engines: BTreeSet<&str> = candidates.iter().map(|r| r.engine.as_str()).collect();
    let pairs: BTreeSet<(&str, &str)> = reference
        .iter()
        .map(|r| (r.algorithm.as_str(), r.metric.as_str()))
        .collect();
    let datasets: Vec<Option<String>> = match pooling {
        Pooling::Pooled => vec![None],
        Pooling::PerDataset => reference
            .iter()
            .map(|r| r.room_id.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .map(Some)
            .collect(),
    };

    let mut report = AgreementReport {
        pooling,
        reference_engines: reference
            .iter()
            .map(|r| r.engine.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect(),
        rows: Vec::new(),
        reference_line: ReferenceLine {
            slope: 1.0,
            intercept: 0.0,
        },
        scatter: Vec::new(),
    };
    for engine in &engines {
        let cand: Vec<EvalResult> = candidates
            .iter()
            .filter(|r| r.engine == *engine)
            .cloned()
            .collect();
        for (algorithm, metric) in &pairs {
            for dataset in &datasets {
                let in_dataset = |r: &&EvalResult| dataset.as_ref().is_none_or(|d| &r.room_id == d);
                let refs: Vec<EvalResult> = reference.iter().filter(in_dataset).cloned().collect();
                let cands: Vec<EvalResult> = cand.iter().filter(in_dataset).cloned().collect();
                let mut row = ReportRow {
                    engine: engine.to_string(),
                    algorithm: algorithm.to_string(),
                    metric: metric.to_string(),
                    dataset: dataset.clone(),
                    n: 0,
                    excluded: 0,
                    unmatched: 0,
                    rho: None,
                    rmse: None,
                    error: None,
                };
                match pair_results(&refs, &cands, algorithm, metric) {
                    Ok(series) => {
                        row.n = series.n();
                        row.excluded = series.excluded;
                        row.unmatched =
                            series.unmatched_reference.len() + series.unmatched_candidate.len();
                        row.rmse = Some(series.rmse()?);
                        match series.pearson() {
                            Ok(r) => row.rho = Some(r),
                            Err(e) => row.error = Some(e.to_string()),
                        }
                        for ((k, x), y) in series.keys.iter().zip(&series.x).zip(&series.y) {
                            report.scatter.push(ScatterPoint {
                                engine: engine.to_string(),
                                algorithm: algorithm.to_string(),
                                metric: metric.to_string(),
                                dataset: dataset.clone(),
                                key: k.clone(),
                                reference: *x,
                                candidate: *y,
                            });
                        }
                    }
                    Err(e @ (Error::TooFewPairs { .. } | Error::DuplicateKey(_))) => {
                        row.error = Some(e.to_string())
                    }
                    Err(e) => return Err(e),
                }
                report.rows.push(row);
            }
        }
    }
    Ok(report)
}

impl AgreementReport {
    pub fn row(&self, engine: &str, algorithm: &str, metric: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| {
            r.engine == engine
                && r.algorithm == algorithm
                && r.metric == metric
                && r.dataset.is_none()
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Plain-text table: one line per row, rho (higher is better) and RMSE (lower is better).
    pub fn render_table(&self) -> String {
        let mut s = String::new();
        let pooled = self.pooling == Pooling::Pooled;
        let _ = writeln!(
            s,
            "reference: {}   pooling: {}",
            self.reference_engines.join(","),
            if pooled { "pooled" } else { "per-dataset" }
        );
        let _ = writeln!(
            s,
            "{:<10} {:<12} {:<9} {:<12} {:>5} {:>5} {:>8} {:>10}",
            "engine", "algorithm", "metric", "dataset", "N", "excl", "rho(+)", "RMSE(-)"
        );
        for r in &self.rows {
            let num = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.3}"));
            let _ = write!(
                s,
                "{:<10} {:<12} {:<9} {:<12} {:>5} {:>5} {:>8} {:>10}",
                r.engine,
                r.algorithm,
                r.metric,
                r.dataset.as_deref().unwrap_or("all"),
                r.n,
                r.excluded,
                num(r.rho),
                num(r.rmse)
            );
            if let Some(e) = &r.error {
                let _ = write!(s, "  ({e})");
            }
            s.push('\n');
        }
        s
    }

    /// Rows that produced both a correlation and an RMSE.
    pub fn succeeded(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| r.rho.is_some() && r.rmse.is_some())
            .count()
    }

    /// Wide table: one line per engine (and dataset), one column group per
    /// algorithm/metric pair holding rho and RMSE.
    pub fn render_wide_table(&self) -> String {
        let cols: BTreeSet<(&str, &str)> = self
            .rows
            .iter()
            .map(|r| (r.algorithm.as_str(), r.metric.as_str()))
            .collect();
        let lines: BTreeSet<(&str, Option<&str>)> = self
            .rows
            .iter()
            .map(|r| (r.engine.as_str(), r.dataset.as_deref()))
            .collect();
        let mut s = String::new();
        let _ = write!(s, "{:<18}", "");
        for (a, m) in &cols {
            let _ = write!(s, " | {:^17}", format!("{a}/{m}"));
        }
        s.push('\n');
        let _ = write!(s, "{:<18}", "engine");
        for _ in &cols {
            let _ = write!(s, " | {:>8} {:>8}", "rho", "RMSE");
        }
        s.push('\n');
        for (engine, dataset) in &lines {
            let label = match dataset {
                Some(d) => format!("{engine} [{d}]"),
                None => engine.to_string(),
            };
            let _ = write!(s, "{label:<18}");
            for (a, m) in &cols {
                let row = self.rows.iter().find(|r| {
                    r.engine == *engine
                        && r.dataset.as_deref() == *dataset
                        && r.algorithm == *a
                        && r.metric == *m
                });
                let num = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.3}"));
                let (rho, e) = row.map_or((None, None), |r| (r.rho, r.rmse));
                let _ = write!(s, " | {:>8} {:>8}", num(rho), num(e));
            }
            s.push('\n');
        }
        s
    }

    /// Per-point CSV for external plotting.
    pub fn write_scatter_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::parse(path, e))?;
        w.write_record([
            "engine",
            "algorithm",
            "metric",
            "dataset",
            "room_id",
            "condition_id",
            "source_id",
            "receiver_id",
            "reference",
            "candidate",
        ])
        .map_err(|e| Error::parse(path, e))?;
        for p in &self.scatter {
            w.write_record([
                p.engine.as_str(),
                &p.algorithm,
                &p.metric,
                p.dataset.as_deref().unwrap_or("all"),
                &p.key.room_id,
                &p.key.condition_id,
                &p.key.source_id,
                &p.key.receiver_id,
                &format_value(p.reference),
                &format_value(p.candidate),
            ])
            .map_err(|e| Error::parse(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Writes `report.json`, `report.txt`, `scatter.csv` and optionally one SVG per row.
    pub fn write_to_dir(&self, dir: impl AsRef<Path>, svg: bool) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let write = |name: &str, text: &str| {
            let p = dir.join(name);
            std::fs::write(&p, text).map_err(|e| Error::io(&p, e))
        };
        write("report.json", &self.to_json())?;
        write(
            "report.txt",
            &format!("{}\n{}", self.render_wide_table(), self.render_table()),
        )?;
        self.write_scatter_csv(dir.join("scatter.csv"))?;
        if svg {
            for row in self.rows.iter().filter(|r| r.n > 0) {
                let pts: Vec<(f64, f64)> = self
                    .scatter
                    .iter()
                    .filter(|p| {
                        p.engine == row.engine
                            && p.algorithm == row.algorithm
                            && p.metric == row.metric
                            && p.dataset == row.dataset
                    })
                    .map(|p| (p.reference, p.candidate))
                    .collect();
                let title = format!("{} {} {}", row.engine, row.algorithm, row.metric);
                let name = match &row.dataset {
                    Some(d) => format!(
                        "scatter_{}_{}_{}_{}.svg",
                        row.engine, row.algorithm, row.metric, d
                    ),
                    None => format!(
                        "scatter_{}_{}_{}.svg",
                        row.engine, row.algorithm, row.metric
                    ),
                };
                write(&name, &render_scatter_svg(&pts, &title))?;
            }
        }
        Ok(())
    }
}
