use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use super::EvalResult;

/// Distribution of one engine/algorithm/metric column of a result set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub engine: String,
    pub algorithm: String,
    pub metric: String,
    pub n: usize,
    /// `+inf` sentinel values, excluded from mean and median.
    pub sentinels: usize,
    pub mean: Option<f64>,
    pub median: Option<f64>,
}

fn median(sorted: &[f64]) -> Option<f64> {
    let n = sorted.len();
    match n {
        0 => None,
        _ if n % 2 == 1 => Some(sorted[n / 2]),
        _ => Some(0.5 * (sorted[n / 2 - 1] + sorted[n / 2])),
    }
}

/// Groups rows by (engine, algorithm, metric), in sorted order.
pub fn summarize_results(rows: &[EvalResult]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(&str, &str, &str), Vec<f64>> = BTreeMap::new();
    for r in rows {
        groups
            .entry((r.engine.as_str(), r.algorithm.as_str(), r.metric.as_str()))
            .or_default()
            .push(r.value);
    }
    groups
        .into_iter()
        .map(|((engine, algorithm, metric), values)| {
            let mut finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
            finite.sort_by(f64::total_cmp);
            SummaryRow {
                engine: engine.into(),
                algorithm: algorithm.into(),
                metric: metric.into(),
                n: values.len(),
                sentinels: values.len() - finite.len(),
                mean: (!finite.is_empty())
                    .then(|| finite.iter().sum::<f64>() / finite.len() as f64),
                median: median(&finite),
            }
        })
        .collect()
}

pub fn render_summary(rows: &[SummaryRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<10} {:<12} {:<9} {:>5} {:>5} {:>10} {:>10}",
        "engine", "algorithm", "metric", "N", "inf", "mean", "median"
    );
    for r in rows {
        let num = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.3}"));
        let _ = writeln!(
            s,
            "{:<10} {:<12} {:<9} {:>5} {:>5} {:>10} {:>10}",
            r.engine,
            r.algorithm,
            r.metric,
            r.n,
            r.sentinels,
            num(r.mean),
            num(r.median)
        );
    }
    s
}
