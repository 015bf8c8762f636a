//! Aggregate tables, CSV round-tripping and cross-algorithm comparisons.

use std::collections::BTreeMap;

use nes_core::metrics::{aggregate, friedman_ranks, wilcoxon_signed_rank, Aggregate, MetricError, Wilcoxon};
use thiserror::Error;

use crate::config::Algorithm;
use crate::experiment::{RunReport, Trace};

/// Indicators written to the summary, with whether smaller is better.
pub const INDICATORS: &[(&str, bool)] = &[
    ("igd", true),
    ("nof", false),
    ("rr", false),
    ("sr", false),
    ("qr", true),
    ("roots", false),
    ("evaluations", true),
];

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub problem: String,
    pub algorithm: Algorithm,
    pub indicator: String,
    pub stats: Aggregate,
}

fn values(indicator: &str, runs: &[&RunReport]) -> Vec<f64> {
    runs.iter()
        .filter_map(|r| {
            let i = &r.indicators;
            match indicator {
                "igd" => i.igd,
                "nof" => i.nof.map(|v| v as f64),
                "rr" => Some(i.found? as f64 / i.declared? as f64),
                "sr" => i.success.map(|s| if s { 1.0 } else { 0.0 }),
                "qr" => i.qr,
                "roots" => Some(i.roots as f64),
                "evaluations" => Some(r.evaluations as f64),
                _ => None,
            }
        })
        .collect()
}

/// One row per (problem, algorithm, indicator) with at least one value, in
/// the order cells first appear in `reports`.
pub fn summarize(reports: &[RunReport]) -> Vec<SummaryRow> {
    let mut order: Vec<(String, Algorithm)> = Vec::new();
    let mut groups: BTreeMap<(String, Algorithm), Vec<&RunReport>> = BTreeMap::new();
    for r in reports {
        let key = (r.problem.clone(), r.algorithm);
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(r);
    }
    let mut rows = Vec::new();
    for key in order {
        let runs = &groups[&key];
        for &(name, minimize) in INDICATORS {
            if let Some(stats) = aggregate(&values(name, runs), minimize) {
                rows.push(SummaryRow {
                    problem: key.0.clone(),
                    algorithm: key.1,
                    indicator: name.to_string(),
                    stats,
                });
            }
        }
    }
    rows
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from("problem,algorithm,indicator,best,mean,worst,std\n");
    for r in rows {
        let s = &r.stats;
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.problem, r.algorithm, r.indicator, s.best, s.mean, s.worst, s.std
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReportError {
    #[error("summary line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error("{algorithm} has no `{indicator}` row for {problem}")]
    Misaligned { problem: String, algorithm: Algorithm, indicator: String },
    #[error("no `{0}` rows in the summary")]
    NoRows(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

pub fn parse_summary_csv(text: &str) -> Result<Vec<SummaryRow>, ReportError> {
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| ReportError::Csv { line: idx + 1, message };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(bad(format!("expected 7 fields, found {}", f.len())));
        }
        let algorithm = f[1].parse().map_err(|e: crate::config::ConfigError| bad(e.to_string()))?;
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("`{s}` is not a number")));
        rows.push(SummaryRow {
            problem: f[0].to_string(),
            algorithm,
            indicator: f[2].to_string(),
            stats: Aggregate {
                best: num(f[3])?,
                mean: num(f[4])?,
                worst: num(f[5])?,
                std: num(f[6])?,
            },
        });
    }
    Ok(rows)
}

fn mean_of(rows: &[SummaryRow], problem: &str, algorithm: Algorithm, indicator: &str) -> Option<f64> {
    rows.iter()
        .find(|r| r.problem == problem && r.algorithm == algorithm && r.indicator == indicator)
        .map(|r| r.stats.mean)
}

fn problems_with(rows: &[SummaryRow], indicator: &str) -> Vec<String> {
    let mut seen: Vec<String> = Vec::new();
    for r in rows.iter().filter(|r| r.indicator == indicator) {
        if !seen.contains(&r.problem) {
            seen.push(r.problem.clone());
        }
    }
    seen
}

/// Signed-rank test over per-problem means, pairs `(a, b)`: `r_plus` sums the
/// ranks of problems where `b` has the larger mean.
pub fn compare(rows: &[SummaryRow], a: Algorithm, b: Algorithm, indicator: &str) -> Result<Wilcoxon, ReportError> {
    let problems = problems_with(rows, indicator);
    if problems.is_empty() {
        return Err(ReportError::NoRows(indicator.to_string()));
    }
    let mut pairs = Vec::new();
    for p in &problems {
        let get = |alg| {
            mean_of(rows, p, alg, indicator).ok_or_else(|| ReportError::Misaligned {
                problem: p.clone(),
                algorithm: alg,
                indicator: indicator.to_string(),
            })
        };
        pairs.push((get(a)?, get(b)?));
    }
    Ok(wilcoxon_signed_rank(&pairs)?)
}

/// Friedman average ranks of the algorithms present, over every problem
/// with an `indicator` row.
pub fn rank(rows: &[SummaryRow], indicator: &str) -> Result<Vec<(Algorithm, f64)>, ReportError> {
    let problems = problems_with(rows, indicator);
    let mut algorithms: Vec<Algorithm> = rows
        .iter()
        .filter(|r| r.indicator == indicator)
        .map(|r| r.algorithm)
        .collect();
    algorithms.sort();
    algorithms.dedup();
    let minimize = INDICATORS.iter().find(|(n, _)| *n == indicator).is_none_or(|(_, m)| *m);
    let mut matrix = Vec::new();
    for p in &problems {
        let row = algorithms
            .iter()
            .map(|&alg| {
                mean_of(rows, p, alg, indicator).ok_or_else(|| ReportError::Misaligned {
                    problem: p.clone(),
                    algorithm: alg,
                    indicator: indicator.to_string(),
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        matrix.push(row);
    }
    let ranks = friedman_ranks(&matrix, minimize)?;
    Ok(algorithms.into_iter().zip(ranks).collect())
}

/// Per-cell trace CSVs: mean IGD per generation for the MONES family, every
/// sampled point of every run for the repulsion family.
pub fn trace_csvs(reports: &[RunReport]) -> Vec<((String, Algorithm), String)> {
    let mut order: Vec<(String, Algorithm)> = Vec::new();
    let mut groups: BTreeMap<(String, Algorithm), Vec<&RunReport>> = BTreeMap::new();
    for r in reports {
        let key = (r.problem.clone(), r.algorithm);
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(r);
    }
    let mut out = Vec::new();
    for key in order {
        let runs = &groups[&key];
        let text = if key.1.is_mones() {
            let mut text = String::from("generation,mean_igd\n");
            for (g, v) in mean_igd_trace(runs).iter().enumerate() {
                text.push_str(&format!("{g},{v}\n"));
            }
            text
        } else {
            let mut text = String::from("run,generation,evaluations,best_repulsion,archive_size\n");
            for r in runs {
                if let Trace::Repulsion { points } = &r.trace {
                    for p in points {
                        text.push_str(&format!(
                            "{},{},{},{},{}\n",
                            r.run, p.generation, p.evaluations, p.best_repulsion, p.archive_size
                        ));
                    }
                }
            }
            text
        };
        out.push((key, text));
    }
    out
}

/// Mean over runs of the per-generation IGD, truncated to the shortest trace.
pub fn mean_igd_trace(runs: &[&RunReport]) -> Vec<f64> {
    let traces: Vec<&Vec<f64>> = runs
        .iter()
        .filter_map(|r| match &r.trace {
            Trace::Igd { per_generation } if !per_generation.is_empty() => Some(per_generation),
            _ => None,
        })
        .collect();
    let Some(len) = traces.iter().map(|t| t.len()).min() else {
        return Vec::new();
    };
    (0..len)
        .map(|g| traces.iter().map(|t| t[g]).sum::<f64>() / traces.len() as f64)
        .collect()
}
