//! Running problem × algorithm × run cells and scoring them.

use std::path::Path;
use std::time::Instant;

use nes_core::metrics::{count_matched_roots, igd, nof, qr, reference_front, ObjectiveImage};
use nes_core::optimizers::{dr_loop, mones_run, DeParams, DrOptions, DrTracePoint, FoundRoot, GaParams, OptimizerError};
use nes_core::suite::{suite_entry, SuiteError, DEFAULT_EPSILON};
use nes_core::transforms::{RepulsionConfig, ROOT_THRESHOLD};
use nes_core::{parse_problem_file, ProblemFile, ProblemFileError, RootCount};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{Algorithm, ExperimentConfig};
use crate::report::{summarize, SummaryRow};

/// Reference points for systems with a continuum of roots.
pub const FRONT_POINTS: usize = 100;
/// Distance under which a found root matches a known one.
pub const MATCH_RADIUS: f64 = 0.01;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Suite(#[from] SuiteError),
    #[error("{path}: {source}")]
    File { path: String, source: ProblemFileError },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, PartialEq, Error, Serialize, Deserialize)]
pub enum CellError {
    #[error("{algorithm} needs a reduction scheme, but {problem} has none")]
    NoScheme { problem: String, algorithm: String },
    #[error("optimizer failed: {0}")]
    Optimizer(String),
}

impl From<OptimizerError> for CellError {
    fn from(e: OptimizerError) -> Self {
        Self::Optimizer(e.to_string())
    }
}

/// A loaded problem with its matching tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub file: ProblemFile,
    pub epsilon: f64,
}

impl ProblemSpec {
    pub fn name(&self) -> &str {
        self.file.problem.name()
    }
}

fn looks_like_path(s: &str) -> bool {
    s.contains('/') || s.ends_with(".nes")
}

/// A suite name or a path to a problem file.
pub fn resolve_problem(name: &str) -> Result<ProblemSpec, ExperimentError> {
    let file = if looks_like_path(name) {
        let text = std::fs::read_to_string(name).map_err(|source| ExperimentError::Io {
            path: name.to_string(),
            source,
        })?;
        parse_problem_file(&text).map_err(|source| ExperimentError::File {
            path: name.to_string(),
            source,
        })?
    } else {
        suite_entry(name)?.file
    };
    let epsilon = file.epsilon.unwrap_or(DEFAULT_EPSILON);
    Ok(ProblemSpec { file, epsilon })
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a64(s: &str) -> u64 {
    s.bytes()
        .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

/// `splitmix(splitmix(splitmix(global ^ fnv1a(problem)) ^ algorithm) ^ run)`.
pub fn cell_seed(global: u64, problem: &str, algorithm: Algorithm, run: usize) -> u64 {
    let a = splitmix64(global ^ fnv1a64(problem));
    let b = splitmix64(a ^ algorithm.id());
    splitmix64(b ^ run as u64)
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Indicators {
    /// Absent when no reference front exists or nothing was found.
    pub igd: Option<f64>,
    pub nof: Option<usize>,
    /// Declared root count of a finite system.
    pub declared: Option<usize>,
    /// Known roots matched by a found root.
    pub found: Option<usize>,
    /// Every known root matched.
    pub success: Option<bool>,
    /// Mean squared residual of the found roots; absent when none were found.
    pub qr: Option<f64>,
    pub roots: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Trace {
    /// IGD of the population after each generation, initial population first.
    Igd { per_generation: Vec<f64> },
    Repulsion { points: Vec<DrTracePoint> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub problem: String,
    pub algorithm: Algorithm,
    pub run: usize,
    pub seed: u64,
    pub budget: u64,
    pub evaluations: u64,
    pub indicators: Indicators,
    pub roots: Vec<FoundRoot>,
    pub trace: Trace,
    /// Kept out of the JSON so reports are byte-reproducible.
    #[serde(skip)]
    pub wall_seconds: f64,
}

/// Engine settings shared by all cells of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub generations: usize,
    pub np: usize,
    /// Repulsion-loop population; `None` scales it with the search dimension.
    pub de_np: Option<usize>,
    pub nfes_max: Option<u64>,
}

impl From<&ExperimentConfig> for RunSettings {
    fn from(c: &ExperimentConfig) -> Self {
        Self {
            generations: c.generations,
            np: c.np,
            de_np: c.de_np,
            nfes_max: c.nfes_max,
        }
    }
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            generations: 500,
            np: 100,
            de_np: None,
            nfes_max: None,
        }
    }
}

fn dedup_roots(candidates: impl IntoIterator<Item = FoundRoot>) -> Vec<FoundRoot> {
    let mut out: Vec<FoundRoot> = Vec::new();
    for c in candidates {
        let close = out.iter().any(|r| {
            r.x.iter().zip(&c.x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() < MATCH_RADIUS
        });
        if !close {
            out.push(c);
        }
    }
    out
}

fn images(first: impl IntoIterator<Item = f64>) -> Vec<ObjectiveImage> {
    first.into_iter().map(ObjectiveImage::new).collect()
}

fn score(spec: &ProblemSpec, front: Option<&[ObjectiveImage]>, ip: &[ObjectiveImage], roots: &[FoundRoot]) -> Indicators {
    let p = &spec.file.problem;
    let (igd_v, nof_v) = match front {
        Some(f) if !ip.is_empty() => (igd(ip, f).ok(), Some(nof(ip, f, spec.epsilon))),
        Some(_) => (None, Some(0)),
        None => (None, None),
    };
    let full: Vec<Vec<f64>> = roots.iter().map(|r| r.x.clone()).collect();
    let (declared, found, success) = match (p.nor(), p.known_roots()) {
        (RootCount::Finite(k), Some(known)) => {
            let m = count_matched_roots(&full, known, MATCH_RADIUS);
            (Some(k), Some(m), Some(m == k))
        }
        _ => (None, None, None),
    };
    let q = qr(p, &full);
    Indicators {
        igd: igd_v,
        nof: nof_v,
        declared,
        found,
        success,
        qr: (!q.is_nan()).then_some(q),
        roots: roots.len(),
    }
}

/// Runs one cell. Deterministic in `(spec, algorithm, seed, settings)`.
pub fn run_cell(
    spec: &ProblemSpec,
    algorithm: Algorithm,
    run: usize,
    seed: u64,
    settings: &RunSettings,
) -> Result<RunReport, CellError> {
    let p = &spec.file.problem;
    let scheme = if algorithm.uses_reduction() {
        Some(spec.file.scheme.as_ref().ok_or_else(|| CellError::NoScheme {
            problem: p.name().to_string(),
            algorithm: algorithm.name().to_string(),
        })?)
    } else {
        None
    };
    let front = reference_front(p, scheme, FRONT_POINTS).ok();
    let started = Instant::now();

    let report = if algorithm.is_mones() {
        let params = GaParams {
            np: settings.np,
            ..GaParams::default()
        };
        let out = mones_run(p, scheme, &params, settings.generations, seed)?;
        let per_generation = match &front {
            Some(f) => out
                .first_var_trace
                .iter()
                .map(|xs| igd(&images(xs.iter().copied()), f).unwrap_or(f64::INFINITY))
                .collect(),
            None => Vec::new(),
        };
        let roots = dedup_roots(out.population.iter().filter_map(|x| {
            let rsq = p.residual_sq(x).ok()?;
            p.is_root(x, ROOT_THRESHOLD).then(|| FoundRoot {
                x: x.clone(),
                residual_sq: rsq,
            })
        }));
        let ip = images(out.search_population.iter().map(|x| x[0]));
        RunReport {
            problem: p.name().to_string(),
            algorithm,
            run,
            seed,
            budget: (settings.np * (settings.generations + 1)) as u64,
            evaluations: out.evaluations,
            indicators: score(spec, front.as_deref(), &ip, &roots),
            roots,
            trace: Trace::Igd { per_generation },
            wall_seconds: 0.0,
        }
    } else {
        let budget = settings.nfes_max.unwrap_or(p.nfes_max());
        let bounds = scheme.map_or_else(|| p.bounds().to_vec(), |s| s.core_bounds(p));
        let mut params = DeParams::for_dimension(bounds.len());
        if let Some(np) = settings.de_np {
            params.np = np;
            params.archive_size = np;
        }
        let t_max = (budget / params.np as u64).max(1);
        let cfg = RepulsionConfig::for_bounds(&bounds, t_max).map_err(|e| CellError::Optimizer(e.to_string()))?;
        let out = dr_loop(p, scheme, &cfg, &params, budget, seed, &DrOptions::default())?;
        let ip = images(out.search_archive.roots().iter().map(|(x, _)| x[0]));
        RunReport {
            problem: p.name().to_string(),
            algorithm,
            run,
            seed,
            budget,
            evaluations: out.evaluations,
            indicators: score(spec, front.as_deref(), &ip, &out.roots),
            roots: out.roots,
            trace: Trace::Repulsion { points: out.trace },
            wall_seconds: 0.0,
        }
    };
    Ok(RunReport {
        wall_seconds: started.elapsed().as_secs_f64(),
        ..report
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FailedCell {
    pub problem: String,
    pub algorithm: Algorithm,
    pub run: usize,
    pub error: CellError,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    /// Sorted by (problem order, algorithm order, run).
    pub reports: Vec<RunReport>,
    pub failures: Vec<FailedCell>,
    pub summary: Vec<SummaryRow>,
}

/// Resolves every problem, then runs all cells on `jobs` worker threads.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult, ExperimentError> {
    let specs = cfg
        .problems
        .iter()
        .map(|n| resolve_problem(n))
        .collect::<Result<Vec<_>, _>>()?;
    let settings = RunSettings::from(cfg);
    let cells: Vec<(usize, Algorithm, usize)> = (0..specs.len())
        .flat_map(|pi| {
            cfg.algorithms
                .iter()
                .flat_map(move |&a| (0..cfg.runs).map(move |r| (pi, a, r)))
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| ExperimentError::Pool(e.to_string()))?;
    let outcomes: Vec<Result<RunReport, FailedCell>> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(pi, a, r)| {
                let spec = &specs[pi];
                let seed = cell_seed(cfg.seed, spec.name(), a, r);
                run_cell(spec, a, r, seed, &settings).map_err(|error| FailedCell {
                    problem: spec.name().to_string(),
                    algorithm: a,
                    run: r,
                    error,
                })
            })
            .collect()
    });
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => reports.push(r),
            Err(f) => failures.push(f),
        }
    }
    let summary = summarize(&reports);
    Ok(ExperimentResult {
        reports,
        failures,
        summary,
    })
}

pub fn report_json(report: &RunReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
    s.push('\n');
    s
}

/// Writes run JSON files, `summary.csv`, traces, `timing.csv` and, when any
/// cell failed, `failures.csv` under `dir`.
pub fn write_outputs(result: &ExperimentResult, dir: &Path) -> Result<(), ExperimentError> {
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| ExperimentError::Io { path, source }
    };
    let write = |path: &Path, text: &str| -> Result<(), ExperimentError> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(io(parent))?;
        }
        std::fs::write(path, text).map_err(io(path))
    };
    for r in &result.reports {
        let path = dir
            .join(&r.problem)
            .join(r.algorithm.name())
            .join(format!("run_{}.json", r.run));
        write(&path, &report_json(r))?;
    }
    write(&dir.join("summary.csv"), &crate::report::summary_csv(&result.summary))?;
    for (key, text) in crate::report::trace_csvs(&result.reports) {
        write(&dir.join(&key.0).join(key.1.name()).join("trace.csv"), &text)?;
    }
    let mut timing = String::from("problem,algorithm,run,wall_seconds\n");
    for r in &result.reports {
        timing.push_str(&format!("{},{},{},{}\n", r.problem, r.algorithm, r.run, r.wall_seconds));
    }
    write(&dir.join("timing.csv"), &timing)?;
    if !result.failures.is_empty() {
        let mut text = String::from("problem,algorithm,run,error\n");
        for f in &result.failures {
            text.push_str(&format!("{},{},{},\"{}\"\n", f.problem, f.algorithm, f.run, f.error));
        }
        write(&dir.join("failures.csv"), &text)?;
    }
    Ok(())
}
