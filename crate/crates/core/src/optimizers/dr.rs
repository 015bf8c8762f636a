//! Dynamic repulsion: JADE epochs against the repulsion objective, archiving
//! each root found and restarting the population.

use serde::{Deserialize, Serialize};

use super::jade::{DeParams, Jade};
use super::OptimizerError;
use crate::problem::NesProblem;
use crate::reduction::{evaluate_reduced, ObjectiveKind, ReductionScheme};
use crate::transforms::{RepulsionConfig, RootArchive, ROOT_THRESHOLD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RestartPolicy {
    /// Uniform re-initialisation with reset adaptation after every archived root.
    Reinitialize,
    /// Keep the population and only re-evaluate it under the new repulsion field.
    Continue,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DrOptions {
    pub restart: RestartPolicy,
    /// Trace sampling period in generations; restarts are always sampled.
    pub trace_every: u64,
    /// Generations the population keeps evolving after the first individual
    /// drops under the root threshold, before admission and restart.
    pub settle_generations: u64,
}

impl Default for DrOptions {
    fn default() -> Self {
        Self {
            restart: RestartPolicy::Reinitialize,
            trace_every: 10,
            settle_generations: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrTracePoint {
    pub generation: u64,
    pub evaluations: u64,
    pub best_repulsion: f64,
    pub archive_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoundRoot {
    pub x: Vec<f64>,
    pub residual_sq: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DrOutcome {
    /// Archived roots as full decision vectors, in discovery order.
    pub roots: Vec<FoundRoot>,
    /// The archive in search coordinates (core coordinates under reduction).
    pub search_archive: RootArchive,
    pub evaluations: u64,
    pub restarts: u64,
    pub trace: Vec<DrTracePoint>,
}

/// Locates multiple roots of `problem` within `nfes_max` evaluations.
///
/// With a scheme the search runs over the core variables and `g` is the
/// squared residual of the retained equations at the best expansion;
/// otherwise `g` is the squared residual of the whole system. Repulsion
/// distances are measured in search coordinates. A candidate enters the
/// archive only if its full vector has squared residual below the root
/// threshold on the original system.
pub fn dr_loop(
    problem: &NesProblem,
    scheme: Option<&ReductionScheme>,
    cfg: &RepulsionConfig,
    params: &DeParams,
    nfes_max: u64,
    seed: u64,
    options: &DrOptions,
) -> Result<DrOutcome, OptimizerError> {
    let np = params.np as u64;
    if nfes_max < np {
        return Err(OptimizerError::InvalidBudget { budget: nfes_max, needed: np });
    }
    let bounds = match scheme {
        Some(s) => s.core_bounds(problem),
        None => problem.bounds().to_vec(),
    };
    let g = |x: &[f64]| -> f64 {
        match scheme {
            Some(s) => evaluate_reduced(problem, s, x, ObjectiveKind::Sq).value,
            None => problem.sum_sq_unchecked(x),
        }
    };
    let full_of = |x: &[f64]| -> Vec<f64> {
        match scheme {
            Some(s) => evaluate_reduced(problem, s, x, ObjectiveKind::Sq).candidate.full,
            None => x.to_vec(),
        }
    };

    let mut jade = Jade::new(&bounds, params.clone(), seed)?;
    let mut archive = RootArchive::default();
    let mut roots = Vec::new();
    let mut evaluations = 0u64;
    let mut restarts = 0u64;
    let mut trace = Vec::new();
    let mut generation = 0u64;

    let mut epoch_start = true;
    let mut settle: Option<u64> = None;
    while evaluations + np <= nfes_max {
        let t = evaluations / np;
        let mut objective = |x: &[f64]| {
            evaluations += 1;
            cfg.repulsion_value(g(x), x, &archive, t)
        };
        if epoch_start {
            jade.initialize(&mut objective);
            epoch_start = false;
        } else {
            jade.generation(&mut objective);
        }
        generation += 1;

        if settle.is_none() && jade.fitness().iter().any(|&f| f < ROOT_THRESHOLD) {
            settle = Some(options.settle_generations);
        }
        let out_of_budget = evaluations + np > nfes_max;
        let due = match settle {
            Some(0) => true,
            Some(_) if out_of_budget => true,
            Some(left) => {
                settle = Some(left - 1);
                false
            }
            None => false,
        };

        if due {
            settle = None;
            // Admit every individual under the threshold, best first.
            let mut order: Vec<usize> = (0..jade.np())
                .filter(|&i| jade.fitness()[i] < ROOT_THRESHOLD)
                .collect();
            order.sort_by(|&a, &b| jade.fitness()[a].total_cmp(&jade.fitness()[b]));
            for i in order {
                let x = &jade.population()[i];
                let full = full_of(x);
                let rsq = problem.sum_sq_unchecked(&full);
                let inside = problem.in_bounds(&full).unwrap_or(false);
                if inside && rsq < ROOT_THRESHOLD && archive.try_add(x, rsq) {
                    roots.push(FoundRoot { x: full, residual_sq: rsq });
                }
            }
        }

        let best = jade.fitness()[jade.best_index()];
        if due || generation % options.trace_every.max(1) == 0 {
            trace.push(DrTracePoint {
                generation,
                evaluations,
                best_repulsion: best,
                archive_size: archive.len(),
            });
        }
        if due {
            restarts += 1;
            match options.restart {
                RestartPolicy::Reinitialize => epoch_start = true,
                RestartPolicy::Continue => {
                    if evaluations + np > nfes_max {
                        break;
                    }
                    let t = evaluations / np;
                    let mut objective = |x: &[f64]| {
                        evaluations += 1;
                        cfg.repulsion_value(g(x), x, &archive, t)
                    };
                    jade.reevaluate(&mut objective);
                }
            }
        }
    }

    Ok(DrOutcome {
        roots,
        search_archive: archive,
        evaluations,
        restarts,
        trace,
    })
}
