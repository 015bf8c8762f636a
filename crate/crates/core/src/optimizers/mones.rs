//! The bi-objective transform solved with NSGA-II.

use super::nsga2::{nsga2_run, GaParams};
use super::OptimizerError;
use crate::problem::NesProblem;
use crate::reduction::{evaluate_reduced, ObjectiveKind, ReductionScheme};
use crate::transforms::mones_objectives;

#[derive(Debug, Clone, PartialEq)]
pub struct MonesOutcome {
    /// Final population as full decision vectors.
    pub population: Vec<Vec<f64>>,
    /// Final population in search coordinates.
    pub search_population: Vec<Vec<f64>>,
    pub objectives: Vec<[f64; 2]>,
    /// First search variable of every member, per generation (initial
    /// population first).
    pub first_var_trace: Vec<Vec<f64>>,
    pub evaluations: u64,
}

/// Objectives `(x_r + Σ|f|, 1 − x_r + p·max|f|)` over the retained equations,
/// with `x_r` the first search variable.
pub fn mones_run(
    problem: &NesProblem,
    scheme: Option<&ReductionScheme>,
    params: &GaParams,
    max_generations: usize,
    seed: u64,
) -> Result<MonesOutcome, OptimizerError> {
    let bounds = match scheme {
        Some(s) => s.core_bounds(problem),
        None => problem.bounds().to_vec(),
    };
    let mut residuals = Vec::with_capacity(problem.m());
    let objective = |x: &[f64]| -> [f64; 2] {
        let (a, b) = match scheme {
            Some(s) => {
                let e = evaluate_reduced(problem, s, x, ObjectiveKind::L1);
                mones_objectives(x[0], &e.residuals)
            }
            None => {
                residuals.clear();
                residuals.extend((0..problem.m()).map(|i| problem.residual(i, x)));
                mones_objectives(x[0], &residuals)
            }
        };
        [a, b]
    };
    let mut first_var_trace = Vec::with_capacity(max_generations + 1);
    let out = nsga2_run(objective, &bounds, params, max_generations, seed, |_, pop| {
        first_var_trace.push(pop.iter().map(|s| s.x[0]).collect());
    })?;
    let search_population: Vec<Vec<f64>> = out.population.iter().map(|s| s.x.clone()).collect();
    let population = match scheme {
        Some(s) => search_population
            .iter()
            .map(|c| evaluate_reduced(problem, s, c, ObjectiveKind::L1).candidate.full)
            .collect(),
        None => search_population.clone(),
    };
    Ok(MonesOutcome {
        population,
        search_population,
        objectives: out.population.iter().map(|s| s.objectives).collect(),
        first_var_trace,
        evaluations: out.evaluations,
    })
}
