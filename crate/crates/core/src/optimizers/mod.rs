//! Evolutionary engines and the loops that drive them over equation systems.

use thiserror::Error;

use crate::problem::Bound;

pub mod dr;
pub mod jade;
pub mod mones;
pub mod nsga2;

pub use dr::{dr_loop, DrOptions, DrOutcome, DrTracePoint, FoundRoot, RestartPolicy};
pub use jade::{jade_run, reflect, DeParams, Jade, JadeOutcome};
pub use mones::{mones_run, MonesOutcome};
pub use nsga2::{crowding_distances, dominates, non_dominated_fronts, nsga2_run, GaParams, Nsga2Outcome, Solution};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimizerError {
    #[error("budget {budget} is below the {needed} evaluations one generation needs")]
    InvalidBudget { budget: u64, needed: u64 },
    #[error("bounds must be non-empty, finite and ordered")]
    InvalidBounds,
    #[error("invalid parameters: {0}")]
    InvalidParams(&'static str),
}

pub(crate) fn check_bounds(bounds: &[Bound]) -> Result<(), OptimizerError> {
    let ok = !bounds.is_empty()
        && bounds
            .iter()
            .all(|b| b.lower.is_finite() && b.upper.is_finite() && b.lower < b.upper);
    if ok {
        Ok(())
    } else {
        Err(OptimizerError::InvalidBounds)
    }
}

/// NaN objective values rank worst.
#[inline]
pub(crate) fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}
