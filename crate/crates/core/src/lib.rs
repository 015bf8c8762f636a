//! Locating multiple roots of nonlinear equation systems with evolutionary
//! search, optionally on a reduced variable set.
//!
//! The pieces, bottom-up: [`expr`] and [`parser`] turn equation text into
//! evaluable trees; [`problem`] bundles equations with bounds; [`reduction`]
//! expands core vectors through reduction relations; [`transforms`] provides
//! the repulsion and bi-objective forms; [`optimizers`] runs JADE and NSGA-II
//! over them; [`metrics`] scores the results; [`suite`] ships the benchmark
//! systems.

pub mod expr;
pub mod metrics;
pub mod optimizers;
pub mod parser;
pub mod problem;
pub mod problem_file;
pub mod reduction;
pub mod special;
pub mod suite;
pub mod transforms;

pub use expr::{Expr, MultiExpr};
pub use parser::{parse_expression, parse_relation, ParseError};
pub use problem::{Bound, NesProblem, ProblemError, RootCount};
pub use problem_file::{parse_problem_file, print_problem_file, ProblemFile, ProblemFileError};
pub use reduction::{
    evaluate_reduced, expand_individual, expand_population, reduced_objective, validate_scheme, ExpandedCandidate,
    ObjectiveKind, ReducedEvaluation, ReducedVariable, ReductionScheme, SchemeViolation,
};
