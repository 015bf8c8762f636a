//! Performance indicators and nonparametric tests.

use thiserror::Error;

pub mod indicators;
pub mod stats;

pub use indicators::{
    aggregate, count_matched_roots, igd, nof, qr, reference_front, rr, sr, Aggregate, ObjectiveImage,
};
pub use stats::{friedman_ranks, wilcoxon_signed_rank, Wilcoxon};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("reference set is empty")]
    EmptyReference,
    #[error("problem {0} has no known roots to build a reference front from")]
    UnknownRoots(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("signed-rank test needs at least 5 non-zero differences, got {0}")]
    TooFewPairs(usize),
    #[error("all paired differences are zero")]
    AllZeroDifferences,
    #[error("row {row} has {got} entries, expected {expected}")]
    RaggedMatrix { row: usize, expected: usize, got: usize },
}
