//! Transformations of an equation system into optimisation objectives.

pub mod mones;
pub mod repulsion;

pub use mones::mones_objectives;
pub use repulsion::{
    default_gammas, default_gammas_for, RepulsionConfig, RootArchive, TransformError,
    DEFAULT_DEDUP_RADIUS, DEFAULT_RHO, DEFAULT_ZETA_CAP, ROOT_THRESHOLD,
};
