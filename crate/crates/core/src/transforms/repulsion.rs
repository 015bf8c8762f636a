//! Multiplicative repulsion around already-located roots with a radius that
//! shrinks over the run.
//!
//! ```text
//! R(x) = g(x) · Π_j ζ(ρ, ‖x − x*_j‖)
//! ζ(ρ, d) = 1 / |erf(ρ d)|   if d ≤ γ_t,   1 otherwise
//! γ_t = γ_min + (1 − t/t_max)² (γ_max − γ_min)
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::problem::{Bound, NesProblem};
use crate::special::erf;

pub const DEFAULT_RHO: f64 = 0.1;
pub const DEFAULT_ZETA_CAP: f64 = 1e12;
/// A point whose squared residual (or repulsion value) is below this counts as a root.
pub const ROOT_THRESHOLD: f64 = 1e-5;
pub const DEFAULT_DEDUP_RADIUS: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransformError {
    #[error("iteration {t} outside 0..={t_max}")]
    IterationOutOfRange { t: u64, t_max: u64 },
    #[error("invalid repulsion configuration: {0}")]
    InvalidConfig(&'static str),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepulsionConfig {
    pub rho: f64,
    pub t_max: u64,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub zeta_cap: f64,
}

/// `(0.01 · w, 0.5 · w)` with `w` the narrowest bound width.
pub fn default_gammas_for(bounds: &[Bound]) -> (f64, f64) {
    let w = bounds.iter().map(Bound::width).fold(f64::INFINITY, f64::min);
    (0.01 * w, 0.5 * w)
}

pub fn default_gammas(problem: &NesProblem) -> (f64, f64) {
    default_gammas_for(problem.bounds())
}

impl RepulsionConfig {
    pub fn new(rho: f64, t_max: u64, gamma_min: f64, gamma_max: f64, zeta_cap: f64) -> Result<Self, TransformError> {
        if !(rho > 0.0) {
            return Err(TransformError::InvalidConfig("rho must be positive"));
        }
        if !(gamma_min > 0.0 && gamma_min <= gamma_max) {
            return Err(TransformError::InvalidConfig("need 0 < gamma_min <= gamma_max"));
        }
        if !(zeta_cap >= 1.0) {
            return Err(TransformError::InvalidConfig("zeta_cap must be at least 1"));
        }
        if t_max == 0 {
            return Err(TransformError::InvalidConfig("t_max must be positive"));
        }
        Ok(Self {
            rho,
            t_max,
            gamma_min,
            gamma_max,
            zeta_cap,
        })
    }

    /// Defaults for a search box: ρ = 0.1, radii from the box, cap 1e12.
    pub fn for_bounds(bounds: &[Bound], t_max: u64) -> Result<Self, TransformError> {
        let (lo, hi) = default_gammas_for(bounds);
        Self::new(DEFAULT_RHO, t_max, lo, hi, DEFAULT_ZETA_CAP)
    }

    pub fn gamma_at(&self, t: u64) -> Result<f64, TransformError> {
        if t > self.t_max {
            return Err(TransformError::IterationOutOfRange { t, t_max: self.t_max });
        }
        Ok(self.gamma_unchecked(t))
    }

    fn gamma_unchecked(&self, t: u64) -> f64 {
        let lambda = (1.0 - t as f64 / self.t_max as f64).powi(2);
        self.gamma_min + lambda * (self.gamma_max - self.gamma_min)
    }

    pub fn zeta(&self, d: f64, gamma: f64) -> f64 {
        if d <= gamma {
            (1.0 / erf(self.rho * d).abs()).min(self.zeta_cap)
        } else {
            1.0
        }
    }

    /// Repulsion value of `x` given its objective `g`. Iterations past
    /// `t_max` use `γ_min`.
    pub fn repulsion_value(&self, g: f64, x: &[f64], archive: &RootArchive, t: u64) -> f64 {
        let gamma = self.gamma_unchecked(t.min(self.t_max));
        archive
            .roots()
            .iter()
            .fold(g, |acc, (root, _)| acc * self.zeta(euclidean(x, root), gamma))
    }
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Located roots, kept at least `dedup_radius` apart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootArchive {
    roots: Vec<(Vec<f64>, f64)>,
    dedup_radius: f64,
}

impl Default for RootArchive {
    fn default() -> Self {
        Self::new(DEFAULT_DEDUP_RADIUS)
    }
}

impl RootArchive {
    pub fn new(dedup_radius: f64) -> Self {
        Self {
            roots: Vec::new(),
            dedup_radius,
        }
    }

    pub fn roots(&self) -> &[(Vec<f64>, f64)] {
        &self.roots
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn dedup_radius(&self) -> f64 {
        self.dedup_radius
    }

    /// Whether `x` would be admitted: a root by the residual threshold and no
    /// stored root within the dedup radius.
    pub fn admits(&self, x: &[f64], residual_sq: f64) -> bool {
        residual_sq < ROOT_THRESHOLD
            && self
                .roots
                .iter()
                .all(|(r, _)| euclidean(x, r) >= self.dedup_radius)
    }

    pub fn try_add(&mut self, x: &[f64], residual_sq: f64) -> bool {
        if !self.admits(x, residual_sq) {
            return false;
        }
        self.roots.push((x.to_vec(), residual_sq));
        true
    }

    pub fn into_roots(self) -> Vec<(Vec<f64>, f64)> {
        self.roots
    }
}
