//! Nonlinear equation systems over a box-shaped decision space.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::Expr;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub lower: f64,
    pub upper: f64,
}

impl Bound {
    pub fn new(lower: f64, upper: f64) -> Self {
        Self { lower, upper }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }

    /// Nearest bound for an out-of-range value; NaN maps to the lower bound.
    pub fn clamp(&self, v: f64) -> f64 {
        if v > self.upper {
            self.upper
        } else if v >= self.lower {
            v
        } else {
            self.lower
        }
    }
}

/// Number of roots a system is known to have.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RootCount {
    Finite(usize),
    Infinite,
    Unknown,
}

impl fmt::Display for RootCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(n) => write!(f, "{n}"),
            Self::Infinite => f.write_str("infinite"),
            Self::Unknown => f.write_str("unknown"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProblemError {
    #[error("dimension mismatch: expected {expected} values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("variable x{var}: lower bound {lower} is not below upper bound {upper}")]
    BoundOrder { var: usize, lower: String, upper: String },
    #[error("equation {equation} references x{var}, outside x1..x{n}")]
    UndeclaredVariable { equation: usize, var: String, n: usize },
    #[error("a system needs at least one variable and one equation")]
    Empty,
}

/// An equation system `f_i(x) = 0`, `i = 1..m`, over `n` bounded variables.
#[derive(Debug, Clone, PartialEq)]
pub struct NesProblem {
    name: String,
    bounds: Vec<Bound>,
    equations: Vec<Expr>,
    nor: RootCount,
    known_roots: Option<Vec<Vec<f64>>>,
    root_box: Option<Vec<Bound>>,
    nfes_max: u64,
}

impl NesProblem {
    pub fn new(
        name: impl Into<String>,
        bounds: Vec<Bound>,
        equations: Vec<Expr>,
        nor: RootCount,
        nfes_max: u64,
    ) -> Result<Self, ProblemError> {
        if bounds.is_empty() || equations.is_empty() {
            return Err(ProblemError::Empty);
        }
        for (j, b) in bounds.iter().enumerate() {
            if !(b.lower < b.upper) {
                return Err(ProblemError::BoundOrder {
                    var: j + 1,
                    lower: b.lower.to_string(),
                    upper: b.upper.to_string(),
                });
            }
        }
        let n = bounds.len();
        for (i, eq) in equations.iter().enumerate() {
            if let Some(&v) = eq.variables().iter().next_back() {
                if v >= n {
                    return Err(ProblemError::UndeclaredVariable {
                        equation: i + 1,
                        var: if v == usize::MAX { "0".into() } else { (v + 1).to_string() },
                        n,
                    });
                }
            }
        }
        Ok(Self {
            name: name.into(),
            bounds,
            equations,
            nor,
            known_roots: None,
            root_box: None,
            nfes_max,
        })
    }

    pub fn with_known_roots(mut self, roots: Vec<Vec<f64>>) -> Result<Self, ProblemError> {
        for r in &roots {
            self.check_dim(r)?;
        }
        self.known_roots = Some(roots);
        Ok(self)
    }

    /// Box enclosing the root set, for systems whose roots only occupy part
    /// of the decision space. Each range must lie inside the variable's bounds.
    pub fn with_root_box(mut self, root_box: Vec<Bound>) -> Result<Self, ProblemError> {
        if root_box.len() != self.n() {
            return Err(ProblemError::DimensionMismatch {
                expected: self.n(),
                got: root_box.len(),
            });
        }
        for (j, (r, b)) in root_box.iter().zip(&self.bounds).enumerate() {
            if !(r.lower <= r.upper && b.contains(r.lower) && b.contains(r.upper)) {
                return Err(ProblemError::BoundOrder {
                    var: j + 1,
                    lower: r.lower.to_string(),
                    upper: r.upper.to_string(),
                });
            }
        }
        self.root_box = Some(root_box);
        Ok(self)
    }

    /// Range of variable `j` (0-based) over the root set; the variable's
    /// bounds unless a root box was given.
    pub fn root_range(&self, j: usize) -> Bound {
        self.root_box.as_ref().map_or(self.bounds[j], |r| r[j])
    }

    pub fn has_root_box(&self) -> bool {
        self.root_box.is_some()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.bounds.len()
    }

    pub fn m(&self) -> usize {
        self.equations.len()
    }

    pub fn bounds(&self) -> &[Bound] {
        &self.bounds
    }

    pub fn equations(&self) -> &[Expr] {
        &self.equations
    }

    pub fn nor(&self) -> RootCount {
        self.nor
    }

    pub fn known_roots(&self) -> Option<&[Vec<f64>]> {
        self.known_roots.as_deref()
    }

    pub fn nfes_max(&self) -> u64 {
        self.nfes_max
    }

    fn check_dim(&self, x: &[f64]) -> Result<(), ProblemError> {
        if x.len() == self.n() {
            Ok(())
        } else {
            Err(ProblemError::DimensionMismatch {
                expected: self.n(),
                got: x.len(),
            })
        }
    }

    /// Residual of equation `i` (0-based). `x` must have length `n`.
    #[inline]
    pub fn residual(&self, i: usize, x: &[f64]) -> f64 {
        self.equations[i].eval(x)
    }

    pub fn evaluate_residuals(&self, x: &[f64]) -> Result<Vec<f64>, ProblemError> {
        self.check_dim(x)?;
        Ok(self.equations.iter().map(|e| e.eval(x)).collect())
    }

    /// `Σ|f_i(x)|`
    pub fn residual_l1(&self, x: &[f64]) -> Result<f64, ProblemError> {
        self.check_dim(x)?;
        Ok(self.equations.iter().map(|e| e.eval(x).abs()).sum())
    }

    /// `Σ f_i(x)²`
    pub fn residual_sq(&self, x: &[f64]) -> Result<f64, ProblemError> {
        self.check_dim(x)?;
        Ok(self.sum_sq_unchecked(x))
    }

    pub(crate) fn sum_sq_unchecked(&self, x: &[f64]) -> f64 {
        self.equations
            .iter()
            .map(|e| {
                let v = e.eval(x);
                v * v
            })
            .sum()
    }

    pub fn in_bounds(&self, x: &[f64]) -> Result<bool, ProblemError> {
        self.check_dim(x)?;
        Ok(self.bounds.iter().zip(x).all(|(b, &v)| b.contains(v)))
    }

    /// Root test used throughout: squared residual below `threshold` and
    /// inside the decision space. A wrongly sized vector is never a root.
    pub fn is_root(&self, x: &[f64], threshold: f64) -> bool {
        match (self.residual_sq(x), self.in_bounds(x)) {
            (Ok(sq), Ok(inside)) => sq < threshold && inside,
            _ => false,
        }
    }
}
