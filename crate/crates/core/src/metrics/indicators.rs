//! Distance-based indicators in the `(x_r, 1 − x_r)` plane and root-count
//! ratios.

use serde::{Deserialize, Serialize};

use super::MetricError;
use crate::problem::{NesProblem, RootCount};
use crate::reduction::ReductionScheme;

/// Image `(x_r, 1 − x_r)` of a solution whose first search variable is `x_r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveImage {
    pub x: f64,
    pub y: f64,
}

impl ObjectiveImage {
    pub fn new(x_r: f64) -> Self {
        Self { x: x_r, y: 1.0 - x_r }
    }

    pub fn distance(&self, other: &Self) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }
}

fn nearest(v: &ObjectiveImage, ip: &[ObjectiveImage]) -> f64 {
    ip.iter().map(|u| v.distance(u)).fold(f64::INFINITY, f64::min)
}

/// Mean over the reference set of the distance to the nearest obtained point.
pub fn igd(ip: &[ObjectiveImage], ip_star: &[ObjectiveImage]) -> Result<f64, MetricError> {
    if ip_star.is_empty() {
        return Err(MetricError::EmptyReference);
    }
    let total: f64 = ip_star.iter().map(|v| nearest(v, ip)).sum();
    Ok(total / ip_star.len() as f64)
}

/// Reference points with an obtained point within `epsilon`.
pub fn nof(ip: &[ObjectiveImage], ip_star: &[ObjectiveImage], epsilon: f64) -> usize {
    ip_star.iter().filter(|v| nearest(v, ip) <= epsilon).count()
}

/// Reference front in search coordinates: images of the known roots for a
/// finite root set, otherwise `count` evenly spaced images over the range
/// the root set covers in the first search variable.
pub fn reference_front(
    problem: &NesProblem,
    scheme: Option<&ReductionScheme>,
    count: usize,
) -> Result<Vec<ObjectiveImage>, MetricError> {
    let first = scheme.map_or(0, |s| s.core_vars()[0]);
    match problem.nor() {
        RootCount::Finite(_) => {
            let roots = problem
                .known_roots()
                .ok_or_else(|| MetricError::UnknownRoots(problem.name().to_string()))?;
            if roots.is_empty() {
                return Err(MetricError::EmptyReference);
            }
            Ok(roots.iter().map(|r| ObjectiveImage::new(r[first])).collect())
        }
        RootCount::Infinite => {
            if count == 0 {
                return Err(MetricError::InvalidArgument("count must be at least 1"));
            }
            let b = problem.root_range(first);
            if count == 1 {
                return Ok(vec![ObjectiveImage::new(b.lower)]);
            }
            let step = b.width() / (count - 1) as f64;
            Ok((0..count)
                .map(|k| {
                    let x = if k == count - 1 { b.upper } else { b.lower + k as f64 * step };
                    ObjectiveImage::new(x)
                })
                .collect())
        }
        RootCount::Unknown => Err(MetricError::UnknownRoots(problem.name().to_string())),
    }
}

/// Known roots with a found root closer than `radius` (full-space distance).
pub fn count_matched_roots(found: &[Vec<f64>], known: &[Vec<f64>], radius: f64) -> usize {
    known
        .iter()
        .filter(|k| {
            found.iter().any(|f| {
                let d: f64 = f.iter().zip(k.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
                d.sqrt() < radius
            })
        })
        .count()
}

/// Average fraction of roots found per run.
pub fn rr(found_counts: &[usize], nor: usize) -> Result<f64, MetricError> {
    if nor == 0 || found_counts.is_empty() {
        return Err(MetricError::InvalidArgument("need nor >= 1 and at least one run"));
    }
    let total: usize = found_counts.iter().sum();
    Ok(total as f64 / (nor * found_counts.len()) as f64)
}

/// Fraction of successful runs.
pub fn sr(success: &[bool]) -> Result<f64, MetricError> {
    if success.is_empty() {
        return Err(MetricError::InvalidArgument("need at least one run"));
    }
    Ok(success.iter().filter(|&&s| s).count() as f64 / success.len() as f64)
}

/// Mean squared residual of the roots from one run on the original system;
/// NaN when no roots were found or a root has the wrong dimension.
pub fn qr(problem: &NesProblem, roots: &[Vec<f64>]) -> f64 {
    if roots.is_empty() {
        return f64::NAN;
    }
    let mut total = 0.0;
    for r in roots {
        match problem.residual_sq(r) {
            Ok(v) => total += v,
            Err(_) => return f64::NAN,
        }
    }
    total / roots.len() as f64
}

/// Best, mean, worst and population standard deviation of per-run values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub best: f64,
    pub mean: f64,
    pub worst: f64,
    pub std: f64,
}

/// `minimize` picks whether the smallest value is the best.
pub fn aggregate(values: &[f64], minimize: bool) -> Option<Aggregate> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (best, worst) = if minimize { (lo, hi) } else { (hi, lo) };
    Some(Aggregate {
        best,
        mean,
        worst,
        std: var.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_expression;
    use crate::problem::Bound;

    fn imgs(xs: &[f64]) -> Vec<ObjectiveImage> {
        xs.iter().map(|&x| ObjectiveImage::new(x)).collect()
    }

    #[test]
    fn igd_basics() {
        let a = imgs(&[0.1, 0.5, -0.3]);
        assert_eq!(igd(&a, &a).unwrap(), 0.0);
        let d = igd(&[ObjectiveImage::new(1.0)], &[ObjectiveImage::new(0.0)]).unwrap();
        assert_eq!(d, 2f64.sqrt());
        assert_eq!(igd(&[], &a).unwrap(), f64::INFINITY);
        assert_eq!(igd(&a, &[]), Err(MetricError::EmptyReference));
    }

    #[test]
    fn nof_basics() {
        let star = imgs(&[-0.5, 0.5]);
        assert_eq!(nof(&star, &star, 0.02), 2);
        assert_eq!(nof(&[], &star, 0.02), 0);
        // 0.015 apart in the plane.
        let ip = [ObjectiveImage::new(-0.5 + 0.015 / 2f64.sqrt())];
        assert_eq!(nof(&ip, &star, 0.02), 1);
    }

    #[test]
    fn ratios() {
        assert_eq!(rr(&[2, 2, 2], 2).unwrap(), 1.0);
        assert_eq!(sr(&[true, true]).unwrap(), 1.0);
        assert_eq!(rr(&[11, 11, 10], 11).unwrap(), 32.0 / 33.0);
        assert_eq!(sr(&[true, true, false]).unwrap(), 2.0 / 3.0);
        assert_eq!(rr(&[0, 0], 9).unwrap(), 0.0);
        assert_eq!(sr(&[false, false]).unwrap(), 0.0);
        assert!(rr(&[1], 0).is_err());
    }

    #[test]
    fn qr_cases() {
        let eqs = vec![parse_expression("x1 - 0.001", 1).unwrap(), parse_expression("x1 - 0.002", 1).unwrap()];
        let p = NesProblem::new("q", vec![Bound::new(-1.0, 1.0)], eqs, RootCount::Unknown, 1).unwrap();
        assert!(qr(&p, &[]).is_nan());
        assert!((qr(&p, &[vec![0.0]]) - 5e-6).abs() < 1e-18);
    }

    #[test]
    fn linspace_front() {
        let eqs = vec![parse_expression("x1 - x1", 1).unwrap()];
        let p = NesProblem::new("z", vec![Bound::new(-1.0, 1.0)], eqs, RootCount::Infinite, 1).unwrap();
        let f = reference_front(&p, None, 100).unwrap();
        assert_eq!(f.len(), 100);
        assert_eq!(f[0].x, -1.0);
        assert_eq!(f[99].x, 1.0);
        assert!((f[1].x - f[0].x - 2.0 / 99.0).abs() < 1e-15);
        assert!(f.iter().all(|v| v.y == 1.0 - v.x));
    }

    #[test]
    fn aggregates() {
        let a = aggregate(&[1.0, 2.0, 3.0, 4.0], true).unwrap();
        assert_eq!((a.best, a.mean, a.worst), (1.0, 2.5, 4.0));
        assert_eq!(a.std, 1.25f64.sqrt());
        let b = aggregate(&[1.0, 2.0], false).unwrap();
        assert_eq!((b.best, b.worst), (2.0, 1.0));
        assert_eq!(aggregate(&[3.0], true).unwrap().std, 0.0);
        assert!(aggregate(&[], true).is_none());
    }

    #[test]
    fn matched_roots() {
        let known = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
        let found = vec![vec![0.005, 0.0], vec![0.5, 0.5]];
        assert_eq!(count_matched_roots(&found, &known, 0.01), 1);
    }
}
