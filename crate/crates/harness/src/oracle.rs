//! Deterministic reference-root generators, independent of the evolutionary
//! code paths.
//!
//! Two methods:
//! * one core variable and one retained equation: dense scan of the reduced
//!   residual, bisection on sign changes, golden-section polish of touching
//!   minima;
//! * square systems of up to three unknowns: Newton from every node of a
//!   grid, finite-difference Jacobian.
//!
//! Roots closer than [`DEDUP`] are merged. Every returned root has squared
//! residual below [`ACCEPT_SQ`] on the original system.

use nes_core::reduction::{expand_individual, ReductionScheme};
use nes_core::{NesProblem, ProblemFile};
use thiserror::Error;

pub const DEDUP: f64 = 1e-6;
pub const ACCEPT_SQ: f64 = 1e-18;
const SCAN_POINTS: usize = 200_000;
const GRID_PER_AXIS: usize = 41;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("no oracle applies to {0}: need one core variable with one retained equation, or a square system of at most 3 unknowns")]
    Unsupported(String),
    #[error("root {root:?} of {name} has squared residual {residual_sq:e}")]
    Imprecise { name: String, root: Vec<f64>, residual_sq: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMethod {
    Scan,
    NewtonGrid,
}

impl OracleMethod {
    pub fn tag(self) -> &'static str {
        match self {
            Self::Scan => "oracle-scan",
            Self::NewtonGrid => "oracle-newton-grid",
        }
    }
}

pub fn oracle_method(file: &ProblemFile) -> Option<OracleMethod> {
    let p = &file.problem;
    if let Some(s) = &file.scheme {
        if s.q() == 1 && s.p() == 1 && s.reduced().iter().all(|r| !r.relation.is_multi_valued()) {
            return Some(OracleMethod::Scan);
        }
    }
    (p.n() == p.m() && p.n() <= 3).then_some(OracleMethod::NewtonGrid)
}

/// Reference roots of `file`, sorted lexicographically.
pub fn oracle_roots(file: &ProblemFile) -> Result<(OracleMethod, Vec<Vec<f64>>), OracleError> {
    let p = &file.problem;
    let method = oracle_method(file).ok_or_else(|| OracleError::Unsupported(p.name().to_string()))?;
    let mut roots = match (method, &file.scheme) {
        (OracleMethod::Scan, Some(s)) => scan(p, s),
        _ => newton_grid(p),
    };
    roots.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    for r in &roots {
        let rsq = p.residual_sq(r).unwrap_or(f64::INFINITY);
        if !(rsq < ACCEPT_SQ) {
            return Err(OracleError::Imprecise {
                name: p.name().to_string(),
                root: r.clone(),
                residual_sq: rsq,
            });
        }
    }
    Ok((method, roots))
}

fn push_unique(roots: &mut Vec<Vec<f64>>, x: Vec<f64>) {
    let close = |r: &Vec<f64>| r.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() < DEDUP;
    if !roots.iter().any(close) {
        roots.push(x);
    }
}

fn scan(p: &NesProblem, s: &ReductionScheme) -> Vec<Vec<f64>> {
    let b = s.core_bounds(p)[0];
    let eq = s.retained_eqs()[0];
    // Reduced residual, or None where the expansion leaves the bounds.
    let h = |t: f64| -> Option<(f64, Vec<f64>)> {
        let c = expand_individual(p, s, &[t]).swap_remove(0);
        c.feasible.then(|| (p.residual(eq, &c.full), c.full))
    };
    let at = |i: usize| b.lower + b.width() * i as f64 / SCAN_POINTS as f64;
    let vals: Vec<Option<f64>> = (0..=SCAN_POINTS).map(|i| h(at(i)).map(|v| v.0)).collect();

    let mut roots = Vec::new();
    for i in 0..=SCAN_POINTS {
        let Some(vi) = vals[i] else { continue };
        if vi == 0.0 {
            push_unique(&mut roots, h(at(i)).unwrap().1);
            continue;
        }
        if i < SCAN_POINTS {
            if let Some(vj) = vals[i + 1] {
                if vj != 0.0 && vi.signum() != vj.signum() {
                    let t = bisect(|t| h(t).map_or(f64::NAN, |v| v.0), at(i), at(i + 1), vi);
                    push_unique(&mut roots, h(t).unwrap().1);
                }
            }
        }
        // Touching root: a local minimum of |h| without a sign change.
        if i > 0 && i < SCAN_POINTS {
            if let (Some(vl), Some(vr)) = (vals[i - 1], vals[i + 1]) {
                let same = vl.signum() == vi.signum() && vr.signum() == vi.signum();
                if same && vi.abs() < vl.abs() && vi.abs() < vr.abs() && vi.abs() < 1e-6 {
                    let t = golden_min(|t| h(t).map_or(f64::INFINITY, |v| v.0.abs()), at(i - 1), at(i + 1));
                    if let Some((v, full)) = h(t) {
                        if v.abs() < 1e-9 {
                            push_unique(&mut roots, full);
                        }
                    }
                }
            }
        }
    }
    roots
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, fa: f64) -> f64 {
    let sa = fa.signum();
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == sa {
            a = m;
        } else {
            b = m;
        }
    }
    if f(a).abs() <= f(b).abs() {
        a
    } else {
        b
    }
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        c
    } else {
        d
    }
}

fn newton_grid(p: &NesProblem) -> Vec<Vec<f64>> {
    let n = p.n();
    let b = p.bounds();
    let mut roots = Vec::new();
    let total = GRID_PER_AXIS.pow(n as u32);
    for k in 0..total {
        let mut idx = k;
        let start: Vec<f64> = (0..n)
            .map(|j| {
                let i = idx % GRID_PER_AXIS;
                idx /= GRID_PER_AXIS;
                b[j].lower + b[j].width() * i as f64 / (GRID_PER_AXIS - 1) as f64
            })
            .collect();
        if let Some(x) = newton(p, start) {
            if p.in_bounds(&x).unwrap_or(false) && p.residual_sq(&x).unwrap_or(f64::INFINITY) < ACCEPT_SQ {
                push_unique(&mut roots, x);
            }
        }
    }
    roots
}

fn newton(p: &NesProblem, mut x: Vec<f64>) -> Option<Vec<f64>> {
    let n = x.len();
    let f = |x: &[f64]| p.evaluate_residuals(x).ok();
    let mut fx = f(&x)?;
    for _ in 0..100 {
        let mut jac = vec![vec![0.0; n]; n];
        for j in 0..n {
            let h = 1e-7 * x[j].abs().max(1.0);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let (fp, fm) = (f(&xp)?, f(&xm)?);
            for i in 0..n {
                jac[i][j] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        let step = solve(jac, fx.iter().map(|v| -v).collect())?;
        for (xi, si) in x.iter_mut().zip(&step) {
            *xi += si;
        }
        if x.iter().any(|v| !v.is_finite() || v.abs() > 1e6) {
            return None;
        }
        fx = f(&x)?;
        let size = step.iter().map(|s| s.abs()).fold(0.0, f64::max);
        if size < 1e-15 * x.iter().map(|v| v.abs()).fold(1.0, f64::max) {
            break;
        }
    }
    Some(x)
}

/// Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        rhs.swap(col, piv);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (rhs[row] - s) / a[row][row];
    }
    Some(x)
}

/// The `[roots]` section for a problem file.
pub fn roots_section(method: OracleMethod, roots: &[Vec<f64>]) -> String {
    let mut out = format!("[roots] provenance={}\n", method.tag());
    for r in roots {
        let vals: Vec<String> = r.iter().map(|v| v.to_string()).collect();
        out.push_str(&format!("root: {}\n", vals.join(", ")));
    }
    out
}
