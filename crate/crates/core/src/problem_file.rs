//! Text format for equation systems, their reduction schemes and reference
//! roots.
//!
//! ```text
//! # comment
//! [problem] name=F1 vars=2
//! bounds: x1 in [-1, 1]; x2 in [-1, 1]
//! eq1: x1^2 + x2^2 - 1
//! eq2: x1 - x2
//! [reduction]
//! reduce x2 = x1 eliminates eq2
//! [roots] provenance=analytic
//! root: sqrt(0.5), sqrt(0.5)
//! root: -sqrt(0.5), -sqrt(0.5)
//! [meta] nor=2 nfes_max=50000 epsilon=0.02
//! ```
//!
//! Systems with a continuum of roots may give `range: x2 in [0, 1]` lines in
//! `[roots]` to say which part of each variable's bounds the roots occupy.
//!
//! Equations are residuals (`= 0`) numbered from 1 without gaps. Bounds may
//! cover ranges (`x1..x20 in [-1, 1]`). Bound and root entries accept constant
//! expressions. Section headers may carry `key=value` pairs; lines inside
//! `[meta]` may too. Reduction lines are kept in order.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::expr::{Expr, MultiExpr};
use crate::parser::{parse_expression, parse_relation, ParseError};
use crate::problem::{Bound, NesProblem, ProblemError, RootCount};
use crate::reduction::{validate_scheme, ReducedVariable, ReductionScheme, SchemeViolation};

pub const DEFAULT_NFES_MAX: u64 = 50_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemFile {
    pub problem: NesProblem,
    pub scheme: Option<ReductionScheme>,
    /// Root-matching tolerance for the count of matched reference points.
    pub epsilon: Option<f64>,
    /// How the listed roots were obtained.
    pub root_provenance: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemFileError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: {source}")]
    Expression { line: usize, source: ParseError },
    #[error("line {line}: bounds for x{var} given twice")]
    DuplicateVariable { line: usize, var: usize },
    #[error("no bounds for x{var}")]
    MissingBound { var: usize },
    #[error("missing [problem] section")]
    MissingProblem,
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("invalid reduction scheme: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Scheme(Vec<SchemeViolation>),
}

#[derive(PartialEq, Clone, Copy)]
enum Section {
    None,
    Problem,
    Reduction,
    Roots,
    Meta,
}

fn malformed(line: usize, message: impl Into<String>) -> ProblemFileError {
    ProblemFileError::Malformed {
        line,
        message: message.into(),
    }
}

fn key_values(text: &str, line: usize, into: &mut BTreeMap<String, String>) -> Result<(), ProblemFileError> {
    for token in text.split_whitespace() {
        let (k, v) = token
            .split_once('=')
            .ok_or_else(|| malformed(line, format!("expected key=value, found `{token}`")))?;
        into.insert(k.to_string(), v.to_string());
    }
    Ok(())
}

fn constant(text: &str, line: usize) -> Result<f64, ProblemFileError> {
    parse_expression(text.trim(), 0)
        .map(|e| e.eval(&[]))
        .map_err(|source| ProblemFileError::Expression { line, source })
}

/// `xK` → `K - 1`.
fn variable(text: &str, n: usize, line: usize) -> Result<usize, ProblemFileError> {
    let k: usize = text
        .trim()
        .strip_prefix('x')
        .and_then(|d| d.parse().ok())
        .ok_or_else(|| malformed(line, format!("expected a variable like x1, found `{}`", text.trim())))?;
    if k == 0 || k > n {
        return Err(malformed(line, format!("x{k} outside x1..x{n}")));
    }
    Ok(k - 1)
}

/// `eqK` → `K - 1`.
fn equation_label(text: &str, line: usize) -> Result<usize, ProblemFileError> {
    text.trim()
        .strip_prefix("eq")
        .and_then(|d| d.parse::<usize>().ok())
        .filter(|&k| k >= 1)
        .map(|k| k - 1)
        .ok_or_else(|| malformed(line, format!("expected an equation label like eq1, found `{}`", text.trim())))
}

fn parse_bounds(
    text: &str,
    n: usize,
    line: usize,
    bounds: &mut [Option<Bound>],
) -> Result<(), ProblemFileError> {
    for item in text.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let (vars, range) = item
            .split_once(" in ")
            .ok_or_else(|| malformed(line, format!("expected `xK in [lo, hi]`, found `{item}`")))?;
        let range = range
            .trim()
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| malformed(line, "bounds must be written as [lo, hi]"))?;
        let (lo, hi) = range
            .split_once(',')
            .ok_or_else(|| malformed(line, "bounds must be written as [lo, hi]"))?;
        let b = Bound::new(constant(lo, line)?, constant(hi, line)?);
        let (first, last) = match vars.split_once("..") {
            Some((a, z)) => (variable(a, n, line)?, variable(z, n, line)?),
            None => {
                let v = variable(vars, n, line)?;
                (v, v)
            }
        };
        if first > last {
            return Err(malformed(line, "variable range runs backwards"));
        }
        for slot in first..=last {
            if bounds[slot].is_some() {
                return Err(ProblemFileError::DuplicateVariable { line, var: slot + 1 });
            }
            bounds[slot] = Some(b);
        }
    }
    Ok(())
}

pub fn parse_problem_file(text: &str) -> Result<ProblemFile, ProblemFileError> {
    let mut section = Section::None;
    let mut header = BTreeMap::new();
    let mut meta = BTreeMap::new();
    let mut roots_header = BTreeMap::new();
    let mut n: Option<usize> = None;
    let mut bounds: Vec<Option<Bound>> = Vec::new();
    let mut equations: Vec<Expr> = Vec::new();
    let mut reduced: Vec<(usize, MultiExpr, usize)> = Vec::new();
    let mut roots: Vec<Vec<f64>> = Vec::new();
    let mut root_box: Vec<Option<Bound>> = Vec::new();
    let mut has_reduction = false;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let (name, tail) = rest
                .split_once(']')
                .ok_or_else(|| malformed(line, "unterminated section header"))?;
            section = match name.trim() {
                "problem" => {
                    if n.is_some() {
                        return Err(malformed(line, "second [problem] section"));
                    }
                    key_values(tail, line, &mut header)?;
                    let vars: usize = header
                        .get("vars")
                        .and_then(|v| v.parse().ok())
                        .filter(|&v| v > 0)
                        .ok_or_else(|| malformed(line, "[problem] needs vars=<positive integer>"))?;
                    if !header.contains_key("name") {
                        return Err(malformed(line, "[problem] needs name=<name>"));
                    }
                    n = Some(vars);
                    bounds = vec![None; vars];
                    root_box = vec![None; vars];
                    Section::Problem
                }
                "reduction" => {
                    has_reduction = true;
                    Section::Reduction
                }
                "roots" => {
                    key_values(tail, line, &mut roots_header)?;
                    Section::Roots
                }
                "meta" => {
                    key_values(tail, line, &mut meta)?;
                    Section::Meta
                }
                other => return Err(malformed(line, format!("unknown section [{other}]"))),
            };
            continue;
        }
        let nv = n.ok_or(ProblemFileError::MissingProblem)?;
        match section {
            Section::None => return Err(ProblemFileError::MissingProblem),
            Section::Problem => {
                if let Some(rest) = content.strip_prefix("bounds") {
                    let rest = rest.trim_start();
                    parse_bounds(rest.strip_prefix(':').unwrap_or(rest), nv, line, &mut bounds)?;
                } else {
                    let (label, body) = content
                        .split_once(':')
                        .ok_or_else(|| malformed(line, "expected `bounds:` or `eqK: <expression>`"))?;
                    let k = equation_label(label, line)?;
                    if k != equations.len() {
                        return Err(malformed(line, format!("expected eq{}, found eq{}", equations.len() + 1, k + 1)));
                    }
                    let e = parse_expression(body.trim(), nv)
                        .map_err(|source| ProblemFileError::Expression { line, source })?;
                    equations.push(e);
                }
            }
            Section::Reduction => {
                let rest = content
                    .strip_prefix("reduce ")
                    .ok_or_else(|| malformed(line, "expected `reduce xK = <relation> eliminates eqJ`"))?;
                let (lhs, rhs) = rest
                    .split_once('=')
                    .ok_or_else(|| malformed(line, "missing `=` in reduction"))?;
                let (relation, elim) = rhs
                    .rsplit_once(" eliminates ")
                    .ok_or_else(|| malformed(line, "missing `eliminates eqJ`"))?;
                let var = variable(lhs, nv, line)?;
                let rel = parse_relation(relation.trim(), nv)
                    .map_err(|source| ProblemFileError::Expression { line, source })?;
                reduced.push((var, rel, equation_label(elim, line)?));
            }
            Section::Roots => {
                if let Some(rest) = content.strip_prefix("range:") {
                    parse_bounds(rest, nv, line, &mut root_box)?;
                    continue;
                }
                let values = content
                    .strip_prefix("root:")
                    .ok_or_else(|| malformed(line, "expected `root: v1, v2, ...`"))?;
                let r = values
                    .split(',')
                    .map(|v| constant(v, line))
                    .collect::<Result<Vec<f64>, _>>()?;
                roots.push(r);
            }
            Section::Meta => key_values(content, line, &mut meta)?,
        }
    }

    let nv = n.ok_or(ProblemFileError::MissingProblem)?;
    let bounds = bounds
        .into_iter()
        .enumerate()
        .map(|(j, b)| b.ok_or(ProblemFileError::MissingBound { var: j + 1 }))
        .collect::<Result<Vec<_>, _>>()?;
    let nor = match meta.get("nor").map(String::as_str) {
        None | Some("unknown") => RootCount::Unknown,
        Some("infinite") => RootCount::Infinite,
        Some(v) => RootCount::Finite(v.parse().map_err(|_| malformed(0, format!("bad nor `{v}`")))?),
    };
    let nfes_max = match meta.get("nfes_max") {
        None => DEFAULT_NFES_MAX,
        Some(v) => v.parse().map_err(|_| malformed(0, format!("bad nfes_max `{v}`")))?,
    };
    let epsilon = match meta.get("epsilon") {
        None => None,
        Some(v) => Some(v.parse().map_err(|_| malformed(0, format!("bad epsilon `{v}`")))?),
    };
    let mut problem = NesProblem::new(header["name"].clone(), bounds, equations, nor, nfes_max)?;
    if !roots.is_empty() {
        problem = problem.with_known_roots(roots)?;
    }
    if root_box.iter().any(Option::is_some) {
        let full = root_box
            .iter()
            .zip(problem.bounds())
            .map(|(r, b)| r.unwrap_or(*b))
            .collect();
        problem = problem.with_root_box(full)?;
    }
    let scheme = if has_reduction {
        let rvs = reduced
            .into_iter()
            .map(|(var, relation, eliminates)| ReducedVariable { var, relation, eliminates })
            .collect();
        let s = ReductionScheme::new(nv, problem.m(), rvs);
        validate_scheme(&problem, &s).map_err(ProblemFileError::Scheme)?;
        Some(s)
    } else {
        None
    };
    Ok(ProblemFile {
        problem,
        scheme,
        epsilon,
        root_provenance: roots_header.get("provenance").cloned(),
    })
}

/// Canonical text: fully parenthesised expressions, consecutive equal bounds
/// merged into ranges, shortest round-trip number formatting.
pub fn print_problem_file(file: &ProblemFile) -> String {
    let p = &file.problem;
    let mut out = String::new();
    let _ = writeln!(out, "[problem] name={} vars={}", p.name(), p.n());
    let b = p.bounds();
    let mut groups = Vec::new();
    let mut start = 0;
    for j in 1..=b.len() {
        if j == b.len() || b[j] != b[start] {
            let vars = if j - 1 == start {
                format!("x{}", start + 1)
            } else {
                format!("x{}..x{}", start + 1, j)
            };
            groups.push(format!("{vars} in [{}, {}]", b[start].lower, b[start].upper));
            start = j;
        }
    }
    let _ = writeln!(out, "bounds: {}", groups.join("; "));
    for (i, e) in p.equations().iter().enumerate() {
        let _ = writeln!(out, "eq{}: {e}", i + 1);
    }
    if let Some(s) = &file.scheme {
        out.push_str("[reduction]\n");
        for r in s.reduced() {
            let _ = writeln!(out, "reduce x{} = {} eliminates eq{}", r.var + 1, r.relation, r.eliminates + 1);
        }
    }
    let ranges: Vec<String> = (0..p.n())
        .filter(|&j| p.has_root_box() && p.root_range(j) != b[j])
        .map(|j| format!("x{} in [{}, {}]", j + 1, p.root_range(j).lower, p.root_range(j).upper))
        .collect();
    if p.known_roots().is_some() || !ranges.is_empty() {
        match &file.root_provenance {
            Some(tag) => {
                let _ = writeln!(out, "[roots] provenance={tag}");
            }
            None => out.push_str("[roots]\n"),
        }
        if !ranges.is_empty() {
            let _ = writeln!(out, "range: {}", ranges.join("; "));
        }
    }
    if let Some(roots) = p.known_roots() {
        for r in roots {
            let vals: Vec<String> = r.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "root: {}", vals.join(", "));
        }
    }
    let _ = write!(out, "[meta] nor={} nfes_max={}", p.nor(), p.nfes_max());
    if let Some(eps) = file.epsilon {
        let _ = write!(out, " epsilon={eps}");
    }
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const F1: &str = "\
[problem] name=F1 vars=2
bounds: x1 in [-1, 1]; x2 in [-1, 1]
eq1: x1^2 + x2^2 - 1
eq2: x1 - x2
[reduction]
reduce x2 = x1 eliminates eq2
[roots] provenance=analytic
root: sqrt(0.5), sqrt(0.5)
root: -sqrt(0.5), -sqrt(0.5)
[meta] nor=2 nfes_max=50000 epsilon=0.02
";

    #[test]
    fn reads_f1() {
        let f = parse_problem_file(F1).unwrap();
        assert_eq!((f.problem.n(), f.problem.m()), (2, 2));
        assert_eq!(f.problem.nor(), RootCount::Finite(2));
        assert_eq!(f.epsilon, Some(0.02));
        let s = f.scheme.as_ref().unwrap();
        assert_eq!(s.core_vars(), &[0]);
        assert_eq!(s.retained_eqs(), &[0]);
        assert_eq!(f.problem.known_roots().unwrap().len(), 2);
        assert_eq!(f.root_provenance.as_deref(), Some("analytic"));
    }

    #[test]
    fn round_trip() {
        let f = parse_problem_file(F1).unwrap();
        let text = print_problem_file(&f);
        let g = parse_problem_file(&text).unwrap();
        assert_eq!(f, g);
        assert_eq!(print_problem_file(&g), text);
    }

    #[test]
    fn root_ranges() {
        let text = "[problem] name=p vars=2\nbounds: x1..x2 in [-1, 1]\neq1: x1 - x2^3\n[roots] provenance=analytic\nrange: x2 in [0, 1]\n[meta] nor=infinite\n";
        let f = parse_problem_file(text).unwrap();
        assert_eq!(f.problem.root_range(1), Bound::new(0.0, 1.0));
        assert_eq!(f.problem.root_range(0), Bound::new(-1.0, 1.0));
        assert_eq!(parse_problem_file(&print_problem_file(&f)).unwrap(), f);
        let outside = text.replace("[0, 1]", "[0, 2]");
        assert!(parse_problem_file(&outside).is_err());
    }

    #[test]
    fn reversed_bounds() {
        let text = "[problem] name=p vars=1\nbounds x1 in [5, -5]\neq1: x1\n";
        assert!(matches!(
            parse_problem_file(text),
            Err(ProblemFileError::Problem(ProblemError::BoundOrder { var: 1, .. }))
        ));
    }

    #[test]
    fn ranges_and_duplicates() {
        let text = "[problem] name=p vars=3\nbounds: x1..x3 in [-1, 1]\neq1: x1 + x2 + x3\n";
        let f = parse_problem_file(text).unwrap();
        assert_eq!(f.problem.bounds(), &[Bound::new(-1.0, 1.0); 3]);
        let dup = "[problem] name=p vars=2\nbounds: x1..x2 in [-1, 1]; x2 in [0, 1]\neq1: x1\n";
        assert!(matches!(
            parse_problem_file(dup),
            Err(ProblemFileError::DuplicateVariable { line: 2, var: 2 })
        ));
    }

    #[test]
    fn structural_errors() {
        let undeclared = "[problem] name=p vars=1\nbounds: x1 in [0, 1]\neq1: x1 + x2\n";
        assert!(matches!(parse_problem_file(undeclared), Err(ProblemFileError::Expression { line: 3, .. })));
        let missing = "[problem] name=p vars=2\nbounds: x1 in [0, 1]\neq1: x1\n";
        assert_eq!(parse_problem_file(missing), Err(ProblemFileError::MissingBound { var: 2 }));
        let gap = "[problem] name=p vars=1\nbounds: x1 in [0, 1]\neq2: x1\n";
        assert!(matches!(parse_problem_file(gap), Err(ProblemFileError::Malformed { line: 3, .. })));
        assert_eq!(parse_problem_file("eq1: x1\n"), Err(ProblemFileError::MissingProblem));
        let bad_scheme = "[problem] name=p vars=2\nbounds: x1..x2 in [0, 1]\neq1: x1\n[reduction]\nreduce x1 = x1 eliminates eq1\n";
        assert!(matches!(parse_problem_file(bad_scheme), Err(ProblemFileError::Scheme(_))));
        let unknown = "[problem] name=p vars=1\n[extra]\n";
        assert!(matches!(parse_problem_file(unknown), Err(ProblemFileError::Malformed { line: 2, .. })));
    }
}
