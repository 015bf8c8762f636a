//! Variable reduction: some variables are computed from the others through
//! relations solved out of individual equations, which then hold by
//! construction and leave the search.
//!
//! A scheme lists reduced variables in evaluation order. Everything else is a
//! core variable and forms the reduced search box. Expanding a core vector
//! evaluates each relation in turn; multi-valued relations fan out into a
//! Cartesian set of full candidates. Values leaving a variable's bounds are
//! handled as follows:
//!
//! * single-valued relation: clamp to the violated bound;
//! * multi-valued relation: keep only in-bound values, or clamp every value
//!   to its nearest bound when none is in bounds.
//!
//! Either way a clamped candidate is marked infeasible. NaN values (singular
//! relations) clamp to the lower bound, except the `+` branch of a `±`
//! relation, which clamps to the upper bound.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::expr::MultiExpr;
use crate::problem::{Bound, NesProblem};

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedVariable {
    /// 0-based variable index.
    pub var: usize,
    pub relation: MultiExpr,
    /// 0-based index of the equation the relation was solved from.
    pub eliminates: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionScheme {
    n: usize,
    m: usize,
    reduced: Vec<ReducedVariable>,
    core: Vec<usize>,
    retained: Vec<usize>,
}

impl ReductionScheme {
    /// Builds the scheme for a system with `n` variables and `m` equations.
    /// Core variables and retained equations are the complements, in
    /// ascending order. Call [`validate_scheme`] before use.
    pub fn new(n: usize, m: usize, reduced: Vec<ReducedVariable>) -> Self {
        let core = (0..n).filter(|j| !reduced.iter().any(|r| r.var == *j)).collect();
        let retained = (0..m)
            .filter(|i| !reduced.iter().any(|r| r.eliminates == *i))
            .collect();
        Self {
            n,
            m,
            reduced,
            core,
            retained,
        }
    }

    pub fn reduced(&self) -> &[ReducedVariable] {
        &self.reduced
    }

    pub fn core_vars(&self) -> &[usize] {
        &self.core
    }

    pub fn retained_eqs(&self) -> &[usize] {
        &self.retained
    }

    pub fn eliminated_eqs(&self) -> impl Iterator<Item = usize> + '_ {
        self.reduced.iter().map(|r| r.eliminates)
    }

    /// Number of core variables.
    pub fn q(&self) -> usize {
        self.core.len()
    }

    /// Number of retained equations.
    pub fn p(&self) -> usize {
        self.retained.len()
    }

    pub fn core_bounds(&self, problem: &NesProblem) -> Vec<Bound> {
        self.core.iter().map(|&j| problem.bounds()[j]).collect()
    }

    /// Projects a full vector onto the core variables.
    pub fn core_of(&self, full: &[f64]) -> Vec<f64> {
        self.core.iter().map(|&j| full[j]).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SchemeViolation {
    ShapeMismatch { scheme: (usize, usize), problem: (usize, usize) },
    VariableOutOfRange { var: usize },
    EquationOutOfRange { equation: usize },
    DuplicateReducedVariable { var: usize },
    EquationEliminatedTwice { equation: usize },
    SelfReference { var: usize },
    ForwardReference { var: usize, references: usize },
    NoCoreVariables,
}

impl fmt::Display for SchemeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ShapeMismatch { scheme, problem } => write!(
                f,
                "scheme built for {} variables / {} equations, problem has {} / {}",
                scheme.0, scheme.1, problem.0, problem.1
            ),
            Self::VariableOutOfRange { var } => write!(f, "reduced variable x{} does not exist", var + 1),
            Self::EquationOutOfRange { equation } => write!(f, "equation eq{} does not exist", equation + 1),
            Self::DuplicateReducedVariable { var } => write!(f, "x{} is reduced more than once", var + 1),
            Self::EquationEliminatedTwice { equation } => {
                write!(f, "eq{} is eliminated more than once", equation + 1)
            }
            Self::SelfReference { var } => write!(f, "relation for x{} references x{0}", var + 1),
            Self::ForwardReference { var, references } => write!(
                f,
                "relation for x{} references x{}, which is reduced later",
                var + 1,
                references + 1
            ),
            Self::NoCoreVariables => f.write_str("every variable is reduced; nothing is left to search"),
        }
    }
}

/// Checks that a scheme is well-formed for `problem`: reduced and core
/// variables partition the variables, eliminated and retained equations
/// partition the equations, and every relation only reads core variables or
/// variables reduced earlier in the list.
pub fn validate_scheme(problem: &NesProblem, scheme: &ReductionScheme) -> Result<(), Vec<SchemeViolation>> {
    let mut out = Vec::new();
    let (n, m) = (problem.n(), problem.m());
    if (scheme.n, scheme.m) != (n, m) {
        out.push(SchemeViolation::ShapeMismatch {
            scheme: (scheme.n, scheme.m),
            problem: (n, m),
        });
    }
    let mut seen_vars = vec![false; n];
    let mut seen_eqs = vec![false; m];
    for rv in &scheme.reduced {
        if rv.var >= n {
            out.push(SchemeViolation::VariableOutOfRange { var: rv.var });
        } else if std::mem::replace(&mut seen_vars[rv.var], true) {
            out.push(SchemeViolation::DuplicateReducedVariable { var: rv.var });
        }
        if rv.eliminates >= m {
            out.push(SchemeViolation::EquationOutOfRange { equation: rv.eliminates });
        } else if std::mem::replace(&mut seen_eqs[rv.eliminates], true) {
            out.push(SchemeViolation::EquationEliminatedTwice { equation: rv.eliminates });
        }
    }
    for (i, rv) in scheme.reduced.iter().enumerate() {
        for v in rv.relation.variables() {
            if v == rv.var {
                out.push(SchemeViolation::SelfReference { var: rv.var });
            } else if scheme.reduced[i + 1..].iter().any(|later| later.var == v) {
                out.push(SchemeViolation::ForwardReference {
                    var: rv.var,
                    references: v,
                });
            } else if v >= n {
                out.push(SchemeViolation::VariableOutOfRange { var: v });
            }
        }
    }
    if scheme.core.is_empty() {
        out.push(SchemeViolation::NoCoreVariables);
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// One full decision vector produced from a core vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpandedCandidate {
    pub full: Vec<f64>,
    /// No reduced value had to be clamped.
    pub feasible: bool,
    /// Reduced variables (0-based) that were clamped onto a bound.
    pub clamped: Vec<usize>,
}

/// Expands a core vector into every full candidate, in Cartesian order with
/// earlier reduced variables varying slowest. Never empty.
pub fn expand_individual(problem: &NesProblem, scheme: &ReductionScheme, core: &[f64]) -> Vec<ExpandedCandidate> {
    let mut base = vec![f64::NAN; problem.n()];
    for (&j, &v) in scheme.core.iter().zip(core) {
        base[j] = v;
    }
    let mut partial = vec![ExpandedCandidate {
        full: base,
        feasible: true,
        clamped: Vec::new(),
    }];
    let mut values = Vec::with_capacity(2);
    let mut kept = Vec::with_capacity(2);
    for rv in &scheme.reduced {
        let bound = problem.bounds()[rv.var];
        let mut next = Vec::with_capacity(partial.len() * rv.relation.candidate_count());
        for cand in partial {
            rv.relation.eval_into(&cand.full, &mut values);
            kept.clear();
            kept.extend(values.iter().copied().filter(|&v| bound.contains(v)));
            let clamped = kept.is_empty();
            if clamped {
                let branching = rv.relation.is_multi_valued();
                kept.extend(values.iter().enumerate().map(|(k, &v)| match v.is_nan() {
                    // The `+` branch of a singular `±` relation takes the upper bound.
                    true if branching && k == 0 => bound.upper,
                    true => bound.lower,
                    false => bound.clamp(v),
                }));
            }
            dedup_in_place(&mut kept);
            let last = kept.len() - 1;
            let mut cand = Some(cand);
            for (k, &v) in kept.iter().enumerate() {
                let mut c = if k == last {
                    cand.take().unwrap()
                } else {
                    cand.as_ref().unwrap().clone()
                };
                c.full[rv.var] = v;
                if clamped {
                    c.feasible = false;
                    c.clamped.push(rv.var);
                }
                next.push(c);
            }
        }
        partial = next;
    }
    partial
}

fn dedup_in_place(v: &mut Vec<f64>) {
    let mut i = 1;
    while i < v.len() {
        if v[..i].contains(&v[i]) {
            v.remove(i);
        } else {
            i += 1;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObjectiveKind {
    /// `Σ|f_k|`
    L1,
    /// `Σf_k²`
    Sq,
}

/// Best expansion of a core vector under an objective over retained equations.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedEvaluation {
    pub value: f64,
    pub candidate: ExpandedCandidate,
    /// Residuals of the retained equations at `candidate`.
    pub residuals: Vec<f64>,
}

/// Expands `core` and keeps the candidate minimising the objective over the
/// retained equations. NaN objectives count as +∞; ties prefer feasible
/// candidates, then the earliest.
pub fn evaluate_reduced(
    problem: &NesProblem,
    scheme: &ReductionScheme,
    core: &[f64],
    kind: ObjectiveKind,
) -> ReducedEvaluation {
    let mut best: Option<ReducedEvaluation> = None;
    for cand in expand_individual(problem, scheme, core) {
        let residuals: Vec<f64> = scheme
            .retained
            .iter()
            .map(|&i| problem.residual(i, &cand.full))
            .collect();
        let raw: f64 = match kind {
            ObjectiveKind::L1 => residuals.iter().map(|r| r.abs()).sum(),
            ObjectiveKind::Sq => residuals.iter().map(|r| r * r).sum(),
        };
        let value = if raw.is_nan() { f64::INFINITY } else { raw };
        let better = match &best {
            None => true,
            Some(b) => value < b.value || (value == b.value && cand.feasible && !b.candidate.feasible),
        };
        if better {
            best = Some(ReducedEvaluation {
                value,
                candidate: cand,
                residuals,
            });
        }
    }
    best.expect("expansion is never empty")
}

pub fn reduced_objective(
    problem: &NesProblem,
    scheme: &ReductionScheme,
    core: &[f64],
    kind: ObjectiveKind,
) -> (f64, ExpandedCandidate) {
    let e = evaluate_reduced(problem, scheme, core, kind);
    (e.value, e.candidate)
}

/// Maps each core vector to the full vector of its best expansion.
pub fn expand_population(
    problem: &NesProblem,
    scheme: &ReductionScheme,
    cores: &[Vec<f64>],
    kind: ObjectiveKind,
) -> Vec<Vec<f64>> {
    cores
        .iter()
        .map(|c| evaluate_reduced(problem, scheme, c, kind).candidate.full)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_expression, parse_relation};
    use crate::problem::RootCount;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn problem(eqs: &[&str], bounds: Vec<Bound>) -> NesProblem {
        let n = bounds.len();
        let eqs = eqs.iter().map(|s| parse_expression(s, n).unwrap()).collect();
        NesProblem::new("t", bounds, eqs, RootCount::Unknown, 1000).unwrap()
    }

    fn scheme(p: &NesProblem, rels: &[(usize, &str, usize)]) -> ReductionScheme {
        let reduced = rels
            .iter()
            .map(|&(var, text, eq)| ReducedVariable {
                var: var - 1,
                relation: parse_relation(text, p.n()).unwrap(),
                eliminates: eq - 1,
            })
            .collect();
        ReductionScheme::new(p.n(), p.m(), reduced)
    }

    fn eq25() -> (NesProblem, ReductionScheme) {
        let p = problem(
            &[
                "3*x1^2 + sin(x1*x2) - x3^2 + 2.0",
                "2*x1^3 + x2^2 - x3 + 3.0",
                "sin(2*x1) + cos(x2*x3) + x2 - 1.0",
            ],
            vec![Bound::new(-5.0, 5.0), Bound::new(-1.0, 3.0), Bound::new(-5.0, 5.0)],
        );
        let s = scheme(&p, &[(3, "2*x1^3 + x2^2 + 3.0", 2)]);
        (p, s)
    }

    fn f6() -> (NesProblem, ReductionScheme) {
        let p = problem(
            &[
                "x1^2 + x3^2 - 1",
                "x2^2 + x4^2 - 1",
                "x5*x3^3 + x6*x4^3",
                "x5*x1^3 + x6*x2^3",
                "x5*x1*x3^2 + x6*x4^2*x2",
                "x5*x3*x1^2 + x6*x2^2*x4",
            ],
            vec![Bound::new(-1.0, 1.0); 6],
        );
        let s = scheme(
            &p,
            &[
                (1, "±sqrt(1 - x3^2)", 1),
                (2, "±sqrt(1 - x4^2)", 2),
                (6, "-(x5*x3^3)/(x4^3)", 3),
            ],
        );
        (p, s)
    }

    #[test]
    fn complements_are_ascending() {
        let (p, s) = f6();
        assert_eq!(s.core_vars(), &[2, 3, 4]);
        assert_eq!(s.retained_eqs(), &[3, 4, 5]);
        assert_eq!(s.q(), 3);
        assert_eq!(s.p(), 3);
        assert_eq!(validate_scheme(&p, &s), Ok(()));
    }

    #[test]
    fn chained_relations_validate() {
        let p = problem(&["x1 + x2 + x3 - 1", "x1 - x2^3"], vec![Bound::new(-1.0, 1.0); 3]);
        let s = scheme(&p, &[(1, "x2^3", 2), (3, "1 - x1 - x2", 1)]);
        assert_eq!(validate_scheme(&p, &s), Ok(()));
        assert_eq!(s.p(), 0);
        let swapped = scheme(&p, &[(3, "1 - x1 - x2", 1), (1, "x2^3", 2)]);
        assert_eq!(
            validate_scheme(&p, &swapped),
            Err(vec![SchemeViolation::ForwardReference { var: 2, references: 0 }])
        );
    }

    #[test]
    fn violations_are_reported() {
        let (p, _) = eq25();
        let s = scheme(&p, &[(3, "x3 + x1", 2)]);
        assert_eq!(validate_scheme(&p, &s), Err(vec![SchemeViolation::SelfReference { var: 2 }]));
        let s = scheme(&p, &[(1, "x2", 2), (3, "x1", 2)]);
        assert_eq!(
            validate_scheme(&p, &s),
            Err(vec![SchemeViolation::EquationEliminatedTwice { equation: 1 }])
        );
        let s = scheme(&p, &[(3, "x1", 1), (3, "x2", 2)]);
        assert!(validate_scheme(&p, &s)
            .unwrap_err()
            .contains(&SchemeViolation::DuplicateReducedVariable { var: 2 }));
        let s = scheme(&p, &[(1, "x3", 1), (2, "x3", 2), (3, "1", 3)]);
        assert!(validate_scheme(&p, &s).unwrap_err().contains(&SchemeViolation::NoCoreVariables));
    }

    #[test]
    fn single_valued_expansion_and_clamp() {
        let (p, s) = eq25();
        let c = expand_individual(&p, &s, &[0.0, 0.0]);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].full, vec![0.0, 0.0, 3.0]);
        assert!(c[0].feasible);

        let c = expand_individual(&p, &s, &[1.0, 1.0]);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].full, vec![1.0, 1.0, 5.0]);
        assert!(!c[0].feasible);
        assert_eq!(c[0].clamped, vec![2]);

        let c = expand_individual(&p, &s, &[-2.0, 0.0]);
        assert_eq!(c[0].full[2], -5.0);
        assert!(!c[0].feasible);
    }

    #[test]
    fn multi_valued_prefers_in_bound_branch() {
        let p = problem(&["x1 - 1 - x2"], vec![Bound::new(0.0, 1.0), Bound::new(-1.0, 1.0)]);
        let s = scheme(&p, &[(1, "1 ± x2", 1)]);
        let c = expand_individual(&p, &s, &[1.0]);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].full, vec![0.0, 1.0]);
        assert!(c[0].feasible);

        // x2 = 0.5: both 1.5 and 0.5 -> only 0.5; x2 = 0: both branches equal 1.
        let c = expand_individual(&p, &s, &[0.0]);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].full[0], 1.0);
    }

    #[test]
    fn multi_valued_all_out_of_bounds_clamps_each() {
        let p = problem(&["x1 - x2"], vec![Bound::new(0.0, 1.0), Bound::new(-5.0, 5.0)]);
        let s = scheme(&p, &[(1, "0.5 ± x2", 1)]);
        let c = expand_individual(&p, &s, &[3.0]);
        let xs: Vec<f64> = c.iter().map(|c| c.full[0]).collect();
        assert_eq!(xs, vec![1.0, 0.0]);
        assert!(c.iter().all(|c| !c.feasible && c.clamped == vec![0]));
    }

    #[test]
    fn singular_branches_clamp_by_sign() {
        let p = problem(&["x1^2 - x2"], vec![Bound::new(-2.0, 3.0), Bound::new(-5.0, 5.0)]);
        let s = scheme(&p, &[(1, "±sqrt(x2)", 1)]);
        let c = expand_individual(&p, &s, &[-1.0]);
        let xs: Vec<f64> = c.iter().map(|c| c.full[0]).collect();
        assert_eq!(xs, vec![3.0, -2.0]);
        assert!(c.iter().all(|c| !c.feasible));
    }

    #[test]
    fn f6_branches_multiply() {
        let (p, s) = f6();
        // x3 = 0, x4 = 1, x5 = 1: x1 = ±1, x2 = ±0 (one value), x6 = 0.
        let c = expand_individual(&p, &s, &[0.0, 1.0, 1.0]);
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].full, vec![1.0, 0.0, 0.0, 1.0, 1.0, 0.0]);
        assert_eq!(c[1].full[0], -1.0);
        assert!(c.iter().all(|c| c.feasible));

        let c = expand_individual(&p, &s, &[0.6, 0.8, 0.5]);
        assert_eq!(c.len(), 4);
    }

    #[test]
    fn singular_relation_clamps_to_lower_bound() {
        let (p, s) = f6();
        // x4 = 0 and x5*x3^3 = 0: 0/0 -> NaN.
        let c = expand_individual(&p, &s, &[0.0, 0.0, 0.0]);
        assert!(c.iter().all(|c| c.full[5] == -1.0 && !c.feasible));
        // x4 = 0, numerator nonzero: -inf clamps to the lower bound as well.
        let c = expand_individual(&p, &s, &[0.5, 0.0, 1.0]);
        assert!(c.iter().all(|c| c.full[5] == -1.0 && c.clamped.contains(&5)));
    }

    #[test]
    fn reduced_objective_examples() {
        let p = problem(&["x1^2 + x2^2 - 1", "x1 - x2"], vec![Bound::new(-1.0, 1.0); 2]);
        let s = scheme(&p, &[(2, "x1", 2)]);
        let (v, c) = reduced_objective(&p, &s, &[FRAC_1_SQRT_2], ObjectiveKind::Sq);
        assert!(v < 1e-30);
        assert_eq!(c.full, vec![FRAC_1_SQRT_2, FRAC_1_SQRT_2]);

        let p = problem(&["x1 - cos(4*pi*x2)", "x1^2 + x2^2 - 1"], vec![Bound::new(-1.0, 1.0); 2]);
        let s = scheme(&p, &[(1, "cos(4*pi*x2)", 1)]);
        let (v, c) = reduced_objective(&p, &s, &[0.0], ObjectiveKind::Sq);
        assert_eq!(v, 0.0);
        assert_eq!(c.full, vec![1.0, 0.0]);

        let p = problem(&["x1 + x2 + x3 - 1", "x1 - x2^3"], vec![Bound::new(-1.0, 1.0); 3]);
        let s = scheme(&p, &[(1, "x2^3", 2), (3, "1 - x1 - x2", 1)]);
        for core in [0.0, 0.3, 0.9, -0.7] {
            let e = evaluate_reduced(&p, &s, &[core], ObjectiveKind::L1);
            assert_eq!(e.value, 0.0);
            assert!(e.residuals.is_empty());
        }
    }

    #[test]
    fn tie_break_prefers_feasible() {
        // Retained equation is constant, so every candidate ties.
        let p = problem(&["x1 - x2", "0*x1 + 1"], vec![Bound::new(0.0, 1.0), Bound::new(-5.0, 5.0)]);
        let s = scheme(&p, &[(1, "0.5 ± x2", 1)]);
        let e = evaluate_reduced(&p, &s, &[0.25], ObjectiveKind::Sq);
        assert_eq!(e.candidate.full[0], 0.75);
        assert!(e.candidate.feasible);
    }

    #[test]
    fn population_expansion_keeps_core() {
        let (p, s) = eq25();
        assert!(expand_population(&p, &s, &[], ObjectiveKind::Sq).is_empty());
        let cores: Vec<Vec<f64>> = (0..10).map(|k| vec![k as f64 * 0.1 - 0.5, k as f64 * 0.3 - 1.0]).collect();
        let full = expand_population(&p, &s, &cores, ObjectiveKind::Sq);
        for (c, f) in cores.iter().zip(&full) {
            assert_eq!(&s.core_of(f), c);
        }
    }
}
