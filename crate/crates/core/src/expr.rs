//! Expression trees for residual equations and reduction relations.
//!
//! Variables are stored 0-based (`x1` is `Var(0)`). Index expressions inside
//! `sum(i=a..b, ...)` bodies are integer-valued and refer to enclosing sum
//! indices by nesting level, so an `Expr` is independent of the names used in
//! its source text except for printing.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Abs,
    Sin,
    Cos,
    Tan,
    Sqrt,
    Exp,
    Ln,
}

impl UnaryOp {
    pub fn from_function_name(name: &str) -> Option<Self> {
        Some(match name {
            "abs" => Self::Abs,
            "sin" => Self::Sin,
            "cos" => Self::Cos,
            "tan" => Self::Tan,
            "sqrt" => Self::Sqrt,
            "exp" => Self::Exp,
            "ln" => Self::Ln,
            _ => return None,
        })
    }

    fn function_name(self) -> &'static str {
        match self {
            Self::Neg => "-",
            Self::Abs => "abs",
            Self::Sin => "sin",
            Self::Cos => "cos",
            Self::Tan => "tan",
            Self::Sqrt => "sqrt",
            Self::Exp => "exp",
            Self::Ln => "ln",
        }
    }

    #[inline]
    fn apply(self, v: f64) -> f64 {
        match self {
            Self::Neg => -v,
            Self::Abs => v.abs(),
            Self::Sin => v.sin(),
            Self::Cos => v.cos(),
            Self::Tan => v.tan(),
            Self::Sqrt => v.sqrt(),
            Self::Exp => v.exp(),
            Self::Ln => v.ln(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    fn symbol(self) -> char {
        match self {
            Self::Add => '+',
            Self::Sub => '-',
            Self::Mul => '*',
            Self::Div => '/',
            Self::Pow => '^',
        }
    }

    #[inline]
    fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            Self::Add => a + b,
            Self::Sub => a - b,
            Self::Mul => a * b,
            Self::Div => a / b,
            Self::Pow => pow(a, b),
        }
    }
}

/// Integral exponents use repeated multiplication, so negative bases stay
/// exact; any other exponent on a negative base yields NaN.
#[inline]
pub fn pow(base: f64, exponent: f64) -> f64 {
    if exponent.fract() == 0.0 && exponent.abs() <= i32::MAX as f64 {
        base.powi(exponent as i32)
    } else {
        base.powf(exponent)
    }
}

/// Integer arithmetic over sum indices, used in `x[...]` subscripts and sum
/// ranges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IndexExpr {
    Lit(i64),
    /// Value of the sum index bound at the given nesting level (0 = outermost).
    Level(usize),
    Neg(Box<IndexExpr>),
    Add(Box<IndexExpr>, Box<IndexExpr>),
    Sub(Box<IndexExpr>, Box<IndexExpr>),
    Mul(Box<IndexExpr>, Box<IndexExpr>),
}

impl IndexExpr {
    pub fn eval(&self, env: &[i64]) -> i64 {
        match self {
            Self::Lit(v) => *v,
            Self::Level(l) => env[*l],
            Self::Neg(a) => -a.eval(env),
            Self::Add(a, b) => a.eval(env) + b.eval(env),
            Self::Sub(a, b) => a.eval(env) - b.eval(env),
            Self::Mul(a, b) => a.eval(env) * b.eval(env),
        }
    }

    fn fmt_with(&self, f: &mut fmt::Formatter<'_>, names: &[String]) -> fmt::Result {
        match self {
            Self::Lit(v) if *v < 0 => write!(f, "(-{})", -v),
            Self::Lit(v) => write!(f, "{v}"),
            Self::Level(l) => f.write_str(&names[*l]),
            Self::Neg(a) => {
                f.write_str("(-")?;
                a.fmt_with(f, names)?;
                f.write_str(")")
            }
            Self::Add(a, b) | Self::Sub(a, b) | Self::Mul(a, b) => {
                let op = match self {
                    Self::Add(..) => '+',
                    Self::Sub(..) => '-',
                    _ => '*',
                };
                f.write_str("(")?;
                a.fmt_with(f, names)?;
                write!(f, " {op} ")?;
                b.fmt_with(f, names)?;
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    /// 0-based variable index.
    Var(usize),
    /// `x[...]` with a 1-based subscript computed from sum indices.
    Indexed(IndexExpr),
    /// Numeric value of a sum index.
    Index(usize),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Sum {
        index_name: String,
        from: IndexExpr,
        to: IndexExpr,
        body: Box<Expr>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("variable x{index} is not bound (assignment has {len} values)")]
    UnboundVariable { index: usize, len: usize },
}

impl Expr {
    pub fn unary(op: UnaryOp, e: Expr) -> Self {
        Self::Unary(op, Box::new(e))
    }

    pub fn binary(op: BinaryOp, a: Expr, b: Expr) -> Self {
        Self::Binary(op, Box::new(a), Box::new(b))
    }

    /// Evaluates without bounds checking the assignment; a variable outside
    /// `x` evaluates to NaN. Use [`Expr::try_eval`] for checked evaluation.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut env = Vec::new();
        self.eval_in(x, &mut env)
    }

    fn eval_in(&self, x: &[f64], env: &mut Vec<i64>) -> f64 {
        match self {
            Self::Const(c) => *c,
            Self::Var(i) => x.get(*i).copied().unwrap_or(f64::NAN),
            Self::Indexed(ie) => {
                let k = ie.eval(env);
                if k >= 1 {
                    x.get((k - 1) as usize).copied().unwrap_or(f64::NAN)
                } else {
                    f64::NAN
                }
            }
            Self::Index(l) => env[*l] as f64,
            Self::Unary(op, a) => op.apply(a.eval_in(x, env)),
            Self::Binary(op, a, b) => {
                let va = a.eval_in(x, env);
                let vb = b.eval_in(x, env);
                op.apply(va, vb)
            }
            Self::Sum { from, to, body, .. } => {
                let lo = from.eval(env);
                let hi = to.eval(env);
                let mut acc = 0.0;
                env.push(lo);
                let slot = env.len() - 1;
                for k in lo..=hi {
                    env[slot] = k;
                    acc += body.eval_in(x, env);
                }
                env.pop();
                acc
            }
        }
    }

    /// Checked evaluation: every referenced variable must be present in `x`.
    pub fn try_eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        if let Some(&max) = self.variables().iter().next_back() {
            if max >= x.len() {
                return Err(EvalError::UnboundVariable {
                    index: max + 1,
                    len: x.len(),
                });
            }
        }
        Ok(self.eval(x))
    }

    /// Every variable (0-based) the expression can touch, with sum ranges
    /// enumerated. A subscript below 1 is reported as `usize::MAX`.
    pub fn variables(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut Vec::new(), &mut out);
        out
    }

    fn collect_vars(&self, env: &mut Vec<i64>, out: &mut BTreeSet<usize>) {
        match self {
            Self::Const(_) | Self::Index(_) => {}
            Self::Var(i) => {
                out.insert(*i);
            }
            Self::Indexed(ie) => {
                let k = ie.eval(env);
                out.insert(if k >= 1 { (k - 1) as usize } else { usize::MAX });
            }
            Self::Unary(_, a) => a.collect_vars(env, out),
            Self::Binary(_, a, b) => {
                a.collect_vars(env, out);
                b.collect_vars(env, out);
            }
            Self::Sum { from, to, body, .. } => {
                let lo = from.eval(env);
                let hi = to.eval(env);
                env.push(lo);
                let slot = env.len() - 1;
                for k in lo..=hi {
                    env[slot] = k;
                    body.collect_vars(env, out);
                }
                env.pop();
            }
        }
    }

    fn fmt_with(&self, f: &mut fmt::Formatter<'_>, names: &mut Vec<String>) -> fmt::Result {
        match self {
            Self::Const(c) if *c < 0.0 => write!(f, "(-{:?})", -c),
            Self::Const(c) => write!(f, "{c:?}"),
            Self::Var(i) => write!(f, "x{}", i + 1),
            Self::Indexed(ie) => {
                f.write_str("x[")?;
                ie.fmt_with(f, names)?;
                f.write_str("]")
            }
            Self::Index(l) => f.write_str(&names[*l]),
            Self::Unary(UnaryOp::Neg, a) => {
                f.write_str("(-")?;
                a.fmt_with(f, names)?;
                f.write_str(")")
            }
            Self::Unary(op, a) => {
                write!(f, "{}(", op.function_name())?;
                a.fmt_with(f, names)?;
                f.write_str(")")
            }
            Self::Binary(op, a, b) => {
                f.write_str("(")?;
                a.fmt_with(f, names)?;
                write!(f, " {} ", op.symbol())?;
                b.fmt_with(f, names)?;
                f.write_str(")")
            }
            Self::Sum {
                index_name,
                from,
                to,
                body,
            } => {
                write!(f, "sum({index_name}=")?;
                from.fmt_with(f, names)?;
                f.write_str("..")?;
                to.fmt_with(f, names)?;
                f.write_str(", ")?;
                names.push(index_name.clone());
                let r = body.fmt_with(f, names);
                names.pop();
                r?;
                f.write_str(")")
            }
        }
    }
}

/// Canonical, fully parenthesised form that parses back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_with(f, &mut Vec::new())
    }
}

/// A possibly multi-valued relation, e.g. `±sqrt(1 - x3^2)` or `1 ± x2`.
///
/// The `+` branch always comes first in [`MultiExpr::candidates`].
#[derive(Debug, Clone, PartialEq)]
pub struct MultiExpr {
    offset: Option<Expr>,
    term: Expr,
    branching: bool,
}

impl MultiExpr {
    pub fn single(e: Expr) -> Self {
        Self {
            offset: None,
            term: e,
            branching: false,
        }
    }

    /// `offset ± term`, or `±term` when `offset` is `None`.
    pub fn plus_minus(offset: Option<Expr>, term: Expr) -> Self {
        Self {
            offset,
            term,
            branching: true,
        }
    }

    pub fn is_multi_valued(&self) -> bool {
        self.branching
    }

    pub fn candidate_count(&self) -> usize {
        if self.branching {
            2
        } else {
            1
        }
    }

    /// Candidate expressions, materialised.
    pub fn candidates(&self) -> Vec<Expr> {
        if !self.branching {
            return vec![self.term.clone()];
        }
        match &self.offset {
            None => vec![
                self.term.clone(),
                Expr::unary(UnaryOp::Neg, self.term.clone()),
            ],
            Some(o) => vec![
                Expr::binary(BinaryOp::Add, o.clone(), self.term.clone()),
                Expr::binary(BinaryOp::Sub, o.clone(), self.term.clone()),
            ],
        }
    }

    /// Writes the candidate values into `out` (cleared first).
    pub fn eval_into(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        let t = self.term.eval(x);
        if !self.branching {
            out.push(t);
            return;
        }
        match &self.offset {
            None => {
                out.push(t);
                out.push(-t);
            }
            Some(o) => {
                let base = o.eval(x);
                out.push(base + t);
                out.push(base - t);
            }
        }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(2);
        self.eval_into(x, &mut out);
        out
    }

    pub fn variables(&self) -> BTreeSet<usize> {
        let mut v = self.term.variables();
        if let Some(o) = &self.offset {
            v.extend(o.variables());
        }
        v
    }
}

impl fmt::Display for MultiExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.offset, self.branching) {
            (_, false) => write!(f, "{}", self.term),
            (None, true) => write!(f, "±{}", self.term),
            (Some(o), true) => write!(f, "{o} ± {}", self.term),
        }
    }
}
