//! Recursive-descent parser for equation and reduction-relation text.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! relation := '±' expr | expr ('±' expr)?
//! expr     := term (('+' | '-') term)*
//! term     := unary (('*' | '/') unary)*
//! unary    := ('-' | '+') unary | power
//! power    := primary ('^' unary)?
//! primary  := number | 'pi' | xK | 'x' '[' index ']' | index-name
//!           | func '(' expr ')' | 'sum' '(' name '=' index '..' index ',' expr ')'
//!           | '(' expr ')'
//! index    := integer arithmetic (+ - * unary -) over literals and sum names
//! ```

use std::f64::consts::PI;

use thiserror::Error;

use crate::expr::{BinaryOp, Expr, IndexExpr, MultiExpr, UnaryOp};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at column {column}: {message}")]
    Syntax { column: usize, message: String },
    #[error("unknown identifier `{name}` at column {column}")]
    UnknownIdentifier { name: String, column: usize },
    #[error("unknown function `{name}` at column {column}")]
    UnknownFunction { name: String, column: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Int(i64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Eq,
    DotDot,
    PlusMinus,
    End,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(v) => format!("number {v}"),
        Tok::Int(v) => format!("number {v}"),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::End => "end of input".into(),
        Tok::PlusMinus => "`±`".into(),
        other => format!("{other:?}"),
    }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            ',' => Some(Tok::Comma),
            '=' => Some(Tok::Eq),
            '±' => Some(Tok::PlusMinus),
            _ => None,
        };
        if let Some(t) = single {
            out.push((t, col));
            i += 1;
            continue;
        }
        if c == '.' && chars.get(i + 1) == Some(&'.') {
            out.push((Tok::DotDot, col));
            i += 2;
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            let mut integral = true;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' && chars.get(i + 1) != Some(&'.') {
                integral = false;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    integral = false;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            let tok = match (integral, s.parse::<i64>()) {
                (true, Ok(v)) => Tok::Int(v),
                _ => Tok::Num(s.parse::<f64>().map_err(|_| ParseError::Syntax {
                    column: col,
                    message: format!("malformed number `{s}`"),
                })?),
            };
            out.push((tok, col));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
            continue;
        }
        return Err(ParseError::Syntax {
            column: col,
            message: format!("unexpected character `{c}`"),
        });
    }
    out.push((Tok::End, chars.len() + 1));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    n_vars: usize,
    indices: Vec<String>,
}

impl Parser {
    fn new(text: &str, n_vars: usize) -> Result<Self, ParseError> {
        Ok(Self {
            toks: tokenize(text)?,
            pos: 0,
            n_vars,
            indices: Vec::new(),
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn column(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn syntax<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            column: self.column(),
            message: message.into(),
        })
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            self.syntax(format!(
                "expected {}, found {}",
                describe(&want),
                describe(self.peek())
            ))
        }
    }

    fn expect_end(&mut self) -> Result<(), ParseError> {
        if *self.peek() == Tok::End {
            Ok(())
        } else {
            self.syntax(format!("unexpected {}", describe(self.peek())))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinaryOp::Add,
                Tok::Minus => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinaryOp::Mul,
                Tok::Slash => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(Expr::unary(UnaryOp::Neg, self.unary()?))
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Expr::binary(BinaryOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let column = self.column();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::Const(v)),
            Tok::Int(v) => Ok(Expr::Const(v as f64)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => self.identifier(name, column),
            Tok::PlusMinus => Err(ParseError::Syntax {
                column,
                message: "`±` is only allowed as the outermost operator of a reduction relation"
                    .into(),
            }),
            other => Err(ParseError::Syntax {
                column,
                message: format!("unexpected {}", describe(&other)),
            }),
        }
    }

    fn identifier(&mut self, name: String, column: usize) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::LParen {
            if name == "sum" {
                return self.sum();
            }
            let Some(op) = UnaryOp::from_function_name(&name) else {
                return Err(ParseError::UnknownFunction { name, column });
            };
            self.bump();
            let arg = self.expr()?;
            self.expect(Tok::RParen)?;
            return Ok(Expr::unary(op, arg));
        }
        if name == "x" && *self.peek() == Tok::LBracket {
            self.bump();
            let ie = self.index_expr()?;
            self.expect(Tok::RBracket)?;
            return Ok(Expr::Indexed(ie));
        }
        if name == "pi" {
            return Ok(Expr::Const(PI));
        }
        if let Some(level) = self.indices.iter().rposition(|s| *s == name) {
            return Ok(Expr::Index(level));
        }
        if let Some(k) = variable_number(&name) {
            if (1..=self.n_vars).contains(&k) {
                return Ok(Expr::Var(k - 1));
            }
        }
        Err(ParseError::UnknownIdentifier { name, column })
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        self.expect(Tok::LParen)?;
        let column = self.column();
        let index_name = match self.bump() {
            Tok::Ident(s) if variable_number(&s).is_none() && s != "pi" && s != "x" => s,
            other => {
                return Err(ParseError::Syntax {
                    column,
                    message: format!("expected a sum index name, found {}", describe(&other)),
                })
            }
        };
        self.expect(Tok::Eq)?;
        let from = self.index_expr()?;
        self.expect(Tok::DotDot)?;
        let to = self.index_expr()?;
        self.expect(Tok::Comma)?;
        self.indices.push(index_name.clone());
        let body = self.expr();
        self.indices.pop();
        let body = body?;
        self.expect(Tok::RParen)?;
        Ok(Expr::Sum {
            index_name,
            from,
            to,
            body: Box::new(body),
        })
    }

    fn index_expr(&mut self) -> Result<IndexExpr, ParseError> {
        let mut lhs = self.index_term()?;
        loop {
            let add = match self.peek() {
                Tok::Plus => true,
                Tok::Minus => false,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.index_term()?;
            lhs = if add {
                IndexExpr::Add(Box::new(lhs), Box::new(rhs))
            } else {
                IndexExpr::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
    }

    fn index_term(&mut self) -> Result<IndexExpr, ParseError> {
        let mut lhs = self.index_atom()?;
        while *self.peek() == Tok::Star {
            self.bump();
            let rhs = self.index_atom()?;
            lhs = IndexExpr::Mul(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn index_atom(&mut self) -> Result<IndexExpr, ParseError> {
        let column = self.column();
        match self.bump() {
            Tok::Int(v) => Ok(IndexExpr::Lit(v)),
            Tok::Minus => Ok(IndexExpr::Neg(Box::new(self.index_atom()?))),
            Tok::LParen => {
                let e = self.index_expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => match self.indices.iter().rposition(|s| *s == name) {
                Some(level) => Ok(IndexExpr::Level(level)),
                None => Err(ParseError::UnknownIdentifier { name, column }),
            },
            other => Err(ParseError::Syntax {
                column,
                message: format!("expected an integer index, found {}", describe(&other)),
            }),
        }
    }
}

/// `x12` -> `Some(12)`.
fn variable_number(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('x')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

/// Parses an expression over variables `x1..x{n_vars}`.
pub fn parse_expression(text: &str, n_vars: usize) -> Result<Expr, ParseError> {
    let mut p = Parser::new(text, n_vars)?;
    if *p.peek() == Tok::End {
        return p.syntax("empty expression");
    }
    let e = p.expr()?;
    p.expect_end()?;
    Ok(e)
}

/// Parses the right-hand side of a reduction relation, where a single
/// outermost `±` is permitted.
pub fn parse_relation(text: &str, n_vars: usize) -> Result<MultiExpr, ParseError> {
    let mut p = Parser::new(text, n_vars)?;
    if *p.peek() == Tok::End {
        return p.syntax("empty relation");
    }
    if *p.peek() == Tok::PlusMinus {
        p.bump();
        let term = p.expr()?;
        p.expect_end()?;
        return Ok(MultiExpr::plus_minus(None, term));
    }
    let lhs = p.expr()?;
    if *p.peek() == Tok::PlusMinus {
        p.bump();
        let term = p.expr()?;
        p.expect_end()?;
        return Ok(MultiExpr::plus_minus(Some(lhs), term));
    }
    p.expect_end()?;
    Ok(MultiExpr::single(lhs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(text: &str, x: &[f64]) -> f64 {
        parse_expression(text, x.len().max(1)).unwrap().eval(x)
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(eval("2+3*4^2", &[]), 50.0);
        assert_eq!(eval("-x1^2", &[3.0]), -9.0);
        assert_eq!(eval("2^3^2", &[]), 512.0);
        assert_eq!(eval("2^-1", &[]), 0.5);
        assert_eq!(eval("8/4/2", &[]), 1.0);
        assert_eq!(eval("10 - 4 - 3", &[]), 3.0);
    }

    #[test]
    fn table_expressions() {
        assert_eq!(eval("x1^2 + x2^2 - 1", &[1.0, 0.0]), 0.0);
        assert_eq!(eval("2*x1^3 + x2^2 + 3.0", &[0.0, 0.0]), 3.0);
        assert!((eval("sin(5*pi*x1)", &[0.1]) - 1.0).abs() < 1e-15);
        assert_eq!(eval("abs(x1 - x2)", &[3.0, 5.0]), 2.0);
    }

    #[test]
    fn scientific_numbers() {
        assert_eq!(eval("1.5e3 + 2E-1", &[]), 1500.2);
        assert_eq!(eval(".5", &[]), 0.5);
    }

    #[test]
    fn sums_and_subscripts() {
        let x: Vec<f64> = (1..=5).map(f64::from).collect();
        assert_eq!(eval("sum(i=1..5, x[i]^2)", &x), 55.0);
        assert_eq!(eval("sum(i=3..5, x[i])", &x), 12.0);
        assert_eq!(eval("sum(i=1..4, x[i]*x[i+1])", &x), 2.0 + 6.0 + 12.0 + 20.0);
        assert_eq!(eval("sum(i=1..3, i)", &x), 6.0);
        assert_eq!(eval("sum(i=1..0, x[i])", &x), 0.0);
        assert_eq!(eval("sum(i=1..2, sum(j=i..2, x[i]*x[j]))", &x), 1.0 + 2.0 + 4.0);
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(
            parse_expression("x1 + y", 2),
            Err(ParseError::UnknownIdentifier { name: "y".into(), column: 6 })
        );
        assert_eq!(
            parse_expression("x3", 2),
            Err(ParseError::UnknownIdentifier { name: "x3".into(), column: 1 })
        );
        assert_eq!(
            parse_expression("foo(x1)", 2),
            Err(ParseError::UnknownFunction { name: "foo".into(), column: 1 })
        );
        assert!(matches!(parse_expression("(x1 + 1", 2), Err(ParseError::Syntax { column: 8, .. })));
        assert!(matches!(parse_expression("x1 +* 2", 2), Err(ParseError::Syntax { column: 5, .. })));
        assert!(matches!(parse_expression("", 2), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_expression("x1 $", 2), Err(ParseError::Syntax { column: 4, .. })));
    }

    #[test]
    fn plus_minus_only_at_top_level() {
        assert!(parse_expression("±x1", 1).is_err());
        assert!(parse_relation("1 + ±x1", 1).is_err());
        assert!(parse_relation("sqrt(±x1)", 1).is_err());
        assert!(parse_relation("±x1 ± x1", 1).is_err());
        let r = parse_relation("±sqrt(1 - x1^2)", 1).unwrap();
        assert_eq!(r.eval(&[0.0]), vec![1.0, -1.0]);
        let r = parse_relation("1 ± x1", 1).unwrap();
        assert_eq!(r.eval(&[1.0]), vec![2.0, 0.0]);
        let r = parse_relation("x1^3", 1).unwrap();
        assert!(!r.is_multi_valued());
    }

    #[test]
    fn display_reparses_identically() {
        for text in [
            "x1^2 + x2^2 - 1",
            "-(x5*x3^3)/(x4^3)",
            "sum(i=3..20, x[i]^2) + abs(x1 - x2)",
            "(x1 + sum(i=1..18, x[i]*x[i+2]))*x20 - 0",
            "2^-1 + 3.25e-7 - -x1",
            "exp(ln(x1)) + tan(x2) + cos(pi*x3)",
            "sum(i=1..2, sum(j=i..(2*i - -1), i*x[j]))",
        ] {
            let e = parse_expression(text, 20).unwrap();
            let again = parse_expression(&e.to_string(), 20).unwrap();
            assert_eq!(e, again, "{text} -> {e}");
        }
        for text in ["±sqrt(1 - x3^2)", "1 ± x2", "1 - x1 - x2"] {
            let r = parse_relation(text, 3).unwrap();
            assert_eq!(parse_relation(&r.to_string(), 3).unwrap(), r);
        }
    }
}
