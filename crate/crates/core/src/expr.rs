//! Small expression language for coordinate maps and metric components.
//!
//! Grammar (infix, float literals, call syntax for the function set):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := factor (('*' | '/') factor)*
//! factor  := '-' factor | power
//! power   := atom ('^' factor)?          // right associative, binds tighter than unary minus
//! atom    := number | ident | ident '(' expr ')' | '(' expr ')'
//! ```
//!
//! Functions: sin, cos, tan, exp, ln, sqrt. Anything else followed by '(' is
//! an unknown-function error; a bare identifier is a variable resolved at
//! evaluation time. Expressions evaluate over jets, so one evaluation yields
//! the value and all derivatives at once; the same AST also supports exact
//! symbolic differentiation, which the ambient-manifold code uses for metric
//! derivatives in chart directions.

use crate::jet::{Jet, JetError};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Clone)]
pub enum ParseError {
    /// `offset` is the 1-based byte position of the offending input.
    #[error("syntax error at offset {offset}: {expected}")]
    Syntax { offset: usize, expected: String },
    #[error("unknown function `{name}` at offset {offset}")]
    UnknownFunction { name: String, offset: usize },
}

#[derive(Debug, Error, PartialEq, Clone)]
pub enum EvalError {
    #[error("unbound variable `{name}`")]
    UnboundVariable { name: String },
    #[error(transparent)]
    Jet(#[from] JetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn bin(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Bin(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn call(f: Func, arg: Expr) -> Expr {
        Expr::Call(f, Box::new(arg))
    }

    pub fn neg(e: Expr) -> Expr {
        Expr::Neg(Box::new(e))
    }
}

// ─── Lexer ───────────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

/// Token with the 1-based byte offset where it starts.
struct Lexed {
    tok: Tok,
    offset: usize,
}

fn lex(src: &str) -> Result<Vec<Lexed>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let offset = i + 1;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
            }
            b'+' => {
                out.push(Lexed { tok: Tok::Plus, offset });
                i += 1;
            }
            b'-' => {
                out.push(Lexed { tok: Tok::Minus, offset });
                i += 1;
            }
            b'*' => {
                out.push(Lexed { tok: Tok::Star, offset });
                i += 1;
            }
            b'/' => {
                out.push(Lexed { tok: Tok::Slash, offset });
                i += 1;
            }
            b'^' => {
                out.push(Lexed { tok: Tok::Caret, offset });
                i += 1;
            }
            b'(' => {
                out.push(Lexed { tok: Tok::LParen, offset });
                i += 1;
            }
            b')' => {
                out.push(Lexed { tok: Tok::RParen, offset });
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mark = i;
                    i += 1;
                    if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
                        i += 1;
                    }
                    if i < bytes.len() && bytes[i].is_ascii_digit() {
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    } else {
                        i = mark; // 'e' belongs to a following identifier, not the number
                    }
                }
                let text = &src[start..i];
                let v: f64 = text.parse().map_err(|_| ParseError::Syntax {
                    offset,
                    expected: format!("a numeric literal, found `{text}`"),
                })?;
                out.push(Lexed { tok: Tok::Num(v), offset });
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                out.push(Lexed { tok: Tok::Ident(src[start..i].to_string()), offset });
            }
            _ => {
                return Err(ParseError::Syntax {
                    offset,
                    expected: format!("unexpected character `{}`", src[i..].chars().next().unwrap()),
                });
            }
        }
    }
    Ok(out)
}

// ─── Parser ──────────────────────────────────────────────────────────────────

struct Parser {
    toks: Vec<Lexed>,
    cursor: usize,
    end_offset: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.cursor).map(|l| &l.tok)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.cursor).map(|l| l.offset).unwrap_or(self.end_offset)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.cursor).map(|l| l.tok.clone());
        if t.is_some() {
            self.cursor += 1;
        }
        t
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::RParen) => {
                self.cursor += 1;
                Ok(())
            }
            _ => Err(ParseError::Syntax {
                offset: self.offset(),
                expected: "`)`".to_string(),
            }),
        }
    }

    fn parse_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => break,
            };
            self.cursor += 1;
            let rhs = self.parse_term()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn parse_term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_factor()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => BinOp::Mul,
                Some(Tok::Slash) => BinOp::Div,
                _ => break,
            };
            self.cursor += 1;
            let rhs = self.parse_factor()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn parse_factor(&mut self) -> Result<Expr, ParseError> {
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.cursor += 1;
            let inner = self.parse_factor()?;
            // Fold a negated literal so `-2` and the printed form of a
            // negative constant are the same AST.
            if let Expr::Num(v) = inner {
                return Ok(Expr::Num(-v));
            }
            return Ok(Expr::neg(inner));
        }
        self.parse_power()
    }

    fn parse_power(&mut self) -> Result<Expr, ParseError> {
        let base = self.parse_atom()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.cursor += 1;
            // Right associative; the exponent may itself carry a unary minus.
            let exp = self.parse_factor()?;
            return Ok(Expr::bin(BinOp::Pow, base, exp));
        }
        Ok(base)
    }

    fn parse_atom(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.bump() {
            Some(Tok::Num(v)) => Ok(Expr::Num(v)),
            Some(Tok::Ident(name)) => {
                if matches!(self.peek(), Some(Tok::LParen)) {
                    let f = Func::from_name(&name).ok_or(ParseError::UnknownFunction {
                        name: name.clone(),
                        offset,
                    })?;
                    self.cursor += 1; // consume '('
                    let arg = self.parse_expr()?;
                    self.expect_rparen()?;
                    Ok(Expr::call(f, arg))
                } else {
                    Ok(Expr::Var(name))
                }
            }
            Some(Tok::LParen) => {
                let inner = self.parse_expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Some(other) => Err(ParseError::Syntax {
                offset,
                expected: format!("an operand, found `{other:?}`"),
            }),
            None => Err(ParseError::Syntax {
                offset,
                expected: "an operand, found end of input".to_string(),
            }),
        }
    }
}

/// Parse a source string into an AST.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, cursor: 0, end_offset: src.len() + 1 };
    let e = p.parse_expr()?;
    if p.cursor != p.toks.len() {
        return Err(ParseError::Syntax {
            offset: p.offset(),
            expected: "end of input".to_string(),
        });
    }
    Ok(e)
}

// ─── Printer ─────────────────────────────────────────────────────────────────

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
        Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
        Expr::Neg(..) => 3,
        Expr::Bin(BinOp::Pow, ..) => 4,
        _ => 5,
    }
}

fn write_at(e: &Expr, parent: u8, right_side: bool, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let mine = prec(e);
    let need = mine < parent || (mine == parent && right_side && mine != 4);
    if need {
        write!(f, "(")?;
    }
    match e {
        Expr::Num(v) => {
            if *v < 0.0 {
                write!(f, "({v})")?;
            } else {
                write!(f, "{v}")?;
            }
        }
        Expr::Var(name) => write!(f, "{name}")?,
        Expr::Neg(a) => {
            write!(f, "-")?;
            write_at(a, 3, true, f)?;
        }
        Expr::Bin(op, a, b) => {
            let (sym, p) = match op {
                BinOp::Add => ("+", 1),
                BinOp::Sub => ("-", 1),
                BinOp::Mul => ("*", 2),
                BinOp::Div => ("/", 2),
                BinOp::Pow => ("^", 4),
            };
            if *op == BinOp::Pow {
                // Right associative: parenthesize a left child of equal precedence.
                write_at(a, 5, false, f)?;
                write!(f, "{sym}")?;
                write_at(b, 4, false, f)?;
            } else {
                write_at(a, p, false, f)?;
                write!(f, " {sym} ")?;
                write_at(b, p, true, f)?;
            }
        }
        Expr::Call(func, a) => {
            write!(f, "{}(", func.name())?;
            write_at(a, 0, false, f)?;
            write!(f, ")")?;
        }
    }
    if need {
        write!(f, ")")?;
    }
    Ok(())
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_at(self, 0, false, f)
    }
}

// ─── Evaluation over jets ────────────────────────────────────────────────────

/// Variable bindings for evaluation. All jets must share one order.
#[derive(Debug)]
pub struct Env<'a> {
    vars: &'a [(&'a str, &'a Jet)],
}

impl<'a> Env<'a> {
    pub fn new(vars: &'a [(&'a str, &'a Jet)]) -> Result<Env<'a>, EvalError> {
        if let Some(((_, first), rest)) = vars.split_first() {
            for (_, j) in rest {
                if j.order() != first.order() {
                    return Err(EvalError::Jet(JetError::OrderMismatch {
                        left: first.order(),
                        right: j.order(),
                    }));
                }
            }
        }
        Ok(Env { vars })
    }

    fn lookup(&self, name: &str) -> Option<&Jet> {
        self.vars.iter().find(|(n, _)| *n == name).map(|(_, j)| *j)
    }

    fn order_and_base(&self) -> (usize, (f64, f64)) {
        self.vars
            .first()
            .map(|(_, j)| (j.order(), j.base()))
            .unwrap_or((0, (0.0, 0.0)))
    }
}

/// Evaluate an expression over the jet environment.
pub fn eval(e: &Expr, env: &Env<'_>) -> Result<Jet, EvalError> {
    let (order, base) = env.order_and_base();
    eval_inner(e, env, order, base)
}

fn eval_inner(e: &Expr, env: &Env<'_>, order: usize, base: (f64, f64)) -> Result<Jet, EvalError> {
    Ok(match e {
        Expr::Num(v) => Jet::constant(*v, order, base),
        Expr::Var(name) => env
            .lookup(name)
            .ok_or_else(|| EvalError::UnboundVariable { name: name.clone() })?
            .clone(),
        Expr::Neg(a) => eval_inner(a, env, order, base)?.scale(-1.0),
        Expr::Bin(op, a, b) => {
            let lhs = eval_inner(a, env, order, base)?;
            match op {
                BinOp::Add => lhs.try_add(&eval_inner(b, env, order, base)?)?,
                BinOp::Sub => lhs.try_sub(&eval_inner(b, env, order, base)?)?,
                BinOp::Mul => lhs.try_mul(&eval_inner(b, env, order, base)?)?,
                BinOp::Div => lhs.try_div(&eval_inner(b, env, order, base)?)?,
                BinOp::Pow => {
                    if let Some(n) = int_exponent(b) {
                        lhs.powi(n)?
                    } else {
                        let rhs = eval_inner(b, env, order, base)?;
                        if rhs.coeffs().iter().skip(1).all(|c| *c == 0.0) {
                            lhs.powf(rhs.value())?
                        } else {
                            // general a^b = exp(b ln a)
                            rhs.try_mul(&lhs.ln()?)?.exp()
                        }
                    }
                }
            }
        }
        Expr::Call(func, a) => {
            let arg = eval_inner(a, env, order, base)?;
            match func {
                Func::Sin => arg.sin(),
                Func::Cos => arg.cos(),
                Func::Tan => arg.tan()?,
                Func::Exp => arg.exp(),
                Func::Ln => arg.ln()?,
                Func::Sqrt => arg.sqrt()?,
            }
        }
    })
}

/// Recognize a literal integer exponent (possibly negated), |n| <= 64.
fn int_exponent(e: &Expr) -> Option<i64> {
    match e {
        Expr::Num(v) => {
            let r = v.round();
            if (v - r).abs() < 1e-12 && r.abs() <= 64.0 {
                Some(r as i64)
            } else {
                None
            }
        }
        Expr::Neg(a) => int_exponent(a).map(|n| -n),
        _ => None,
    }
}

// ─── Symbolic differentiation ────────────────────────────────────────────────

/// Exact derivative of the expression with respect to `var`.
pub fn diff(e: &Expr, var: &str) -> Expr {
    let d = match e {
        Expr::Num(_) => Expr::Num(0.0),
        Expr::Var(name) => {
            if name == var {
                Expr::Num(1.0)
            } else {
                Expr::Num(0.0)
            }
        }
        Expr::Neg(a) => Expr::neg(diff(a, var)),
        Expr::Bin(op, a, b) => match op {
            BinOp::Add => Expr::bin(BinOp::Add, diff(a, var), diff(b, var)),
            BinOp::Sub => Expr::bin(BinOp::Sub, diff(a, var), diff(b, var)),
            BinOp::Mul => Expr::bin(
                BinOp::Add,
                Expr::bin(BinOp::Mul, diff(a, var), (**b).clone()),
                Expr::bin(BinOp::Mul, (**a).clone(), diff(b, var)),
            ),
            BinOp::Div => Expr::bin(
                BinOp::Div,
                Expr::bin(
                    BinOp::Sub,
                    Expr::bin(BinOp::Mul, diff(a, var), (**b).clone()),
                    Expr::bin(BinOp::Mul, (**a).clone(), diff(b, var)),
                ),
                Expr::bin(BinOp::Pow, (**b).clone(), Expr::Num(2.0)),
            ),
            BinOp::Pow => {
                if let Some(n) = int_exponent(b) {
                    // d(a^n) = n a^{n-1} da
                    Expr::bin(
                        BinOp::Mul,
                        Expr::bin(
                            BinOp::Mul,
                            Expr::Num(n as f64),
                            Expr::bin(BinOp::Pow, (**a).clone(), Expr::Num((n - 1) as f64)),
                        ),
                        diff(a, var),
                    )
                } else {
                    // d(a^b) = a^b (db ln a + b da / a)
                    Expr::bin(
                        BinOp::Mul,
                        (*e).clone(),
                        Expr::bin(
                            BinOp::Add,
                            Expr::bin(BinOp::Mul, diff(b, var), Expr::call(Func::Ln, (**a).clone())),
                            Expr::bin(
                                BinOp::Div,
                                Expr::bin(BinOp::Mul, (**b).clone(), diff(a, var)),
                                (**a).clone(),
                            ),
                        ),
                    )
                }
            }
        },
        Expr::Call(func, a) => {
            let da = diff(a, var);
            let outer = match func {
                Func::Sin => Expr::call(Func::Cos, (**a).clone()),
                Func::Cos => Expr::neg(Expr::call(Func::Sin, (**a).clone())),
                Func::Tan => Expr::bin(
                    BinOp::Add,
                    Expr::Num(1.0),
                    Expr::bin(BinOp::Pow, Expr::call(Func::Tan, (**a).clone()), Expr::Num(2.0)),
                ),
                Func::Exp => Expr::call(Func::Exp, (**a).clone()),
                Func::Ln => Expr::bin(BinOp::Div, Expr::Num(1.0), (**a).clone()),
                Func::Sqrt => Expr::bin(
                    BinOp::Div,
                    Expr::Num(0.5),
                    Expr::call(Func::Sqrt, (**a).clone()),
                ),
            };
            Expr::bin(BinOp::Mul, outer, da)
        }
    };
    simplify(&d)
}

/// Structural simplification: constant folding and 0/1 identities.
///
/// Folding is restricted to operations that are exact in f64 for the inputs
/// we fold (and to total functions), so simplification never changes values.
pub fn simplify(e: &Expr) -> Expr {
    match e {
        Expr::Num(_) | Expr::Var(_) => e.clone(),
        Expr::Neg(a) => {
            let a = simplify(a);
            match a {
                Expr::Num(v) => Expr::Num(-v),
                Expr::Neg(inner) => *inner,
                other => Expr::neg(other),
            }
        }
        Expr::Call(f, a) => Expr::call(*f, simplify(a)),
        Expr::Bin(op, a, b) => {
            let a = simplify(a);
            let b = simplify(b);
            match op {
                BinOp::Add => match (&a, &b) {
                    (Expr::Num(x), Expr::Num(y)) => Expr::Num(x + y),
                    (Expr::Num(z), _) if *z == 0.0 => b,
                    (_, Expr::Num(z)) if *z == 0.0 => a,
                    _ => Expr::bin(BinOp::Add, a, b),
                },
                BinOp::Sub => match (&a, &b) {
                    (Expr::Num(x), Expr::Num(y)) => Expr::Num(x - y),
                    (_, Expr::Num(z)) if *z == 0.0 => a,
                    (Expr::Num(z), _) if *z == 0.0 => Expr::neg(b),
                    _ => Expr::bin(BinOp::Sub, a, b),
                },
                BinOp::Mul => match (&a, &b) {
                    (Expr::Num(x), Expr::Num(y)) => Expr::Num(x * y),
                    (Expr::Num(z), _) | (_, Expr::Num(z)) if *z == 0.0 => Expr::Num(0.0),
                    (Expr::Num(o), _) if *o == 1.0 => b,
                    (_, Expr::Num(o)) if *o == 1.0 => a,
                    _ => Expr::bin(BinOp::Mul, a, b),
                },
                BinOp::Div => match (&a, &b) {
                    (Expr::Num(z), _) if *z == 0.0 => Expr::Num(0.0),
                    (_, Expr::Num(o)) if *o == 1.0 => a,
                    _ => Expr::bin(BinOp::Div, a, b),
                },
                BinOp::Pow => match (&a, &b) {
                    (_, Expr::Num(o)) if *o == 1.0 => a,
                    (_, Expr::Num(z)) if *z == 0.0 => Expr::Num(1.0),
                    _ => Expr::bin(BinOp::Pow, a, b),
                },
            }
        }
    }
}
