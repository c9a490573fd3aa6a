//! A small arithmetic expression language used to describe the target
//! function and the weights in problem configs.
//!
//! Grammar (lowest to highest precedence):
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?          // right associative
//! atom    := number | ident | ident '(' sum ')' | '(' sum ')'
//! ```
//!
//! Identifiers match `[a-z][a-z0-9_]*`. Numbers are decimal with an optional
//! exponent (`1.5`, `.5`, `2e-3`).

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

/// Expression tree. Immutable once built; `Display` prints a fully
/// parenthesized form that parses back to the same tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(String),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("empty expression")]
    Empty,
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { offset: usize, name: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    DivisionByZero,
    LogOfNonPositive,
    SqrtOfNegative,
    NegativeBaseFractionalPower,
    NonFinite,
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DomainKind::DivisionByZero => "division by zero",
            DomainKind::LogOfNonPositive => "log of non-positive value",
            DomainKind::SqrtOfNegative => "sqrt of negative value",
            DomainKind::NegativeBaseFractionalPower => "negative base raised to a non-integer power",
            DomainKind::NonFinite => "non-finite result",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("{kind} in `{expr}`")]
    Domain { kind: DomainKind, expr: String },
}

pub fn parse(source: &str) -> Result<Expr, ParseError> {
    Expr::parse(source)
}

impl Expr {
    pub fn parse(source: &str) -> Result<Expr, ParseError> {
        let tokens = tokenize(source)?;
        if tokens.is_empty() {
            return Err(ParseError::Empty);
        }
        let mut parser = Parser {
            tokens,
            pos: 0,
            end: source.len(),
        };
        let expr = parser.sum()?;
        if let Some(tok) = parser.peek() {
            return Err(ParseError::Syntax {
                offset: tok.offset,
                message: format!("unexpected {}", tok.kind),
            });
        }
        Ok(expr)
    }

    /// Sorted, deduplicated names of the variables occurring in the tree.
    pub fn free_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(name) => {
                out.insert(name.clone());
            }
            Expr::Neg(e) | Expr::Call(_, e) => e.collect_vars(out),
            Expr::Binary(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
        }
    }

    /// True when the expression is the literal `1`.
    pub fn is_literal_one(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 1.0)
    }

    pub fn eval(&self, bindings: &HashMap<String, f64>) -> Result<f64, EvalError> {
        self.eval_with(&|name: &str| bindings.get(name).copied())
    }

    pub fn eval_with(&self, lookup: &dyn Fn(&str) -> Option<f64>) -> Result<f64, EvalError> {
        match self {
            Expr::Num(v) => Ok(*v),
            Expr::Var(name) => lookup(name).ok_or_else(|| EvalError::Unbound(name.clone())),
            Expr::Neg(e) => Ok(-e.eval_with(lookup)?),
            Expr::Binary(op, l, r) => {
                let a = l.eval_with(lookup)?;
                let b = r.eval_with(lookup)?;
                self.apply_binary(*op, a, b)
            }
            Expr::Call(func, arg) => {
                let a = arg.eval_with(lookup)?;
                self.apply_call(*func, a)
            }
        }
    }

    /// Resolves variable names against `names` once, so repeated evaluation
    /// only indexes into a slice.
    pub fn bind(&self, names: &[&str]) -> Result<BoundExpr, EvalError> {
        for var in self.free_variables() {
            if !names.contains(&var.as_str()) {
                return Err(EvalError::Unbound(var));
            }
        }
        Ok(BoundExpr {
            root: self.clone(),
            slots: names.iter().map(|s| s.to_string()).collect(),
        })
    }

    fn domain(&self, kind: DomainKind) -> EvalError {
        EvalError::Domain {
            kind,
            expr: self.to_string(),
        }
    }

    fn apply_binary(&self, op: BinOp, a: f64, b: f64) -> Result<f64, EvalError> {
        let v = match op {
            BinOp::Add => a + b,
            BinOp::Sub => a - b,
            BinOp::Mul => a * b,
            BinOp::Div => {
                if b == 0.0 {
                    return Err(self.domain(DomainKind::DivisionByZero));
                }
                a / b
            }
            BinOp::Pow => {
                if a < 0.0 && b.fract() != 0.0 {
                    return Err(self.domain(DomainKind::NegativeBaseFractionalPower));
                }
                if a == 0.0 && b < 0.0 {
                    return Err(self.domain(DomainKind::DivisionByZero));
                }
                // small integer exponents go through powi for exact products
                if b.fract() == 0.0 && b.abs() <= 64.0 {
                    a.powi(b as i32)
                } else {
                    a.powf(b)
                }
            }
        };
        self.finite(v)
    }

    fn apply_call(&self, func: Func, a: f64) -> Result<f64, EvalError> {
        let v = match func {
            Func::Sin => a.sin(),
            Func::Cos => a.cos(),
            Func::Exp => a.exp(),
            Func::Log => {
                if a <= 0.0 {
                    return Err(self.domain(DomainKind::LogOfNonPositive));
                }
                a.ln()
            }
            Func::Sqrt => {
                if a < 0.0 {
                    return Err(self.domain(DomainKind::SqrtOfNegative));
                }
                a.sqrt()
            }
            Func::Abs => a.abs(),
        };
        self.finite(v)
    }

    fn finite(&self, v: f64) -> Result<f64, EvalError> {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(self.domain(DomainKind::NonFinite))
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(name) => f.write_str(name),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Binary(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
            Expr::Call(func, arg) => write!(f, "{}({arg})", func.name()),
        }
    }
}

/// An expression whose variables have been resolved to positional slots.
#[derive(Debug, Clone)]
pub struct BoundExpr {
    root: Expr,
    slots: Vec<String>,
}

impl BoundExpr {
    pub fn expr(&self) -> &Expr {
        &self.root
    }

    pub fn eval(&self, values: &[f64]) -> Result<f64, EvalError> {
        debug_assert_eq!(values.len(), self.slots.len());
        self.root
            .eval_with(&|name: &str| self.slots.iter().position(|s| s == name).map(|i| values[i]))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Num(v) => write!(f, "number `{v}`"),
            TokenKind::Ident(s) => write!(f, "identifier `{s}`"),
            TokenKind::Op(c) => write!(f, "`{c}`"),
            TokenKind::LParen => f.write_str("`(`"),
            TokenKind::RParen => f.write_str("`)`"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    offset: usize,
}

fn tokenize(source: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
                continue;
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                tokens.push(Token {
                    kind: TokenKind::Op(c as char),
                    offset: start,
                });
                i += 1;
            }
            b'(' => {
                tokens.push(Token {
                    kind: TokenKind::LParen,
                    offset: start,
                });
                i += 1;
            }
            b')' => {
                tokens.push(Token {
                    kind: TokenKind::RParen,
                    offset: start,
                });
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &source[start..i];
                let value: f64 = text.parse().map_err(|_| ParseError::Syntax {
                    offset: start,
                    message: format!("malformed number `{text}`"),
                })?;
                if !value.is_finite() {
                    return Err(ParseError::Syntax {
                        offset: start,
                        message: format!("number `{text}` out of range"),
                    });
                }
                tokens.push(Token {
                    kind: TokenKind::Num(value),
                    offset: start,
                });
            }
            b'a'..=b'z' => {
                while i < bytes.len()
                    && (bytes[i].is_ascii_lowercase() || bytes[i].is_ascii_digit() || bytes[i] == b'_')
                {
                    i += 1;
                }
                tokens.push(Token {
                    kind: TokenKind::Ident(source[start..i].to_string()),
                    offset: start,
                });
            }
            _ => {
                let ch = source[start..].chars().next().unwrap_or('?');
                return Err(ParseError::Syntax {
                    offset: start,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_op(&self) -> Option<char> {
        match self.peek() {
            Some(Token {
                kind: TokenKind::Op(c), ..
            }) => Some(*c),
            _ => None,
        }
    }

    fn next(&mut self) -> Option<Token> {
        let tok = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        tok
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        while let Some(c @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.product()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(c @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.unary()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek_op() == Some('-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek_op() == Some('^') {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let end = self.end;
        let Some(tok) = self.next() else {
            return Err(ParseError::Syntax {
                offset: end,
                message: "unexpected end of input".into(),
            });
        };
        match tok.kind {
            TokenKind::Num(v) => Ok(Expr::Num(v)),
            TokenKind::Ident(name) => {
                if matches!(
                    self.peek(),
                    Some(Token {
                        kind: TokenKind::LParen,
                        ..
                    })
                ) {
                    let func = Func::from_name(&name).ok_or(ParseError::UnknownFunction {
                        offset: tok.offset,
                        name: name.clone(),
                    })?;
                    self.pos += 1;
                    let arg = self.sum()?;
                    self.expect_rparen()?;
                    Ok(Expr::Call(func, Box::new(arg)))
                } else {
                    Ok(Expr::Var(name))
                }
            }
            TokenKind::LParen => {
                let inner = self.sum()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            other => Err(ParseError::Syntax {
                offset: tok.offset,
                message: format!("unexpected {other}"),
            }),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        match self.next() {
            Some(Token {
                kind: TokenKind::RParen,
                ..
            }) => Ok(()),
            Some(tok) => Err(ParseError::Syntax {
                offset: tok.offset,
                message: format!("expected `)`, found {}", tok.kind),
            }),
            None => Err(ParseError::Syntax {
                offset: self.end,
                message: "expected `)`, found end of input".into(),
            }),
        }
    }
}
