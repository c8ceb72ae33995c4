//! Arithmetic expression language for model entries.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' unary)?          // right-associative
//! primary := number | 'i' | 'pi' | 'e' | name | func '(' expr ')' | '(' expr ')'
//! func    := sin | cos | tan | exp | ln | sqrt
//! ```
//!
//! Names other than the built-in constants parse as parameter references;
//! whether they are declared is checked when a model is loaded.

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::dual::{Dual, DualComplex};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
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
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constant {
    Pi,
    E,
}

/// Parsed expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// The imaginary unit `i`.
    Imag,
    Const(Constant),
    Param(String),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Names that can never be parameters.
pub const RESERVED: [&str; 9] = ["i", "pi", "e", "sin", "cos", "tan", "exp", "ln", "sqrt"];

impl Expr {
    pub fn num(x: f64) -> Self {
        Expr::Num(x)
    }

    /// `re + im*i`, or a plain number when `im` is zero.
    pub fn complex(z: Complex64) -> Self {
        if z.im == 0.0 {
            return Expr::Num(z.re);
        }
        let imag = Expr::Binary(BinOp::Mul, Box::new(Expr::Num(z.im)), Box::new(Expr::Imag));
        Expr::Binary(BinOp::Add, Box::new(Expr::Num(z.re)), Box::new(imag))
    }

    pub fn param(name: &str) -> Self {
        Expr::Param(name.to_owned())
    }

    /// Parameter names referenced anywhere in the tree.
    pub fn parameters(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_params(&mut out);
        out
    }

    fn collect_params<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Expr::Param(n) => {
                out.insert(n.as_str());
            }
            Expr::Neg(a) | Expr::Call(_, a) => a.collect_params(out),
            Expr::Binary(_, a, b) => {
                a.collect_params(out);
                b.collect_params(out);
            }
            Expr::Num(_) | Expr::Imag | Expr::Const(_) => {}
        }
    }

    /// Fails with `UnknownIdentifier` on the first name not in `declared`.
    pub fn check_parameters(&self, declared: &[String]) -> Result<()> {
        match self.parameters().into_iter().find(|p| !declared.iter().any(|d| d == p)) {
            Some(name) => Err(Error::UnknownIdentifier { name: name.to_string() }),
            None => Ok(()),
        }
    }

    /// Evaluates with dual numbers; `lookup` supplies each parameter's value
    /// and derivative seed.
    pub fn eval(&self, lookup: &dyn Fn(&str) -> Option<DualComplex>) -> Result<DualComplex> {
        let v = self.eval_inner(lookup)?;
        if !v.is_finite() {
            return Err(Error::EvalError(format!("`{self}` is not finite")));
        }
        Ok(v)
    }

    fn eval_inner(&self, lookup: &dyn Fn(&str) -> Option<DualComplex>) -> Result<DualComplex> {
        let c = |re: f64, im: f64| Dual::constant(Complex64::new(re, im));
        Ok(match self {
            Expr::Num(x) => c(*x, 0.0),
            Expr::Imag => c(0.0, 1.0),
            Expr::Const(Constant::Pi) => c(core::f64::consts::PI, 0.0),
            Expr::Const(Constant::E) => c(core::f64::consts::E, 0.0),
            Expr::Param(name) => lookup(name).ok_or_else(|| Error::MissingParameter { name: name.clone() })?,
            Expr::Neg(a) => -a.eval_inner(lookup)?,
            Expr::Binary(op, a, b) => {
                let (x, y) = (a.eval_inner(lookup)?, b.eval_inner(lookup)?);
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => x / y,
                    BinOp::Pow => x.pow(y),
                }
            }
            Expr::Call(f, a) => {
                let x = a.eval_inner(lookup)?;
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Tan => x.tan(),
                    Func::Exp => x.exp(),
                    Func::Ln => x.ln(),
                    Func::Sqrt => x.sqrt(),
                }
            }
        })
    }

    /// Plain complex value with no parameters bound.
    pub fn eval_constant(&self) -> Result<Complex64> {
        Ok(self.eval(&|_| None)?.value)
    }
}

/// Fully parenthesized; re-parsing gives a structurally identical tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) => write!(f, "{x}"),
            Expr::Imag => f.write_str("i"),
            Expr::Const(Constant::Pi) => f.write_str("pi"),
            Expr::Const(Constant::E) => f.write_str("e"),
            Expr::Param(n) => f.write_str(n),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(x) => format!("number {x}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Op(c) => format!("`{c}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if b.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if b.is_ascii_digit() || (b == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
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
            let lit = &text[start..i];
            let x: f64 = lit.parse().map_err(|_| Error::Syntax {
                offset: start,
                expected: alloc::vec!["number"],
                found: format!("`{lit}`"),
            })?;
            out.push((start, Tok::Num(x)));
        } else if b.is_ascii_alphabetic() || b == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(text[start..i].to_owned())));
        } else {
            let tok = match b {
                b'+' | b'-' | b'*' | b'/' | b'^' => Tok::Op(b as char),
                b'(' => Tok::LParen,
                b')' => Tok::RParen,
                _ => {
                    let ch = text[start..].chars().next().unwrap_or('?');
                    return Err(Error::Syntax {
                        offset: start,
                        expected: alloc::vec!["number", "identifier", "operator", "(", ")"],
                        found: format!("`{ch}`"),
                    });
                }
            };
            out.push((start, tok));
            i += 1;
        }
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

const OPERAND: [&str; 5] = ["number", "identifier", "(", "-", "+"];

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &[&'static str]) -> Result<T> {
        Err(Error::Syntax {
            offset: self.offset(),
            expected: expected.to_vec(),
            found: self.peek().describe(),
        })
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Tok::Op('-') => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Tok::Op('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if matches!(self.peek(), Tok::Op('^')) {
            self.bump();
            let exp = self.unary()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.peek().clone() {
            Tok::Num(x) => {
                self.bump();
                Ok(Expr::Num(x))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                if !matches!(self.peek(), Tok::RParen) {
                    return self.fail(&[")", "operator"]);
                }
                self.bump();
                Ok(e)
            }
            Tok::Ident(name) => {
                let at = self.offset();
                self.bump();
                if matches!(self.peek(), Tok::LParen) {
                    let Some(func) = Func::from_name(&name) else {
                        return Err(Error::UnknownIdentifier { name });
                    };
                    self.bump();
                    let arg = self.expr()?;
                    if !matches!(self.peek(), Tok::RParen) {
                        return self.fail(&[")", "operator"]);
                    }
                    self.bump();
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                match name.as_str() {
                    "i" => Ok(Expr::Imag),
                    "pi" => Ok(Expr::Const(Constant::Pi)),
                    "e" => Ok(Expr::Const(Constant::E)),
                    n if Func::from_name(n).is_some() => Err(Error::Syntax {
                        offset: at + n.len(),
                        expected: alloc::vec!["("],
                        found: self.peek().describe(),
                    }),
                    _ => Ok(Expr::Param(name)),
                }
            }
            _ => self.fail(&OPERAND),
        }
    }
}

/// Parses an expression string.
pub fn parse_expression(text: &str) -> Result<Expr> {
    let mut p = Parser {
        toks: tokenize(text)?,
        pos: 0,
    };
    let e = p.expr()?;
    if !matches!(p.peek(), Tok::End) {
        return p.fail(&["operator", "end of input"]);
    }
    Ok(e)
}
