//! Closed-form matrix-entry expressions.
//!
//! Grammar (whitespace is insignificant):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' uint)*        right-associative
//! primary := number | ident | '(' expr ')'
//! ident   := letter (letter | digit | '_')*
//! ```
//!
//! `^` binds tighter than unary minus, so `-x^2` is `-(x^2)`. Exponents are
//! non-negative integer literals. Implicit multiplication is not accepted.

use std::collections::HashMap;
use std::fmt;

use crate::affine::{AffineForm, SymbolAllocator};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Constant(f64),
    Param(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

impl Expr {
    pub fn parse(text: &str) -> Result<Expr> {
        Parser::new(text).parse()
    }

    /// Parameter names in order of first appearance.
    pub fn params(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_params(&mut out);
        out
    }

    fn collect_params<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::Constant(_) => {}
            Expr::Param(name) => {
                if !out.contains(&name.as_str()) {
                    out.push(name);
                }
            }
            Expr::Neg(e) | Expr::Pow(e, _) => e.collect_params(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.collect_params(out);
                b.collect_params(out);
            }
        }
    }

    pub fn eval_real(&self, point: &HashMap<String, f64>) -> Result<f64> {
        Ok(match self {
            Expr::Constant(c) => *c,
            Expr::Param(name) => *point
                .get(name)
                .ok_or_else(|| Error::UnboundParameter(name.clone()))?,
            Expr::Neg(e) => -e.eval_real(point)?,
            Expr::Add(a, b) => a.eval_real(point)? + b.eval_real(point)?,
            Expr::Sub(a, b) => a.eval_real(point)? - b.eval_real(point)?,
            Expr::Mul(a, b) => a.eval_real(point)? * b.eval_real(point)?,
            Expr::Div(a, b) => {
                let num = a.eval_real(point)?;
                let den = b.eval_real(point)?;
                if den == 0.0 {
                    return Err(Error::Eval(format!("division by zero in `{self}`")));
                }
                num / den
            }
            Expr::Pow(e, n) => e.eval_real(point)?.powi(*n as i32),
        })
    }

    /// Affine-arithmetic evaluation, left to right and depth first, so fresh
    /// symbols are allocated in a reproducible order.
    pub fn eval_affine(
        &self,
        env: &HashMap<String, AffineForm>,
        alloc: &mut SymbolAllocator,
    ) -> Result<AffineForm> {
        let out = match self {
            Expr::Constant(c) => AffineForm::constant(*c),
            Expr::Param(name) => env
                .get(name)
                .cloned()
                .ok_or_else(|| Error::UnboundParameter(name.clone()))?,
            Expr::Neg(e) => e.eval_affine(env, alloc)?.negate(),
            Expr::Add(a, b) => {
                let a = a.eval_affine(env, alloc)?;
                a.add(&b.eval_affine(env, alloc)?)
            }
            Expr::Sub(a, b) => {
                let a = a.eval_affine(env, alloc)?;
                a.sub(&b.eval_affine(env, alloc)?)
            }
            Expr::Mul(a, b) => {
                let a = a.eval_affine(env, alloc)?;
                let b = b.eval_affine(env, alloc)?;
                a.mul(&b, alloc)
            }
            Expr::Div(a, b) => {
                let a = a.eval_affine(env, alloc)?;
                let b = b.eval_affine(env, alloc)?;
                let inv = b.reciprocal(alloc)?;
                a.mul(&inv, alloc)
            }
            Expr::Pow(e, n) => e.eval_affine(env, alloc)?.powi(*n, alloc),
        };
        if !out.center().is_finite() || !out.radius().is_finite() {
            return Err(Error::Domain(format!("overflow while evaluating `{self}`")));
        }
        Ok(out)
    }
}

/// Fully parenthesized rendering that re-parses to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Constant(c) => write!(f, "{c:?}"),
            Expr::Param(name) => write!(f, "{name}"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(e, n) => match **e {
                Expr::Constant(_) | Expr::Param(_) => write!(f, "{e}^{n}"),
                _ => write!(f, "({e})^{n}"),
            },
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            src,
            bytes: src.as_bytes(),
            pos: 0,
        }
    }

    fn error<T>(&self, position: usize, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            position,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn parse(mut self) -> Result<Expr> {
        if self.peek().is_none() {
            return self.error(0, "empty expression");
        }
        let e = self.expr()?;
        if let Some(c) = self.peek() {
            return self.error(self.pos, format!("unexpected `{}`", c as char));
        }
        Ok(e)
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        let mut exps = Vec::new();
        while self.eat(b'^') {
            exps.push(self.exponent()?);
        }
        // Right-associative fold of the literal exponent chain.
        let mut folded: Option<(u32, usize)> = None;
        for &(n, at) in exps.iter().rev() {
            folded = Some(match folded {
                None => (n, at),
                Some((e, _)) => match n.checked_pow(e) {
                    Some(v) => (v, at),
                    None => return self.error(at, "exponent overflow"),
                },
            });
        }
        Ok(match folded {
            Some((n, _)) => Expr::Pow(Box::new(base), n),
            None => base,
        })
    }

    fn exponent(&mut self) -> Result<(u32, usize)> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.error(start, "exponent must be a non-negative integer literal");
        }
        if matches!(self.bytes.get(self.pos), Some(b'.' | b'e' | b'E')) {
            return self.error(start, "exponent must be a non-negative integer literal");
        }
        match self.src[start..self.pos].parse::<u32>() {
            Ok(n) => Ok((n, start)),
            Err(_) => self.error(start, "exponent out of range"),
        }
    }

    fn primary(&mut self) -> Result<Expr> {
        let Some(c) = self.peek() else {
            return self.error(self.pos, "unexpected end of input");
        };
        let start = self.pos;
        if self.eat(b'(') {
            let e = self.expr()?;
            if !self.eat(b')') {
                return self.error(self.pos, "expected `)`");
            }
            return Ok(e);
        }
        if c.is_ascii_digit() || c == b'.' {
            return self.number();
        }
        if c.is_ascii_alphabetic() {
            while self.pos < self.bytes.len()
                && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
            {
                self.pos += 1;
            }
            return Ok(Expr::Param(self.src[start..self.pos].to_string()));
        }
        let ch = self.src[start..].chars().next().unwrap_or('?');
        self.error(start, format!("unexpected `{ch}`"))
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.bytes.len() && p.bytes[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut n = digits(self);
        if self.bytes.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            return self.error(start, "malformed number");
        }
        if matches!(self.bytes.get(self.pos), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.bytes.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                return self.error(mark, "malformed exponent in number");
            }
        }
        if self.pos < self.bytes.len()
            && (self.bytes[self.pos].is_ascii_alphabetic() || self.bytes[self.pos] == b'_')
        {
            return self.error(
                self.pos,
                "implicit multiplication is not supported; use `*`",
            );
        }
        match self.src[start..self.pos].parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Expr::Constant(v)),
            _ => self.error(start, "number out of range"),
        }
    }
}
