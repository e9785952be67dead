//! Affine forms `x0 + sum_i xi * eps_i` over noise symbols `eps_i` in `[-1, 1]`.
//!
//! Linear operations are exact. Nonlinear operations (square, product,
//! reciprocal) produce a linear part plus one fresh noise symbol that absorbs
//! the approximation error. Fresh symbols come from a [`SymbolAllocator`]
//! whose first `reserved` indices belong to the input parameters.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::interval::Interval;

/// Hands out fresh noise-symbol indices after the reserved parameter block.
#[derive(Debug, Clone)]
pub struct SymbolAllocator {
    reserved: usize,
    next_index: usize,
}

impl SymbolAllocator {
    pub fn new(reserved: usize) -> Self {
        Self {
            reserved,
            next_index: reserved,
        }
    }

    pub fn fresh(&mut self) -> usize {
        let idx = self.next_index;
        self.next_index += 1;
        idx
    }

    pub fn reserved(&self) -> usize {
        self.reserved
    }

    /// Total number of symbols in use (reserved plus allocated).
    pub fn len(&self) -> usize {
        self.next_index
    }

    pub fn is_empty(&self) -> bool {
        self.next_index == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffineForm {
    center: f64,
    terms: BTreeMap<usize, f64>,
}

impl AffineForm {
    pub fn constant(c: f64) -> Self {
        Self {
            center: c,
            terms: BTreeMap::new(),
        }
    }

    /// Builds a form from a center and `(symbol, coefficient)` pairs.
    /// Repeated symbols are summed and zero coefficients dropped.
    pub fn from_terms(center: f64, terms: impl IntoIterator<Item = (usize, f64)>) -> Self {
        let mut out = Self::constant(center);
        for (sym, c) in terms {
            out.add_term(sym, c);
        }
        out
    }

    /// `mid(a) + rad(a) * eps_symbol`; the range equals `a`.
    pub fn from_interval(a: Interval, symbol: usize) -> Self {
        Self::from_terms(a.mid(), [(symbol, a.rad())])
    }

    fn add_term(&mut self, sym: usize, c: f64) {
        if c == 0.0 {
            return;
        }
        let e = self.terms.entry(sym).or_insert(0.0);
        *e += c;
        if *e == 0.0 {
            self.terms.remove(&sym);
        }
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn coeff(&self, symbol: usize) -> f64 {
        self.terms.get(&symbol).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.terms.iter().map(|(&k, &v)| (k, v))
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total deviation `sum_i |x_i|`.
    pub fn radius(&self) -> f64 {
        self.terms.values().map(|c| c.abs()).sum()
    }

    pub fn range(&self) -> Interval {
        let r = self.radius();
        Interval::new(self.center - r, self.center + r)
            .expect("affine form with non-finite coefficients")
    }

    pub fn add(&self, other: &AffineForm) -> AffineForm {
        let mut out = self.clone();
        out.center += other.center;
        for (s, c) in other.terms() {
            out.add_term(s, c);
        }
        out
    }

    pub fn sub(&self, other: &AffineForm) -> AffineForm {
        self.add(&other.negate())
    }

    pub fn negate(&self) -> AffineForm {
        self.scale(-1.0)
    }

    pub fn scale(&self, k: f64) -> AffineForm {
        Self::from_terms(self.center * k, self.terms().map(|(s, c)| (s, c * k)))
    }

    pub fn translate(&self, k: f64) -> AffineForm {
        let mut out = self.clone();
        out.center += k;
        out
    }

    /// Square with the `eps^2 in [0, 1]` remainder re-centered into one fresh symbol.
    ///
    /// For `c + sum d_i eps_i` with `S = sum |d_i|` the quadratic part lies in
    /// `[0, S^2]`, giving `c^2 + S^2/2 + sum 2 c d_i eps_i + (S^2/2) eps_new`.
    /// With a single symbol this is the exact range of `x^2`.
    pub fn square(&self, alloc: &mut SymbolAllocator) -> AffineForm {
        if self.is_constant() {
            return Self::constant(self.center * self.center);
        }
        let s = self.radius();
        let half = s * s / 2.0;
        let c = self.center;
        let mut out = Self::from_terms(c * c + half, self.terms().map(|(k, d)| (k, 2.0 * c * d)));
        out.add_term(alloc.fresh(), half);
        out
    }

    pub fn mul(&self, other: &AffineForm, alloc: &mut SymbolAllocator) -> AffineForm {
        if self == other {
            return self.square(alloc);
        }
        if self.is_constant() {
            return other.scale(self.center);
        }
        if other.is_constant() {
            return self.scale(other.center);
        }
        let (a0, b0) = (self.center, other.center);
        let mut out = Self::constant(a0 * b0);
        for (s, a) in self.terms() {
            out.add_term(s, b0 * a);
        }
        for (s, b) in other.terms() {
            out.add_term(s, a0 * b);
        }
        let remainder = self.radius() * other.radius();
        out.add_term(alloc.fresh(), remainder);
        out
    }

    /// Min-range linear approximation of `1/x` over the range of `self`.
    pub fn reciprocal(&self, alloc: &mut SymbolAllocator) -> Result<AffineForm> {
        let range = self.range();
        if range.contains(0.0) {
            return Err(Error::Domain(format!(
                "reciprocal of a form with range {range} containing zero"
            )));
        }
        if self.is_constant() {
            return Ok(Self::constant(1.0 / self.center));
        }
        if range.hi() < 0.0 {
            return Ok(self.negate().reciprocal(alloc)?.negate());
        }
        let (a, b) = (range.lo(), range.hi());
        // 1/x is convex and decreasing on [a, b]; slope at b gives the
        // minimum-range approximation. d(x) = 1/x - alpha*x is decreasing.
        let alpha = -1.0 / (b * b);
        let d_hi = 1.0 / a - alpha * a;
        let d_lo = 1.0 / b - alpha * b;
        let zeta = (d_hi + d_lo) / 2.0;
        let delta = (d_hi - d_lo) / 2.0;
        let mut out = self.scale(alpha).translate(zeta);
        out.add_term(alloc.fresh(), delta);
        Ok(out)
    }

    /// `x^n` by binary exponentiation over [`square`](Self::square) and [`mul`](Self::mul).
    pub fn powi(&self, n: u32, alloc: &mut SymbolAllocator) -> AffineForm {
        if n == 0 {
            return Self::constant(1.0);
        }
        let mut acc: Option<AffineForm> = None;
        let mut base = self.clone();
        let mut e = n;
        loop {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.mul(&base, alloc),
                });
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            base = base.square(alloc);
        }
        acc.expect("n > 0")
    }

    /// Value at a concrete noise vector (missing symbols count as 0).
    pub fn eval(&self, eps: &[f64]) -> f64 {
        self.center
            + self
                .terms()
                .map(|(s, c)| c * eps.get(s).copied().unwrap_or(0.0))
                .sum::<f64>()
    }
}

impl fmt::Display for AffineForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.center)?;
        for (s, c) in self.terms() {
            if c < 0.0 {
                write!(f, " - {}*eps{}", -c, s + 1)?;
            } else {
                write!(f, " + {}*eps{}", c, s + 1)?;
            }
        }
        Ok(())
    }
}
