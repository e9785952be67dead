//! Normalized affine-linear families `A(eps) = A0 + sum_k Ak * eps_k`,
//! `eps in [-1, 1]^K`.

use std::collections::{HashMap, HashSet};

use crate::affine::{AffineForm, SymbolAllocator};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::interval::Interval;
use crate::linalg::DenseMatrix;

/// Default cap on the number of symbols for vertex enumeration (2^20 vertices).
pub const DEFAULT_VERTEX_CAP: usize = 20;

const BOX_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ParametricMatrix {
    center: DenseMatrix,
    coeffs: Vec<DenseMatrix>,
    names: Vec<String>,
}

/// A vertex of the noise box: one sign per symbol.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VertexAssignment(pub Vec<i8>);

impl VertexAssignment {
    /// The `index`-th vertex in lexicographic order, `-1` before `+1`,
    /// first symbol most significant.
    pub fn from_index(index: u64, k: usize) -> Self {
        Self(
            (0..k)
                .map(|s| {
                    if (index >> (k - 1 - s)) & 1 == 1 {
                        1
                    } else {
                        -1
                    }
                })
                .collect(),
        )
    }

    pub fn to_eps(&self) -> Vec<f64> {
        self.0.iter().map(|&s| f64::from(s)).collect()
    }
}

impl ParametricMatrix {
    pub fn new(center: DenseMatrix, coeffs: Vec<DenseMatrix>, names: Vec<String>) -> Result<Self> {
        let n = center.dim();
        if let Some(bad) = coeffs.iter().position(|c| c.dim() != n) {
            return Err(Error::Dimension(format!(
                "coefficient matrix {} is {}x{}, expected {n}x{n}",
                bad + 1,
                coeffs[bad].dim(),
                coeffs[bad].dim()
            )));
        }
        if names.len() != coeffs.len() {
            return Err(Error::Dimension(format!(
                "{} symbol names for {} coefficient matrices",
                names.len(),
                coeffs.len()
            )));
        }
        Ok(Self {
            center,
            coeffs,
            names,
        })
    }

    /// Like [`new`](Self::new) with names `eps1..epsK`.
    pub fn from_parts(center: DenseMatrix, coeffs: Vec<DenseMatrix>) -> Result<Self> {
        let names = (1..=coeffs.len()).map(|k| format!("eps{k}")).collect();
        Self::new(center, coeffs, names)
    }

    /// Affine transformation of an expression grid over a parameter box.
    ///
    /// Parameter `k` becomes `mid + rad * eps_k`; entries are evaluated in
    /// row-major order so fresh symbols land after the `K` reserved ones in a
    /// fixed order.
    pub fn build(entries: &[Vec<Expr>], params: &[(String, Interval)]) -> Result<Self> {
        let n = entries.len();
        if let Some((i, row)) = entries.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::Dimension(format!(
                "row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
        let mut seen = HashSet::new();
        for (name, _) in params {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateParameter(name.clone()));
            }
        }
        let env: HashMap<String, AffineForm> = params
            .iter()
            .enumerate()
            .map(|(k, (name, iv))| (name.clone(), AffineForm::from_interval(*iv, k)))
            .collect();
        let mut alloc = SymbolAllocator::new(params.len());
        let mut forms = Vec::with_capacity(n * n);
        for row in entries {
            for e in row {
                forms.push(e.eval_affine(&env, &mut alloc)?);
            }
        }
        let k_total = alloc.len();
        let center = DenseMatrix::from_fn(n, |i, j| forms[i * n + j].center());
        let coeffs = (0..k_total)
            .map(|k| DenseMatrix::from_fn(n, |i, j| forms[i * n + j].coeff(k)))
            .collect();
        let mut names: Vec<String> = params.iter().map(|(name, _)| name.clone()).collect();
        names.extend((params.len()..k_total).map(|k| format!("eps{}", k + 1)));
        Self::new(center, coeffs, names)
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn num_symbols(&self) -> usize {
        self.coeffs.len()
    }

    pub fn center(&self) -> &DenseMatrix {
        &self.center
    }

    pub fn coeffs(&self) -> &[DenseMatrix] {
        &self.coeffs
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn instantiate(&self, eps: &[f64]) -> Result<DenseMatrix> {
        if eps.len() != self.num_symbols() {
            return Err(Error::Dimension(format!(
                "noise vector has {} entries, family has {} symbols",
                eps.len(),
                self.num_symbols()
            )));
        }
        if let Some((symbol, &value)) = eps
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.abs() <= 1.0 + BOX_SLACK))
        {
            return Err(Error::OutOfBox { symbol, value });
        }
        Ok(self.instantiate_unchecked(eps))
    }

    fn instantiate_unchecked(&self, eps: &[f64]) -> DenseMatrix {
        let mut out = self.center.clone();
        for (a, &e) in self.coeffs.iter().zip(eps) {
            if e != 0.0 {
                out.add_scaled(a, e);
            }
        }
        out
    }

    pub fn vertex_matrix(&self, v: &VertexAssignment) -> DenseMatrix {
        self.instantiate_unchecked(&v.to_eps())
    }

    /// `B = sum_k |Ak|`.
    pub fn envelope(&self) -> DenseMatrix {
        let mut b = DenseMatrix::zeros(self.dim());
        for a in &self.coeffs {
            b.add_scaled(&a.abs(), 1.0);
        }
        b
    }

    /// Inflates every symbol radius by `r`.
    pub fn scale(&self, r: f64) -> Result<Self> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::NegativeRadius(r));
        }
        Ok(Self {
            center: self.center.clone(),
            coeffs: self.coeffs.iter().map(|a| a.scaled(r)).collect(),
            names: self.names.clone(),
        })
    }

    /// `-A(eps)`.
    pub fn negated(&self) -> Self {
        Self {
            center: self.center.scaled(-1.0),
            coeffs: self.coeffs.iter().map(|a| a.scaled(-1.0)).collect(),
            names: self.names.clone(),
        }
    }

    /// `A(eps) + shift * I`.
    pub fn shifted(&self, shift: f64) -> Self {
        let mut out = self.clone();
        out.center
            .add_scaled(&DenseMatrix::identity(self.dim()), shift);
        out
    }

    pub fn vertex_count(&self, cap: usize) -> Result<u64> {
        let k = self.num_symbols();
        if k > cap || k >= 64 {
            return Err(Error::VertexBudgetExceeded { symbols: k, cap });
        }
        Ok(1u64 << k)
    }

    /// All `2^K` vertex instantiations in lexicographic sign order.
    pub fn vertices(
        &self,
        cap: usize,
    ) -> Result<impl Iterator<Item = (VertexAssignment, DenseMatrix)> + '_> {
        let count = self.vertex_count(cap)?;
        let k = self.num_symbols();
        Ok((0..count).map(move |i| {
            let v = VertexAssignment::from_index(i, k);
            let m = self.vertex_matrix(&v);
            (v, m)
        }))
    }

    pub fn max_asymmetry(&self) -> f64 {
        std::iter::once(&self.center)
            .chain(&self.coeffs)
            .map(DenseMatrix::max_asymmetry)
            .fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.max_asymmetry() <= tol
    }

    /// `1e-12 * (1 + max |entry|)` over all matrices of the family.
    pub fn default_symmetry_tol(&self) -> f64 {
        let m = std::iter::once(&self.center)
            .chain(&self.coeffs)
            .map(DenseMatrix::max_abs)
            .fold(0.0, f64::max);
        1e-12 * (1.0 + m)
    }

    pub fn ensure_symmetric(&self, tol: Option<f64>) -> Result<()> {
        let tolerance = tol.unwrap_or_else(|| self.default_symmetry_tol());
        let asymmetry = self.max_asymmetry();
        if asymmetry <= tolerance {
            Ok(())
        } else {
            Err(Error::NotSymmetric {
                asymmetry,
                tolerance,
            })
        }
    }
}
