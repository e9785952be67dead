//! Dense square-matrix kernels: inversion, Cholesky-based definiteness test,
//! cyclic Jacobi eigenvalues and the Perron root of non-negative matrices.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_TOL: f64 = 1e-12;
const POWER_MAX_ITERS: usize = 100_000;
const POWER_TOL: f64 = 1e-12;

/// Square matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
                data.push(v);
            }
        }
        Ok(Self { n, data })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data
            .chunks(self.n.max(1))
            .map(<[f64]>::to_vec)
            .take(self.n)
            .collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn abs(&self) -> Self {
        self.map(f64::abs)
    }

    pub fn scaled(&self, k: f64) -> Self {
        self.map(|v| v * k)
    }

    /// `self += k * other`.
    pub fn add_scaled(&mut self, other: &DenseMatrix, k: f64) {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += k * b;
        }
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// `(A + A^T) / 2`.
    pub fn symmetric_part(&self) -> Self {
        Self::from_fn(self.n, |i, j| 0.5 * (self[(i, j)] + self[(j, i)]))
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in i + 1..self.n {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    /// Gauss-Jordan inversion with partial pivoting.
    pub fn invert(&self) -> Result<Self> {
        let n = self.n;
        let threshold = 1e-12 * self.norm_inf();
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let (piv_row, piv) =
                (col..n)
                    .map(|r| (r, a[(r, col)].abs()))
                    .fold(
                        (col, -1.0),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    );
            if piv < threshold || piv == 0.0 {
                return Err(Error::SingularMatrix {
                    pivot: piv,
                    threshold,
                });
            }
            a.swap_rows(col, piv_row);
            inv.swap_rows(col, piv_row);
            let d = a[(col, col)];
            for j in 0..n {
                a[(col, j)] /= d;
                inv[(col, j)] /= d;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[(r, col)];
                if f == 0.0 {
                    continue;
                }
                for j in 0..n {
                    a[(r, j)] -= f * a[(col, j)];
                    inv[(r, j)] -= f * inv[(col, j)];
                }
            }
        }
        Ok(inv)
    }

    /// Determinant by partial-pivot elimination.
    pub fn determinant(&self) -> f64 {
        let n = self.n;
        let mut a = self.clone();
        let mut det = 1.0;
        for col in 0..n {
            let piv_row = (col..n)
                .max_by(|&x, &y| a[(x, col)].abs().total_cmp(&a[(y, col)].abs()))
                .unwrap_or(col);
            if a[(piv_row, col)] == 0.0 {
                return 0.0;
            }
            if piv_row != col {
                a.swap_rows(col, piv_row);
                det = -det;
            }
            let d = a[(col, col)];
            det *= d;
            for r in col + 1..n {
                let f = a[(r, col)] / d;
                for j in col..n {
                    a[(r, j)] -= f * a[(col, j)];
                }
            }
        }
        det
    }

    fn swap_rows(&mut self, r1: usize, r2: usize) {
        if r1 == r2 {
            return;
        }
        for j in 0..self.n {
            self.data.swap(r1 * self.n + j, r2 * self.n + j);
        }
    }

    /// Eigenvalues of the symmetric part, ascending, by cyclic Jacobi rotations.
    pub fn sym_eigenvalues(&self) -> Result<Vec<f64>> {
        let n = self.n;
        let mut a = self.symmetric_part();
        let tol = JACOBI_TOL * a.norm_fro();
        let off = |a: &DenseMatrix| {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        s += a[(i, j)] * a[(i, j)];
                    }
                }
            }
            s.sqrt()
        };
        let mut converged = off(&a) <= tol;
        let mut sweeps = 0;
        while !converged {
            if sweeps == JACOBI_MAX_SWEEPS {
                return Err(Error::NoConvergence {
                    routine: "jacobi",
                    iterations: sweeps,
                });
            }
            for p in 0..n {
                for q in p + 1..n {
                    rotate(&mut a, p, q);
                }
            }
            sweeps += 1;
            converged = off(&a) <= tol;
        }
        let mut ev: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
        ev.sort_by(f64::total_cmp);
        Ok(ev)
    }

    /// Cholesky test on the symmetric part; every pivot must exceed
    /// `1e-12 * (1 + max diagonal)`.
    pub fn is_positive_definite(&self) -> bool {
        let n = self.n;
        let a = self.symmetric_part();
        let max_diag = (0..n).map(|i| a[(i, i)]).fold(f64::NEG_INFINITY, f64::max);
        let floor = 1e-12 * (1.0 + max_diag.max(0.0));
        let mut l = DenseMatrix::zeros(n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > floor) {
                return false;
            }
            let d = d.sqrt();
            l[(j, j)] = d;
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / d;
            }
        }
        true
    }

    /// Perron root of an entrywise non-negative matrix.
    ///
    /// Power iteration on `A + cI` with `c = ||A||_inf / 2`: the shift keeps the
    /// Perron root strictly dominant for periodic matrices and scales with `A`.
    /// The iterate is kept non-negative with unit 1-norm, so `sum(A x)` is the
    /// eigenvalue estimate. Converged when two successive estimate changes are
    /// both below `1e-12` relative.
    pub fn spectral_radius_nonneg(&self) -> Result<f64> {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                let v = self[(i, j)];
                if v < 0.0 {
                    return Err(Error::NotNonnegative {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
            }
        }
        let scale = self.norm_inf();
        if n == 0 || scale == 0.0 {
            return Ok(0.0);
        }
        let shift = 0.5 * scale;
        let mut x = vec![1.0 / n as f64; n];
        let mut y = vec![0.0; n];
        let mut prev = f64::NAN;
        let mut settled = 0;
        for _ in 0..POWER_MAX_ITERS {
            for (i, yi) in y.iter_mut().enumerate() {
                *yi = (0..n).map(|j| self[(i, j)] * x[j]).sum::<f64>() + shift * x[i];
            }
            let total: f64 = y.iter().sum();
            let est = total - shift;
            for (xi, yi) in x.iter_mut().zip(&y) {
                *xi = yi / total;
            }
            if (est - prev).abs() <= POWER_TOL * est.abs().max(POWER_TOL * scale) {
                settled += 1;
                if settled == 2 {
                    return Ok(est.max(0.0));
                }
            } else {
                settled = 0;
            }
            prev = est;
        }
        Err(Error::NoConvergence {
            routine: "power iteration",
            iterations: POWER_MAX_ITERS,
        })
    }
}

/// One Jacobi rotation annihilating `a[p][q]`.
fn rotate(a: &mut DenseMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == 0.0 {
        return;
    }
    let n = a.dim();
    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}
