//! Radius of stability of a symmetric family: the smallest uniform inflation
//! `r` of all symbol radii at which the family gains an unstable member.
//!
//! For symmetric families the largest eigenvalue over the scaled box is
//! attained at a vertex, so `g(r) = max_v lambda_max(A0 + r * sum_k v_k Ak)`
//! is computed by enumeration. `g` is non-decreasing in `r` and the radius is
//! located by bisection on `g(r) < 0`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::pmatrix::{ParametricMatrix, VertexAssignment, DEFAULT_VERTEX_CAP};
use crate::verify::DEFAULT_MARGIN;

pub const DEFAULT_R_MAX: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusOptions {
    /// Absolute bracket width; `None` uses `1e-6 * max(1, initial bracket width)`.
    pub bisect_tol: Option<f64>,
    pub r_max: f64,
    pub margin: f64,
    pub max_vertices: usize,
    pub symmetry_tol: Option<f64>,
}

impl Default for RadiusOptions {
    fn default() -> Self {
        Self {
            bisect_tol: None,
            r_max: DEFAULT_R_MAX,
            margin: DEFAULT_MARGIN,
            max_vertices: DEFAULT_VERTEX_CAP,
            symmetry_tol: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadiusStatus {
    /// `s_lo < s < s_hi` within the bisection tolerance.
    Bracketed,
    /// No unstable member up to `r_max`.
    Capped,
    /// The midpoint matrix itself is not stable; the radius is 0.
    MidpointUnstable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadiusResult {
    pub status: RadiusStatus,
    /// Largest inflation proven stable.
    pub s_lo: f64,
    /// Smallest inflation with an unstable or marginal vertex; infinite when capped.
    pub s_hi: f64,
    /// Vertex attaining the largest eigenvalue at `s_hi`.
    pub witness: Option<VertexAssignment>,
    /// `g(s_hi)`.
    pub witness_eigenvalue: Option<f64>,
    pub capped: bool,
    pub evaluations: usize,
}

impl RadiusResult {
    pub fn estimate(&self) -> f64 {
        if self.capped {
            self.s_lo
        } else {
            0.5 * (self.s_lo + self.s_hi)
        }
    }
}

/// Largest eigenvalue over all vertices of the family inflated by `r`, with
/// the first (lexicographic) vertex attaining it.
pub fn lambda_max_envelope(
    m: &ParametricMatrix,
    r: f64,
    max_vertices: usize,
    symmetry_tol: Option<f64>,
) -> Result<(f64, VertexAssignment)> {
    m.ensure_symmetric(symmetry_tol)?;
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::NegativeRadius(r));
    }
    let count = m.vertex_count(max_vertices)?;
    let k = m.num_symbols();
    let scaled = m.scale(r)?;
    let best = (0..count)
        .into_par_iter()
        .map(|i| -> Result<(f64, u64)> {
            let v = VertexAssignment::from_index(i, k);
            let ev = scaled.vertex_matrix(&v).sym_eigenvalues()?;
            Ok((ev.last().copied().unwrap_or(f64::NEG_INFINITY), i))
        })
        .try_reduce(
            || (f64::NEG_INFINITY, u64::MAX),
            |a, b| {
                Ok(match a.0.total_cmp(&b.0) {
                    std::cmp::Ordering::Greater => a,
                    std::cmp::Ordering::Less => b,
                    std::cmp::Ordering::Equal => (a.0, a.1.min(b.1)),
                })
            },
        )?;
    Ok((
        best.0,
        VertexAssignment::from_index(best.1.min(count - 1), k),
    ))
}

/// Brackets the radius of stability by doubling from `r = 1` and bisecting.
///
/// A step counts as stable only when `g(r) < -margin`; marginal values are
/// treated as unstable, so `s_lo` is always vertex-provably stable.
pub fn stability_radius(m: &ParametricMatrix, opts: &RadiusOptions) -> Result<RadiusResult> {
    if let Some(t) = opts.bisect_tol {
        if !(t > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "bisection tolerance {t} must be positive"
            )));
        }
    }
    if !(opts.r_max > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "r_max {} must be positive",
            opts.r_max
        )));
    }
    let mut evaluations = 0;
    let mut g = |r: f64| {
        evaluations += 1;
        lambda_max_envelope(m, r, opts.max_vertices, opts.symmetry_tol)
    };
    let stable = |value: f64| value < -opts.margin;

    let (g0, v0) = g(0.0)?;
    if !stable(g0) {
        return Ok(RadiusResult {
            status: RadiusStatus::MidpointUnstable,
            s_lo: 0.0,
            s_hi: 0.0,
            witness: Some(v0),
            witness_eigenvalue: Some(g0),
            capped: false,
            evaluations: 1,
        });
    }

    let mut lo = 0.0;
    let mut r = 1.0f64.min(opts.r_max);
    let (mut hi, mut witness) = loop {
        let (gr, v) = g(r)?;
        if !stable(gr) {
            break (r, (v, gr));
        }
        lo = r;
        if r >= opts.r_max {
            return Ok(RadiusResult {
                status: RadiusStatus::Capped,
                s_lo: lo,
                s_hi: f64::INFINITY,
                witness: None,
                witness_eigenvalue: None,
                capped: true,
                evaluations,
            });
        }
        r = (2.0 * r).min(opts.r_max);
    };

    let tol = opts.bisect_tol.unwrap_or_else(|| 1e-6 * (hi - lo).max(1.0));
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (gm, v) = g(mid)?;
        if stable(gm) {
            lo = mid;
        } else {
            hi = mid;
            witness = (v, gm);
        }
    }
    Ok(RadiusResult {
        status: RadiusStatus::Bracketed,
        s_lo: lo,
        s_hi: hi,
        witness: Some(witness.0),
        witness_eigenvalue: Some(witness.1),
        capped: false,
        evaluations,
    })
}
