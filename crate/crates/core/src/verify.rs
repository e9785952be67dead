//! Decision procedures for parametric interval matrices.
//!
//! Every check returns a three-valued [`Verdict`]. Checks built on the
//! spectral-radius regularity condition are sufficient only, so a failed
//! condition yields [`Status::Inconclusive`] and never `Disproven`. Vertex
//! checks are exact for symmetric families and may disprove.
//!
//! Strict inequalities are tested with an absolute safety margin `delta`:
//! values within `delta` of a threshold are reported as inconclusive.

use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::pmatrix::{ParametricMatrix, VertexAssignment, DEFAULT_VERTEX_CAP};

pub const DEFAULT_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOptions {
    /// Safety margin around strict thresholds.
    pub margin: f64,
    /// Maximum number of symbols for vertex enumeration.
    pub max_vertices: usize,
    /// Symmetry tolerance; `None` uses the family's default.
    pub symmetry_tol: Option<f64>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            margin: DEFAULT_MARGIN,
            max_vertices: DEFAULT_VERTEX_CAP,
            symmetry_tol: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Proven,
    Inconclusive,
    Disproven,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessKind {
    Singular,
    NotPositiveDefinite,
    Unstable,
    NotSchurStable,
}

/// A concrete family member violating the property.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub kind: WitnessKind,
    pub eps: Vec<f64>,
    pub eigenvalue: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Certificate {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub midpoint_eigenvalues: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_slack: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vertices_checked: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub status: Status,
    pub certificate: Certificate,
}

impl Verdict {
    fn new(status: Status, certificate: Certificate) -> Self {
        Self {
            status,
            certificate,
        }
    }

    pub fn is_proven(&self) -> bool {
        self.status == Status::Proven
    }

    pub fn witness(&self) -> Option<&Witness> {
        self.certificate.witness.as_ref()
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.certificate.note = Some(note.into());
        self
    }
}

fn midpoint_witness(m: &ParametricMatrix, kind: WitnessKind, eigenvalue: Option<f64>) -> Witness {
    Witness {
        kind,
        eps: vec![0.0; m.num_symbols()],
        eigenvalue,
    }
}

/// Spectral-radius condition `rho(|A0^-1| B) < 1`, sufficient for regularity.
pub fn check_regularity_sufficient(m: &ParametricMatrix, opts: &CheckOptions) -> Result<Verdict> {
    let inv = match m.center().invert() {
        Ok(inv) => inv,
        Err(Error::SingularMatrix { .. }) => {
            return Ok(Verdict::new(
                Status::Disproven,
                Certificate {
                    witness: Some(midpoint_witness(m, WitnessKind::Singular, None)),
                    ..Default::default()
                },
            )
            .with_note("midpoint matrix is singular"));
        }
        Err(e) => return Err(e),
    };
    let rho = inv.abs().matmul(&m.envelope()).spectral_radius_nonneg()?;
    let status = if rho < 1.0 - opts.margin {
        Status::Proven
    } else {
        Status::Inconclusive
    };
    Ok(Verdict::new(
        status,
        Certificate {
            condition: Some(rho),
            margin: Some(1.0 - rho),
            ..Default::default()
        },
    ))
}

/// Positive-definite midpoint plus the regularity condition. Symmetry is not
/// required; definiteness refers to the quadratic form.
pub fn check_pd_sufficient(m: &ParametricMatrix, opts: &CheckOptions) -> Result<Verdict> {
    let ev = m.center().sym_eigenvalues()?;
    let lmin = ev.first().copied().unwrap_or(f64::INFINITY);
    let cert = Certificate {
        midpoint_eigenvalues: Some(ev),
        ..Default::default()
    };
    if lmin < -opts.margin {
        return Ok(Verdict::new(
            Status::Disproven,
            Certificate {
                witness: Some(midpoint_witness(
                    m,
                    WitnessKind::NotPositiveDefinite,
                    Some(lmin),
                )),
                ..cert
            },
        ));
    }
    if !(lmin > opts.margin && m.center().is_positive_definite()) {
        return Ok(Verdict::new(Status::Inconclusive, cert)
            .with_note("midpoint matrix is within the margin of semidefinite"));
    }
    let reg = check_regularity_sufficient(m, opts)?;
    let status = match reg.status {
        Status::Proven => Status::Proven,
        _ => Status::Inconclusive,
    };
    Ok(Verdict::new(
        status,
        Certificate {
            condition: reg.certificate.condition,
            margin: reg.certificate.margin,
            ..cert
        },
    ))
}

/// Verdict for one vertex: `slack > delta` holds, `|slack| <= delta` marginal,
/// `slack < -delta` violated. `eigenvalue` is reported in witnesses.
#[derive(Debug, Clone, Copy)]
struct Probe {
    slack: f64,
    eigenvalue: f64,
}

/// Order-preserving map from f64 to u64 for atomic minimum tracking.
fn ordered_bits(x: f64) -> u64 {
    let b = x.to_bits();
    if b >> 63 == 1 {
        !b
    } else {
        b | (1 << 63)
    }
}

fn from_ordered_bits(u: u64) -> f64 {
    if u >> 63 == 1 {
        f64::from_bits(u & !(1 << 63))
    } else {
        f64::from_bits(!u)
    }
}

fn vertex_sweep(
    m: &ParametricMatrix,
    opts: &CheckOptions,
    kind: WitnessKind,
    probe: impl Fn(&[f64]) -> Probe + Sync,
) -> Result<Verdict> {
    m.ensure_symmetric(opts.symmetry_tol)?;
    let count = m.vertex_count(opts.max_vertices)?;
    let k = m.num_symbols();
    let delta = opts.margin;
    let first_marginal = AtomicU64::new(u64::MAX);
    let worst = AtomicU64::new(ordered_bits(f64::INFINITY));

    let evaluate = |i: u64| -> Result<(VertexAssignment, Probe)> {
        let v = VertexAssignment::from_index(i, k);
        let ev = m.vertex_matrix(&v).sym_eigenvalues()?;
        Ok((v, probe(&ev)))
    };

    let violation = (0..count)
        .into_par_iter()
        .find_map_first(|i| match evaluate(i) {
            Err(e) => Some(Err(e)),
            Ok((v, p)) => {
                worst.fetch_min(ordered_bits(p.slack), Ordering::Relaxed);
                if p.slack < -delta {
                    Some(Ok((v, p)))
                } else {
                    if p.slack <= delta {
                        first_marginal.fetch_min(i, Ordering::Relaxed);
                    }
                    None
                }
            }
        });

    let mut cert = Certificate {
        vertices_checked: Some(count),
        ..Default::default()
    };
    if let Some(found) = violation {
        let (v, p) = found?;
        cert.witness = Some(Witness {
            kind,
            eps: v.to_eps(),
            eigenvalue: Some(p.eigenvalue),
        });
        cert.worst_slack = Some(p.slack);
        return Ok(Verdict::new(Status::Disproven, cert));
    }
    cert.worst_slack = Some(from_ordered_bits(worst.load(Ordering::Relaxed)));
    let marginal = first_marginal.load(Ordering::Relaxed);
    if marginal != u64::MAX {
        let (v, p) = evaluate(marginal)?;
        cert.witness = Some(Witness {
            kind,
            eps: v.to_eps(),
            eigenvalue: Some(p.eigenvalue),
        });
        return Ok(Verdict::new(Status::Inconclusive, cert)
            .with_note("a vertex lies within the safety margin of the boundary"));
    }
    Ok(Verdict::new(Status::Proven, cert))
}

fn lambda_min(ev: &[f64]) -> f64 {
    ev.first().copied().unwrap_or(f64::INFINITY)
}

fn lambda_max(ev: &[f64]) -> f64 {
    ev.last().copied().unwrap_or(f64::NEG_INFINITY)
}

/// Strong positive definiteness of a symmetric family by vertex enumeration.
pub fn check_pd_vertex(m: &ParametricMatrix, opts: &CheckOptions) -> Result<Verdict> {
    vertex_sweep(m, opts, WitnessKind::NotPositiveDefinite, |ev| {
        let l = lambda_min(ev);
        Probe {
            slack: l,
            eigenvalue: l,
        }
    })
}

/// Stable midpoint plus the regularity condition; symmetric families only.
pub fn check_hurwitz_sufficient(m: &ParametricMatrix, opts: &CheckOptions) -> Result<Verdict> {
    m.ensure_symmetric(opts.symmetry_tol)?;
    let mut v = check_pd_sufficient(&m.negated(), opts)?;
    let cert = &mut v.certificate;
    if let Some(ev) = cert.midpoint_eigenvalues.as_mut() {
        ev.iter_mut().for_each(|l| *l = -*l);
        ev.reverse();
    }
    if let Some(w) = cert.witness.as_mut() {
        w.kind = WitnessKind::Unstable;
        w.eigenvalue = w.eigenvalue.map(|l| -l);
    }
    Ok(v)
}

/// Hurwitz stability of a symmetric family by vertex enumeration (exact).
pub fn check_hurwitz_vertex(m: &ParametricMatrix, opts: &CheckOptions) -> Result<Verdict> {
    vertex_sweep(m, opts, WitnessKind::Unstable, |ev| {
        let l = lambda_max(ev);
        Probe {
            slack: -l,
            eigenvalue: l,
        }
    })
}

/// One stable member plus regularity of the family implies stability.
pub fn check_hurwitz_via_regularity(
    m: &ParametricMatrix,
    sample: &[f64],
    opts: &CheckOptions,
) -> Result<Verdict> {
    m.ensure_symmetric(opts.symmetry_tol)?;
    let ev = m.instantiate(sample)?.sym_eigenvalues()?;
    let lmax = lambda_max(&ev);
    if lmax > opts.margin {
        return Ok(Verdict::new(
            Status::Disproven,
            Certificate {
                witness: Some(Witness {
                    kind: WitnessKind::Unstable,
                    eps: sample.to_vec(),
                    eigenvalue: Some(lmax),
                }),
                ..Default::default()
            },
        ));
    }
    if lmax >= -opts.margin {
        return Ok(Verdict::new(Status::Inconclusive, Certificate::default())
            .with_note("sample matrix is within the margin of the stability boundary"));
    }
    let reg = check_regularity_sufficient(m, opts)?;
    let status = match reg.status {
        // A singular member has a zero eigenvalue and is not stable.
        Status::Disproven => {
            let mut v = reg;
            if let Some(w) = v.certificate.witness.as_mut() {
                w.eigenvalue = Some(0.0);
            }
            return Ok(v);
        }
        s => s,
    };
    Ok(Verdict::new(status, reg.certificate))
}

/// Schur stability of a symmetric family by vertex enumeration (exact).
pub fn check_schur_vertex(m: &ParametricMatrix, opts: &CheckOptions) -> Result<Verdict> {
    vertex_sweep(m, opts, WitnessKind::NotSchurStable, |ev| {
        let (lo, hi) = (lambda_min(ev), lambda_max(ev));
        let upper = 1.0 - hi;
        let lower = 1.0 + lo;
        if upper <= lower {
            Probe {
                slack: upper,
                eigenvalue: hi,
            }
        } else {
            Probe {
                slack: lower,
                eigenvalue: lo,
            }
        }
    })
}

/// Schur stability through Hurwitz stability of `A - I` and `-A - I`.
pub fn check_schur_via_hurwitz(m: &ParametricMatrix, opts: &CheckOptions) -> Result<Verdict> {
    m.ensure_symmetric(opts.symmetry_tol)?;
    let upper = check_hurwitz_vertex(&m.shifted(-1.0), opts)?;
    let lower = check_hurwitz_vertex(&m.negated().shifted(-1.0), opts)?;
    let remap = |v: Verdict, back: fn(f64) -> f64| {
        let mut cert = v.certificate;
        if let Some(w) = cert.witness.as_mut() {
            w.kind = WitnessKind::NotSchurStable;
            w.eigenvalue = w.eigenvalue.map(back);
        }
        Verdict::new(v.status, cert)
    };
    let checked = upper.certificate.vertices_checked;
    let combined = match (upper.status, lower.status) {
        (Status::Disproven, _) => remap(upper, |mu| mu + 1.0),
        (_, Status::Disproven) => remap(lower, |mu| -mu - 1.0),
        (Status::Proven, Status::Proven) => {
            let slack = match (upper.certificate.worst_slack, lower.certificate.worst_slack) {
                (Some(a), Some(b)) => Some(a.min(b)),
                _ => None,
            };
            Verdict::new(
                Status::Proven,
                Certificate {
                    worst_slack: slack,
                    ..Default::default()
                },
            )
        }
        (Status::Inconclusive, _) => remap(upper, |mu| mu + 1.0),
        (_, Status::Inconclusive) => remap(lower, |mu| -mu - 1.0),
    };
    let mut combined = combined;
    combined.certificate.vertices_checked = checked.map(|c| 2 * c);
    Ok(combined)
}

/// Schur-stable midpoint plus the regularity condition for both `A - I`
/// and `-A - I`.
pub fn check_schur_sufficient(m: &ParametricMatrix, opts: &CheckOptions) -> Result<Verdict> {
    m.ensure_symmetric(opts.symmetry_tol)?;
    let ev = m.center().sym_eigenvalues()?;
    let (lo, hi) = (lambda_min(&ev), lambda_max(&ev));
    let offending = if hi.abs() >= lo.abs() { hi } else { lo };
    let cert = Certificate {
        midpoint_eigenvalues: Some(ev),
        ..Default::default()
    };
    if offending.abs() > 1.0 + opts.margin {
        return Ok(Verdict::new(
            Status::Disproven,
            Certificate {
                witness: Some(midpoint_witness(
                    m,
                    WitnessKind::NotSchurStable,
                    Some(offending),
                )),
                ..cert
            },
        ));
    }
    if offending.abs() >= 1.0 - opts.margin {
        return Ok(Verdict::new(Status::Inconclusive, cert)
            .with_note("midpoint matrix is within the margin of the unit circle"));
    }
    let upper = check_regularity_sufficient(&m.shifted(-1.0), opts)?;
    let lower = check_regularity_sufficient(&m.negated().shifted(-1.0), opts)?;
    let rho = match (upper.certificate.condition, lower.certificate.condition) {
        (Some(a), Some(b)) => Some(a.max(b)),
        _ => None,
    };
    let status = if upper.is_proven() && lower.is_proven() {
        Status::Proven
    } else {
        Status::Inconclusive
    };
    Ok(Verdict::new(
        status,
        Certificate {
            condition: rho,
            margin: rho.map(|r| 1.0 - r),
            ..cert
        },
    ))
}

/// Recomputes the eigenvalues at a witness and reports whether the violation
/// reproduces (for the kinds that carry an eigenvalue).
pub fn witness_reproduces(m: &ParametricMatrix, w: &Witness, opts: &CheckOptions) -> Result<bool> {
    let a: DenseMatrix = m.instantiate(&w.eps)?;
    let d = opts.margin;
    Ok(match w.kind {
        WitnessKind::Singular => a.invert().is_err(),
        WitnessKind::NotPositiveDefinite => lambda_min(&a.sym_eigenvalues()?) < -d,
        WitnessKind::Unstable => lambda_max(&a.sym_eigenvalues()?) > d,
        WitnessKind::NotSchurStable => {
            let ev = a.sym_eigenvalues()?;
            lambda_max(&ev) > 1.0 + d || lambda_min(&ev) < -1.0 - d
        }
    })
}
