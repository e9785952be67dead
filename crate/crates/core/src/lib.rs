//! Regularity, strong positive definiteness, Hurwitz and Schur stability of
//! parametric interval matrices.
//!
//! Matrix entries are closed-form expressions of interval parameters. They
//! are reduced by affine arithmetic to a normalized affine-linear family
//! `A0 + sum_k Ak * eps_k` with `eps in [-1, 1]^K` ([`pmatrix::ParametricMatrix`]),
//! on which the checks in [`verify`] and the radius search in [`radius`] run.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod affine;
pub mod cli;
pub mod error;
pub mod expr;
pub mod interval;
pub mod linalg;
pub mod pmatrix;
pub mod radius;
pub mod verify;

pub use affine::{AffineForm, SymbolAllocator};
pub use error::{Error, Result};
pub use expr::Expr;
pub use interval::Interval;
pub use linalg::DenseMatrix;
pub use pmatrix::{ParametricMatrix, VertexAssignment};
pub use radius::{stability_radius, RadiusOptions, RadiusResult, RadiusStatus};
pub use verify::{CheckOptions, Status, Verdict, Witness, WitnessKind};
