//! C ABI for `pimstab`.
//!
//! Families are opaque `PimFamily` handles. Every fallible function returns a
//! `PimError` code; on failure a message is kept per thread and can be read
//! with `pim_last_error_message`. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pimstab::cli::{self, Overrides};
use pimstab::radius::RadiusStatus;
use pimstab::verify::{self, DEFAULT_MARGIN};
use pimstab::{CheckOptions, DenseMatrix, Error, ParametricMatrix, RadiusOptions, Status, Verdict};

/// Opaque handle to a normalized family `A0 + sum_k Ak * eps_k`.
pub struct PimFamily {
    inner: ParametricMatrix,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PimError {
    Ok = 0,
    NullPointer,
    InvalidUtf8,
    /// Malformed document, expression or interval.
    Parse,
    InvalidArgument,
    Dimension,
    NotSymmetric,
    VertexBudgetExceeded,
    /// Singular pivot, non-convergence or another numerical failure.
    Numerical,
    BufferTooSmall,
    Panic,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PimCheck {
    Regularity = 0,
    PositiveDefinite,
    Hurwitz,
    Schur,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PimMethod {
    Sufficient = 0,
    Vertex,
    /// Sufficient condition first, vertex enumeration when inconclusive.
    Auto,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PimStatus {
    Proven = 0,
    Inconclusive,
    Disproven,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PimRadiusStatus {
    Bracketed = 0,
    Capped,
    MidpointUnstable,
}

/// Tuning knobs. Start from `pim_options_default()`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PimOptions {
    pub margin: f64,
    pub max_vertices: usize,
    /// Radius bisection width; `<= 0` selects the default.
    pub bisect_tol: f64,
    pub r_max: f64,
}

/// Verdict of a single check. Absent values are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PimVerdict {
    pub status: PimStatus,
    /// Spectral-radius condition value of sufficient checks.
    pub condition: f64,
    /// Smallest slack over all vertices of vertex checks.
    pub worst_slack: f64,
    pub vertices_checked: u64,
    /// 1 when a witness was found; its symbol values go to the caller's buffer.
    pub has_witness: c_int,
    pub witness_eigenvalue: f64,
    /// Number of symbol values in the witness.
    pub witness_len: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PimRadius {
    pub status: PimRadiusStatus,
    pub s_lo: f64,
    /// Infinite when capped.
    pub s_hi: f64,
    pub estimate: f64,
    pub witness_eigenvalue: f64,
    pub evaluations: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn code_of(e: &Error) -> PimError {
    match e {
        Error::MalformedInterval { .. }
        | Error::Parse { .. }
        | Error::UnboundParameter(_)
        | Error::DuplicateParameter(_) => PimError::Parse,
        Error::Dimension(_) | Error::NonFinite { .. } => PimError::Dimension,
        Error::NotSymmetric { .. } => PimError::NotSymmetric,
        Error::VertexBudgetExceeded { .. } => PimError::VertexBudgetExceeded,
        Error::OutOfBox { .. } | Error::NegativeRadius(_) | Error::InvalidArgument(_) => {
            PimError::InvalidArgument
        }
        _ => PimError::Numerical,
    }
}

fn fail(e: Error) -> PimError {
    set_error(e.to_string());
    code_of(&e)
}

/// Runs `f`, clearing the last error first and converting panics.
fn guard(f: impl FnOnce() -> PimError) -> PimError {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(code) => code,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            PimError::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, PimError> {
    if p.is_null() {
        set_error("null string argument");
        return Err(PimError::NullPointer);
    }
    CStr::from_ptr(p).to_str().map_err(|e| {
        set_error(e.to_string());
        PimError::InvalidUtf8
    })
}

unsafe fn handle<'a>(f: *const PimFamily) -> Result<&'a ParametricMatrix, PimError> {
    f.as_ref().map(|f| &f.inner).ok_or_else(|| {
        set_error("null family handle");
        PimError::NullPointer
    })
}

fn check_options(o: &PimOptions) -> CheckOptions {
    CheckOptions {
        margin: o.margin,
        max_vertices: o.max_vertices,
        symmetry_tol: None,
    }
}

fn handoff(out: *mut *mut PimFamily, m: ParametricMatrix) -> PimError {
    unsafe { *out = Box::into_raw(Box::new(PimFamily { inner: m })) };
    PimError::Ok
}

macro_rules! tri {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(code) => return code,
        }
    };
}

#[no_mangle]
pub extern "C" fn pim_options_default() -> PimOptions {
    PimOptions {
        margin: DEFAULT_MARGIN,
        max_vertices: pimstab::pmatrix::DEFAULT_VERTEX_CAP,
        bisect_tol: 0.0,
        r_max: pimstab::radius::DEFAULT_R_MAX,
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn pim_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Builds a family from a JSON problem document (its `checks` and `options`
/// are ignored).
///
/// # Safety
/// `document` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pim_family_from_json(
    document: *const c_char,
    out: *mut *mut PimFamily,
) -> PimError {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer");
            return PimError::NullPointer;
        }
        let text = tri!(str_arg(document));
        let built = cli::parse_document(text).and_then(|d| cli::build_family(&d));
        match built {
            Ok(m) => handoff(out, m),
            Err(d) => {
                set_error(d.to_string());
                PimError::Parse
            }
        }
    })
}

/// Builds `A0 + sum_k Ak * eps_k` from row-major `n x n` matrices:
/// `center` holds `n*n` values and `coeffs` holds `k*n*n` (may be NULL when
/// `k == 0`).
///
/// # Safety
/// The arrays must hold the stated number of doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pim_family_from_coefficients(
    n: usize,
    k: usize,
    center: *const f64,
    coeffs: *const f64,
    out: *mut *mut PimFamily,
) -> PimError {
    guard(|| {
        if out.is_null() || center.is_null() || (k > 0 && coeffs.is_null()) {
            set_error("null pointer argument");
            return PimError::NullPointer;
        }
        let Some(nn) = n.checked_mul(n).filter(|_| n > 0) else {
            set_error(format!("invalid dimension {n}"));
            return PimError::Dimension;
        };
        let matrix = |data: &[f64]| {
            DenseMatrix::from_rows(&data.chunks(n).map(<[f64]>::to_vec).collect::<Vec<_>>())
        };
        let a0 = tri!(matrix(std::slice::from_raw_parts(center, nn)).map_err(fail));
        let mut ak = Vec::with_capacity(k);
        for i in 0..k {
            let block = std::slice::from_raw_parts(coeffs.add(i * nn), nn);
            ak.push(tri!(matrix(block).map_err(fail)));
        }
        match ParametricMatrix::from_parts(a0, ak) {
            Ok(m) => handoff(out, m),
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `family` must come from a constructor of this library (or be NULL) and
/// must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pim_family_free(family: *mut PimFamily) {
    if !family.is_null() {
        drop(Box::from_raw(family));
    }
}

/// Matrix dimension `n`, or 0 for a NULL handle.
///
/// # Safety
/// `family` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn pim_family_dim(family: *const PimFamily) -> usize {
    family.as_ref().map_or(0, |f| f.inner.dim())
}

/// Number of noise symbols `K`, or 0 for a NULL handle.
///
/// # Safety
/// `family` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn pim_family_num_symbols(family: *const PimFamily) -> usize {
    family.as_ref().map_or(0, |f| f.inner.num_symbols())
}

/// Copies matrix `index` (0 for `A0`, `k` for `Ak`) row-major into `out`.
///
/// # Safety
/// `family` must be live and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn pim_family_matrix(
    family: *const PimFamily,
    index: usize,
    out: *mut f64,
    len: usize,
) -> PimError {
    guard(|| {
        let m = tri!(handle(family));
        let a = match index {
            0 => m.center(),
            k => match m.coeffs().get(k - 1) {
                Some(a) => a,
                None => {
                    set_error(format!(
                        "matrix index {index} out of range 0..={}",
                        m.num_symbols()
                    ));
                    return PimError::InvalidArgument;
                }
            },
        };
        let data = a.as_slice();
        if out.is_null() {
            set_error("null output buffer");
            return PimError::NullPointer;
        }
        if len < data.len() {
            set_error(format!("buffer holds {len} values, {} needed", data.len()));
            return PimError::BufferTooSmall;
        }
        ptr::copy_nonoverlapping(data.as_ptr(), out, data.len());
        PimError::Ok
    })
}

fn decide(
    m: &ParametricMatrix,
    check: PimCheck,
    method: PimMethod,
    o: &CheckOptions,
) -> Result<Verdict, Error> {
    type F = fn(&ParametricMatrix, &CheckOptions) -> Result<Verdict, Error>;
    let (sufficient, vertex): (F, Option<F>) = match check {
        PimCheck::Regularity => (verify::check_regularity_sufficient, None),
        PimCheck::PositiveDefinite => (verify::check_pd_sufficient, Some(verify::check_pd_vertex)),
        PimCheck::Hurwitz => (
            verify::check_hurwitz_sufficient,
            Some(verify::check_hurwitz_vertex),
        ),
        PimCheck::Schur => (
            verify::check_schur_sufficient,
            Some(verify::check_schur_vertex),
        ),
    };
    match (method, vertex) {
        (PimMethod::Sufficient, _) => sufficient(m, o),
        (PimMethod::Vertex, Some(v)) => v(m, o),
        (PimMethod::Vertex, None) => Err(Error::InvalidArgument(
            "regularity has no vertex check".into(),
        )),
        (PimMethod::Auto, v) => {
            let first = sufficient(m, o)?;
            match v {
                Some(v) if first.status == Status::Inconclusive => v(m, o),
                _ => Ok(first),
            }
        }
    }
}

/// Runs one check. When a witness exists and `witness` is non-NULL, its
/// symbol values are copied there (`witness_cap` doubles available).
///
/// # Safety
/// `family` must be live, `options` NULL or valid, `out` valid, and
/// `witness` NULL or holding `witness_cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn pim_check(
    family: *const PimFamily,
    check: PimCheck,
    method: PimMethod,
    options: *const PimOptions,
    out: *mut PimVerdict,
    witness: *mut f64,
    witness_cap: usize,
) -> PimError {
    guard(|| {
        let m = tri!(handle(family));
        if out.is_null() {
            set_error("null verdict pointer");
            return PimError::NullPointer;
        }
        let o = options
            .as_ref()
            .copied()
            .unwrap_or_else(|| pim_options_default());
        let v = tri!(decide(m, check, method, &check_options(&o)).map_err(fail));
        let c = &v.certificate;
        let w = c.witness.as_ref();
        let res = PimVerdict {
            status: match v.status {
                Status::Proven => PimStatus::Proven,
                Status::Inconclusive => PimStatus::Inconclusive,
                Status::Disproven => PimStatus::Disproven,
            },
            condition: c.condition.unwrap_or(f64::NAN),
            worst_slack: c.worst_slack.unwrap_or(f64::NAN),
            vertices_checked: c.vertices_checked.unwrap_or(0),
            has_witness: c_int::from(w.is_some()),
            witness_eigenvalue: w.and_then(|w| w.eigenvalue).unwrap_or(f64::NAN),
            witness_len: w.map_or(0, |w| w.eps.len()),
        };
        *out = res;
        if let (Some(w), false) = (w, witness.is_null()) {
            if witness_cap < w.eps.len() {
                set_error(format!(
                    "witness buffer holds {witness_cap} values, {} needed",
                    w.eps.len()
                ));
                return PimError::BufferTooSmall;
            }
            ptr::copy_nonoverlapping(w.eps.as_ptr(), witness, w.eps.len());
        }
        PimError::Ok
    })
}

/// Radius of stability of a symmetric family.
///
/// # Safety
/// `family` must be live, `options` NULL or valid, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn pim_stability_radius(
    family: *const PimFamily,
    options: *const PimOptions,
    out: *mut PimRadius,
) -> PimError {
    guard(|| {
        let m = tri!(handle(family));
        if out.is_null() {
            set_error("null radius pointer");
            return PimError::NullPointer;
        }
        let o = options
            .as_ref()
            .copied()
            .unwrap_or_else(|| pim_options_default());
        let ro = RadiusOptions {
            bisect_tol: (o.bisect_tol > 0.0).then_some(o.bisect_tol),
            r_max: o.r_max,
            margin: o.margin,
            max_vertices: o.max_vertices,
            symmetry_tol: None,
        };
        let r = tri!(pimstab::stability_radius(m, &ro).map_err(fail));
        *out = PimRadius {
            status: match r.status {
                RadiusStatus::Bracketed => PimRadiusStatus::Bracketed,
                RadiusStatus::Capped => PimRadiusStatus::Capped,
                RadiusStatus::MidpointUnstable => PimRadiusStatus::MidpointUnstable,
            },
            s_lo: r.s_lo,
            s_hi: r.s_hi,
            estimate: r.estimate(),
            witness_eigenvalue: r.witness_eigenvalue.unwrap_or(f64::NAN),
            evaluations: r.evaluations,
        };
        PimError::Ok
    })
}

/// Runs a whole problem document as the command-line tool would. On success
/// `*report` receives the JSON report (free it with `pim_string_free`) and
/// `*exit_code` the tool's exit code (0 proven, 1 disproven, 2 inconclusive,
/// 3 error).
///
/// # Safety
/// `document` must be NUL-terminated; `report` and `exit_code` valid.
#[no_mangle]
pub unsafe extern "C" fn pim_run_document(
    document: *const c_char,
    report: *mut *mut c_char,
    exit_code: *mut c_int,
) -> PimError {
    guard(|| {
        if report.is_null() || exit_code.is_null() {
            set_error("null output pointer");
            return PimError::NullPointer;
        }
        let text = tri!(str_arg(document));
        match cli::run_str(text, &Overrides::default()) {
            Ok(r) => {
                // JSON never contains a raw NUL.
                let s = CString::new(r.to_json()).unwrap_or_default();
                *report = s.into_raw();
                *exit_code = r.exit_code;
                PimError::Ok
            }
            Err(d) => {
                set_error(d.to_string());
                PimError::Parse
            }
        }
    })
}

/// # Safety
/// `s` must come from this library (or be NULL) and must not be reused.
#[no_mangle]
pub unsafe extern "C" fn pim_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
