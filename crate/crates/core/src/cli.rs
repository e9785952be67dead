//! Batch front end: problem document in, report out.
//!
//! A problem document is JSON:
//!
//! ```json
//! {
//!   "parameters": [{"name": "x1", "interval": [2, 3]}],
//!   "matrix": [["12*x1^2"]],
//!   "checks": ["regularity", "positive-definite", "hurwitz", "schur", "radius"],
//!   "options": {"method": "auto", "tolerance": 1e-9, "bisect_tol": 1e-6,
//!               "max_vertices": 20, "r_max": 1e6}
//! }
//! ```
//!
//! Every key of `options` is optional and may be overridden on the command
//! line. Exit codes: 0 all proven, 1 something disproven, 2 something
//! inconclusive, 3 input or runtime error.

use std::fmt::{self, Write as _};
use std::io;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::Error;
use crate::expr::Expr;
use crate::interval::Interval;
use crate::pmatrix::{ParametricMatrix, DEFAULT_VERTEX_CAP};
use crate::radius::{
    lambda_max_envelope, stability_radius, RadiusOptions, RadiusResult, RadiusStatus, DEFAULT_R_MAX,
};
use crate::verify::{
    self, Certificate, CheckOptions, Status, Verdict, Witness, WitnessKind, DEFAULT_MARGIN,
};

pub const EXIT_PROVEN: i32 = 0;
pub const EXIT_DISPROVEN: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_ERROR: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    Regularity,
    PositiveDefinite,
    Hurwitz,
    Schur,
    Radius,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Sufficient,
    Vertex,
    #[default]
    Auto,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterSpec {
    pub name: String,
    pub interval: Interval,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DocumentOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bisect_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_vertices: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDocument {
    #[serde(default)]
    pub parameters: Vec<ParameterSpec>,
    pub matrix: Vec<Vec<String>>,
    pub checks: Vec<CheckKind>,
    #[serde(default)]
    pub options: DocumentOptions,
}

/// A located input problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub location: String,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

impl std::error::Error for Diagnostic {}

fn diag(location: impl Into<String>, message: impl Into<String>) -> Diagnostic {
    Diagnostic {
        location: location.into(),
        message: message.into(),
    }
}

/// Command-line overrides; `None` defers to the document.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub method: Option<Method>,
    pub tolerance: Option<f64>,
    pub bisect_tol: Option<f64>,
    pub max_vertices: Option<usize>,
    pub r_max: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Settings {
    pub method: Method,
    pub tolerance: f64,
    pub bisect_tol: Option<f64>,
    pub max_vertices: usize,
    pub r_max: f64,
}

impl Settings {
    pub fn resolve(doc: &DocumentOptions, flags: &Overrides) -> Result<Self, Diagnostic> {
        let s = Self {
            method: flags.method.or(doc.method).unwrap_or_default(),
            tolerance: flags.tolerance.or(doc.tolerance).unwrap_or(DEFAULT_MARGIN),
            bisect_tol: flags.bisect_tol.or(doc.bisect_tol),
            max_vertices: flags
                .max_vertices
                .or(doc.max_vertices)
                .unwrap_or(DEFAULT_VERTEX_CAP),
            r_max: flags.r_max.or(doc.r_max).unwrap_or(DEFAULT_R_MAX),
        };
        if !(s.tolerance >= 0.0) || !s.tolerance.is_finite() {
            return Err(diag(
                "options.tolerance",
                "must be a finite non-negative number",
            ));
        }
        if let Some(t) = s.bisect_tol {
            if !(t > 0.0) || !t.is_finite() {
                return Err(diag(
                    "options.bisect_tol",
                    "must be a finite positive number",
                ));
            }
        }
        if !(s.r_max > 0.0) || !s.r_max.is_finite() {
            return Err(diag("options.r_max", "must be a finite positive number"));
        }
        if s.max_vertices > 62 {
            return Err(diag("options.max_vertices", "must be at most 62"));
        }
        Ok(s)
    }

    fn check_options(&self) -> CheckOptions {
        CheckOptions {
            margin: self.tolerance,
            max_vertices: self.max_vertices,
            symmetry_tol: None,
        }
    }

    fn radius_options(&self) -> RadiusOptions {
        RadiusOptions {
            bisect_tol: self.bisect_tol,
            r_max: self.r_max,
            margin: self.tolerance,
            max_vertices: self.max_vertices,
            symmetry_tol: None,
        }
    }
}

pub fn parse_document(text: &str) -> Result<ProblemDocument, Diagnostic> {
    serde_json::from_str(text).map_err(|e| {
        diag(
            format!("line {}, column {}", e.line(), e.column()),
            e.to_string(),
        )
    })
}

/// Parses every entry and runs the affine transformation.
pub fn build_family(doc: &ProblemDocument) -> Result<ParametricMatrix, Diagnostic> {
    let n = doc.matrix.len();
    if n == 0 {
        return Err(diag("matrix", "matrix must have at least one row"));
    }
    let mut grid = Vec::with_capacity(n);
    for (i, row) in doc.matrix.iter().enumerate() {
        if row.len() != n {
            return Err(diag(
                format!("matrix[{i}]"),
                format!(
                    "row has {} entries, expected {n} (matrix must be square)",
                    row.len()
                ),
            ));
        }
        let mut parsed = Vec::with_capacity(n);
        for (j, text) in row.iter().enumerate() {
            let e = Expr::parse(text).map_err(|e| match e {
                Error::Parse { position, message } => diag(
                    format!("matrix[{i}][{j}], offset {position}"),
                    format!("{message} in `{text}`"),
                ),
                other => diag(format!("matrix[{i}][{j}]"), other.to_string()),
            })?;
            if let Some(p) = e
                .params()
                .into_iter()
                .find(|p| !doc.parameters.iter().any(|s| s.name == *p))
            {
                return Err(diag(
                    format!("matrix[{i}][{j}]"),
                    format!("unknown parameter `{p}`"),
                ));
            }
            parsed.push(e);
        }
        grid.push(parsed);
    }
    for (k, p) in doc.parameters.iter().enumerate() {
        if !is_identifier(&p.name) {
            return Err(diag(
                format!("parameters[{k}].name"),
                format!("`{}` is not an identifier", p.name),
            ));
        }
    }
    let params: Vec<(String, Interval)> = doc
        .parameters
        .iter()
        .map(|p| (p.name.clone(), p.interval))
        .collect();
    ParametricMatrix::build(&grid, &params).map_err(|e| diag("matrix", e.to_string()))
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RecordStatus {
    Proven,
    Disproven,
    Inconclusive,
    Error,
}

impl fmt::Display for RecordStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RecordStatus::Proven => "PROVEN",
            RecordStatus::Disproven => "DISPROVEN",
            RecordStatus::Inconclusive => "INCONCLUSIVE",
            RecordStatus::Error => "ERROR",
        })
    }
}

impl From<Status> for RecordStatus {
    fn from(s: Status) -> Self {
        match s {
            Status::Proven => RecordStatus::Proven,
            Status::Disproven => RecordStatus::Disproven,
            Status::Inconclusive => RecordStatus::Inconclusive,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub method: &'static str,
    pub status: RecordStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusRecord {
    pub status: RadiusStatus,
    pub s_lo: f64,
    /// `None` when the search was capped.
    pub s_hi: Option<f64>,
    pub estimate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_signs: Option<Vec<i8>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_eigenvalue: Option<f64>,
    /// `(1 - tolerance) / rho` when the regularity condition value is positive.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition_lower_bound: Option<f64>,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub check: CheckKind,
    pub method: &'static str,
    pub status: RecordStatus,
    pub steps: Vec<StepRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<RadiusRecord>,
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyEcho {
    pub n: usize,
    pub symbols: Vec<String>,
    pub center: Vec<Vec<f64>>,
    pub coefficients: Vec<Vec<Vec<f64>>>,
}

impl FamilyEcho {
    pub fn of(m: &ParametricMatrix) -> Self {
        Self {
            n: m.dim(),
            symbols: m.names().to_vec(),
            center: m.center().rows(),
            coefficients: m.coeffs().iter().map(|a| a.rows()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub settings: Settings,
    pub family: FamilyEcho,
    pub checks: Vec<CheckRecord>,
    pub exit_code: i32,
}

impl Report {
    pub fn to_json(&self) -> String {
        to_json_17(self)
    }

    pub fn to_text(&self) -> String {
        render_text(self)
    }
}

fn step(method: &'static str, r: crate::error::Result<Verdict>) -> StepRecord {
    match r {
        Ok(v) => StepRecord {
            method,
            status: v.status.into(),
            certificate: Some(v.certificate),
            error: None,
        },
        Err(e) => StepRecord {
            method,
            status: RecordStatus::Error,
            certificate: None,
            error: Some(e.to_string()),
        },
    }
}

fn note_step(method: &'static str, status: RecordStatus, note: String) -> StepRecord {
    StepRecord {
        method,
        status,
        certificate: Some(Certificate {
            note: Some(note),
            ..Default::default()
        }),
        error: None,
    }
}

type CheckFn = fn(&ParametricMatrix, &CheckOptions) -> crate::error::Result<Verdict>;

fn run_decision(
    m: &ParametricMatrix,
    method: Method,
    opts: &CheckOptions,
    sufficient: CheckFn,
    vertex: CheckFn,
) -> Vec<StepRecord> {
    match method {
        Method::Sufficient => vec![step("sufficient", sufficient(m, opts))],
        Method::Vertex => vec![step("vertex", vertex(m, opts))],
        Method::Auto => {
            let first = step("sufficient", sufficient(m, opts));
            if first.status != RecordStatus::Inconclusive {
                return vec![first];
            }
            let tol = m.default_symmetry_tol();
            if !m.is_symmetric(tol) {
                let note = "family is not symmetric; vertex check not applicable".to_string();
                return vec![first, note_step("vertex", RecordStatus::Inconclusive, note)];
            }
            if let Err(e) = m.vertex_count(opts.max_vertices) {
                let note = format!("{e}; vertex check skipped");
                return vec![first, note_step("vertex", RecordStatus::Inconclusive, note)];
            }
            vec![first, step("vertex", vertex(m, opts))]
        }
    }
}

fn run_radius(
    m: &ParametricMatrix,
    settings: &Settings,
) -> (Vec<StepRecord>, Option<RadiusRecord>) {
    let opts = settings.radius_options();
    let res: RadiusResult = match stability_radius(m, &opts) {
        Ok(r) => r,
        Err(e) => {
            return (
                vec![StepRecord {
                    method: "bisection",
                    status: RecordStatus::Error,
                    certificate: None,
                    error: Some(e.to_string()),
                }],
                None,
            )
        }
    };
    let rho = verify::check_regularity_sufficient(m, &settings.check_options())
        .ok()
        .and_then(|v| v.certificate.condition);
    let bound = rho
        .filter(|r| *r > 0.0)
        .map(|r| (1.0 - settings.tolerance) / r);
    let delta = settings.tolerance;

    // Status of the family at the nominal radius r = 1.
    let mut cert = Certificate::default();
    let status = match res.status {
        RadiusStatus::Capped => {
            if res.s_lo >= 1.0 {
                Status::Proven
            } else {
                Status::Inconclusive
            }
        }
        _ if res.s_lo >= 1.0 => Status::Proven,
        _ if res.s_hi <= 1.0 => {
            let at_one = if res.status == RadiusStatus::MidpointUnstable {
                0.0
            } else {
                1.0
            };
            match lambda_max_envelope(m, at_one, settings.max_vertices, None) {
                Ok((g, v)) if g > delta => {
                    let eps = v.to_eps().iter().map(|s| s * at_one).collect();
                    cert.witness = Some(Witness {
                        kind: WitnessKind::Unstable,
                        eps,
                        eigenvalue: Some(g),
                    });
                    Status::Disproven
                }
                _ => Status::Inconclusive,
            }
        }
        _ => Status::Inconclusive,
    };
    let record = RadiusRecord {
        status: res.status,
        s_lo: res.s_lo,
        s_hi: res.s_hi.is_finite().then_some(res.s_hi),
        estimate: res.estimate(),
        witness_signs: res.witness.as_ref().map(|w| w.0.clone()),
        witness_eigenvalue: res.witness_eigenvalue,
        condition_lower_bound: bound,
        evaluations: res.evaluations,
    };
    cert.condition = rho;
    (
        vec![StepRecord {
            method: "bisection",
            status: status.into(),
            certificate: Some(cert),
            error: None,
        }],
        Some(record),
    )
}

pub fn run_checks(
    m: &ParametricMatrix,
    checks: &[CheckKind],
    settings: &Settings,
) -> Vec<CheckRecord> {
    let opts = settings.check_options();
    checks
        .iter()
        .map(|&check| {
            let start = Instant::now();
            let mut radius = None;
            let steps = match check {
                CheckKind::Regularity => {
                    vec![step(
                        "sufficient",
                        verify::check_regularity_sufficient(m, &opts),
                    )]
                }
                CheckKind::PositiveDefinite => run_decision(
                    m,
                    settings.method,
                    &opts,
                    verify::check_pd_sufficient,
                    verify::check_pd_vertex,
                ),
                CheckKind::Hurwitz => run_decision(
                    m,
                    settings.method,
                    &opts,
                    verify::check_hurwitz_sufficient,
                    verify::check_hurwitz_vertex,
                ),
                CheckKind::Schur => run_decision(
                    m,
                    settings.method,
                    &opts,
                    verify::check_schur_sufficient,
                    verify::check_schur_vertex,
                ),
                CheckKind::Radius => {
                    let (s, r) = run_radius(m, settings);
                    radius = r;
                    s
                }
            };
            let last = steps.last().expect("at least one step");
            CheckRecord {
                check,
                method: last.method,
                status: last.status,
                radius,
                steps,
                wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
            }
        })
        .collect()
}

pub fn exit_code(records: &[CheckRecord]) -> i32 {
    let any = |s| records.iter().any(|r| r.status == s);
    if any(RecordStatus::Error) {
        EXIT_ERROR
    } else if any(RecordStatus::Disproven) {
        EXIT_DISPROVEN
    } else if any(RecordStatus::Inconclusive) {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_PROVEN
    }
}

/// Runs a parsed document end to end.
pub fn run_document(doc: &ProblemDocument, flags: &Overrides) -> Result<Report, Diagnostic> {
    let settings = Settings::resolve(&doc.options, flags)?;
    let family = build_family(doc)?;
    let checks = run_checks(&family, &doc.checks, &settings);
    let exit_code = exit_code(&checks);
    Ok(Report {
        tool: "pimstab",
        version: env!("CARGO_PKG_VERSION"),
        settings,
        family: FamilyEcho::of(&family),
        checks,
        exit_code,
    })
}

/// Runs a JSON document given as text.
pub fn run_str(text: &str, flags: &Overrides) -> Result<Report, Diagnostic> {
    run_document(&parse_document(text)?, flags)
}

fn number(v: f64) -> String {
    format!("{v:?}")
}

/// Degenerate expression `c + sum_k a_k * epsk` for one matrix entry.
fn affine_entry(center: f64, coeffs: impl Iterator<Item = (usize, f64)>) -> String {
    let mut s = number(center);
    for (k, a) in coeffs.filter(|(_, a)| *a != 0.0) {
        let sign = if a < 0.0 { '-' } else { '+' };
        let _ = write!(s, " {sign} {}*eps{}", number(a.abs()), k + 1);
    }
    s
}

/// The family as an already-normalized document: symbols `eps1..epsK` over
/// `[-1, 1]` and entries written as explicit affine expressions.
pub fn normalized_document(
    m: &ParametricMatrix,
    checks: Vec<CheckKind>,
    options: DocumentOptions,
) -> ProblemDocument {
    let n = m.dim();
    let unit = Interval::new(-1.0, 1.0).expect("valid");
    ProblemDocument {
        parameters: (1..=m.num_symbols())
            .map(|k| ParameterSpec {
                name: format!("eps{k}"),
                interval: unit,
            })
            .collect(),
        matrix: (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        affine_entry(
                            m.center()[(i, j)],
                            m.coeffs().iter().enumerate().map(|(k, a)| (k, a[(i, j)])),
                        )
                    })
                    .collect()
            })
            .collect(),
        checks,
        options,
    }
}

/// JSON with every float written to 17 significant digits.
struct Digits17<'a>(PrettyFormatter<'a>);

impl Formatter for Digits17<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json_17<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut buf, Digits17(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("in-memory serialization");
    String::from_utf8(buf).expect("utf-8 json")
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("({})", parts.join(", "))
}

fn render_text(r: &Report) -> String {
    let mut s = String::new();
    let f = &r.family;
    let _ = writeln!(s, "{} {}", r.tool, r.version);
    let _ = writeln!(
        s,
        "family: n = {}, K = {} ({})",
        f.n,
        f.symbols.len(),
        f.symbols.join(", ")
    );
    for (i, row) in f.center.iter().enumerate() {
        let _ = writeln!(
            s,
            "  {}  {}",
            if i == 0 { "A0" } else { "  " },
            fmt_vec(row)
        );
    }
    for rec in &r.checks {
        let _ = writeln!(
            s,
            "{:<17} {:<12} {} ({:.3} ms)",
            format!("{:?}", rec.check),
            rec.method,
            rec.status,
            rec.wall_time_ms
        );
        for st in &rec.steps {
            let _ = write!(s, "  - {}: {}", st.method, st.status);
            if let Some(e) = &st.error {
                let _ = write!(s, " error: {e}");
            }
            if let Some(c) = &st.certificate {
                if let Some(rho) = c.condition {
                    let _ = write!(s, " rho = {rho:.6}");
                }
                if let Some(ev) = &c.midpoint_eigenvalues {
                    let _ = write!(s, " midpoint eigenvalues = {}", fmt_vec(ev));
                }
                if let Some(n) = c.vertices_checked {
                    let _ = write!(s, " vertices = {n}");
                }
                if let Some(w) = &c.witness {
                    let _ = write!(s, " witness eps = {}", fmt_vec(&w.eps));
                    if let Some(l) = w.eigenvalue {
                        let _ = write!(s, " eigenvalue = {l:.6}");
                    }
                }
                if let Some(n) = &c.note {
                    let _ = write!(s, " ({n})");
                }
            }
            s.push('\n');
        }
        if let Some(rad) = &rec.radius {
            let hi = rad.s_hi.map_or("inf".to_string(), |v| format!("{v:.8}"));
            let _ = writeln!(
                s,
                "  radius of stability in [{:.8}, {hi}] ({:?})",
                rad.s_lo, rad.status
            );
        }
    }
    let _ = writeln!(s, "exit code {}", r.exit_code);
    s
}
