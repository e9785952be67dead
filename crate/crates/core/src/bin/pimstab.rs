use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use pimstab::cli::{self, Method, Overrides, EXIT_ERROR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Json,
    Text,
}

/// Certify regularity, positive definiteness and stability of a parametric
/// interval matrix described by a JSON problem document.
#[derive(Debug, Parser)]
#[command(name = "pimstab", version)]
struct Args {
    /// Problem document (JSON).
    document: PathBuf,

    /// Decision method for positive-definite, hurwitz and schur checks.
    #[arg(long, value_enum)]
    method: Option<Method>,

    /// Safety margin around strict thresholds.
    #[arg(long)]
    tolerance: Option<f64>,

    /// Bracket width at which the radius bisection stops.
    #[arg(long)]
    bisect_tol: Option<f64>,

    /// Upper limit for the radius search.
    #[arg(long)]
    r_max: Option<f64>,

    /// Maximum number of noise symbols for vertex enumeration.
    #[arg(long)]
    max_vertices: Option<usize>,

    #[arg(long, value_enum, default_value = "json")]
    output: Output,

    /// Print nothing on stdout; only the exit code reports the outcome.
    #[arg(long)]
    quiet: bool,

    /// Print the normalized family as a problem document instead of running checks.
    #[arg(long)]
    emit_normalized: bool,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR as u8 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let text = match std::fs::read_to_string(&args.document) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("{}: {e}", args.document.display());
            return ExitCode::from(EXIT_ERROR as u8);
        }
    };
    let fail = |d: cli::Diagnostic| {
        eprintln!("{}: {d}", args.document.display());
        ExitCode::from(EXIT_ERROR as u8)
    };
    let doc = match cli::parse_document(&text) {
        Ok(d) => d,
        Err(d) => return fail(d),
    };

    if args.emit_normalized {
        let family = match cli::build_family(&doc) {
            Ok(f) => f,
            Err(d) => return fail(d),
        };
        let out = cli::normalized_document(&family, doc.checks.clone(), doc.options.clone());
        if !args.quiet {
            println!("{}", cli::to_json_17(&out));
        }
        return ExitCode::SUCCESS;
    }

    let flags = Overrides {
        method: args.method,
        tolerance: args.tolerance,
        bisect_tol: args.bisect_tol,
        max_vertices: args.max_vertices,
        r_max: args.r_max,
    };
    let report = match cli::run_document(&doc, &flags) {
        Ok(r) => r,
        Err(d) => return fail(d),
    };
    for rec in &report.checks {
        for step in &rec.steps {
            if let Some(e) = &step.error {
                eprintln!("{:?} ({}): {e}", rec.check, step.method);
            }
        }
    }
    if !args.quiet {
        match args.output {
            Output::Json => println!("{}", report.to_json()),
            Output::Text => print!("{}", report.to_text()),
        }
    }
    ExitCode::from(report.exit_code as u8)
}
