//! Acceptance suite. Runs without the libtest harness so every criterion
//! prints exactly one PASS/FAIL line; the process exits non-zero on failure.

mod common;

use std::collections::HashMap;
use std::time::{Duration, Instant};

use common::*;
use pimstab::verify::{
    check_hurwitz_sufficient, check_hurwitz_vertex, check_pd_sufficient, check_pd_vertex,
    check_schur_sufficient, check_schur_vertex, check_schur_via_hurwitz, witness_reproduces,
};
use pimstab::{
    stability_radius, AffineForm, CheckOptions, DenseMatrix, ParametricMatrix, RadiusOptions,
    Status, SymbolAllocator,
};
use rand::Rng;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(failures: &[String], summary: String) -> Outcome {
    if failures.is_empty() {
        Outcome {
            ok: true,
            detail: summary,
        }
    } else {
        let shown: Vec<_> = failures.iter().take(5).cloned().collect();
        Outcome {
            ok: false,
            detail: format!(
                "{summary}; {} failure(s): {}",
                failures.len(),
                shown.join(" | ")
            ),
        }
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn mat(rows: [[f64; 3]; 3]) -> DenseMatrix {
    DenseMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let fam = hessian_family();
    let verdict = check_pd_sufficient(&fam, &CheckOptions::default()).unwrap();
    let elapsed = start.elapsed();

    let expected_center = mat([[82.5, 9.5, -1.5], [9.5, 45.0, 0.5], [-1.5, 0.5, 9.0]]);
    let expected = [
        mat([[30.0, 2.0, 0.0], [2.0, 0.0, -0.5], [0.0, -0.5, 0.0]]),
        mat([[2.0, 0.0, -0.5], [0.0, 15.0, 0.0], [-0.5, 0.0, 3.0]]),
        mat([[0.0, -0.5, 0.0], [-0.5, 0.0, 3.0], [0.0, 3.0, 0.0]]),
        mat([[1.5, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]),
    ];
    if fam.num_symbols() != expected.len() {
        failures.push(format!("expected 4 symbols, got {}", fam.num_symbols()));
    }
    let mut compare = |label: &str, got: &DenseMatrix, want: &DenseMatrix| {
        for i in 0..3 {
            for j in 0..3 {
                if !close(got[(i, j)], want[(i, j)], 1e-12) {
                    failures.push(format!(
                        "{label}[{i}][{j}] = {} (want {})",
                        got[(i, j)],
                        want[(i, j)]
                    ));
                }
            }
        }
    };
    compare("A0", fam.center(), &expected_center);
    for (k, want) in expected.iter().enumerate() {
        if let Some(got) = fam.coeffs().get(k) {
            compare(&format!("A{}", k + 1), got, want);
        }
    }

    let ev = fam.center().sym_eigenvalues().unwrap();
    for (got, want) in ev.iter().zip([8.96, 42.75, 84.79]) {
        if !close(*got, want, 0.01) {
            failures.push(format!("eigenvalue {got} (want {want} +- 0.01)"));
        }
    }
    let rho = verdict.certificate.condition.unwrap_or(f64::NAN);
    if !close(rho, 0.61, 0.01) {
        failures.push(format!("condition {rho} (want 0.61 +- 0.01)"));
    }
    if verdict.status != Status::Proven {
        failures.push(format!("verdict {:?}", verdict.status));
    }
    if elapsed >= Duration::from_secs(1) {
        failures.push(format!("runtime {elapsed:?}"));
    }
    outcome(
        &failures,
        format!(
            "eigenvalues [{:.4}, {:.4}, {:.4}], rho {rho:.4}, {:?}, {elapsed:.2?}",
            ev[0], ev[1], ev[2], verdict.status
        ),
    )
}

/// The random sweep shared by criteria 2 to 4: families with a stable
/// midpoint (Hurwitz and positive definiteness) and with a Schur-stable one.
struct Sweep {
    hurwitz: Vec<ParametricMatrix>,
    schur: Vec<ParametricMatrix>,
}

fn sweep(instances: usize) -> Sweep {
    let mut rng = rng(0x5eed_0002);
    Sweep {
        hurwitz: (0..instances)
            .map(|_| random_stable_midpoint_family(&mut rng))
            .collect(),
        schur: (0..instances)
            .map(|_| random_schur_family(&mut rng))
            .collect(),
    }
}

fn criterion_2(s: &Sweep) -> Outcome {
    let start = Instant::now();
    let opts = CheckOptions::default();
    let mut failures = Vec::new();
    let mut proven = [0usize; 3];
    for (i, fam) in s.hurwitz.iter().enumerate() {
        if check_hurwitz_sufficient(fam, &opts).unwrap().is_proven() {
            proven[0] += 1;
            let v = check_hurwitz_vertex(fam, &opts).unwrap();
            if !v.is_proven() {
                failures.push(format!("hurwitz #{i}: vertex {:?}", v.status));
            }
        }
        let neg = fam.negated();
        if check_pd_sufficient(&neg, &opts).unwrap().is_proven() {
            proven[1] += 1;
            let v = check_pd_vertex(&neg, &opts).unwrap();
            if !v.is_proven() {
                failures.push(format!("pd #{i}: vertex {:?}", v.status));
            }
        }
    }
    for (i, fam) in s.schur.iter().chain(&s.hurwitz).enumerate() {
        if check_schur_sufficient(fam, &opts).unwrap().is_proven() {
            proven[2] += 1;
            let v = check_schur_vertex(fam, &opts).unwrap();
            if !v.is_proven() {
                failures.push(format!("schur #{i}: vertex {:?}", v.status));
            }
        }
    }
    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(30) {
        failures.push(format!("runtime {elapsed:?}"));
    }
    if proven.contains(&0) {
        failures.push(format!("vacuous sweep, proven counts {proven:?}"));
    }
    outcome(
        &failures,
        format!(
            "{} families; sufficient PROVEN hurwitz {}, pd {}, schur {}; all vertex-confirmed in {elapsed:.2?}",
            s.hurwitz.len() + s.schur.len(),
            proven[0],
            proven[1],
            proven[2]
        ),
    )
}

fn criterion_3(s: &Sweep) -> Outcome {
    let opts = CheckOptions::default();
    let mut failures = Vec::new();
    let (mut compared, mut marginal) = (0, 0);
    let mut tally = [0usize; 2];
    for (i, fam) in s.schur.iter().chain(&s.hurwitz).enumerate() {
        let a = check_schur_vertex(fam, &opts).unwrap();
        let b = check_schur_via_hurwitz(fam, &opts).unwrap();
        if a.status == Status::Inconclusive || b.status == Status::Inconclusive {
            marginal += 1;
            continue;
        }
        compared += 1;
        tally[usize::from(a.status == Status::Disproven)] += 1;
        if a.status != b.status {
            failures.push(format!(
                "#{i}: vertex {:?} vs via-hurwitz {:?}",
                a.status, b.status
            ));
        }
    }
    outcome(
        &failures,
        format!(
            "{compared} compared ({} stable, {} unstable), {marginal} marginal skipped",
            tally[0], tally[1]
        ),
    )
}

fn criterion_4(s: &Sweep) -> Outcome {
    let opts = CheckOptions::default();
    let mut rng = rng(0x5eed_0004);
    let mut failures = Vec::new();
    let (mut proven, mut disproven) = (0, 0);
    for (i, fam) in s.hurwitz.iter().chain(&s.schur).enumerate() {
        let v = check_hurwitz_vertex(fam, &opts).unwrap();
        match v.status {
            Status::Proven => {
                proven += 1;
                for _ in 0..10_000 {
                    let eps = random_eps(&mut rng, fam.num_symbols());
                    let l = max_eig(&fam.instantiate(&eps).unwrap());
                    if l >= 0.0 {
                        failures.push(format!("#{i}: lambda_max {l} at {eps:?}"));
                        break;
                    }
                }
            }
            Status::Disproven => {
                disproven += 1;
                let w = v.witness().expect("disproof carries a witness");
                let again = check_hurwitz_vertex(fam, &opts).unwrap();
                if !witness_reproduces(fam, w, &opts).unwrap() || again.witness() != Some(w) {
                    failures.push(format!("#{i}: witness {:?} does not reproduce", w.eps));
                }
            }
            Status::Inconclusive => {}
        }
    }
    outcome(
        &failures,
        format!(
            "{proven} PROVEN x 1e4 interior samples, {disproven} DISPROVEN witnesses reproduced"
        ),
    )
}

fn bracket_holds(fam: &ParametricMatrix, s_lo: f64, s_hi: f64) -> Result<(), String> {
    let opts = CheckOptions::default();
    let lo = check_hurwitz_vertex(&fam.scale(s_lo).unwrap(), &opts).unwrap();
    if lo.status != Status::Proven {
        return Err(format!("vertex {:?} at s_lo {s_lo}", lo.status));
    }
    let hi = check_hurwitz_vertex(&fam.scale(s_hi).unwrap(), &opts).unwrap();
    if hi.status == Status::Proven {
        return Err(format!("vertex PROVEN at s_hi {s_hi}"));
    }
    Ok(())
}

fn criterion_5() -> Outcome {
    let mut failures = Vec::new();
    let ropts = RadiusOptions::default();

    let one = |v: f64| DenseMatrix::from_rows(&[vec![v]]).unwrap();
    let scalar = ParametricMatrix::from_parts(one(-2.0), vec![one(1.0)]).unwrap();
    let r = stability_radius(&scalar, &ropts).unwrap();
    let s = r.estimate();
    if !(r.s_lo >= 2.0 - 1e-5 && r.s_hi <= 2.0 + 1e-5) {
        failures.push(format!("scalar bracket [{}, {}]", r.s_lo, r.s_hi));
    }
    if let Err(e) = bracket_holds(&scalar, r.s_lo, r.s_hi) {
        failures.push(format!("scalar: {e}"));
    }

    let neg = hessian_family().negated();
    let rho1 = check_pd_sufficient(&hessian_family(), &CheckOptions::default())
        .unwrap()
        .certificate
        .condition
        .unwrap();
    let h = stability_radius(&neg, &ropts).unwrap();
    let bound = 1.0 / rho1 - 1e-6;
    if h.s_lo < bound {
        failures.push(format!(
            "negated example s_lo {} < 1/rho - 1e-6 = {bound}",
            h.s_lo
        ));
    }
    if let Err(e) = bracket_holds(&neg, h.s_lo, h.s_hi) {
        failures.push(format!("negated example: {e}"));
    }

    let mut rng = rng(0x5eed_0005);
    let mut bracketed = 0;
    for i in 0..50 {
        let fam = random_stable_midpoint_family(&mut rng);
        let r = stability_radius(&fam, &ropts).unwrap();
        if r.capped || r.s_hi == 0.0 {
            continue;
        }
        bracketed += 1;
        if let Err(e) = bracket_holds(&fam, r.s_lo, r.s_hi) {
            failures.push(format!("random #{i}: {e}"));
        }
    }
    outcome(
        &failures,
        format!(
            "scalar s = {s:.8}; negated example s in [{:.6}, {:.6}] >= 1/rho = {:.6}; {bracketed} random brackets hold",
            h.s_lo,
            h.s_hi,
            1.0 / rho1
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = rng(0x5eed_0006);
    let mut failures = Vec::new();
    let (mut pairs, mut rejected, mut affine_pairs) = (0, 0, 0);
    while pairs < 1000 {
        let affine_only = pairs % 4 == 0;
        let text = random_expr(&mut rng, 4, affine_only);
        let expr = parse(&text);
        let bx = random_box(&mut rng);
        let mut alloc = SymbolAllocator::new(bx.len());
        let env: HashMap<String, AffineForm> = bx
            .iter()
            .enumerate()
            .map(|(k, (name, iv))| (name.clone(), AffineForm::from_interval(*iv, k)))
            .collect();
        let form = match expr.eval_affine(&env, &mut alloc) {
            Ok(f) => f,
            Err(_) => {
                // Division by a form whose range straddles zero.
                assert!(!affine_only, "{text}");
                rejected += 1;
                continue;
            }
        };
        pairs += 1;
        let range = form.range();
        // Affine arithmetic is not rounding-rigorous; allow ulp-scale slack.
        let slack = 1e-12 * (1.0 + range.mag());
        for _ in 0..100 {
            let point: HashMap<String, f64> = bx
                .iter()
                .map(|(name, iv)| (name.clone(), rng.gen_range(iv.lo()..=iv.hi())))
                .collect();
            let y = expr.eval_real(&point).unwrap();
            if !(range.lo() - slack <= y && y <= range.hi() + slack) {
                failures.push(format!(
                    "{text}: {y} outside [{}, {}]",
                    range.lo(),
                    range.hi()
                ));
                break;
            }
        }
        if affine_only {
            affine_pairs += 1;
            if alloc.len() != bx.len() {
                failures.push(format!("{text}: fresh symbols allocated"));
            }
            // An affine function attains its extremes at box vertices.
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for v in 0..(1 << bx.len()) {
                let point: HashMap<String, f64> = bx
                    .iter()
                    .enumerate()
                    .map(|(k, (name, iv))| {
                        (
                            name.clone(),
                            if v >> k & 1 == 1 { iv.hi() } else { iv.lo() },
                        )
                    })
                    .collect();
                let y = expr.eval_real(&point).unwrap();
                lo = lo.min(y);
                hi = hi.max(y);
            }
            let scale = lo.abs().max(hi.abs()).max(1.0);
            if (range.lo() - lo).abs() > 1e-12 * scale || (range.hi() - hi).abs() > 1e-12 * scale {
                failures.push(format!(
                    "{text}: range [{}, {}] vs exact [{lo}, {hi}]",
                    range.lo(),
                    range.hi()
                ));
            }
        }
    }
    outcome(
        &failures,
        format!("{pairs} pairs x 100 points ({affine_pairs} affine-only exact), {rejected} rejected divisions"),
    )
}

fn criterion_7() -> Outcome {
    let mut rng = rng(0x5eed_0007);
    let mut failures = Vec::new();
    const N: usize = 500;

    for t in 0..N {
        let n = rng.gen_range(1..=8);
        let a = random_matrix(&mut rng, n);
        let inv = match a.invert() {
            Ok(inv) => inv,
            Err(_) => continue,
        };
        let mut r = a.matmul(&inv);
        r.add_scaled(&DenseMatrix::identity(n), -1.0);
        let bound = 1e-8 * n as f64 * a.norm_inf();
        // Residual is only guaranteed on well-conditioned inputs.
        let cond = a.norm_inf() * inv.norm_inf();
        if cond < 1e6 && r.norm_inf() > bound {
            failures.push(format!("invert #{t}: residual {} > {bound}", r.norm_inf()));
        }
    }

    for t in 0..N {
        let n = rng.gen_range(1..=8);
        let scale = rng.gen_range(0.1..10.0);
        let a = random_symmetric(&mut rng, n, scale);
        let ev = a.sym_eigenvalues().unwrap();
        let sum: f64 = ev.iter().sum();
        let scale = a.norm_fro().max(f64::MIN_POSITIVE);
        if (sum - a.trace()).abs() > 1e-10 * scale.max(a.trace().abs()) {
            failures.push(format!("jacobi trace #{t}: {sum} vs {}", a.trace()));
        }
        let prod: f64 = ev.iter().product();
        let det = a.determinant();
        if !rel_close(prod, det, 1e-8) {
            failures.push(format!("jacobi det #{t}: {prod} vs {det}"));
        }
    }

    let mut skipped = 0;
    for t in 0..N {
        let n = rng.gen_range(1..=8);
        let mut a = random_symmetric(&mut rng, n, 1.0);
        // Center the spectrum near zero so both outcomes occur.
        let shift = -min_eig(&a) + rng.gen_range(-0.5..0.5);
        a.add_scaled(&DenseMatrix::identity(n), shift);
        let l = min_eig(&a);
        if l.abs() <= 1e-10 {
            skipped += 1;
            continue;
        }
        if a.is_positive_definite() != (l > 0.0) {
            failures.push(format!("cholesky #{t}: min eigenvalue {l}"));
        }
    }

    for t in 0..N {
        let n = rng.gen_range(1..=8);
        let a = DenseMatrix::from_fn(n, |_, _| {
            if rng.gen_bool(0.2) {
                0.0
            } else {
                rng.gen_range(0.0..1.0)
            }
        });
        let r = rng.gen_range(0.01..100.0);
        let rho = a.spectral_radius_nonneg().unwrap();
        let rho_r = a.scaled(r).spectral_radius_nonneg().unwrap();
        if !(rel_close(rho_r, r * rho, 1e-10) || (rho == 0.0 && rho_r == 0.0)) {
            failures.push(format!(
                "perron #{t}: rho(rA) {rho_r} vs r*rho(A) {}",
                r * rho
            ));
        }
        let b = DenseMatrix::from_fn(n, |_, _| rng.gen_range(0.0..0.5));
        let mut ab = a.clone();
        ab.add_scaled(&b, 1.0);
        let rho_ab = ab.spectral_radius_nonneg().unwrap();
        if rho_ab < rho * (1.0 - 1e-10) {
            failures.push(format!("perron monotone #{t}: {rho_ab} < {rho}"));
        }
    }
    outcome(
        &failures,
        format!("{N} matrices per kernel (invert, jacobi, cholesky with {skipped} near-singular skipped, perron)"),
    )
}

type Criterion<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn main() {
    // `cargo test -- --list` and filters are passed through by cargo; honour
    // `--list` so test discovery tools see an empty list.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let s = sweep(200);
    let criteria: Vec<(&str, Criterion)> = vec![
        ("worked example golden values", Box::new(criterion_1)),
        ("sufficiency soundness sweep", Box::new(|| criterion_2(&s))),
        (
            "schur vertex vs via-hurwitz equivalence",
            Box::new(|| criterion_3(&s)),
        ),
        ("vertex property validation", Box::new(|| criterion_4(&s))),
        ("stability radius", Box::new(criterion_5)),
        ("affine enclosure", Box::new(criterion_6)),
        ("linear algebra kernels", Box::new(criterion_7)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let tag = if o.ok { "PASS" } else { "FAIL" };
        failed += usize::from(!o.ok);
        println!(
            "{tag} criterion {}: {name} ({}) [{:.2?}]",
            i + 1,
            o.detail,
            start.elapsed()
        );
    }
    if failed > 0 {
        println!("{failed} criterion/criteria failed");
        std::process::exit(1);
    }
}
