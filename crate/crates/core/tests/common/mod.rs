#![allow(dead_code)]

use pimstab::{DenseMatrix, Expr, Interval, ParametricMatrix};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_symmetric(rng: &mut impl Rng, n: usize, scale: f64) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let v = rng.gen_range(-1.0..=1.0) * scale;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

pub fn random_matrix(rng: &mut impl Rng, n: usize) -> DenseMatrix {
    DenseMatrix::from_fn(n, |_, _| rng.gen_range(-1.0..=1.0))
}

/// Symmetric family with coefficients in [-1, 1] whose midpoint is shifted to
/// be stable by a random gap, so roughly half the families are stable.
pub fn random_stable_midpoint_family(rng: &mut impl Rng) -> ParametricMatrix {
    let n = rng.gen_range(2..=4);
    let k = rng.gen_range(1..=4);
    let mut center = random_symmetric(rng, n, 1.0);
    let lmax = *center.sym_eigenvalues().unwrap().last().unwrap();
    let gap = rng.gen_range(0.05..3.0);
    center.add_scaled(&DenseMatrix::identity(n), -(lmax + gap));
    let coeffs = (0..k).map(|_| random_symmetric(rng, n, 1.0)).collect();
    ParametricMatrix::from_parts(center, coeffs).unwrap()
}

/// Symmetric family with a Schur-stable midpoint and small perturbations.
pub fn random_schur_family(rng: &mut impl Rng) -> ParametricMatrix {
    let n = rng.gen_range(2..=4);
    let k = rng.gen_range(1..=4);
    let center = random_symmetric(rng, n, 1.0);
    let ev = center.sym_eigenvalues().unwrap();
    let rho = ev.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-3);
    let target = rng.gen_range(0.1..0.95);
    let center = center.scaled(target / rho);
    let c = rng.gen_range(0.02..0.4);
    let coeffs = (0..k).map(|_| random_symmetric(rng, n, c)).collect();
    ParametricMatrix::from_parts(center, coeffs).unwrap()
}

pub fn random_eps(rng: &mut impl Rng, k: usize) -> Vec<f64> {
    (0..k).map(|_| rng.gen_range(-1.0..=1.0)).collect()
}

pub const PARAMS: [&str; 3] = ["x1", "x2", "x3"];

pub fn random_box(rng: &mut impl Rng) -> Vec<(String, Interval)> {
    PARAMS
        .iter()
        .map(|name| {
            let lo = rng.gen_range(-3.0..3.0);
            let w = if rng.gen_bool(0.1) {
                0.0
            } else {
                rng.gen_range(0.0..2.0)
            };
            (name.to_string(), Interval::new(lo, lo + w).unwrap())
        })
        .collect()
}

fn leaf(rng: &mut impl Rng) -> String {
    if rng.gen_bool(0.4) {
        format!("({})", (rng.gen_range(-5.0..5.0f64) * 4.0).round() / 4.0)
    } else {
        PARAMS[rng.gen_range(0..PARAMS.len())].to_string()
    }
}

/// Random expression text over x1..x3. With `affine_only` the tree uses only
/// `+`, `-`, unary minus and multiplication by constants.
pub fn random_expr(rng: &mut impl Rng, depth: u32, affine_only: bool) -> String {
    if depth == 0 || rng.gen_bool(0.25) {
        return leaf(rng);
    }
    let choice = if affine_only {
        rng.gen_range(0..4)
    } else {
        rng.gen_range(0..7)
    };
    match choice {
        0 => format!(
            "({} + {})",
            random_expr(rng, depth - 1, affine_only),
            random_expr(rng, depth - 1, affine_only)
        ),
        1 => format!(
            "({} - {})",
            random_expr(rng, depth - 1, affine_only),
            random_expr(rng, depth - 1, affine_only)
        ),
        2 => format!("-({})", random_expr(rng, depth - 1, affine_only)),
        3 => format!(
            "{} * ({})",
            rng.gen_range(-4..=4),
            random_expr(rng, depth - 1, affine_only)
        ),
        4 => format!(
            "({}) * ({})",
            random_expr(rng, depth - 1, affine_only),
            random_expr(rng, depth - 1, affine_only)
        ),
        5 => format!(
            "({})^{}",
            random_expr(rng, depth - 1, affine_only),
            rng.gen_range(0..=4)
        ),
        _ => format!(
            "({}) / ({})",
            random_expr(rng, depth - 1, affine_only),
            random_expr(rng, depth - 1, affine_only)
        ),
    }
}

pub fn parse(text: &str) -> Expr {
    Expr::parse(text).unwrap_or_else(|e| panic!("{text}: {e}"))
}

pub fn max_eig(a: &DenseMatrix) -> f64 {
    *a.sym_eigenvalues().unwrap().last().unwrap()
}

pub fn min_eig(a: &DenseMatrix) -> f64 {
    a.sym_eigenvalues().unwrap()[0]
}

/// Hessian of
/// x1^4 + 2 x1^2 x2 - x1 x2 x3 + 3 x2 x3^2 + 5 x2^3 over ([2,3],[1,2],[0,1]).
pub fn hessian_family() -> ParametricMatrix {
    let grid = [
        ["12*x1^2+4*x2", "4*x1-x3", "-x2"],
        ["4*x1-x3", "30*x2", "6*x3-x1"],
        ["-x2", "6*x3-x1", "6*x2"],
    ];
    let entries: Vec<Vec<Expr>> = grid
        .iter()
        .map(|r| r.iter().map(|s| parse(s)).collect())
        .collect();
    let params = [("x1", 2.0, 3.0), ("x2", 1.0, 2.0), ("x3", 0.0, 1.0)]
        .iter()
        .map(|(n, lo, hi)| (n.to_string(), Interval::new(*lo, *hi).unwrap()))
        .collect::<Vec<_>>();
    ParametricMatrix::build(&entries, &params).unwrap()
}
