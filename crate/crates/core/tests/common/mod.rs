//! Checks shared by the property suites and the acceptance run. Each returns
//! the worst observed deviation so callers can compare against a bound.

#![allow(dead_code)]

use std::sync::OnceLock;

use lightning_stokes::basis::{orthogonalize, place_all_poles, BasisConfig};
use lightning_stokes::cases::{case_lid_driven_cavity, case_step_channel, case_triangle_cavity};
use lightning_stokes::dense::RealMatrix;
use lightning_stokes::evaluation::GoursatSolution;
use lightning_stokes::geometry::ProblemDomain;
use lightning_stokes::solver::{least_squares, solve_fixed, SolveOptions};
use lightning_stokes::Complex64;
use nalgebra::{DMatrix, DVector};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// The three polygonal test domains: square cavity, 40° triangle, step channel.
pub fn domain(which: usize) -> ProblemDomain {
    match which % 3 {
        0 => case_lid_driven_cavity().unwrap().domain,
        1 => case_triangle_cavity(40f64.to_radians()).unwrap().domain,
        _ => case_step_channel().unwrap().domain,
    }
}

/// Cavity at its default 24 poles per corner and degree 24, shared across checks.
pub fn cavity_solution() -> &'static GoursatSolution {
    static SOLUTION: OnceLock<GoursatSolution> = OnceLock::new();
    SOLUTION.get_or_init(|| {
        let case = case_lid_driven_cavity().unwrap();
        solve_fixed(&case.domain, &case.basis, &case.solve_options()).unwrap().0
    })
}

/// Largest entry of `Q*Q/m − I` over each orthogonalized block.
pub fn gram_deviation(domain: &ProblemDomain, poles: usize, degree: usize, sigma: f64) -> f64 {
    let config = BasisConfig::new(vec![poles; domain.corners.len()], degree, domain.length_scale)
        .with_sigma(sigma);
    let samples = domain.sample_boundary(&SolveOptions::default().sampling, &config, 1.0);
    let z: Vec<Complex64> = samples.iter().map(|s| s.z).collect();
    let sets = place_all_poles(domain, &config).unwrap();
    let (basis, eval) = orthogonalize(&z, &sets, degree, false).unwrap();
    let m = z.len() as f64;
    let mut worst: f64 = 0.0;
    for (b, range) in basis.block_ranges().into_iter().enumerate() {
        // pole blocks are orthogonal to the constant column as well
        let mut cols: Vec<usize> = range.collect();
        if b > 0 {
            cols.insert(0, 0);
        }
        for (p, &i) in cols.iter().enumerate() {
            for (q, &j) in cols.iter().enumerate() {
                let dot: Complex64 = eval
                    .values
                    .col(i)
                    .iter()
                    .zip(eval.values.col(j))
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                let target = if p == q { 1.0 } else { 0.0 };
                worst = worst.max((dot / m - target).norm());
            }
        }
    }
    worst
}

/// Fourth-order central difference of `q` along `step`.
fn d4<T>(q: impl Fn(Complex64) -> T, z: Complex64, step: Complex64) -> T
where
    T: std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
{
    let h = step.norm();
    (q(z - step * 2.0) - q(z + step * 2.0) + (q(z + step) - q(z - step)) * 8.0) * (1.0 / (12.0 * h))
}

const H: f64 = 1e-2;

/// Relative mismatch between `f′`, `g′` and differences of `f`, `g`.
pub fn derivative_error(solution: &GoursatSolution, z: Complex64) -> f64 {
    let v = solution.eval_fg(z).unwrap();
    let df = d4(|w| solution.eval_fg(w).unwrap().f, z, c(H, 0.0));
    let dg = d4(|w| solution.eval_fg(w).unwrap().g, z, c(H, 0.0));
    let ef = (df - v.df).norm() / v.df.norm().max(1.0);
    let eg = (dg - v.dg).norm() / v.dg.norm().max(1.0);
    ef.max(eg)
}

/// Change in `ψ, u, v` under the gauge `f + γz + C`, `g + C̄z + α`.
pub fn gauge_error(solution: &GoursatSolution, gamma: f64, cc: Complex64, alpha: f64, z: Complex64) -> f64 {
    let moved = solution.gauge_transformed(gamma, cc, alpha).unwrap();
    let (u0, v0) = solution.velocity(z).unwrap();
    let (u1, v1) = moved.velocity(z).unwrap();
    let dpsi = (solution.stream(z).unwrap() - moved.stream(z).unwrap()).abs();
    dpsi.max((u0 - u1).abs()).max((v0 - v1).abs())
}

/// `u_x + v_y` by differences.
pub fn divergence(solution: &GoursatSolution, z: Complex64) -> f64 {
    let ux = d4(|w| solution.velocity(w).unwrap().0, z, c(H, 0.0));
    let vy = d4(|w| solution.velocity(w).unwrap().1, z, c(0.0, H));
    (ux + vy).abs()
}

/// Fourth-order five-point-per-axis Laplacian of `ψ` against `4 Im f′`,
/// relative to `max(1, |4 Im f′|)`.
pub fn laplacian_error(solution: &GoursatSolution, z: Complex64) -> f64 {
    let psi = |w: Complex64| solution.stream(w).unwrap();
    let axis = |e: Complex64| {
        (-psi(z + e * 2.0) + 16.0 * psi(z + e) - 30.0 * psi(z) + 16.0 * psi(z - e) - psi(z - e * 2.0))
            / (12.0 * H * H)
    };
    let lap = axis(c(H, 0.0)) + axis(c(0.0, H));
    let exact = 4.0 * solution.eval_fg(z).unwrap().df.im;
    (lap - exact).abs() / exact.abs().max(1.0)
}

/// Worst mismatch of `ψ, u, v` between a solve and the negated solve with
/// negated boundary data, over `points`.
pub fn negation_error(domain: &ProblemDomain, config: &BasisConfig, options: &SolveOptions, points: &[Complex64]) -> f64 {
    let (a, _) = solve_fixed(domain, config, options).unwrap();
    let (b, _) = solve_fixed(&domain.with_negated_data(), config, options).unwrap();
    let mut worst: f64 = 0.0;
    for &z in points {
        let (ua, va) = a.velocity(z).unwrap();
        let (ub, vb) = b.velocity(z).unwrap();
        let dpsi = (a.stream(z).unwrap() + b.stream(z).unwrap()).abs();
        worst = worst.max(dpsi).max((ua + ub).abs()).max((va + vb).abs());
    }
    worst
}

/// Largest deviation from the SVD pseudoinverse solution, relative to its norm.
pub fn svd_oracle_error(a: &RealMatrix, b: &[f64]) -> f64 {
    let na = DMatrix::from_fn(a.rows(), a.cols(), |i, j| a.get(i, j));
    let svd = na.svd(true, true);
    let eps = a.rows().max(a.cols()) as f64 * f64::EPSILON * svd.singular_values.max();
    let oracle = svd.solve(&DVector::from_column_slice(b), eps).unwrap();
    let ls = least_squares(a, b).unwrap();
    let scale = oracle.norm().max(1.0);
    ls.solution
        .iter()
        .zip(oracle.iter())
        .map(|(x, y)| (x - y).abs() / scale)
        .fold(0.0, f64::max)
}
