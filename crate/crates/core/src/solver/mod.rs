//! Fixed-basis solves and the adaptive refinement loop.

pub mod lstsq;

use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use lstsq::{least_squares, least_squares_with, LeastSquares, LstsqMethod};

use crate::assembly::{assemble, condition_rows, condition_targets, AssemblyOptions, GaugePoints, Weighting};
use crate::basis::{orthogonalize, place_all_poles, BasisConfig};
use crate::error::{Result, StokesError};
use crate::evaluation::GoursatSolution;
use crate::geometry::{ProblemDomain, Sampling};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub sampling: Sampling,
    pub weighting: Weighting,
    /// Defaults to the domain centroid and first corner.
    pub gauge: Option<GaugePoints>,
    pub method: LstsqMethod,
    /// Multiplier on the number of solve samples.
    pub sample_density: f64,
    /// Density of the check mesh relative to the solve mesh.
    pub check_density: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            sampling: Sampling::default(),
            weighting: Weighting::Corner,
            gauge: None,
            method: LstsqMethod::Auto,
            sample_density: 1.0,
            check_density: 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    /// Real coefficient vector grouped as `(Re f_j, Im f_j, Re g_j, Im g_j)`.
    pub coefficients: Vec<f64>,
    /// Max corner-distance-weighted deviation from the boundary conditions on the check mesh.
    pub boundary_error: f64,
    /// Root-sum-square of the weighted boundary residual grouped by nearest corner.
    pub per_corner_error: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    /// Seconds spent sampling, orthogonalizing and assembling.
    pub assemble_time: f64,
    /// Seconds spent in the least-squares solve.
    pub lstsq_time: f64,
    pub wall_time: f64,
    pub n_history: Vec<usize>,
    pub error_history: Vec<f64>,
    pub poles_per_corner: Vec<usize>,
    pub degree: usize,
    pub sample_count: usize,
    pub rank: usize,
    pub converged: bool,
}

/// Corner-weighted deviation from both boundary conditions at every check point.
pub fn boundary_deviation(
    solution: &GoursatSolution,
    domain: &ProblemDomain,
    samples: &[crate::geometry::SamplePoint],
) -> Result<Vec<f64>> {
    let z: Vec<Complex64> = samples.iter().map(|s| s.z).collect();
    let values = solution.eval_many(&z)?;
    let mut out = Vec::with_capacity(samples.len());
    for (s, v) in samples.iter().zip(values) {
        let (_, target) = condition_targets(domain, s);
        // Linear in (f, g): evaluate the row functionals on the actual values.
        let rf = condition_rows(domain, s, v.f, v.df);
        let rg = condition_rows(domain, s, v.g, v.dg);
        let mut worst: f64 = 0.0;
        for r in 0..2 {
            let got = rf[r][0] + rg[r][2];
            worst = worst.max((got - target[r]).abs());
        }
        out.push(worst * s.distance);
    }
    Ok(out)
}

fn resolve_gauge(domain: &ProblemDomain, options: &SolveOptions) -> GaugePoints {
    options.gauge.unwrap_or_else(|| GaugePoints::default_for(domain))
}

/// One least-squares solve with a fixed basis.
pub fn solve_fixed(
    domain: &ProblemDomain,
    config: &BasisConfig,
    options: &SolveOptions,
) -> Result<(GoursatSolution, SolveReport)> {
    let start = Instant::now();
    config.validate(domain.corners.len())?;
    if !(options.check_density > 0.0 && options.sample_density > 0.0) {
        return Err(StokesError::InvalidArgument(format!(
            "sample densities must be positive, got {} and {}",
            options.sample_density, options.check_density
        )));
    }
    let samples = domain.sample_boundary(&options.sampling, config, options.sample_density);
    let poles = place_all_poles(domain, config)?;
    let z: Vec<Complex64> = samples.iter().map(|s| s.z).collect();
    let (basis, eval) = orthogonalize(&z, &poles, config.degree, config.joint_poles)?;
    let assembly = AssemblyOptions {
        weighting: options.weighting,
        gauge: resolve_gauge(domain, options),
    };
    let system = assemble(domain, &samples, &basis, &eval, &assembly)?;
    let assemble_time = start.elapsed().as_secs_f64();
    let ls = least_squares_with(&system.matrix, &system.rhs, options.method)?;
    let lstsq_time = start.elapsed().as_secs_f64() - assemble_time;
    let x = system.unscale(&ls.solution);

    let mut sums = vec![0.0; domain.corners.len()];
    for (row, tag) in system.row_map.iter().enumerate() {
        if let Some(i) = tag.sample {
            sums[samples[i].nearest_corner] += ls.residual[row] * ls.residual[row];
        }
    }
    let per_corner_error = sums.into_iter().map(f64::sqrt).collect();

    let domain_arc = Arc::new(domain.clone());
    let solution = GoursatSolution::from_real(Arc::new(basis), &x, domain_arc)?;
    let check = domain.sample_boundary(
        &options.sampling,
        config,
        options.sample_density * options.check_density,
    );
    let boundary_error = boundary_deviation(&solution, domain, &check)?
        .into_iter()
        .fold(0.0, f64::max);
    if !boundary_error.is_finite() {
        return Err(StokesError::NonFinite);
    }
    log::debug!(
        "N = {} ({} samples): boundary error {:.3e}",
        config.size(),
        samples.len(),
        boundary_error
    );
    let report = SolveReport {
        coefficients: x,
        boundary_error,
        per_corner_error,
        residual_norm: ls.residual_norm,
        iterations: 1,
        assemble_time,
        lstsq_time,
        wall_time: start.elapsed().as_secs_f64(),
        n_history: vec![config.size()],
        error_history: vec![boundary_error],
        poles_per_corner: config.poles_per_corner.clone(),
        degree: config.degree,
        sample_count: samples.len(),
        rank: ls.rank,
        converged: true,
    };
    Ok((solution, report))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveLimits {
    pub initial_poles: usize,
    /// Cap on `Σ N_k + N_0`.
    pub max_size: usize,
    pub max_iterations: usize,
}

impl Default for AdaptiveLimits {
    fn default() -> Self {
        AdaptiveLimits {
            initial_poles: 4,
            max_size: 1500,
            max_iterations: 40,
        }
    }
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Next pole counts: +50% at corners whose residual exceeds the median, +25% elsewhere.
pub fn grow_poles(counts: &[usize], per_corner_error: &[f64]) -> Vec<usize> {
    let med = median(per_corner_error);
    counts
        .iter()
        .zip(per_corner_error)
        .map(|(&n, &r)| {
            let factor = if r > med { 1.5 } else { 1.25 };
            ((n as f64 * factor).ceil() as usize).max(n + 1)
        })
        .collect()
}

/// Refines the basis until the boundary error drops below `tolerance`, the basis
/// grows past the cap, or the error keeps growing. Returns the best iterate;
/// `converged` is false when the tolerance was not met.
pub fn solve_adaptive(
    domain: &ProblemDomain,
    tolerance: f64,
    limits: &AdaptiveLimits,
    options: &SolveOptions,
) -> Result<(GoursatSolution, SolveReport)> {
    if !(tolerance >= 0.0) {
        return Err(StokesError::InvalidArgument(format!(
            "tolerance must be non-negative, got {tolerance}"
        )));
    }
    if limits.initial_poles == 0 {
        return Err(StokesError::InvalidArgument(
            "adaptive refinement needs at least one initial pole".into(),
        ));
    }
    let start = Instant::now();
    let mut counts = vec![limits.initial_poles; domain.corners.len()];
    let mut best: Option<(GoursatSolution, SolveReport)> = None;
    let mut n_history = Vec::new();
    let mut error_history = Vec::new();
    let mut growing = 0;
    let mut converged = false;

    for _ in 0..limits.max_iterations {
        let degree = counts.iter().copied().max().unwrap_or(0);
        let config = BasisConfig::new(counts.clone(), degree, domain.length_scale);
        let (solution, report) = match solve_fixed(domain, &config, options) {
            Ok(r) => r,
            Err(e) if best.is_some() => {
                log::warn!("adaptive step with poles {counts:?} failed: {e}");
                break;
            }
            Err(e) => return Err(e),
        };
        n_history.push(config.size());
        error_history.push(report.boundary_error);
        log::info!(
            "adaptive step {}: poles {:?}, degree {}, error {:.3e}",
            n_history.len(),
            counts,
            degree,
            report.boundary_error
        );

        let best_err = best.as_ref().map_or(f64::INFINITY, |b| b.1.boundary_error);
        if report.boundary_error >= 2.0 * best_err {
            growing += 1;
        } else {
            growing = 0;
        }
        let err = report.boundary_error;
        let next = grow_poles(&counts, &report.per_corner_error);
        if err < best_err {
            best = Some((solution, report));
        }
        if err < tolerance {
            converged = true;
            break;
        }
        if growing >= 2 {
            break;
        }
        let next_size = next.iter().sum::<usize>() + next.iter().copied().max().unwrap_or(0);
        if next_size > limits.max_size {
            break;
        }
        counts = next;
    }

    let (solution, mut report) = best.ok_or_else(|| {
        StokesError::NoConvergence("adaptive loop ran no iterations".into())
    })?;
    if !converged {
        log::warn!(
            "tolerance {tolerance:.1e} not reached; best boundary error {:.3e}",
            report.boundary_error
        );
    }
    report.iterations = n_history.len();
    report.n_history = n_history;
    report.error_history = error_history;
    report.wall_time = start.elapsed().as_secs_f64();
    report.converged = converged;
    Ok((solution, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases::case_lid_driven_cavity;
    use crate::geometry::SamplePoint;

    const PSI0: f64 = 0.11790231118443;

    fn cavity_solve(poles: usize, degree: usize) -> (GoursatSolution, SolveReport) {
        let case = case_lid_driven_cavity().unwrap();
        let config = BasisConfig::new(vec![poles; 4], degree, case.domain.length_scale);
        solve_fixed(&case.domain, &config, &case.solve_options()).unwrap()
    }

    fn psi0_error(solution: &GoursatSolution) -> f64 {
        (solution.stream(Complex64::new(0.0, 0.0)).unwrap().abs() - PSI0).abs()
    }

    #[test]
    fn cavity_reference_values() {
        let (sol, rep) = cavity_solve(24, 24);
        assert!(psi0_error(&sol) < 1e-11, "{}", psi0_error(&sol));
        assert_eq!(rep.coefficients.len(), 4 * 121);
        assert!(rep.boundary_error < 1e-8);
        assert!(psi0_error(&cavity_solve(6, 24).0) < 5e-6);
        assert!(psi0_error(&cavity_solve(24, 0).0) < 1e-10);
    }

    #[test]
    fn corner_residuals_partition_the_boundary_residual() {
        let case = case_lid_driven_cavity().unwrap();
        let config = BasisConfig::new(vec![8; 4], 8, case.domain.length_scale);
        let options = case.solve_options();
        let (_, rep) = solve_fixed(&case.domain, &config, &options).unwrap();

        let samples: Vec<SamplePoint> = case.domain.sample_boundary(&options.sampling, &config, 1.0);
        let poles = place_all_poles(&case.domain, &config).unwrap();
        let z: Vec<Complex64> = samples.iter().map(|s| s.z).collect();
        let (basis, eval) = orthogonalize(&z, &poles, config.degree, config.joint_poles).unwrap();
        let assembly = AssemblyOptions {
            weighting: options.weighting,
            gauge: resolve_gauge(&case.domain, &options),
        };
        let system = assemble(&case.domain, &samples, &basis, &eval, &assembly).unwrap();
        let ls = least_squares(&system.matrix, &system.rhs).unwrap();
        let boundary: f64 = (0..system.boundary_rows())
            .map(|row| ls.residual[row] * ls.residual[row])
            .sum();
        let parts: f64 = rep.per_corner_error.iter().map(|r| r * r).sum();
        assert!(rep.per_corner_error.iter().all(|&r| r >= 0.0));
        assert!((parts - boundary).abs() <= 1e-12 * boundary, "{parts} vs {boundary}");
    }

    #[test]
    fn solves_are_deterministic() {
        let (_, a) = cavity_solve(10, 10);
        let (_, b) = cavity_solve(10, 10);
        assert_eq!(a.coefficients, b.coefficients);
        assert_eq!(a.boundary_error.to_bits(), b.boundary_error.to_bits());
    }

    #[test]
    fn invalid_densities_are_rejected() {
        let case = case_lid_driven_cavity().unwrap();
        let options = SolveOptions {
            check_density: 0.0,
            ..case.solve_options()
        };
        assert!(matches!(
            solve_fixed(&case.domain, &case.basis, &options),
            Err(StokesError::InvalidArgument(_))
        ));
    }

    #[test]
    fn pole_growth_favours_worse_corners() {
        assert_eq!(grow_poles(&[4, 4, 4, 4], &[3.0, 2.0, 1.0, 0.5]), vec![6, 6, 5, 5]);
        assert_eq!(grow_poles(&[1, 1], &[1.0, 1.0]), vec![2, 2]);
        assert_eq!(grow_poles(&[10, 10, 10], &[0.0, 5.0, 1.0]), vec![13, 15, 13]);
    }

    #[test]
    fn adaptive_meets_tolerance_with_more_poles_on_top() {
        let case = case_lid_driven_cavity().unwrap();
        let (sol, rep) =
            solve_adaptive(&case.domain, 1e-8, &AdaptiveLimits::default(), &case.solve_options()).unwrap();
        assert!(rep.converged);
        assert!(rep.boundary_error < 1e-8);
        // corners: (1,1), (−1,1), (−1,−1), (1,−1)
        let p = &rep.poles_per_corner;
        assert!(p[0] > p[2] && p[1] > p[3], "{p:?}");
        assert_eq!(rep.n_history.len(), rep.iterations);
        assert!(psi0_error(&sol) < 1e-7);
    }

    #[test]
    fn adaptive_loose_tolerance_stops_at_once() {
        let case = case_lid_driven_cavity().unwrap();
        let (_, rep) =
            solve_adaptive(&case.domain, 1.0, &AdaptiveLimits::default(), &case.solve_options()).unwrap();
        assert_eq!(rep.iterations, 1);
        assert!(rep.converged);
        assert_eq!(rep.poles_per_corner, vec![4; 4]);
    }

    #[test]
    fn adaptive_zero_tolerance_returns_best_iterate() {
        let case = case_lid_driven_cavity().unwrap();
        let limits = AdaptiveLimits {
            max_size: 200,
            ..AdaptiveLimits::default()
        };
        let (_, rep) = solve_adaptive(&case.domain, 0.0, &limits, &case.solve_options()).unwrap();
        assert!(!rep.converged);
        let best = rep.error_history.iter().copied().fold(f64::INFINITY, f64::min);
        assert_eq!(rep.boundary_error, best);
        assert!(rep.poles_per_corner.iter().sum::<usize>() + rep.degree <= 200);
        assert!(solve_adaptive(&case.domain, -1.0, &limits, &case.solve_options()).is_err());
    }
}
