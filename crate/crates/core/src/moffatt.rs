//! Corner-eddy asymptotics for Stokes flow in a wedge of angle `2α`.
//!
//! Near a corner the stream function behaves like
//! `Re{A0 r^λ [cos(λα) cos((λ−2)θ) − cos((λ−2)α) cos(λθ)]}` with `θ` measured
//! from the bisector, and `λ` a root of `sin(2α(λ−1)) + (λ−1) sin(2α) = 0`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, StokesError};
use crate::evaluation::GoursatSolution;

/// Wedge angle above which the eigenvalues are real (no eddies).
pub const CRITICAL_ANGLE_DEG: f64 = 146.3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EddyExponent {
    pub half_angle: f64,
    pub lambda: Complex64,
    pub residual: f64,
    /// True when the wedge is too wide for eddies and `λ` is the smallest real root.
    pub real_root: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EddyMetrics {
    /// Ratio of successive eddy sizes.
    pub scale_ratio: f64,
    pub stream_ratio: f64,
    pub velocity_ratio: f64,
}

/// `sin(2αμ) + μ sin 2α` with `μ = λ − 1`.
pub fn eigen_residual(two_alpha: f64, lambda: Complex64) -> Complex64 {
    let mu = lambda - 1.0;
    (mu * two_alpha).sin() + mu * two_alpha.sin()
}

fn newton(two_alpha: f64, mut mu: Complex64) -> Option<Complex64> {
    let s = two_alpha.sin();
    for _ in 0..100 {
        let f = (mu * two_alpha).sin() + mu * s;
        let df = (mu * two_alpha).cos() * two_alpha + s;
        if df.norm() == 0.0 {
            return None;
        }
        let mut step = f / df;
        // damp large steps so the iteration stays on the tracked branch
        let cap = 0.5 * mu.norm().max(0.5);
        if step.norm() > cap {
            step *= cap / step.norm();
        }
        mu -= step;
        if !mu.is_finite() {
            return None;
        }
        if step.norm() <= 1e-15 * mu.norm().max(1.0) {
            break;
        }
    }
    let r = ((mu * two_alpha).sin() + mu * s).norm();
    (r <= 1e-12).then_some(mu)
}

fn smallest_real_root(two_alpha: f64) -> Option<f64> {
    let s = two_alpha.sin();
    let f = |mu: f64| (two_alpha * mu).sin() + mu * s;
    let step = 1e-3;
    let mut a = 1e-6;
    let mut fa = f(a);
    while a < 50.0 {
        let b = a + step;
        let fb = f(b);
        if fa == 0.0 {
            return Some(a);
        }
        if fa * fb < 0.0 {
            let (mut lo, mut hi, mut flo) = (a, b, fa);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let fm = f(mid);
                if fm * flo > 0.0 {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
                if hi - lo <= 4.0 * f64::EPSILON * hi {
                    break;
                }
            }
            return Some(0.5 * (lo + hi));
        }
        a = b;
        fa = fb;
    }
    None
}

/// Dominant eddy exponent for a wedge of total angle `two_alpha` (radians).
///
/// The complex root is tracked from the right-angle value in steps of at most
/// 5°. Above the critical angle the smallest real root `λ > 1` is returned
/// with `real_root` set.
pub fn eddy_exponent(two_alpha: f64) -> Result<EddyExponent> {
    if !(two_alpha > 0.0 && two_alpha < PI) {
        return Err(StokesError::InvalidArgument(format!(
            "wedge angle must lie in (0°, 180°), got {:.4}°",
            two_alpha.to_degrees()
        )));
    }
    let finish = |lambda: Complex64, real_root: bool| {
        let lambda = if lambda.im < 0.0 { lambda.conj() } else { lambda };
        EddyExponent {
            half_angle: 0.5 * two_alpha,
            lambda,
            residual: eigen_residual(two_alpha, lambda).norm(),
            real_root,
        }
    };
    let real = || {
        smallest_real_root(two_alpha)
            .map(|mu| finish(Complex64::new(1.0 + mu, 0.0), true))
            .ok_or_else(|| {
                StokesError::NoConvergence(format!(
                    "no real eigenvalue found for wedge angle {:.4}°",
                    two_alpha.to_degrees()
                ))
            })
    };

    let right = PI / 2.0;
    let mut angle = right;
    let mut mu = newton(angle, Complex64::new(2.7396, 1.1190))
        .ok_or_else(|| StokesError::NoConvergence("right-angle eigenvalue".into()))?;
    let max_step = 5f64.to_radians();
    let steps = ((two_alpha - right).abs() / max_step).ceil().max(1.0) as usize;
    for k in 1..=steps {
        let next = right + (two_alpha - right) * k as f64 / steps as f64;
        // μ scales roughly like 1/(2α)
        let guess = mu * (angle / next);
        match newton(next, guess) {
            Some(m) if m.im.abs() > 1e-9 * m.norm() => {
                mu = m;
                angle = next;
            }
            _ => {
                if next.to_degrees() > CRITICAL_ANGLE_DEG - 5.0 {
                    return real();
                }
                return Err(StokesError::NoConvergence(format!(
                    "lost the eigenvalue branch at {:.3}°",
                    next.to_degrees()
                )));
            }
        }
    }
    Ok(finish(mu + 1.0, false))
}

/// Angular factor `cos(λα) cos((λ−2)θ) − cos((λ−2)α) cos(λθ)`.
pub fn angular_factor(lambda: Complex64, alpha: f64, theta: f64) -> Complex64 {
    (lambda * alpha).cos() * ((lambda - 2.0) * theta).cos()
        - ((lambda - 2.0) * alpha).cos() * (lambda * theta).cos()
}

/// `Re{A0 r^λ F(θ)}` with `θ` measured from the corner bisector.
pub fn asymptotic_psi(r: f64, theta: f64, lambda: Complex64, alpha: f64, a0: Complex64) -> f64 {
    if a0 == Complex64::new(0.0, 0.0) {
        return 0.0;
    }
    (a0 * Complex64::new(r, 0.0).powc(lambda) * angular_factor(lambda, alpha, theta)).re
}

/// `|A0| r^{Re λ} |F(θ)|`, the magnitude the oscillating model stays under.
pub fn asymptotic_envelope(r: f64, theta: f64, lambda: Complex64, alpha: f64, a0: Complex64) -> f64 {
    a0.norm() * r.powf(lambda.re) * angular_factor(lambda, alpha, theta).norm()
}

/// Least-squares `A0` for samples `ψ(r_i)` taken along the ray at angle `theta`
/// from the bisector. Rows are scaled by `r^{−Re λ}` so every decade counts.
pub fn fit_amplitude_data(
    radii: &[f64],
    psi: &[f64],
    lambda: Complex64,
    alpha: f64,
    theta: f64,
) -> Result<Complex64> {
    if radii.is_empty() || radii.len() != psi.len() {
        return Err(StokesError::InvalidArgument(
            "amplitude fit needs matching, non-empty radius and value lists".into(),
        ));
    }
    let factor = angular_factor(lambda, alpha, theta);
    // Re{A0 m} = Re(A0) Re(m) − Im(A0) Im(m); normal equations of a 2-column system
    let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let mut scale: f64 = 0.0;
    for (&r, &p) in radii.iter().zip(psi) {
        if !(r > 0.0) {
            return Err(StokesError::InvalidArgument(format!("radius {r} is not positive")));
        }
        let w = r.powf(-lambda.re);
        let m = Complex64::new(r, 0.0).powc(lambda) * factor * w;
        let (x, y) = (m.re, -m.im);
        let q = p * w;
        scale = scale.max(q.abs());
        a11 += x * x;
        a12 += x * y;
        a22 += y * y;
        b1 += x * q;
        b2 += y * q;
    }
    let det = a11 * a22 - a12 * a12;
    if scale == 0.0 || !(det.abs() > 1e-14 * (a11 * a22).max(f64::MIN_POSITIVE)) {
        return Err(StokesError::InvalidArgument(
            "amplitude fit is degenerate (data vanish or do not oscillate)".into(),
        ));
    }
    let re = (a22 * b1 - a12 * b2) / det;
    let im = (a11 * b2 - a12 * b1) / det;
    Ok(Complex64::new(re, im))
}

/// Direction of a ray leaving a corner at angle `theta` from its interior bisector.
pub fn ray_direction(solution: &GoursatSolution, corner: usize, theta: f64) -> Result<Complex64> {
    let c = solution.domain.corners.get(corner).ok_or_else(|| {
        StokesError::InvalidArgument(format!("corner {corner} does not exist"))
    })?;
    Ok(Complex64::from_polar(1.0, c.interior_bisector_angle() + theta))
}

/// `ψ` at log-spaced radii along a ray from a corner.
pub fn sample_ray(
    solution: &GoursatSolution,
    corner: usize,
    theta: f64,
    r_range: (f64, f64),
    count: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (r0, r1) = r_range;
    if !(r0 > 0.0 && r1 > r0) || count < 2 {
        return Err(StokesError::InvalidArgument(format!(
            "radius range ({r0}, {r1}) with {count} points is empty"
        )));
    }
    let dir = ray_direction(solution, corner, theta)?;
    let w = solution.domain.corners[corner].position;
    let radii: Vec<f64> = (0..count)
        .map(|i| r0 * (r1 / r0).powf(i as f64 / (count - 1) as f64))
        .collect();
    let pts: Vec<Complex64> = radii.iter().map(|&r| w + dir * r).collect();
    let values = solution.eval_many(&pts)?;
    let psi = values.iter().zip(&pts).map(|(v, z)| v.stream(*z)).collect();
    Ok((radii, psi))
}

/// Fits `A0` to the computed stream function along a ray from `corner`.
pub fn fit_amplitude(
    solution: &GoursatSolution,
    corner: usize,
    lambda: Complex64,
    alpha: f64,
    theta: f64,
    r_range: (f64, f64),
) -> Result<Complex64> {
    let (radii, psi) = sample_ray(solution, corner, theta, r_range, 200)?;
    fit_amplitude_data(&radii, &psi, lambda, alpha, theta)
}

/// Radii (nearest the corner first) where `ψ` changes sign along the ray,
/// scanning `count` log-spaced points in `r_range` and refining by bisection.
pub fn separation_radii(
    solution: &GoursatSolution,
    corner: usize,
    theta: f64,
    r_range: (f64, f64),
    count: usize,
) -> Result<Vec<f64>> {
    let (radii, psi) = sample_ray(solution, corner, theta, r_range, count)?;
    let dir = ray_direction(solution, corner, theta)?;
    let w = solution.domain.corners[corner].position;
    let at = |r: f64| solution.stream(w + dir * r);
    let mut out = Vec::new();
    for i in 1..radii.len() {
        if psi[i - 1] == 0.0 || psi[i - 1].signum() == psi[i].signum() {
            continue;
        }
        let (mut lo, mut hi, mut flo) = (radii[i - 1], radii[i], psi[i - 1]);
        for _ in 0..60 {
            let mid = (lo * hi).sqrt();
            let fm = at(mid)?;
            if fm.signum() == flo.signum() {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        out.push((lo * hi).sqrt());
    }
    Ok(out)
}

/// Ratios between successive eddies: size `ρ = e^{π/Im λ}`, stream function
/// `ρ^{Re λ}` and velocity `ρ^{Re λ − 1}`.
pub fn eddy_metrics(lambda: Complex64) -> Result<EddyMetrics> {
    if !(lambda.im.abs() > 0.0) {
        return Err(StokesError::InvalidArgument(
            "real exponent: the corner has no eddies".into(),
        ));
    }
    let rho = (PI / lambda.im.abs()).exp();
    Ok(EddyMetrics {
        scale_ratio: rho,
        stream_ratio: rho.powf(lambda.re),
        velocity_ratio: rho.powf(lambda.re - 1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn deg(d: f64) -> f64 {
        d.to_radians()
    }

    #[test]
    fn right_angle_root() {
        let e = eddy_exponent(deg(90.0)).unwrap();
        assert!((e.lambda.re - 3.740).abs() < 5e-3);
        assert!((e.lambda.im - 1.119).abs() < 5e-3);
        assert!(e.residual <= 1e-12);
        assert!(!e.real_root);
        assert!(eigen_residual(deg(90.0), e.lambda.conj()).norm() <= 1e-12);
    }

    #[test]
    fn sharp_wedge_root() {
        let e = eddy_exponent(deg(28.5)).unwrap();
        assert!((e.lambda.re - 9.485).abs() < 5e-3, "{}", e.lambda);
        assert!((e.lambda.im - 4.434).abs() < 5e-3, "{}", e.lambda);
        assert!(e.residual <= 1e-12);
    }

    #[test]
    fn wide_wedge_is_real() {
        let e = eddy_exponent(deg(160.0)).unwrap();
        assert!(e.real_root);
        assert_eq!(e.lambda.im, 0.0);
        assert!(e.lambda.re > 1.0);
        assert!(e.residual <= 1e-12);
        assert!(eddy_metrics(e.lambda).is_err());
        assert!(eddy_exponent(deg(180.0)).is_err());
        assert!(eddy_exponent(0.0).is_err());
    }

    #[test]
    fn imaginary_part_decreases_with_angle() {
        let mut prev = f64::INFINITY;
        for d in (20..=140).step_by(10) {
            let e = eddy_exponent(deg(d as f64)).unwrap();
            assert!(!e.real_root);
            assert!(e.lambda.im < prev, "{d}: {}", e.lambda);
            prev = e.lambda.im;
        }
    }

    #[test]
    fn right_angle_metrics() {
        let e = eddy_exponent(deg(90.0)).unwrap();
        let m = eddy_metrics(e.lambda).unwrap();
        assert!((m.scale_ratio - 16.6).abs() < 0.5);
        assert!((m.velocity_ratio / 2200.0 - 1.0).abs() < 0.1);
        assert!((m.stream_ratio / 36000.0 - 1.0).abs() < 0.1);
        let e = eddy_exponent(deg(28.5)).unwrap();
        let m = eddy_metrics(e.lambda).unwrap();
        assert!((m.stream_ratio / 830.0 - 1.0).abs() < 0.05, "{}", m.stream_ratio);
    }

    #[test]
    fn scale_ratio_decreases_in_imaginary_part() {
        let a = eddy_metrics(Complex64::new(3.0, 1.0)).unwrap().scale_ratio;
        let b = eddy_metrics(Complex64::new(3.0, 2.0)).unwrap().scale_ratio;
        assert!(b < a);
    }

    #[test]
    fn model_satisfies_no_slip() {
        let e = eddy_exponent(deg(90.0)).unwrap();
        let alpha = e.half_angle;
        let a0 = Complex64::new(0.3, -1.2);
        let r = 0.05;
        let scale = asymptotic_envelope(r, 0.0, e.lambda, alpha, a0);
        for side in [alpha, -alpha] {
            let v = asymptotic_psi(r, side, e.lambda, alpha, a0);
            assert!(v.abs() <= 1e-10 * scale);
            let h = 1e-6;
            let dv = (asymptotic_psi(r, side + h, e.lambda, alpha, a0)
                - asymptotic_psi(r, side - h, e.lambda, alpha, a0))
                / (2.0 * h);
            assert!(dv.abs() <= 1e-8 * scale, "{dv}");
        }
        assert_eq!(asymptotic_psi(r, 0.1, e.lambda, alpha, Complex64::new(0.0, 0.0)), 0.0);
    }

    #[test]
    fn radial_scaling_by_eddy_size() {
        let e = eddy_exponent(deg(90.0)).unwrap();
        let rho = eddy_metrics(e.lambda).unwrap().scale_ratio;
        let a0 = Complex64::new(1.0, 0.5);
        let r = 1e-3;
        let inner = asymptotic_psi(r, 0.0, e.lambda, e.half_angle, a0);
        let outer = asymptotic_psi(rho * r, 0.0, e.lambda, e.half_angle, a0);
        assert_relative_eq!(outer / inner, -rho.powf(e.lambda.re), max_relative = 1e-10);
    }

    #[test]
    fn synthetic_amplitude_recovered() {
        let e = eddy_exponent(deg(90.0)).unwrap();
        let a0 = Complex64::new(-0.7, 2.1);
        let radii: Vec<f64> = (0..80).map(|i| 1e-4 * 1.1f64.powi(i)).collect();
        let psi: Vec<f64> = radii
            .iter()
            .map(|&r| asymptotic_psi(r, 0.2, e.lambda, e.half_angle, a0))
            .collect();
        let fit = fit_amplitude_data(&radii, &psi, e.lambda, e.half_angle, 0.2).unwrap();
        assert_relative_eq!(fit.re, a0.re, max_relative = 1e-10);
        assert_relative_eq!(fit.im, a0.im, max_relative = 1e-10);
        assert!(fit_amplitude_data(&[], &[], e.lambda, e.half_angle, 0.0).is_err());
        let zeros = vec![0.0; radii.len()];
        assert!(fit_amplitude_data(&radii, &zeros, e.lambda, e.half_angle, 0.0).is_err());
    }
}
