//! Dense overdetermined least squares.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::householder;
use faer::prelude::*;
use faer::{Conj, Mat, MatRef, Par};
use serde::{Deserialize, Serialize};

use crate::dense::RealMatrix;
use crate::error::{Result, StokesError};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LstsqMethod {
    /// Householder QR, switching to the pivoted path when `R` shows a tiny pivot.
    #[default]
    Auto,
    /// Householder QR without pivoting.
    Householder,
    /// Column-pivoted QR with rank truncation and the minimum-norm completion.
    Pivoted,
}

#[derive(Clone, Debug)]
pub struct LeastSquares {
    pub solution: Vec<f64>,
    /// `b − Ax`.
    pub residual: Vec<f64>,
    pub residual_norm: f64,
    pub rank: usize,
    pub rank_deficient: bool,
}

fn to_faer(a: &RealMatrix) -> Mat<f64> {
    Mat::from_fn(a.rows(), a.cols(), |i, j| a.get(i, j))
}

fn rank_tolerance(m: usize, n: usize, largest: f64) -> f64 {
    m.max(n) as f64 * f64::EPSILON * largest
}

/// Minimises `||A x - b||` for a tall matrix.
pub fn least_squares(a: &RealMatrix, b: &[f64]) -> Result<LeastSquares> {
    least_squares_with(a, b, LstsqMethod::Auto)
}

pub fn least_squares_with(a: &RealMatrix, b: &[f64], method: LstsqMethod) -> Result<LeastSquares> {
    let (m, n) = (a.rows(), a.cols());
    if b.len() != m {
        return Err(StokesError::Dimension(format!(
            "right-hand side has {} entries for {m} rows",
            b.len()
        )));
    }
    if m < n {
        return Err(StokesError::Dimension(format!(
            "system is underdetermined ({m} rows, {n} columns)"
        )));
    }
    if n == 0 {
        return Err(StokesError::Dimension("system has no columns".into()));
    }
    if !a.is_finite() || b.iter().any(|x| !x.is_finite()) {
        return Err(StokesError::NonFinite);
    }

    let fa = to_faer(a);
    let fb = Mat::from_fn(m, 1, |i, _| b[i]);

    let (solution, rank) = match method {
        LstsqMethod::Pivoted => pivoted(&fa, &fb)?,
        LstsqMethod::Householder | LstsqMethod::Auto => {
            let qr = fa.qr();
            let r = qr.thin_R();
            let diag: Vec<f64> = (0..n).map(|k| r[(k, k)].abs()).collect();
            let largest = diag.iter().cloned().fold(0.0, f64::max);
            let tol = rank_tolerance(m, n, largest);
            let tiny = diag.iter().filter(|d| **d <= tol).count();
            if method == LstsqMethod::Auto && tiny > 0 {
                log::warn!("{tiny} tiny pivots in Householder QR; switching to pivoted QR");
                pivoted(&fa, &fb)?
            } else {
                let x = qr.solve_lstsq(&fb);
                ((0..n).map(|i| x[(i, 0)]).collect(), n - tiny)
            }
        }
    };

    if solution.iter().any(|x| !x.is_finite()) {
        return Err(StokesError::NonFinite);
    }
    let ax = a.mul_vec(&solution);
    let residual: Vec<f64> = ax.iter().zip(b).map(|(p, q)| q - p).collect();
    let residual_norm = residual.iter().map(|r| r * r).sum::<f64>().sqrt();
    Ok(LeastSquares {
        solution,
        residual,
        residual_norm,
        rank,
        rank_deficient: rank < n,
    })
}

fn apply_qt(basis: MatRef<'_, f64>, coeff: MatRef<'_, f64>, rhs: &mut Mat<f64>) {
    let mut buf = MemBuffer::new(
        householder::apply_block_householder_sequence_transpose_on_the_left_in_place_scratch::<f64>(
            basis.nrows(),
            coeff.nrows(),
            rhs.ncols(),
        ),
    );
    householder::apply_block_householder_sequence_transpose_on_the_left_in_place_with_conj(
        basis,
        coeff,
        Conj::No,
        rhs.as_mut(),
        Par::Seq,
        MemStack::new(&mut buf),
    );
}

/// Column-pivoted QR, rank-truncated, with the minimum-norm solution inside the
/// retained column space.
fn pivoted(a: &Mat<f64>, b: &Mat<f64>) -> Result<(Vec<f64>, usize)> {
    let (m, n) = (a.nrows(), a.ncols());
    let qr = a.col_piv_qr();
    let r = qr.thin_R();
    let tol = rank_tolerance(m, n, r[(0, 0)].abs());
    let rank = (0..n).take_while(|&k| r[(k, k)].abs() > tol).count();
    if rank == 0 {
        return Err(StokesError::DegenerateColumn(0));
    }

    let mut c = b.clone();
    apply_qt(qr.Q_basis(), qr.Q_coeff(), &mut c);

    let y: Vec<f64> = if rank == n {
        back_substitute(r, &(0..n).map(|i| c[(i, 0)]).collect::<Vec<_>>())
    } else {
        log::warn!("least-squares matrix has numerical rank {rank} of {n}");
        // R[..rank, ..] y = c[..rank]: factor its transpose to get the minimum-norm y.
        let t = Mat::from_fn(n, rank, |i, j| r[(j, i)]);
        let tqr = t.qr();
        let r2 = tqr.thin_R();
        let mut u = vec![0.0; rank];
        for i in 0..rank {
            let mut s = c[(i, 0)];
            for j in 0..i {
                s -= r2[(j, i)] * u[j];
            }
            u[i] = s / r2[(i, i)];
        }
        let q2 = tqr.compute_thin_Q();
        (0..n)
            .map(|i| (0..rank).map(|j| q2[(i, j)] * u[j]).sum())
            .collect()
    };

    let (forward, _) = qr.P().arrays();
    let mut x = vec![0.0; n];
    for (j, &col) in forward.iter().enumerate() {
        x[col] = y[j];
    }
    Ok((x, rank))
}

fn back_substitute(r: MatRef<'_, f64>, c: &[f64]) -> Vec<f64> {
    let n = c.len();
    let mut y = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = c[i];
        for j in i + 1..n {
            s -= r[(i, j)] * y[j];
        }
        y[i] = s / r[(i, i)];
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(m: usize, n: usize, seed: u64) -> RealMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        RealMatrix::from_fn(m, n, |_, _| rng.gen_range(-1.0..1.0))
    }

    fn svd_min_norm(a: &RealMatrix, b: &[f64]) -> Vec<f64> {
        let na = DMatrix::from_fn(a.rows(), a.cols(), |i, j| a.get(i, j));
        let nb = DVector::from_column_slice(b);
        let svd = na.svd(true, true);
        let smax = svd.singular_values.max();
        let eps = a.rows().max(a.cols()) as f64 * f64::EPSILON * smax;
        svd.solve(&nb, eps).unwrap().iter().cloned().collect()
    }

    #[test]
    fn matches_svd_on_full_rank() {
        let a = random(60, 12, 1);
        let b: Vec<f64> = (0..60).map(|i| (i as f64 * 0.3).sin()).collect();
        let oracle = svd_min_norm(&a, &b);
        for method in [LstsqMethod::Auto, LstsqMethod::Householder, LstsqMethod::Pivoted] {
            let ls = least_squares_with(&a, &b, method).unwrap();
            assert_eq!(ls.rank, 12);
            for (x, y) in ls.solution.iter().zip(&oracle) {
                assert_relative_eq!(x, y, epsilon = 1e-12, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn residual_is_orthogonal_to_columns() {
        let a = random(40, 7, 2);
        let b: Vec<f64> = (0..40).map(|i| i as f64).collect();
        let ls = least_squares(&a, &b).unwrap();
        for j in 0..7 {
            let dot: f64 = a.col(j).iter().zip(&ls.residual).map(|(p, q)| p * q).sum();
            assert!(dot.abs() < 1e-10 * ls.residual_norm.max(1.0));
        }
    }

    #[test]
    fn rank_deficient_gives_minimum_norm() {
        let mut a = random(30, 6, 3);
        // column 4 duplicates column 1, column 5 is a combination of 0 and 2
        for i in 0..30 {
            let c1 = a.get(i, 1);
            a.set(i, 4, c1);
            let c = 2.0 * a.get(i, 0) - a.get(i, 2);
            a.set(i, 5, c);
        }
        let b: Vec<f64> = (0..30).map(|i| ((i * i) % 7) as f64).collect();
        let oracle = svd_min_norm(&a, &b);
        for method in [LstsqMethod::Auto, LstsqMethod::Pivoted] {
            let ls = least_squares_with(&a, &b, method).unwrap();
            assert_eq!(ls.rank, 4);
            assert!(ls.rank_deficient);
            for (x, y) in ls.solution.iter().zip(&oracle) {
                assert_relative_eq!(x, y, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn consistent_system_is_solved_exactly() {
        let a = random(25, 5, 4);
        let x0 = [1.0, -2.0, 0.5, 3.0, -0.25];
        let b = a.mul_vec(&x0);
        let ls = least_squares(&a, &b).unwrap();
        for (x, y) in ls.solution.iter().zip(&x0) {
            assert_relative_eq!(x, y, epsilon = 1e-12);
        }
        assert!(ls.residual_norm < 1e-12);
    }

    #[test]
    fn scalar_mean() {
        let a = RealMatrix::from_rows(&[vec![1.0], vec![1.0]]);
        let ls = least_squares(&a, &[1.0, 3.0]).unwrap();
        assert_relative_eq!(ls.solution[0], 2.0, epsilon = 1e-15);
        assert_relative_eq!(ls.residual_norm, 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(ls.residual, vec![-1.0, 1.0]);
    }

    #[test]
    fn orthogonal_square_leaves_no_residual() {
        let (s, c) = 0.3f64.sin_cos();
        let a = RealMatrix::from_rows(&[vec![c, -s], vec![s, c]]);
        let ls = least_squares(&a, &[0.7, -1.9]).unwrap();
        assert!(ls.residual_norm < 1e-15);
        assert_relative_eq!(ls.solution[0], c * 0.7 - s * 1.9, epsilon = 1e-15);
    }

    #[test]
    fn matches_svd_on_200_by_50() {
        let a = random(200, 50, 8);
        let b: Vec<f64> = (0..200).map(|i| (i as f64).sqrt().cos()).collect();
        let oracle = svd_min_norm(&a, &b);
        let ls = least_squares(&a, &b).unwrap();
        for (x, y) in ls.solution.iter().zip(&oracle) {
            assert_relative_eq!(x, y, epsilon = 1e-10);
        }
    }

    #[test]
    fn shape_and_finiteness_errors() {
        let a = random(3, 5, 5);
        assert!(matches!(least_squares(&a, &[0.0; 3]), Err(StokesError::Dimension(_))));
        let a = random(6, 2, 6);
        assert!(matches!(least_squares(&a, &[0.0; 5]), Err(StokesError::Dimension(_))));
        let mut a = random(6, 2, 7);
        a.set(1, 1, f64::NAN);
        assert!(matches!(least_squares(&a, &[0.0; 6]), Err(StokesError::NonFinite)));
    }
}
