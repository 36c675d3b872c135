//! Rational + polynomial basis with exponentially clustered poles, made
//! well conditioned by Arnoldi (Stieltjes) orthogonalization.
//!
//! The polynomial part and each string of poles form separate blocks. Every
//! block is a chain `q_0 = 1, q_1, …` built by the recurrence
//!
//! ```text
//! h[k+1,k]·q_{k+1}(z) = G_k(z)·q_k(z) − Σ_{j≤k} h[j,k]·q_j(z)
//! ```
//!
//! with generator `G_k(z) = z` for the polynomial block and
//! `G_k(z) = 1/(z − β_k)` for a pole block. Columns are orthonormal in the
//! discrete inner product `⟨a, b⟩ = (1/M) Σ conj(a_i)·b_i` over the
//! construction samples. Derivatives follow by differentiating the same
//! recurrence, so new points are evaluated by replaying the stored
//! Hessenberg coefficients.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, StokesError};
use crate::geometry::{Corner, ProblemDomain};

pub const DEFAULT_SIGMA: f64 = 4.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisConfig {
    /// `N_k`, one entry per corner.
    pub poles_per_corner: Vec<usize>,
    /// Polynomial degree `N_0`.
    pub degree: usize,
    /// Clustering strength.
    pub sigma: f64,
    pub length_scale: f64,
    /// Orthogonalize all poles as a single chain instead of one chain per corner.
    #[serde(default)]
    pub joint_poles: bool,
}

impl BasisConfig {
    pub fn new(poles_per_corner: Vec<usize>, degree: usize, length_scale: f64) -> Self {
        BasisConfig {
            poles_per_corner,
            degree,
            sigma: DEFAULT_SIGMA,
            length_scale,
            joint_poles: false,
        }
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn total_poles(&self) -> usize {
        self.poles_per_corner.iter().sum()
    }

    /// Number of basis functions `N = Σ N_k + N_0 + 1`.
    pub fn size(&self) -> usize {
        self.total_poles() + self.degree + 1
    }

    pub fn validate(&self, corner_count: usize) -> Result<()> {
        if self.poles_per_corner.len() != corner_count {
            return Err(StokesError::Dimension(format!(
                "{} pole counts for {} corners",
                self.poles_per_corner.len(),
                corner_count
            )));
        }
        if !(self.sigma > 0.0) || !(self.length_scale > 0.0) {
            return Err(StokesError::InvalidArgument(format!(
                "sigma ({}) and length scale ({}) must be positive",
                self.sigma, self.length_scale
            )));
        }
        Ok(())
    }
}

/// Poles clustered at one corner, innermost first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleSet {
    pub corner_index: usize,
    pub poles: Vec<Complex64>,
}

/// `β_n = w + L·e^{iθ}·e^{−σ(√N − √n)}` for `n = 1..N`, with `θ` the
/// exterior bisector of the corner.
pub fn place_poles(
    corner_index: usize,
    corner: &Corner,
    count: usize,
    length_scale: f64,
    sigma: f64,
) -> Result<PoleSet> {
    if count == 0 {
        return Err(StokesError::InvalidArgument(
            "at least one pole per string is required".into(),
        ));
    }
    let direction = Complex64::from_polar(length_scale, corner.exterior_bisector_angle);
    let root = (count as f64).sqrt();
    let poles = (1..=count)
        .map(|n| corner.position + direction * (-sigma * (root - (n as f64).sqrt())).exp())
        .collect();
    Ok(PoleSet {
        corner_index,
        poles,
    })
}

/// Pole strings for every corner with a nonzero count. Poles that land
/// inside the closed domain are reported through `log::warn!`.
pub fn place_all_poles(domain: &ProblemDomain, config: &BasisConfig) -> Result<Vec<PoleSet>> {
    config.validate(domain.corners.len())?;
    let mut sets = Vec::new();
    for (k, (&count, corner)) in config
        .poles_per_corner
        .iter()
        .zip(&domain.corners)
        .enumerate()
    {
        if count == 0 {
            continue;
        }
        let set = place_poles(k, corner, count, config.length_scale, config.sigma)?;
        let inside = set.poles.iter().filter(|p| domain.contains(**p)).count();
        if inside > 0 {
            log::warn!(
                "{inside} of {count} poles at corner {k} lie inside the domain; \
                 consider overriding the bisector direction"
            );
        }
        sets.push(set);
    }
    Ok(sets)
}

/// Complex matrix stored column by column.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn col(&self, j: usize) -> &[Complex64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [Complex64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[j * self.rows + i]
    }

    /// Row `i` as a vector.
    pub fn row(&self, i: usize) -> Vec<Complex64> {
        (0..self.cols).map(|j| self.get(i, j)).collect()
    }
}

/// Upper-Hessenberg recurrence coefficients; column `k` holds
/// `h[0..=k, k]` followed by the (real, positive) subdiagonal `h[k+1, k]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hessenberg {
    columns: Vec<Vec<Complex64>>,
}

impl Hessenberg {
    /// Entry `h[j, k]`, zero below the subdiagonal.
    pub fn get(&self, j: usize, k: usize) -> Complex64 {
        self.columns[k]
            .get(j)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn subdiagonal(&self, k: usize) -> f64 {
        self.columns[k][k + 1].re
    }

    /// Number of recurrence steps.
    pub fn steps(&self) -> usize {
        self.columns.len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum BlockKind {
    Polynomial,
    /// `corner` is `None` for a jointly orthogonalized string.
    Poles {
        corner: Option<usize>,
        poles: Vec<Complex64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisBlock {
    pub kind: BlockKind,
    pub hessenberg: Hessenberg,
}

impl BasisBlock {
    /// Number of basis functions contributed by this block.
    pub fn width(&self) -> usize {
        match self.kind {
            BlockKind::Polynomial => self.hessenberg.steps() + 1,
            BlockKind::Poles { .. } => self.hessenberg.steps(),
        }
    }
}

/// Orthogonalized basis: the polynomial block first, then the pole blocks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrthoBasis {
    pub blocks: Vec<BasisBlock>,
    pub sample_count: usize,
}

/// Basis values and derivatives, one row per point and one column per
/// basis function.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisEvaluation {
    pub values: CMatrix,
    pub derivatives: CMatrix,
}

impl OrthoBasis {
    pub fn size(&self) -> usize {
        self.blocks.iter().map(BasisBlock::width).sum()
    }

    pub fn degree(&self) -> usize {
        self.blocks
            .iter()
            .find(|b| b.kind == BlockKind::Polynomial)
            .map(|b| b.hessenberg.steps())
            .unwrap_or(0)
    }

    pub fn poles(&self) -> Vec<Complex64> {
        self.blocks
            .iter()
            .flat_map(|b| match &b.kind {
                BlockKind::Poles { poles, .. } => poles.clone(),
                BlockKind::Polynomial => Vec::new(),
            })
            .collect()
    }

    /// Column ranges of each block within the full basis.
    pub fn block_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut start = 0;
        self.blocks
            .iter()
            .map(|b| {
                let r = start..start + b.width();
                start = r.end;
                r
            })
            .collect()
    }

    /// Coefficients of `a + b·z` in the polynomial block (`p_0`, `p_1`).
    /// Requires degree ≥ 1 for a nonzero `b`.
    pub fn linear_coefficients(&self, a: Complex64, b: Complex64) -> Result<Vec<Complex64>> {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); self.size()];
        let poly = &self.blocks[0];
        if poly.kind != BlockKind::Polynomial {
            return Err(StokesError::InvalidArgument("basis has no polynomial block".into()));
        }
        coeffs[0] = a;
        if b != Complex64::new(0.0, 0.0) {
            if poly.hessenberg.steps() == 0 {
                return Err(StokesError::InvalidArgument(
                    "degree-0 basis cannot represent z".into(),
                ));
            }
            // z = h10·p1 + h00·p0
            let h = &poly.hessenberg;
            coeffs[0] += b * h.get(0, 0);
            coeffs[1] = b * h.subdiagonal(0);
        }
        Ok(coeffs)
    }
}

#[derive(Clone, Copy)]
enum Generator {
    Multiply,
    Pole(Complex64),
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn axpy(alpha: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi -= alpha * xi;
    }
}

type ChainColumns = (Hessenberg, Vec<Vec<Complex64>>, Vec<Vec<Complex64>>);

/// Builds one chain; returns the Hessenberg table and the value/derivative
/// columns including `q_0`.
fn orthogonalize_chain(
    z: &[Complex64],
    generators: &[Generator],
    block: usize,
) -> Result<ChainColumns> {
    let m = z.len();
    let scale = (m as f64).sqrt();
    let zero = Complex64::new(0.0, 0.0);
    let mut q = vec![vec![Complex64::new(1.0, 0.0); m]];
    let mut d = vec![vec![zero; m]];
    let mut columns = Vec::with_capacity(generators.len());

    for (k, gen) in generators.iter().enumerate() {
        let mut v: Vec<Complex64> = match gen {
            Generator::Multiply => z.iter().zip(&q[k]).map(|(zi, qi)| zi * qi).collect(),
            Generator::Pole(beta) => {
                let mut v = Vec::with_capacity(m);
                for (zi, qi) in z.iter().zip(&q[k]) {
                    let diff = zi - beta;
                    if diff == zero {
                        return Err(StokesError::SingularEvaluation { z: *zi });
                    }
                    v.push(qi / diff);
                }
                v
            }
        };
        let initial = norm(&v);
        let mut h = vec![zero; k + 2];
        // Modified Gram–Schmidt with one reorthogonalization pass when the
        // first pass cancels heavily.
        for pass in 0..2 {
            let before = norm(&v);
            for j in 0..=k {
                let c = inner(&q[j], &v) / m as f64;
                h[j] += c;
                axpy(c, &q[j], &mut v);
            }
            if pass == 0 && norm(&v) > 0.7 * before {
                break;
            }
        }
        let sub = norm(&v) / scale;
        if !sub.is_finite() || sub <= f64::EPSILON * initial / scale {
            return Err(StokesError::Breakdown {
                block,
                column: k,
                value: sub,
            });
        }
        h[k + 1] = Complex64::new(sub, 0.0);
        for x in v.iter_mut() {
            *x /= sub;
        }

        // Differentiated recurrence at the samples.
        let mut dv: Vec<Complex64> = match gen {
            Generator::Multiply => (0..m).map(|i| z[i] * d[k][i] + q[k][i]).collect(),
            Generator::Pole(beta) => (0..m)
                .map(|i| {
                    let zeta = 1.0 / (z[i] - beta);
                    zeta * d[k][i] - zeta * zeta * q[k][i]
                })
                .collect(),
        };
        for j in 0..=k {
            axpy(h[j], &d[j], &mut dv);
        }
        for x in dv.iter_mut() {
            *x /= sub;
        }

        q.push(v);
        d.push(dv);
        columns.push(h);
    }
    Ok((Hessenberg { columns }, q, d))
}

fn chain_generators(kind: &BlockKind, steps: usize) -> Vec<Generator> {
    match kind {
        BlockKind::Polynomial => vec![Generator::Multiply; steps],
        BlockKind::Poles { poles, .. } => poles.iter().map(|&p| Generator::Pole(p)).collect(),
    }
}

/// Orthogonalizes the basis over `samples` and returns it together with the
/// basis and derivative matrices at the samples.
pub fn orthogonalize(
    samples: &[Complex64],
    pole_sets: &[PoleSet],
    degree: usize,
    joint_poles: bool,
) -> Result<(OrthoBasis, BasisEvaluation)> {
    let total = degree + 1 + pole_sets.iter().map(|p| p.poles.len()).sum::<usize>();
    if samples.len() < total {
        return Err(StokesError::Dimension(format!(
            "{} samples cannot support {} basis functions",
            samples.len(),
            total
        )));
    }
    let mut kinds = vec![BlockKind::Polynomial];
    if joint_poles {
        let poles: Vec<Complex64> = pole_sets.iter().flat_map(|p| p.poles.clone()).collect();
        if !poles.is_empty() {
            kinds.push(BlockKind::Poles {
                corner: None,
                poles,
            });
        }
    } else {
        kinds.extend(pole_sets.iter().map(|p| BlockKind::Poles {
            corner: Some(p.corner_index),
            poles: p.poles.clone(),
        }));
    }

    let m = samples.len();
    let mut values = CMatrix::zeros(m, total);
    let mut derivatives = CMatrix::zeros(m, total);
    let mut blocks = Vec::with_capacity(kinds.len());
    let mut col = 0;
    for (b, kind) in kinds.into_iter().enumerate() {
        let gens = chain_generators(&kind, degree);
        let (hessenberg, q, d) = orthogonalize_chain(samples, &gens, b)?;
        let skip = match kind {
            BlockKind::Polynomial => 0,
            BlockKind::Poles { .. } => 1,
        };
        for (qj, dj) in q.iter().zip(&d).skip(skip) {
            values.col_mut(col).copy_from_slice(qj);
            derivatives.col_mut(col).copy_from_slice(dj);
            col += 1;
        }
        blocks.push(BasisBlock { kind, hessenberg });
    }
    Ok((
        OrthoBasis {
            blocks,
            sample_count: m,
        },
        BasisEvaluation {
            values,
            derivatives,
        },
    ))
}

/// Replays the stored recurrences at arbitrary points.
pub fn evaluate_basis(basis: &OrthoBasis, points: &[Complex64]) -> Result<BasisEvaluation> {
    let m = points.len();
    let n = basis.size();
    let zero = Complex64::new(0.0, 0.0);
    let mut values = CMatrix::zeros(m, n);
    let mut derivatives = CMatrix::zeros(m, n);
    let mut col = 0;
    for block in &basis.blocks {
        let steps = block.hessenberg.steps();
        let gens = chain_generators(&block.kind, steps);
        let mut q = vec![vec![Complex64::new(1.0, 0.0); m]];
        let mut d = vec![vec![zero; m]];
        for (k, gen) in gens.iter().enumerate() {
            let h = &block.hessenberg.columns[k];
            let sub = h[k + 1].re;
            let mut v = Vec::with_capacity(m);
            let mut dv = Vec::with_capacity(m);
            for i in 0..m {
                let (a, da) = match gen {
                    Generator::Multiply => (points[i] * q[k][i], points[i] * d[k][i] + q[k][i]),
                    Generator::Pole(beta) => {
                        let diff = points[i] - beta;
                        if diff == zero {
                            return Err(StokesError::SingularEvaluation { z: points[i] });
                        }
                        let zeta = 1.0 / diff;
                        (q[k][i] * zeta, zeta * d[k][i] - zeta * zeta * q[k][i])
                    }
                };
                v.push(a);
                dv.push(da);
            }
            for j in 0..=k {
                axpy(h[j], &q[j], &mut v);
                axpy(h[j], &d[j], &mut dv);
            }
            for (x, dx) in v.iter_mut().zip(dv.iter_mut()) {
                *x /= sub;
                *dx /= sub;
            }
            q.push(v);
            d.push(dv);
        }
        let skip = match block.kind {
            BlockKind::Polynomial => 0,
            BlockKind::Poles { .. } => 1,
        };
        for (qj, dj) in q.iter().zip(&d).skip(skip) {
            values.col_mut(col).copy_from_slice(qj);
            derivatives.col_mut(col).copy_from_slice(dj);
            col += 1;
        }
    }
    if values.data.iter().any(|x| !x.is_finite()) {
        let bad = (0..m)
            .find(|&i| (0..n).any(|j| !values.get(i, j).is_finite()))
            .unwrap_or(0);
        return Err(StokesError::SingularEvaluation { z: points[bad] });
    }
    Ok(BasisEvaluation {
        values,
        derivatives,
    })
}
