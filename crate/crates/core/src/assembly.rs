//! Real least-squares system for the boundary conditions.
//!
//! Columns come in groups of four per basis function `φ_j`, holding
//! `(Re f_j, Im f_j, Re g_j, Im g_j)` where `f = Σ f_j φ_j` and `g = Σ g_j φ_j`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{evaluate_basis, BasisEvaluation, OrthoBasis};
use crate::dense::RealMatrix;
use crate::error::{Result, StokesError};
use crate::geometry::{BoundaryCondition, ProblemDomain, SamplePoint};

pub type Block = [[f64; 4]; 2];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weighting {
    /// Boundary rows multiplied by the distance to the nearest corner.
    #[default]
    #[serde(alias = "corner-weighted")]
    Corner,
    /// No row weights; every column scaled to unit 2-norm.
    #[serde(alias = "column-scaled")]
    Column,
    None,
}

impl std::str::FromStr for Weighting {
    type Err = StokesError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "corner" | "corner-weighted" => Ok(Weighting::Corner),
            "column" | "column-scaled" => Ok(Weighting::Column),
            "none" => Ok(Weighting::None),
            other => Err(StokesError::InvalidArgument(format!(
                "unknown weighting mode {other:?}"
            ))),
        }
    }
}

/// Points used to pin down the four-parameter gauge freedom of `(f, g)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugePoints {
    pub za: Complex64,
    pub zb: Complex64,
}

impl GaugePoints {
    pub fn new(za: Complex64, zb: Complex64) -> Self {
        GaugePoints { za, zb }
    }

    /// Centroid and the first corner, or the corner furthest from the centroid
    /// in `x` if the first one shares its abscissa.
    pub fn default_for(domain: &ProblemDomain) -> Self {
        let za = domain.centroid();
        let first = domain.corners[0].position;
        let zb = if (first.re - za.re).abs() > 1e-8 * domain.length_scale {
            first
        } else {
            domain
                .corners
                .iter()
                .map(|c| c.position)
                .max_by(|a, b| (a.re - za.re).abs().total_cmp(&(b.re - za.re).abs()))
                .unwrap_or(first)
        };
        GaugePoints { za, zb }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.za.is_finite() && self.zb.is_finite()) {
            return Err(StokesError::NonFinite);
        }
        // `Re f(zb) - Re f(za)` moves by `γ Re(zb - za)` under `f -> f + γz`.
        if self.zb.re == self.za.re {
            return Err(StokesError::InvalidArgument(format!(
                "gauge points {} and {} must differ in their real parts",
                self.za, self.zb
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssemblyOptions {
    pub weighting: Weighting,
    pub gauge: GaugePoints,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowKind {
    Psi,
    Tangential,
    Normal,
    Gauge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowTag {
    pub sample: Option<usize>,
    pub kind: RowKind,
}

#[derive(Clone, Debug)]
pub struct LinearSystem {
    pub matrix: RealMatrix,
    pub rhs: Vec<f64>,
    /// One weight per boundary row; ones when unweighted.
    pub row_weights: Vec<f64>,
    /// Solution of the stored system times these gives the coefficients.
    pub column_scales: Vec<f64>,
    pub row_map: Vec<RowTag>,
}

impl LinearSystem {
    pub fn boundary_rows(&self) -> usize {
        self.row_weights.len()
    }

    /// Maps a solution of the (possibly column-scaled) system to coefficients.
    pub fn unscale(&self, y: &[f64]) -> Vec<f64> {
        y.iter().zip(&self.column_scales).map(|(a, s)| a * s).collect()
    }
}

/// `(u, v)` as linear functions of one coefficient group.
pub fn velocity_block(z: Complex64, phi: Complex64, dphi: Complex64) -> Block {
    let zb = z.conj();
    let a = zb * dphi - phi;
    let b = zb * dphi + phi;
    [
        [a.re, -a.im, dphi.re, -dphi.im],
        [-b.im, -b.re, -dphi.im, -dphi.re],
    ]
}

/// `ψ = Im(conj(z) f + g)` as a linear function of one coefficient group.
pub fn psi_row(z: Complex64, phi: Complex64) -> [f64; 4] {
    let w = z.conj() * phi;
    [w.im, w.re, phi.im, phi.re]
}

/// Projects `(u, v)` rows onto the tangent at `angle` and its left normal.
pub fn rotate_conditions(block: Block, rhs: [f64; 2], angle: f64) -> (Block, [f64; 2]) {
    let (s, c) = angle.sin_cos();
    let mut out = [[0.0; 4]; 2];
    for k in 0..4 {
        out[0][k] = c * block[0][k] + s * block[1][k];
        out[1][k] = -s * block[0][k] + c * block[1][k];
    }
    let r = [c * rhs[0] + s * rhs[1], -s * rhs[0] + c * rhs[1]];
    (out, r)
}

/// Target values of the two conditions at a sample, in row order.
pub fn condition_targets(domain: &ProblemDomain, sample: &SamplePoint) -> ([RowKind; 2], [f64; 2]) {
    match &domain.segments[sample.segment].bc {
        BoundaryCondition::PsiAndTangentialVelocity { psi, tangential } => (
            [RowKind::Tangential, RowKind::Psi],
            [
                tangential.eval(sample.z, sample.s),
                psi.eval(sample.z, sample.s),
            ],
        ),
        BoundaryCondition::VelocityVector { u, v } => {
            let uv = [u.eval(sample.z, sample.s), v.eval(sample.z, sample.s)];
            let (_, r) = rotate_conditions([[0.0; 4]; 2], uv, sample.frame_angle);
            ([RowKind::Tangential, RowKind::Normal], r)
        }
    }
}

/// Rows of both conditions at one sample for one coefficient group.
pub fn condition_rows(
    domain: &ProblemDomain,
    sample: &SamplePoint,
    phi: Complex64,
    dphi: Complex64,
) -> Block {
    let (rot, _) = rotate_conditions(
        velocity_block(sample.z, phi, dphi),
        [0.0; 2],
        sample.frame_angle,
    );
    match domain.segments[sample.segment].bc {
        BoundaryCondition::PsiAndTangentialVelocity { .. } => [rot[0], psi_row(sample.z, phi)],
        BoundaryCondition::VelocityVector { .. } => rot,
    }
}

/// Rows for `Re f(za)`, `Im f(za)`, `Re g(za)`, `Re f(zb)`.
pub fn gauge_rows(basis: &OrthoBasis, gauge: &GaugePoints) -> Result<RealMatrix> {
    gauge.validate()?;
    let ev = evaluate_basis(basis, &[gauge.za, gauge.zb])?;
    let n = basis.size();
    let mut rows = RealMatrix::zeros(4, 4 * n);
    for j in 0..n {
        let pa = ev.values.get(0, j);
        let pb = ev.values.get(1, j);
        rows.set(0, 4 * j, pa.re);
        rows.set(0, 4 * j + 1, -pa.im);
        rows.set(1, 4 * j, pa.im);
        rows.set(1, 4 * j + 1, pa.re);
        rows.set(2, 4 * j + 2, pa.re);
        rows.set(2, 4 * j + 3, -pa.im);
        rows.set(3, 4 * j, pb.re);
        rows.set(3, 4 * j + 1, -pb.im);
    }
    Ok(rows)
}

/// Boundary rows, gauge rows and weighting in one pass.
pub fn assemble(
    domain: &ProblemDomain,
    samples: &[SamplePoint],
    basis: &OrthoBasis,
    eval: &BasisEvaluation,
    options: &AssemblyOptions,
) -> Result<LinearSystem> {
    let m = samples.len();
    let n = basis.size();
    if eval.values.rows() != m || eval.derivatives.rows() != m {
        return Err(StokesError::Dimension(format!(
            "basis evaluated at {} points but {m} samples given",
            eval.values.rows()
        )));
    }
    if eval.values.cols() != n || eval.derivatives.cols() != n {
        return Err(StokesError::Dimension(format!(
            "basis has {n} functions but evaluation has {}",
            eval.values.cols()
        )));
    }
    if let Some(bad) = samples.iter().find(|s| s.segment >= domain.segments.len()) {
        return Err(StokesError::Dimension(format!(
            "sample refers to missing segment {}",
            bad.segment
        )));
    }

    let rows = 2 * m + 4;
    let mut matrix = RealMatrix::zeros(rows, 4 * n);
    let mut rhs = vec![0.0; rows];
    let mut row_map = Vec::with_capacity(rows);
    for (i, sample) in samples.iter().enumerate() {
        let (kinds, targets) = condition_targets(domain, sample);
        rhs[2 * i] = targets[0];
        rhs[2 * i + 1] = targets[1];
        for kind in kinds {
            row_map.push(RowTag {
                sample: Some(i),
                kind,
            });
        }
    }
    for j in 0..n {
        let phi = eval.values.col(j);
        let dphi = eval.derivatives.col(j);
        for (i, sample) in samples.iter().enumerate() {
            let block = condition_rows(domain, sample, phi[i], dphi[i]);
            for (r, row) in block.iter().enumerate() {
                for (c, &value) in row.iter().enumerate() {
                    matrix.set(2 * i + r, 4 * j + c, value);
                }
            }
        }
    }
    let gauge = gauge_rows(basis, &options.gauge)?;
    for r in 0..4 {
        for c in 0..4 * n {
            matrix.set(2 * m + r, c, gauge.get(r, c));
        }
        row_map.push(RowTag {
            sample: None,
            kind: RowKind::Gauge,
        });
    }

    let system = LinearSystem {
        matrix,
        rhs,
        row_weights: vec![1.0; 2 * m],
        column_scales: vec![1.0; 4 * n],
        row_map,
    };
    match options.weighting {
        Weighting::Corner => Ok(row_weighting(system, samples)),
        Weighting::Column => column_scaling(system),
        Weighting::None => Ok(system),
    }
}

/// Multiplies the two rows of every sample by its distance to the nearest corner.
pub fn row_weighting(mut system: LinearSystem, samples: &[SamplePoint]) -> LinearSystem {
    for (i, s) in samples.iter().enumerate() {
        for r in [2 * i, 2 * i + 1] {
            system.matrix.scale_row(r, s.distance);
            system.rhs[r] *= s.distance;
            system.row_weights[r] *= s.distance;
        }
    }
    system
}

/// Scales every column to unit 2-norm.
pub fn column_scaling(mut system: LinearSystem) -> Result<LinearSystem> {
    for j in 0..system.matrix.cols() {
        let col = system.matrix.col_mut(j);
        let norm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(StokesError::DegenerateColumn(j));
        }
        col.iter_mut().for_each(|x| *x /= norm);
        system.column_scales[j] /= norm;
    }
    Ok(system)
}
