//! Fields derived from a computed Goursat pair.

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{evaluate_basis, OrthoBasis};
use crate::error::{Result, StokesError};
use crate::geometry::ProblemDomain;

/// `f` and `g` in the orthogonal basis; coefficients are always unscaled.
#[derive(Clone, Debug)]
pub struct GoursatSolution {
    pub basis: Arc<OrthoBasis>,
    pub f_coeffs: Vec<Complex64>,
    pub g_coeffs: Vec<Complex64>,
    pub domain: Arc<ProblemDomain>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GoursatValues {
    pub f: Complex64,
    pub df: Complex64,
    pub g: Complex64,
    pub dg: Complex64,
}

impl GoursatValues {
    pub fn stream(&self, z: Complex64) -> f64 {
        (z.conj() * self.f + self.g).im
    }

    /// `(u, v)` from `u - iv = g' + conj(z) f' - conj(f)`.
    pub fn velocity(&self, z: Complex64) -> (f64, f64) {
        let w = self.dg + z.conj() * self.df - self.f.conj();
        (w.re, -w.im)
    }

    /// `(p, ω)` from `p - iω = 4 f'`.
    pub fn pressure_vorticity(&self) -> (f64, f64) {
        (4.0 * self.df.re, -4.0 * self.df.im)
    }
}

impl GoursatSolution {
    pub fn new(
        basis: Arc<OrthoBasis>,
        f_coeffs: Vec<Complex64>,
        g_coeffs: Vec<Complex64>,
        domain: Arc<ProblemDomain>,
    ) -> Result<Self> {
        let n = basis.size();
        if f_coeffs.len() != n || g_coeffs.len() != n {
            return Err(StokesError::Dimension(format!(
                "basis has {n} functions, got {} and {} coefficients",
                f_coeffs.len(),
                g_coeffs.len()
            )));
        }
        Ok(GoursatSolution {
            basis,
            f_coeffs,
            g_coeffs,
            domain,
        })
    }

    /// Builds the pair from a real vector grouped as `(Re f_j, Im f_j, Re g_j, Im g_j)`.
    pub fn from_real(
        basis: Arc<OrthoBasis>,
        x: &[f64],
        domain: Arc<ProblemDomain>,
    ) -> Result<Self> {
        let n = basis.size();
        if x.len() != 4 * n {
            return Err(StokesError::Dimension(format!(
                "expected {} coefficients, got {}",
                4 * n,
                x.len()
            )));
        }
        let f = (0..n).map(|j| Complex64::new(x[4 * j], x[4 * j + 1])).collect();
        let g = (0..n).map(|j| Complex64::new(x[4 * j + 2], x[4 * j + 3])).collect();
        Self::new(basis, f, g, domain)
    }

    /// Coefficients of `f + γz + c` and `g + conj(c) z + α`, which describe the same flow.
    pub fn gauge_transformed(&self, gamma: f64, c: Complex64, alpha: f64) -> Result<Self> {
        let one = Complex64::new(1.0, 0.0);
        let df = self.basis.linear_coefficients(c, one * gamma)?;
        let dg = self.basis.linear_coefficients(one * alpha, c.conj())?;
        let mut out = self.clone();
        for (a, b) in out.f_coeffs.iter_mut().zip(df) {
            *a += b;
        }
        for (a, b) in out.g_coeffs.iter_mut().zip(dg) {
            *a += b;
        }
        Ok(out)
    }

    pub fn eval_many(&self, points: &[Complex64]) -> Result<Vec<GoursatValues>> {
        let ev = evaluate_basis(&self.basis, points)?;
        let zero = Complex64::new(0.0, 0.0);
        let mut out = vec![
            GoursatValues {
                f: zero,
                df: zero,
                g: zero,
                dg: zero,
            };
            points.len()
        ];
        for j in 0..self.basis.size() {
            let (cf, cg) = (self.f_coeffs[j], self.g_coeffs[j]);
            for ((o, &phi), &dphi) in out.iter_mut().zip(ev.values.col(j)).zip(ev.derivatives.col(j)) {
                o.f += cf * phi;
                o.df += cf * dphi;
                o.g += cg * phi;
                o.dg += cg * dphi;
            }
        }
        Ok(out)
    }

    /// `(f, f', g, g')` at `z`.
    pub fn eval_fg(&self, z: Complex64) -> Result<GoursatValues> {
        Ok(self.eval_many(&[z])?[0])
    }

    pub fn stream(&self, z: Complex64) -> Result<f64> {
        Ok(self.eval_fg(z)?.stream(z))
    }

    pub fn velocity(&self, z: Complex64) -> Result<(f64, f64)> {
        Ok(self.eval_fg(z)?.velocity(z))
    }

    pub fn pressure_vorticity(&self, z: Complex64) -> Result<(f64, f64)> {
        Ok(self.eval_fg(z)?.pressure_vorticity())
    }

    /// Fields on a uniform grid; points outside the domain are evaluated too but
    /// flagged, and points where the expansion is singular come out as NaN.
    pub fn eval_grid(&self, bbox: BoundingBox, nx: usize, ny: usize) -> Result<FieldGrid> {
        if nx < 2 || ny < 2 {
            return Err(StokesError::InvalidArgument(format!(
                "grid needs at least 2x2 nodes, got {nx}x{ny}"
            )));
        }
        let xs: Vec<f64> = (0..nx)
            .map(|i| bbox.x_min + (bbox.x_max - bbox.x_min) * i as f64 / (nx - 1) as f64)
            .collect();
        let ys: Vec<f64> = (0..ny)
            .map(|i| bbox.y_min + (bbox.y_max - bbox.y_min) * i as f64 / (ny - 1) as f64)
            .collect();
        let mut grid = FieldGrid {
            bbox,
            nx,
            ny,
            x: xs.clone(),
            y: ys.clone(),
            inside: Vec::with_capacity(nx * ny),
            psi: Vec::with_capacity(nx * ny),
            u: Vec::with_capacity(nx * ny),
            v: Vec::with_capacity(nx * ny),
            p: Vec::with_capacity(nx * ny),
            omega: Vec::with_capacity(nx * ny),
        };
        for &y in &ys {
            let row: Vec<Complex64> = xs.iter().map(|&x| Complex64::new(x, y)).collect();
            let values: Vec<Option<GoursatValues>> = match self.eval_many(&row) {
                Ok(v) => v.into_iter().map(Some).collect(),
                Err(_) => row.iter().map(|&z| self.eval_fg(z).ok()).collect(),
            };
            for (z, val) in row.iter().zip(values) {
                grid.inside.push(self.domain.contains(*z));
                let (psi, (u, v), (p, w)) = match val {
                    Some(val) => (val.stream(*z), val.velocity(*z), val.pressure_vorticity()),
                    None => (f64::NAN, (f64::NAN, f64::NAN), (f64::NAN, f64::NAN)),
                };
                grid.psi.push(psi);
                grid.u.push(u);
                grid.v.push(v);
                grid.p.push(p);
                grid.omega.push(w);
            }
        }
        Ok(grid)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

/// Row-major `ny × nx` arrays; row `r` has `y = y[r]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FieldGrid {
    pub bbox: BoundingBox,
    pub nx: usize,
    pub ny: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub inside: Vec<bool>,
    pub psi: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub p: Vec<f64>,
    pub omega: Vec<f64>,
}

impl FieldGrid {
    pub const CSV_HEADER: &'static str = "x,y,inside,psi,u,v,p,omega";

    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.nx + col
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for r in 0..self.ny {
            for c in 0..self.nx {
                let k = self.index(r, c);
                writeln!(
                    out,
                    "{:e},{:e},{},{:e},{:e},{:e},{:e},{:e}",
                    self.x[c],
                    self.y[r],
                    u8::from(self.inside[k]),
                    self.psi[k],
                    self.u[k],
                    self.v[k],
                    self.p[k],
                    self.omega[k]
                )?;
            }
        }
        Ok(())
    }
}
