use lightning_stokes::cases::ProbeResult;
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BasisSummary {
    pub poles_per_corner: Vec<usize>,
    pub degree: usize,
    /// Real unknowns `4N`.
    pub unknowns: usize,
}

/// Wall-clock seconds. `solve` is the least-squares time of the final fit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Timings {
    pub assemble: f64,
    pub solve: f64,
    pub evaluate: f64,
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub version: String,
    pub case: String,
    pub description: String,
    pub mode: String,
    pub basis: BasisSummary,
    pub boundary_error: f64,
    pub per_corner_error: Vec<f64>,
    pub residual_norm: f64,
    pub rank: usize,
    pub sample_count: usize,
    pub iterations: usize,
    pub converged: bool,
    pub probes: Vec<ProbeResult>,
    pub passed: bool,
    pub timings: Timings,
    pub outputs: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub poles: usize,
    pub unknowns: usize,
    pub boundary_error: f64,
    pub wall_time: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub case: String,
    pub rows: Vec<ConvergenceRow>,
    /// Slope of `log10(error)` against `sqrt(4N)`.
    pub slope: f64,
    pub correlation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MoffattRow {
    pub two_alpha_deg: f64,
    pub re_lambda: f64,
    pub im_lambda: f64,
    pub real_root: bool,
    pub scale_ratio: Option<f64>,
    pub stream_ratio: Option<f64>,
    pub velocity_ratio: Option<f64>,
    pub residual: f64,
}

/// Least-squares line `y ≈ a + b x`; returns `(b, ρ)`.
pub fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
        sxy += (a - mx) * (b - my);
    }
    (sxy / sxx, sxy / (sxx * syy).sqrt())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.10e}")).unwrap_or_default()
}

impl ConvergenceTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("poles,unknowns,boundary_error,wall_time\n");
        for r in &self.rows {
            s += &format!("{},{},{:.6e},{:.6e}\n", r.poles, r.unknowns, r.boundary_error, r.wall_time);
        }
        s
    }
}

pub fn moffatt_csv(rows: &[MoffattRow]) -> String {
    let mut s = String::from(
        "two_alpha_deg,re_lambda,im_lambda,real_root,scale_ratio,stream_ratio,velocity_ratio,residual\n",
    );
    for r in rows {
        s += &format!(
            "{},{:.10},{:.10},{},{},{},{},{:.3e}\n",
            r.two_alpha_deg,
            r.re_lambda,
            r.im_lambda,
            r.real_root,
            opt(r.scale_ratio),
            opt(r.stream_ratio),
            opt(r.velocity_ratio),
            r.residual
        );
    }
    s
}
