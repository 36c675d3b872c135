//! Built-in problems with reference values, and user cases from config documents.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::assembly::{GaugePoints, Weighting};
use crate::basis::{BasisConfig, DEFAULT_SIGMA};
use crate::error::{Result, StokesError};
use crate::evaluation::GoursatSolution;
use crate::geometry::{
    nearest_corner, BoundaryCondition, BoundaryData, Curve, ProblemDomain, Sampling,
};
use crate::moffatt;
use crate::solver::{SolveOptions, SolveReport};

pub const CASE_NAMES: [&str; 5] = [
    "lid-driven-cavity",
    "cavity-with-exclusion",
    "triangle-cavity",
    "step-channel",
    "bent-channel",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    Psi,
    AbsPsi,
    U,
    V,
    Speed,
    Pressure,
    Vorticity,
}

impl Quantity {
    fn eval(self, solution: &GoursatSolution, z: Complex64) -> Result<f64> {
        let v = solution.eval_fg(z)?;
        let (u, w) = v.velocity(z);
        let (p, om) = v.pressure_vorticity();
        Ok(match self {
            Quantity::Psi => v.stream(z),
            Quantity::AbsPsi => v.stream(z).abs(),
            Quantity::U => u,
            Quantity::V => w,
            Quantity::Speed => u.hypot(w),
            Quantity::Pressure => p,
            Quantity::Vorticity => om,
        })
    }
}

/// What a probe measures. Corner-based probes scan the stream function along
/// the interior bisector of the corner nearest to `corner`, over radii `r_range`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProbeKind {
    Point {
        point: Complex64,
        quantity: Quantity,
    },
    /// `ψ(upper) − ψ(lower)`, the volume flux between two points.
    PsiDifference { upper: Complex64, lower: Complex64 },
    /// Ratio of the two outermost separation radii along the bisector.
    SeparationRatio {
        corner: Complex64,
        r_range: (f64, f64),
    },
    /// Ratio of peak `|ψ|` in the outermost eddy to that in the next one.
    /// Lobes below ten times the boundary error are ignored.
    EddyAmplitudeRatio {
        corner: Complex64,
        r_range: (f64, f64),
    },
    /// Number of sign changes of `ψ` along the bisector between lobes above
    /// ten times the boundary error.
    SignChanges {
        corner: Complex64,
        r_range: (f64, f64),
    },
    /// The solve's boundary error (reference is an upper bound, tolerance 0).
    BoundaryError,
    /// Wall time of the solve in seconds (upper bound).
    SolveTime,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub name: String,
    #[serde(flatten)]
    pub kind: ProbeKind,
    pub reference: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub name: String,
    pub value: f64,
    pub reference: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Probe {
    pub fn point(name: &str, point: Complex64, quantity: Quantity, reference: f64, tolerance: f64) -> Self {
        Probe {
            name: name.into(),
            kind: ProbeKind::Point { point, quantity },
            reference,
            tolerance,
        }
    }

    fn is_upper_bound(&self) -> bool {
        matches!(self.kind, ProbeKind::BoundaryError | ProbeKind::SolveTime)
    }

    pub fn evaluate(&self, solution: &GoursatSolution, report: &SolveReport) -> Result<ProbeResult> {
        let value = match &self.kind {
            ProbeKind::Point { point, quantity } => quantity.eval(solution, *point)?,
            ProbeKind::PsiDifference { upper, lower } => {
                solution.stream(*upper)? - solution.stream(*lower)?
            }
            ProbeKind::SeparationRatio { corner, r_range } => {
                let k = nearest_corner(*corner, &solution.domain.corners).0;
                let radii = moffatt::separation_radii(solution, k, 0.0, *r_range, 4000)?;
                if radii.len() < 2 {
                    f64::NAN
                } else {
                    let n = radii.len();
                    radii[n - 1] / radii[n - 2]
                }
            }
            ProbeKind::EddyAmplitudeRatio { corner, r_range } => {
                let k = nearest_corner(*corner, &solution.domain.corners).0;
                let lobes = axis_lobes(solution, k, *r_range, 10.0 * report.boundary_error)?;
                if lobes.len() < 3 {
                    f64::NAN
                } else {
                    lobes[1] / lobes[2]
                }
            }
            ProbeKind::SignChanges { corner, r_range } => {
                let k = nearest_corner(*corner, &solution.domain.corners).0;
                let lobes = axis_lobes(solution, k, *r_range, 10.0 * report.boundary_error)?;
                lobes.len().saturating_sub(1) as f64
            }
            ProbeKind::BoundaryError => report.boundary_error,
            ProbeKind::SolveTime => report.wall_time,
        };
        let passed = if self.is_upper_bound() {
            value.is_finite() && value < self.reference
        } else {
            (value - self.reference).abs() <= self.tolerance
        };
        Ok(ProbeResult {
            name: self.name.clone(),
            value,
            reference: self.reference,
            tolerance: self.tolerance,
            passed,
        })
    }
}

/// Peak `|ψ|` of each lobe between sign changes along the bisector of corner
/// `k`, outermost first. Lobes below `floor` at the outer end are skipped and
/// the list stops at the first lobe below `floor` after that: such lobes are
/// below the accuracy of the solution and carry noise.
pub fn axis_lobes(
    solution: &GoursatSolution,
    k: usize,
    r_range: (f64, f64),
    floor: f64,
) -> Result<Vec<f64>> {
    let (_, psi) = moffatt::sample_ray(solution, k, 0.0, r_range, 4000)?;
    let mut lobes = Vec::new();
    let mut peak = 0.0f64;
    for i in (0..psi.len()).rev() {
        if i + 1 < psi.len() && psi[i + 1] != 0.0 && psi[i + 1].signum() != psi[i].signum() {
            lobes.push(peak);
            peak = 0.0;
        }
        peak = peak.max(psi[i].abs());
    }
    lobes.push(peak);
    Ok(lobes
        .into_iter()
        .skip_while(|&p| p < floor)
        .take_while(|&p| p >= floor)
        .collect())
}

#[derive(Clone, Debug)]
pub struct CaseDefinition {
    pub name: String,
    pub description: String,
    pub domain: ProblemDomain,
    pub gauge: GaugePoints,
    pub basis: BasisConfig,
    pub weighting: Weighting,
    pub sampling: Sampling,
    /// Multiplier on the number of boundary samples.
    pub sample_density: f64,
    pub probes: Vec<Probe>,
}

impl CaseDefinition {
    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            sampling: self.sampling.clone(),
            weighting: self.weighting,
            gauge: Some(self.gauge),
            sample_density: self.sample_density,
            ..SolveOptions::default()
        }
    }

    /// Basis with `poles` at every corner that has poles by default (or at every
    /// corner when none has), and the given degree.
    pub fn basis_with(&self, poles: Option<usize>, degree: Option<usize>, sigma: Option<f64>) -> BasisConfig {
        let mut cfg = self.basis.clone();
        if let Some(n) = poles {
            let any = cfg.poles_per_corner.iter().any(|&p| p > 0);
            for p in &mut cfg.poles_per_corner {
                if *p > 0 || !any {
                    *p = n;
                }
            }
        }
        if let Some(d) = degree {
            cfg.degree = d;
        }
        if let Some(s) = sigma {
            cfg.sigma = s;
        }
        cfg
    }

    pub fn evaluate_probes(&self, solution: &GoursatSolution, report: &SolveReport) -> Result<Vec<ProbeResult>> {
        self.probes.iter().map(|p| p.evaluate(solution, report)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.basis.validate(self.domain.corners.len())?;
        self.gauge.validate()?;
        for p in &self.probes {
            let points: Vec<Complex64> = match &p.kind {
                ProbeKind::Point { point, .. } => vec![*point],
                ProbeKind::PsiDifference { upper, lower } => vec![*upper, *lower],
                _ => vec![],
            };
            for z in points {
                if !self.domain.contains(z) {
                    return Err(StokesError::Config(format!(
                        "probe {:?} point {z} lies outside the domain",
                        p.name
                    )));
                }
            }
        }
        Ok(())
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Lid moving in `+x` along the top of a counterclockwise boundary; the
/// traversal direction there is `−x`.
fn lid() -> BoundaryCondition {
    BoundaryCondition::moving_wall(0.0, -1.0)
}

fn wall() -> BoundaryCondition {
    BoundaryCondition::no_slip(0.0)
}

pub fn case_by_name(name: &str) -> Result<CaseDefinition> {
    match name {
        "lid-driven-cavity" => case_lid_driven_cavity(),
        "cavity-with-exclusion" => case_cavity_with_exclusion(1.0),
        "triangle-cavity" => case_triangle_cavity(28.5f64.to_radians()),
        "step-channel" => case_step_channel(),
        "bent-channel" => case_bent_channel(3.0),
        other => Err(StokesError::UnknownCase(other.into())),
    }
}

/// `[−1, 1]²` with the top wall sliding at unit speed in `+x`.
pub fn case_lid_driven_cavity() -> Result<CaseDefinition> {
    let pieces = vec![
        (Curve::line(c(1.0, 1.0), c(-1.0, 1.0)), lid()),
        (Curve::line(c(-1.0, 1.0), c(-1.0, -1.0)), wall()),
        (Curve::line(c(-1.0, -1.0), c(1.0, -1.0)), wall()),
        (Curve::line(c(1.0, -1.0), c(1.0, 1.0)), wall()),
    ];
    let domain = ProblemDomain::from_curves(pieces)?;
    let basis = BasisConfig::new(vec![24; 4], 24, domain.length_scale);
    let case = CaseDefinition {
        name: "lid-driven-cavity".into(),
        description: "square cavity [-1,1]^2 driven by the top wall".into(),
        gauge: GaugePoints::new(c(0.0, 0.0), c(1.0, 0.0)),
        basis,
        weighting: Weighting::Corner,
        sampling: Sampling::default(),
        sample_density: 1.0,
        probes: vec![
            Probe::point("|psi(0)|", c(0.0, 0.0), Quantity::AbsPsi, 0.11790231118443, 1e-11),
            Probe::point("psi(bottom midpoint)", c(0.0, -1.0), Quantity::Psi, 0.0, 1e-10),
            Probe {
                name: "diagonal separation ratio".into(),
                kind: ProbeKind::SeparationRatio {
                    corner: c(-1.0, -1.0),
                    r_range: (1e-4, 1.0),
                },
                reference: 16.6,
                tolerance: 0.2 * 16.6,
            },
        ],
        domain,
    };
    case.validate()?;
    Ok(case)
}

/// Lid-driven square with a quarter disk of the given radius, centred at the
/// lower-left corner, cut away.
pub fn case_cavity_with_exclusion(radius: f64) -> Result<CaseDefinition> {
    if !(radius > 0.0 && radius < 2.0) {
        return Err(StokesError::InvalidArgument(format!(
            "exclusion radius must lie in (0, 2), got {radius}"
        )));
    }
    let r = radius;
    let pieces = vec![
        (Curve::line(c(-1.0 + r, -1.0), c(1.0, -1.0)), wall()),
        (Curve::line(c(1.0, -1.0), c(1.0, 1.0)), wall()),
        (Curve::line(c(1.0, 1.0), c(-1.0, 1.0)), lid()),
        (Curve::line(c(-1.0, 1.0), c(-1.0, -1.0 + r)), wall()),
        (Curve::arc(c(-1.0, -1.0), r, 0.5 * PI, 0.0), wall()),
    ];
    let domain = ProblemDomain::from_curves(pieces)?;
    let basis = BasisConfig::new(vec![20; 5], 40, domain.length_scale);
    let arc_mid = c(-1.0, -1.0) + Complex64::from_polar(r, 0.25 * PI);
    let mut probes = vec![
        Probe::point("speed at arc midpoint", arc_mid, Quantity::Speed, 0.0, 1e-7),
        Probe {
            name: "solve time".into(),
            kind: ProbeKind::SolveTime,
            reference: 10.0,
            tolerance: 0.0,
        },
    ];
    if radius == 1.0 {
        probes.insert(0, Probe::point("psi(0)", c(0.0, 0.0), Quantity::Psi, -0.0599323802, 6e-8));
    }
    let case = CaseDefinition {
        name: "cavity-with-exclusion".into(),
        description: format!("lid-driven cavity with a quarter disk of radius {radius} removed at (-1,-1)"),
        gauge: GaugePoints::new(c(0.0, 0.0), c(1.0, 0.0)),
        basis,
        weighting: Weighting::Corner,
        sampling: Sampling::default(),
        sample_density: 1.0,
        probes,
        domain,
    };
    case.validate()?;
    Ok(case)
}

/// Isosceles triangle with unit legs, apex angle `two_alpha` at the origin
/// and the lid along the top side.
pub fn case_triangle_cavity(two_alpha: f64) -> Result<CaseDefinition> {
    if !(two_alpha > 0.0 && two_alpha < PI) {
        return Err(StokesError::InvalidArgument(format!(
            "apex angle must lie in (0°, 180°), got {:.3}°",
            two_alpha.to_degrees()
        )));
    }
    let (s, co) = (0.5 * two_alpha).sin_cos();
    let apex = c(0.0, 0.0);
    let right = c(s, co);
    let left = c(-s, co);
    let pieces = vec![
        (Curve::line(apex, right), wall()),
        (Curve::line(right, left), lid()),
        (Curve::line(left, apex), wall()),
    ];
    let domain = ProblemDomain::from_curves(pieces)?;
    let basis = BasisConfig::new(vec![49; 3], 49, domain.length_scale);
    let mut probes = vec![Probe {
        name: "boundary error".into(),
        kind: ProbeKind::BoundaryError,
        reference: 1e-8,
        tolerance: 0.0,
    }];
    if let Ok(e) = moffatt::eddy_exponent(two_alpha) {
        if let Ok(m) = moffatt::eddy_metrics(e.lambda) {
            probes.push(Probe {
                name: "eddy amplitude ratio on the axis".into(),
                kind: ProbeKind::EddyAmplitudeRatio {
                    corner: apex,
                    r_range: (1e-3, co),
                },
                reference: m.stream_ratio,
                tolerance: 0.2 * m.stream_ratio,
            });
        }
    }
    if (two_alpha.to_degrees() - 28.5).abs() < 1e-9 {
        probes.push(Probe {
            name: "sign changes on the axis".into(),
            kind: ProbeKind::SignChanges {
                corner: apex,
                r_range: (1e-4, co),
            },
            reference: 3.0,
            tolerance: 0.0,
        });
    }
    let case = CaseDefinition {
        name: "triangle-cavity".into(),
        description: format!(
            "isosceles triangle, unit legs, apex angle {:.2} degrees, lid on top",
            two_alpha.to_degrees()
        ),
        gauge: GaugePoints::default_for(&domain),
        basis,
        weighting: Weighting::Corner,
        sampling: Sampling::default(),
        sample_density: 1.0,
        probes,
        domain,
    };
    case.validate()?;
    Ok(case)
}

/// Channel over a backward-facing square step with parabolic inflow at
/// `x = −2` and outflow at `x = 4`.
pub fn case_step_channel() -> Result<CaseDefinition> {
    let inflow = BoundaryData::function(|z: Complex64| {
        let y = z.im;
        2.0 * y * y - 4.0 / 3.0 * y * y * y
    });
    let outflow = BoundaryData::function(|z: Complex64| {
        let y = z.im;
        1.0 / 3.0 + 0.5 * y - y * y * y / 6.0
    });
    let pieces = vec![
        (Curve::line(c(-2.0, 0.0), c(0.0, 0.0)), wall()),
        (Curve::line(c(0.0, 0.0), c(0.0, -1.0)), wall()),
        (Curve::line(c(0.0, -1.0), c(4.0, -1.0)), wall()),
        (
            Curve::line(c(4.0, -1.0), c(4.0, 1.0)),
            BoundaryCondition::PsiAndTangentialVelocity {
                psi: outflow,
                tangential: 0.0.into(),
            },
        ),
        (Curve::line(c(4.0, 1.0), c(-2.0, 1.0)), BoundaryCondition::no_slip(2.0 / 3.0)),
        (
            Curve::line(c(-2.0, 1.0), c(-2.0, 0.0)),
            BoundaryCondition::PsiAndTangentialVelocity {
                psi: inflow,
                tangential: 0.0.into(),
            },
        ),
    ];
    let domain = ProblemDomain::from_curves(pieces)?;
    let basis = BasisConfig::new(vec![0, 80, 0, 0, 0, 0], 40, domain.length_scale);
    let case = CaseDefinition {
        name: "step-channel".into(),
        description: "channel flow over a square step, reentrant corner at the origin".into(),
        gauge: GaugePoints::new(c(0.5, 0.0), c(1.0, 0.0)),
        basis,
        weighting: Weighting::Column,
        sampling: Sampling::default(),
        sample_density: 1.0,
        probes: vec![
            Probe::point("psi(1)", c(1.0, 0.0), Quantity::Psi, 0.259289, 1e-5),
            Probe::point("psi(2)", c(2.0, 0.0), Quantity::Psi, 0.329814, 1e-5),
            Probe::point("psi(3)", c(3.0, 0.0), Quantity::Psi, 0.333990, 1e-5),
            Probe::point("psi at inflow midpoint", c(-2.0, 0.5), Quantity::Psi, 1.0 / 3.0, 1e-6),
            Probe {
                name: "flux across x = 2".into(),
                kind: ProbeKind::PsiDifference {
                    upper: c(2.0, 1.0),
                    lower: c(2.0, -1.0),
                },
                reference: 2.0 / 3.0,
                tolerance: 1e-5,
            },
            Probe {
                name: "solve time".into(),
                kind: ProbeKind::SolveTime,
                reference: 10.0,
                tolerance: 0.0,
            },
        ],
        domain,
    };
    case.validate()?;
    Ok(case)
}

const OFFSET: f64 = -0.2;

fn bent_upper(x: f64) -> f64 {
    0.5 - 0.5 * (3.0 * (x + OFFSET)).tanh()
}

fn bent_upper_slope(x: f64) -> f64 {
    let t = (3.0 * (x + OFFSET)).tanh();
    -1.5 * (1.0 - t * t)
}

/// Smooth bent channel between `y = 1/2 − tanh(3(x − 0.2))/2` and its
/// rotation by π, truncated at `|x| = x_max`. The end profiles are parabolic
/// with flux 2/3, the flux of unit centreline speed in the asymptotic channel
/// of unit width, so the truncation error decays with the wall flatness.
pub fn case_bent_channel(x_max: f64) -> Result<CaseDefinition> {
    if !(x_max > 0.5) {
        return Err(StokesError::InvalidArgument(format!(
            "truncation abscissa must exceed 0.5, got {x_max}"
        )));
    }
    let lower = |x: f64| -bent_upper(-x);
    let lower_slope = |x: f64| bent_upper_slope(-x);
    let width = bent_upper(-x_max) - lower(-x_max);
    let flux = 2.0 / 3.0;
    let profile = move |bottom: f64| {
        BoundaryData::function(move |z: Complex64| {
            let s = ((z.im - bottom) / width).clamp(0.0, 1.0);
            flux * s * s * (3.0 - 2.0 * s)
        })
    };
    let end = |psi: BoundaryData| BoundaryCondition::PsiAndTangentialVelocity {
        psi,
        tangential: 0.0.into(),
    };
    let pieces = vec![
        (Curve::graph("lower wall", lower, lower_slope, -x_max, x_max), wall()),
        (
            Curve::line(c(x_max, lower(x_max)), c(x_max, bent_upper(x_max))),
            end(profile(lower(x_max))),
        ),
        (
            Curve::graph("upper wall", bent_upper, bent_upper_slope, x_max, -x_max),
            BoundaryCondition::no_slip(flux),
        ),
        (
            Curve::line(c(-x_max, bent_upper(-x_max)), c(-x_max, lower(-x_max))),
            end(profile(lower(-x_max))),
        ),
    ];
    let domain = ProblemDomain::from_curves(pieces)?;
    let basis = BasisConfig::new(vec![0; 4], 300, domain.length_scale);
    let inflow_mid = c(-x_max, 0.5 * (bent_upper(-x_max) + lower(-x_max)));
    let mut probes = vec![
        Probe::point("speed at wall x = 0", c(0.0, bent_upper(0.0)), Quantity::Speed, 0.0, 1e-4),
        Probe::point("inflow centreline speed", inflow_mid, Quantity::Speed, 1.0, 1e-5),
    ];
    if x_max == 3.0 {
        probes.insert(0, Probe::point("speed(0)", c(0.0, 0.0), Quantity::Speed, 1.072187183704, 5e-9));
    }
    let case = CaseDefinition {
        name: "bent-channel".into(),
        description: format!("smooth bent channel truncated at |x| = {x_max}"),
        gauge: GaugePoints::default_for(&domain),
        basis,
        weighting: Weighting::Column,
        sampling: Sampling::default(),
        sample_density: 2.0,
        probes,
        domain,
    };
    case.validate()?;
    Ok(case)
}

// ---- configuration documents ----

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DataSpec {
    Constant(f64),
    /// Coefficients of a polynomial in arclength from the segment start.
    Polynomial(Vec<f64>),
}

impl From<&DataSpec> for BoundaryData {
    fn from(d: &DataSpec) -> Self {
        match d {
            DataSpec::Constant(v) => BoundaryData::Constant(*v),
            DataSpec::Polynomial(p) => BoundaryData::ArclengthPolynomial(p.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ConditionSpec {
    /// Stream function and velocity along the direction of traversal.
    PsiTangential { psi: DataSpec, tangential: DataSpec },
    Velocity { u: DataSpec, v: DataSpec },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SegmentSpec {
    Line {
        from: [f64; 2],
        to: [f64; 2],
        condition: ConditionSpec,
    },
    /// Angles in degrees.
    Arc {
        center: [f64; 2],
        radius: f64,
        start_angle: f64,
        end_angle: f64,
        condition: ConditionSpec,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisSpec {
    /// One count per corner, or a single count used everywhere.
    pub poles: PolesSpec,
    pub degree: usize,
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub length_scale: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PolesSpec {
    Uniform(usize),
    PerCorner(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    pub name: Option<String>,
    pub point: [f64; 2],
    pub quantity: Quantity,
    pub reference: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseConfig {
    pub name: String,
    #[serde(default)]
    pub description: Option<String>,
    pub segments: Vec<SegmentSpec>,
    #[serde(default)]
    pub gauge: Option<[[f64; 2]; 2]>,
    pub basis: BasisSpec,
    #[serde(default)]
    pub weighting: Weighting,
    #[serde(default)]
    pub sampling: Option<Sampling>,
    #[serde(default)]
    pub sample_density: Option<f64>,
    #[serde(default)]
    pub probes: Vec<ProbeSpec>,
}

fn cz(p: [f64; 2]) -> Complex64 {
    c(p[0], p[1])
}

impl CaseConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| StokesError::Config(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| StokesError::Config(e.to_string()))
    }

    /// Reads a `.toml` file as TOML and anything else as JSON.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| StokesError::Config(format!("{}: {e}", path.display())))?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => Self::from_toml(&text),
            _ => Self::from_json(&text),
        }
    }

    pub fn build(&self) -> Result<CaseDefinition> {
        let pieces = self
            .segments
            .iter()
            .map(|s| {
                let (curve, cond) = match s {
                    SegmentSpec::Line { from, to, condition } => (Curve::line(cz(*from), cz(*to)), condition),
                    SegmentSpec::Arc {
                        center,
                        radius,
                        start_angle,
                        end_angle,
                        condition,
                    } => (
                        Curve::arc(cz(*center), *radius, start_angle.to_radians(), end_angle.to_radians()),
                        condition,
                    ),
                };
                let bc = match cond {
                    ConditionSpec::PsiTangential { psi, tangential } => {
                        BoundaryCondition::PsiAndTangentialVelocity {
                            psi: psi.into(),
                            tangential: tangential.into(),
                        }
                    }
                    ConditionSpec::Velocity { u, v } => BoundaryCondition::VelocityVector {
                        u: u.into(),
                        v: v.into(),
                    },
                };
                (curve, bc)
            })
            .collect();
        let mut domain = ProblemDomain::from_curves(pieces)?;
        if let Some(l) = self.basis.length_scale {
            domain = domain.with_length_scale(l);
        }
        let poles = match &self.basis.poles {
            PolesSpec::Uniform(n) => vec![*n; domain.corners.len()],
            PolesSpec::PerCorner(v) => v.clone(),
        };
        let basis = BasisConfig {
            poles_per_corner: poles,
            degree: self.basis.degree,
            sigma: self.basis.sigma.unwrap_or(DEFAULT_SIGMA),
            length_scale: domain.length_scale,
            joint_poles: false,
        };
        let gauge = match self.gauge {
            Some([a, b]) => GaugePoints::new(cz(a), cz(b)),
            None => GaugePoints::default_for(&domain),
        };
        let probes = self
            .probes
            .iter()
            .enumerate()
            .map(|(i, p)| Probe {
                name: p.name.clone().unwrap_or_else(|| format!("probe {i}")),
                kind: ProbeKind::Point {
                    point: cz(p.point),
                    quantity: p.quantity,
                },
                reference: p.reference,
                tolerance: p.tolerance,
            })
            .collect();
        let case = CaseDefinition {
            name: self.name.clone(),
            description: self.description.clone().unwrap_or_default(),
            domain,
            gauge,
            basis,
            weighting: self.weighting,
            sampling: self.sampling.clone().unwrap_or_default(),
            sample_density: self.sample_density.unwrap_or(1.0),
            probes,
        };
        case.validate()?;
        Ok(case)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::solve_fixed;

    const CAVITY_JSON: &str = r#"{
        "name": "json-cavity",
        "segments": [
            {"kind": "line", "from": [1, 1], "to": [-1, 1],
             "condition": {"kind": "psi-tangential", "psi": 0, "tangential": -1}},
            {"kind": "line", "from": [-1, 1], "to": [-1, -1],
             "condition": {"kind": "psi-tangential", "psi": 0, "tangential": 0}},
            {"kind": "line", "from": [-1, -1], "to": [1, -1],
             "condition": {"kind": "velocity", "u": 0, "v": 0}},
            {"kind": "line", "from": [1, -1], "to": [1, 1],
             "condition": {"kind": "psi-tangential", "psi": [0], "tangential": 0}}
        ],
        "gauge": [[0, 0], [1, 0]],
        "basis": {"poles": 12, "degree": 12},
        "probes": [{"point": [0, 0], "quantity": "abs-psi", "reference": 0.11790231118443, "tolerance": 1e-6}]
    }"#;

    const ARC_TOML: &str = r#"
        name = "toml-exclusion"
        weighting = "corner"
        gauge = [[0.0, 0.0], [1.0, 0.0]]

        [[segments]]
        kind = "line"
        from = [0.0, -1.0]
        to = [1.0, -1.0]
        condition = { kind = "psi-tangential", psi = 0.0, tangential = 0.0 }

        [[segments]]
        kind = "line"
        from = [1.0, -1.0]
        to = [1.0, 1.0]
        condition = { kind = "psi-tangential", psi = 0.0, tangential = 0.0 }

        [[segments]]
        kind = "line"
        from = [1.0, 1.0]
        to = [-1.0, 1.0]
        condition = { kind = "psi-tangential", psi = 0.0, tangential = -1.0 }

        [[segments]]
        kind = "line"
        from = [-1.0, 1.0]
        to = [-1.0, 0.0]
        condition = { kind = "psi-tangential", psi = 0.0, tangential = 0.0 }

        [[segments]]
        kind = "arc"
        center = [-1.0, -1.0]
        radius = 1.0
        start_angle = 90.0
        end_angle = 0.0
        condition = { kind = "psi-tangential", psi = 0.0, tangential = 0.0 }

        [basis]
        poles = [20, 20, 20, 20, 20]
        degree = 40
    "#;

    fn psi(case: &CaseDefinition, z: Complex64) -> f64 {
        let (sol, _) = solve_fixed(&case.domain, &case.basis, &case.solve_options()).unwrap();
        sol.stream(z).unwrap()
    }

    #[test]
    fn registry_covers_every_name() {
        for name in CASE_NAMES {
            let case = case_by_name(name).unwrap();
            assert_eq!(case.name, name);
            assert!(!case.probes.is_empty());
        }
        assert!(matches!(case_by_name("nope"), Err(StokesError::UnknownCase(_))));
    }

    #[test]
    fn case_geometries_are_positively_oriented_with_outward_bisectors() {
        for name in CASE_NAMES {
            let d = case_by_name(name).unwrap().domain;
            assert!(d.signed_area() > 0.0, "{name}");
            let n = d.segments.len();
            for i in 0..n {
                let gap = (d.segments[i].curve.end() - d.segments[(i + 1) % n].curve.start()).norm();
                assert!(gap < 1e-12, "{name}: gap {gap} after segment {i}");
            }
            for corner in &d.corners {
                let h = 1e-3 * d.length_scale;
                let out = corner.position + Complex64::from_polar(h, corner.exterior_bisector_angle);
                let inn = corner.position - Complex64::from_polar(h, corner.exterior_bisector_angle);
                assert!(!d.contains(out), "{name}: corner {}", corner.position);
                assert!(d.contains(inn), "{name}: corner {}", corner.position);
            }
        }
    }

    #[test]
    fn probes_outside_the_domain_are_rejected() {
        let mut case = case_lid_driven_cavity().unwrap();
        case.probes
            .push(Probe::point("outside", c(2.0, 0.0), Quantity::Psi, 0.0, 1.0));
        assert!(matches!(case.validate(), Err(StokesError::Config(_))));
    }

    #[test]
    fn parameter_checks() {
        assert!(case_triangle_cavity(0.0).is_err());
        assert!(case_triangle_cavity(PI).is_err());
        assert!(case_cavity_with_exclusion(0.0).is_err());
        assert!(case_cavity_with_exclusion(2.5).is_err());
        assert!(case_bent_channel(0.1).is_err());
        let t = case_triangle_cavity(60f64.to_radians()).unwrap();
        assert!(t.probes.iter().all(|p| !matches!(p.kind, ProbeKind::SignChanges { .. })));
    }

    #[test]
    fn basis_overrides_keep_pole_pattern() {
        let step = case_step_channel().unwrap();
        let b = step.basis_with(Some(30), Some(10), Some(3.0));
        assert_eq!(b.poles_per_corner, vec![0, 30, 0, 0, 0, 0]);
        assert_eq!(b.degree, 10);
        assert_eq!(b.sigma, 3.0);
        let bent = case_bent_channel(3.0).unwrap();
        assert_eq!(bent.basis_with(Some(5), None, None).poles_per_corner, vec![5; 4]);
    }

    #[test]
    fn json_config_reproduces_the_cavity() {
        let cfg = CaseConfig::from_json(CAVITY_JSON).unwrap();
        let case = cfg.build().unwrap();
        assert_eq!(case.domain.corners.len(), 4);
        assert_eq!(case.basis.poles_per_corner, vec![12; 4]);
        let (sol, rep) = solve_fixed(&case.domain, &case.basis, &case.solve_options()).unwrap();
        let results = case.evaluate_probes(&sol, &rep).unwrap();
        assert!(results[0].passed, "{:?}", results[0]);
        assert_eq!(results[0].name, "probe 0");
    }

    #[test]
    fn toml_config_reproduces_the_exclusion_case() {
        let case = CaseConfig::from_toml(ARC_TOML).unwrap().build().unwrap();
        assert_eq!(case.domain.corners.len(), 5);
        let built = case_cavity_with_exclusion(1.0).unwrap();
        let z = c(0.0, 0.0);
        let (a, b) = (psi(&case, z), psi(&built, z));
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }

    #[test]
    fn config_round_trips_and_rejects_unknown_fields() {
        let cfg = CaseConfig::from_json(CAVITY_JSON).unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(CaseConfig::from_json(&text).unwrap(), cfg);
        let bad = CAVITY_JSON.replace("\"gauge\"", "\"gauges\"");
        assert!(matches!(CaseConfig::from_json(&bad), Err(StokesError::Config(_))));
        assert!(CaseConfig::from_toml("name = 1").is_err());
    }

    #[test]
    fn config_files_load_by_extension() {
        let dir = std::env::temp_dir().join(format!("stokes-cases-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let json = dir.join("cavity.json");
        let toml_path = dir.join("arc.toml");
        std::fs::write(&json, CAVITY_JSON).unwrap();
        std::fs::write(&toml_path, ARC_TOML).unwrap();
        assert_eq!(CaseConfig::load(&json).unwrap().name, "json-cavity");
        assert_eq!(CaseConfig::load(&toml_path).unwrap().name, "toml-exclusion");
        assert!(CaseConfig::load(&dir.join("missing.json")).is_err());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
