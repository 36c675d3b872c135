//! Flow domains: curved polygons, their corners, boundary conditions, and
//! corner-clustered boundary sampling.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::BasisConfig;
use crate::error::{Result, StokesError};

/// Number of chords used to approximate a curved segment for masking.
const POLYLINE_PIECES: usize = 512;

pub type CurveFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;
pub type PointFn = Arc<dyn Fn(Complex64) -> f64 + Send + Sync>;

/// A boundary piece parametrized over `t ∈ [0, 1]`.
#[derive(Clone)]
pub enum Curve {
    Line {
        start: Complex64,
        end: Complex64,
    },
    /// `center + radius·exp(i·(start_angle + t·(end_angle − start_angle)))`.
    Arc {
        center: Complex64,
        radius: f64,
        start_angle: f64,
        end_angle: f64,
    },
    /// A general smooth curve with an analytic tangent `dz/dt`.
    Parametric {
        name: String,
        point: CurveFn,
        tangent: CurveFn,
    },
}

impl fmt::Debug for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Curve::Line { start, end } => write!(f, "Line({start} -> {end})"),
            Curve::Arc {
                center,
                radius,
                start_angle,
                end_angle,
            } => write!(
                f,
                "Arc(center {center}, r {radius}, {start_angle} -> {end_angle})"
            ),
            Curve::Parametric { name, .. } => write!(f, "Parametric({name})"),
        }
    }
}

impl Curve {
    pub fn line(start: Complex64, end: Complex64) -> Self {
        Curve::Line { start, end }
    }

    pub fn arc(center: Complex64, radius: f64, start_angle: f64, end_angle: f64) -> Self {
        Curve::Arc {
            center,
            radius,
            start_angle,
            end_angle,
        }
    }

    pub fn parametric(
        name: impl Into<String>,
        point: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
        tangent: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Curve::Parametric {
            name: name.into(),
            point: Arc::new(point),
            tangent: Arc::new(tangent),
        }
    }

    /// The graph `y = height(x)` traversed from `x0` to `x1`.
    pub fn graph(
        name: impl Into<String>,
        height: impl Fn(f64) -> f64 + Send + Sync + 'static,
        slope: impl Fn(f64) -> f64 + Send + Sync + 'static,
        x0: f64,
        x1: f64,
    ) -> Self {
        let dx = x1 - x0;
        Curve::parametric(
            name,
            move |t| {
                let x = x0 + t * dx;
                Complex64::new(x, height(x))
            },
            move |t| {
                let x = x0 + t * dx;
                Complex64::new(dx, dx * slope(x))
            },
        )
    }

    pub fn point(&self, t: f64) -> Complex64 {
        match self {
            Curve::Line { start, end } => start + (end - start) * t,
            Curve::Arc {
                center,
                radius,
                start_angle,
                end_angle,
            } => {
                let angle = start_angle + t * (end_angle - start_angle);
                center + Complex64::from_polar(*radius, angle)
            }
            Curve::Parametric { point, .. } => point(t),
        }
    }

    /// Derivative `dz/dt`.
    pub fn tangent(&self, t: f64) -> Complex64 {
        match self {
            Curve::Line { start, end } => end - start,
            Curve::Arc {
                radius,
                start_angle,
                end_angle,
                ..
            } => {
                let sweep = end_angle - start_angle;
                let angle = start_angle + t * sweep;
                Complex64::i() * Complex64::from_polar(*radius, angle) * sweep
            }
            Curve::Parametric { tangent, .. } => tangent(t),
        }
    }

    pub fn start(&self) -> Complex64 {
        self.point(0.0)
    }

    pub fn end(&self) -> Complex64 {
        self.point(1.0)
    }

    pub fn is_straight(&self) -> bool {
        matches!(self, Curve::Line { .. })
    }

    /// Arclength from `t = 0` to `t`.
    pub fn arclength_at(&self, t: f64) -> f64 {
        match self {
            Curve::Line { start, end } => (end - start).norm() * t,
            Curve::Arc {
                radius,
                start_angle,
                end_angle,
                ..
            } => radius * (end_angle - start_angle).abs() * t,
            Curve::Parametric { .. } => gauss_legendre(0.0, t, 64, |s| self.tangent(s).norm()),
        }
    }

    pub fn length(&self) -> f64 {
        self.arclength_at(1.0)
    }
}

/// Composite 5-point Gauss–Legendre quadrature on `[a, b]`.
pub(crate) fn gauss_legendre(a: f64, b: f64, panels: usize, f: impl Fn(f64) -> f64) -> f64 {
    const NODES: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683_1,
        0.538_469_310_105_683_1,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const WEIGHTS: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (x, w) in NODES.iter().zip(WEIGHTS) {
            total += w * f(mid + 0.5 * h * x);
        }
    }
    0.5 * h * total
}

/// Boundary data as a function of the boundary point `z` and the arclength
/// `s` measured from the start of its segment.
#[derive(Clone)]
pub enum BoundaryData {
    Constant(f64),
    /// Coefficients `c0 + c1·s + c2·s² + …`.
    ArclengthPolynomial(Vec<f64>),
    Function(PointFn),
}

impl fmt::Debug for BoundaryData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryData::Constant(c) => write!(f, "Constant({c})"),
            BoundaryData::ArclengthPolynomial(c) => write!(f, "ArclengthPolynomial({c:?})"),
            BoundaryData::Function(_) => write!(f, "Function(..)"),
        }
    }
}

impl From<f64> for BoundaryData {
    fn from(value: f64) -> Self {
        BoundaryData::Constant(value)
    }
}

impl BoundaryData {
    pub fn function(f: impl Fn(Complex64) -> f64 + Send + Sync + 'static) -> Self {
        BoundaryData::Function(Arc::new(f))
    }

    pub fn eval(&self, z: Complex64, s: f64) -> f64 {
        match self {
            BoundaryData::Constant(c) => *c,
            BoundaryData::ArclengthPolynomial(coeffs) => {
                coeffs.iter().rev().fold(0.0, |acc, c| acc * s + c)
            }
            BoundaryData::Function(f) => f(z),
        }
    }

    pub fn negated(&self) -> Self {
        match self {
            BoundaryData::Constant(c) => BoundaryData::Constant(-c),
            BoundaryData::ArclengthPolynomial(c) => {
                BoundaryData::ArclengthPolynomial(c.iter().map(|x| -x).collect())
            }
            BoundaryData::Function(f) => {
                let f = Arc::clone(f);
                BoundaryData::function(move |z| -f(z))
            }
        }
    }
}

/// Two scalar conditions per boundary point.
///
/// Tangential velocity is measured along the direction in which the segment
/// is traversed (counterclockwise around the domain). With `n` the outward
/// normal this is `−∂ψ/∂n`.
#[derive(Clone, Debug)]
pub enum BoundaryCondition {
    PsiAndTangentialVelocity {
        psi: BoundaryData,
        tangential: BoundaryData,
    },
    VelocityVector {
        u: BoundaryData,
        v: BoundaryData,
    },
}

impl BoundaryCondition {
    /// Stationary wall on the streamline `ψ = psi`.
    pub fn no_slip(psi: f64) -> Self {
        Self::moving_wall(psi, 0.0)
    }

    pub fn moving_wall(psi: f64, tangential: f64) -> Self {
        BoundaryCondition::PsiAndTangentialVelocity {
            psi: psi.into(),
            tangential: tangential.into(),
        }
    }

    /// `ψ = h`, `∂ψ/∂n = k` with `n` the outward normal.
    pub fn psi_and_normal_derivative(h: BoundaryData, k: BoundaryData) -> Self {
        BoundaryCondition::PsiAndTangentialVelocity {
            psi: h,
            tangential: k.negated(),
        }
    }

    pub fn velocity(u: impl Into<BoundaryData>, v: impl Into<BoundaryData>) -> Self {
        BoundaryCondition::VelocityVector {
            u: u.into(),
            v: v.into(),
        }
    }

    pub fn negated(&self) -> Self {
        match self {
            BoundaryCondition::PsiAndTangentialVelocity { psi, tangential } => {
                BoundaryCondition::PsiAndTangentialVelocity {
                    psi: psi.negated(),
                    tangential: tangential.negated(),
                }
            }
            BoundaryCondition::VelocityVector { u, v } => BoundaryCondition::VelocityVector {
                u: u.negated(),
                v: v.negated(),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Corner {
    pub position: Complex64,
    /// Direction along which poles are placed; points out of the domain.
    pub exterior_bisector_angle: f64,
    pub interior_angle: f64,
}

impl Corner {
    pub fn interior_bisector_angle(&self) -> f64 {
        normalize_angle(self.exterior_bisector_angle + PI)
    }
}

#[derive(Clone, Debug)]
pub struct Segment {
    pub start_corner: usize,
    pub end_corner: usize,
    pub curve: Curve,
    pub bc: BoundaryCondition,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplePoint {
    pub z: Complex64,
    /// Curve parameter on the owning segment.
    pub t: f64,
    /// Arclength from the start of the segment.
    pub s: f64,
    pub segment: usize,
    pub nearest_corner: usize,
    pub distance: f64,
    /// Angle of the local tangent (direction of traversal).
    pub frame_angle: f64,
}

/// A simply connected domain bounded by a closed counterclockwise loop.
#[derive(Clone, Debug)]
pub struct ProblemDomain {
    pub corners: Vec<Corner>,
    pub segments: Vec<Segment>,
    pub length_scale: f64,
    polyline: Vec<Complex64>,
}

pub(crate) fn normalize_angle(a: f64) -> f64 {
    let mut a = a.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// Polygon with straight sides and no-slip (`ψ = 0`) walls everywhere.
pub fn build_polygon(vertices: &[Complex64]) -> Result<ProblemDomain> {
    if vertices.len() < 3 {
        return Err(StokesError::Geometry(format!(
            "a polygon needs at least 3 vertices, got {}",
            vertices.len()
        )));
    }
    for i in 0..vertices.len() {
        for j in i + 1..vertices.len() {
            if vertices[i] == vertices[j] {
                return Err(StokesError::Geometry(format!(
                    "repeated vertex {} at positions {i} and {j}",
                    vertices[i]
                )));
            }
        }
    }
    let n = vertices.len();
    let pieces = (0..n)
        .map(|i| {
            (
                Curve::line(vertices[i], vertices[(i + 1) % n]),
                BoundaryCondition::no_slip(0.0),
            )
        })
        .collect();
    ProblemDomain::from_curves(pieces)
}

impl ProblemDomain {
    /// Builds a domain from consecutive boundary pieces. Every junction is a
    /// corner; corner `k` is the start of piece `k`.
    pub fn from_curves(pieces: Vec<(Curve, BoundaryCondition)>) -> Result<Self> {
        let n = pieces.len();
        if n < 2 {
            return Err(StokesError::Geometry(
                "a closed boundary needs at least two pieces".into(),
            ));
        }
        let starts: Vec<Complex64> = pieces.iter().map(|(c, _)| c.start()).collect();
        let mut length_scale: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                length_scale = length_scale.max((starts[i] - starts[j]).norm());
            }
        }
        if length_scale == 0.0 || !length_scale.is_finite() {
            return Err(StokesError::Geometry("degenerate corner set".into()));
        }
        for i in 0..n {
            let gap = (pieces[i].0.end() - starts[(i + 1) % n]).norm();
            if gap > 1e-12 * length_scale {
                return Err(StokesError::Geometry(format!(
                    "boundary is not closed: piece {i} ends {gap:e} away from the next start"
                )));
            }
        }

        let mut corners = Vec::with_capacity(n);
        for k in 0..n {
            let incoming = pieces[(k + n - 1) % n].0.tangent(1.0);
            let outgoing = pieces[k].0.tangent(0.0);
            if incoming.norm() == 0.0 || outgoing.norm() == 0.0 {
                return Err(StokesError::Geometry(format!(
                    "zero tangent at corner {k}"
                )));
            }
            let turn = (outgoing / incoming).arg();
            let interior_angle = PI - turn;
            if !(interior_angle > 0.0 && interior_angle < 2.0 * PI) {
                return Err(StokesError::Geometry(format!(
                    "cusp at corner {k} (interior angle {interior_angle})"
                )));
            }
            corners.push(Corner {
                position: starts[k],
                exterior_bisector_angle: normalize_angle(
                    outgoing.arg() + 0.5 * interior_angle + PI,
                ),
                interior_angle,
            });
        }

        let segments: Vec<Segment> = pieces
            .into_iter()
            .enumerate()
            .map(|(k, (curve, bc))| Segment {
                start_corner: k,
                end_corner: (k + 1) % n,
                curve,
                bc,
            })
            .collect();

        let mut polyline = Vec::new();
        for seg in &segments {
            if seg.curve.is_straight() {
                polyline.push(seg.curve.start());
            } else {
                for i in 0..POLYLINE_PIECES {
                    polyline.push(seg.curve.point(i as f64 / POLYLINE_PIECES as f64));
                }
            }
        }

        let domain = ProblemDomain {
            corners,
            segments,
            length_scale,
            polyline,
        };
        if domain.signed_area() <= 0.0 {
            return Err(StokesError::Orientation);
        }
        if domain.segments.iter().all(|s| s.curve.is_straight()) {
            domain.check_simple_polygon()?;
        }
        Ok(domain)
    }

    pub fn with_condition(mut self, segment: usize, bc: BoundaryCondition) -> Self {
        self.segments[segment].bc = bc;
        self
    }

    pub fn with_length_scale(mut self, length_scale: f64) -> Self {
        self.length_scale = length_scale;
        self
    }

    /// Same geometry with every boundary datum negated.
    pub fn with_negated_data(&self) -> Self {
        let mut out = self.clone();
        for seg in &mut out.segments {
            seg.bc = seg.bc.negated();
        }
        out
    }

    pub fn corner_positions(&self) -> Vec<Complex64> {
        self.corners.iter().map(|c| c.position).collect()
    }

    fn integrate_boundary(&self, f: impl Fn(Complex64, Complex64) -> f64) -> f64 {
        self.segments
            .iter()
            .map(|seg| {
                let panels = if seg.curve.is_straight() { 1 } else { 64 };
                gauss_legendre(0.0, 1.0, panels, |t| {
                    f(seg.curve.point(t), seg.curve.tangent(t))
                })
            })
            .sum()
    }

    /// Enclosed area, positive for counterclockwise traversal.
    pub fn signed_area(&self) -> f64 {
        self.integrate_boundary(|z, dz| 0.5 * (z.conj() * dz).im)
    }

    /// Area centroid.
    pub fn centroid(&self) -> Complex64 {
        let area = self.signed_area();
        let mx = self.integrate_boundary(|z, dz| 0.5 * z.re * z.re * dz.im);
        let my = self.integrate_boundary(|z, dz| -0.5 * z.im * z.im * dz.re);
        Complex64::new(mx / area, my / area)
    }

    fn check_simple_polygon(&self) -> Result<()> {
        let n = self.segments.len();
        let edges: Vec<(Complex64, Complex64)> = self
            .segments
            .iter()
            .map(|s| (s.curve.start(), s.curve.end()))
            .collect();
        for i in 0..n {
            for j in i + 1..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    continue;
                }
                if segments_intersect(edges[i], edges[j]) {
                    return Err(StokesError::Geometry(format!(
                        "edges {i} and {j} intersect"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Winding number of the boundary around `z`, computed on the polyline
    /// approximation.
    pub fn winding_number(&self, z: Complex64) -> f64 {
        let n = self.polyline.len();
        let mut total = 0.0;
        for i in 0..n {
            let a = self.polyline[i] - z;
            let b = self.polyline[(i + 1) % n] - z;
            total += (b / a).arg();
        }
        total / (2.0 * PI)
    }

    /// Distance from `z` to the polyline approximation of the boundary.
    pub fn boundary_distance(&self, z: Complex64) -> f64 {
        let n = self.polyline.len();
        (0..n)
            .map(|i| point_segment_distance(z, self.polyline[i], self.polyline[(i + 1) % n]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Closed-domain membership; points within `1e-12·L` of the boundary
    /// count as inside.
    pub fn contains(&self, z: Complex64) -> bool {
        if self.boundary_distance(z) <= 1e-12 * self.length_scale {
            return true;
        }
        self.winding_number(z).round() != 0.0
    }

    /// Boundary samples for every segment.
    pub fn sample_boundary(
        &self,
        sampling: &Sampling,
        basis: &BasisConfig,
        density: f64,
    ) -> Vec<SamplePoint> {
        (0..self.segments.len())
            .flat_map(|k| {
                let plan = segment_plan(self, k, sampling, basis, density);
                sample_segment(self, k, &plan)
            })
            .collect()
    }
}

fn point_segment_distance(z: Complex64, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (z - a).norm();
    }
    let t = ((z - a) * d.conj()).re / len2;
    let t = t.clamp(0.0, 1.0);
    (z - (a + d * t)).norm()
}

fn cross(a: Complex64, b: Complex64) -> f64 {
    (a.conj() * b).im
}

fn segments_intersect(p: (Complex64, Complex64), q: (Complex64, Complex64)) -> bool {
    let d1 = cross(p.1 - p.0, q.0 - p.0);
    let d2 = cross(p.1 - p.0, q.1 - p.0);
    let d3 = cross(q.1 - q.0, p.0 - q.0);
    let d4 = cross(q.1 - q.0, p.1 - q.0);
    if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
        return true;
    }
    let on = |a: Complex64, b: Complex64, c: Complex64, d: f64| {
        d == 0.0
            && c.re >= a.re.min(b.re)
            && c.re <= a.re.max(b.re)
            && c.im >= a.im.min(b.im)
            && c.im <= a.im.max(b.im)
    };
    on(p.0, p.1, q.0, d1) || on(p.0, p.1, q.1, d2) || on(q.0, q.1, p.0, d3) || on(q.0, q.1, p.1, d4)
}

/// Index and distance of the nearest corner; ties go to the lowest index.
pub fn nearest_corner(z: Complex64, corners: &[Corner]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (k, c) in corners.iter().enumerate() {
        let d = (z - c.position).norm();
        if d < best.1 {
            best = (k, d);
        }
    }
    best
}

/// How boundary samples are generated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum Sampling {
    /// `t = (1 + tanh(s))/2` with `s` equispaced in `[−span, span]`.
    Tanh {
        per_segment: usize,
        span: f64,
        /// Scale the count on each segment by its length relative to the mean.
        #[serde(default)]
        scale_by_length: bool,
    },
    /// Samples placed in step with the clustered poles, plus a uniform
    /// background sized to the polynomial degree.
    Clustered { samples_per_pole: usize },
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling::Clustered {
            samples_per_pole: 3,
        }
    }
}

impl Sampling {
    /// 300 points per side with `tanh` spacing over `[−14, 14]`.
    pub fn tanh_default() -> Self {
        Sampling::Tanh {
            per_segment: 300,
            span: 14.0,
            scale_by_length: false,
        }
    }
}

/// Per-segment sampling recipe.
#[derive(Clone, Debug, PartialEq)]
pub enum SegmentSampling {
    Tanh {
        count: usize,
        span: f64,
    },
    /// Distances (arclength) from the start and end corners, plus `uniform`
    /// equispaced parameters.
    Clustered {
        start_distances: Vec<f64>,
        end_distances: Vec<f64>,
        uniform: usize,
    },
}

fn clustered_distances(count: usize, per_pole: f64, length_scale: f64, sigma: f64) -> Vec<f64> {
    if count == 0 {
        return Vec::new();
    }
    let total = (per_pole * count as f64).round().max(1.0) as usize;
    let root = (count as f64).sqrt();
    (1..=total)
        .map(|j| {
            let frac = j as f64 / total as f64 * count as f64;
            length_scale * (-sigma * (root - frac.sqrt())).exp()
        })
        .collect()
}

pub(crate) fn segment_plan(
    domain: &ProblemDomain,
    segment: usize,
    sampling: &Sampling,
    basis: &BasisConfig,
    density: f64,
) -> SegmentSampling {
    let lengths: Vec<f64> = domain.segments.iter().map(|s| s.curve.length()).collect();
    let total: f64 = lengths.iter().sum();
    let len = lengths[segment];
    match sampling {
        Sampling::Tanh {
            per_segment,
            span,
            scale_by_length,
        } => {
            let base = if *scale_by_length {
                *per_segment as f64 * len * lengths.len() as f64 / total
            } else {
                *per_segment as f64
            };
            SegmentSampling::Tanh {
                count: ((base * density).ceil() as usize).max(2),
                span: *span,
            }
        }
        Sampling::Clustered { samples_per_pole } => {
            let seg = &domain.segments[segment];
            let per_pole = *samples_per_pole as f64 * density;
            let poles = |k: usize| basis.poles_per_corner.get(k).copied().unwrap_or(0);
            let background = (6 * (basis.degree + 1)).max(10 * lengths.len()) as f64;
            SegmentSampling::Clustered {
                start_distances: clustered_distances(
                    poles(seg.start_corner),
                    per_pole,
                    basis.length_scale,
                    basis.sigma,
                ),
                end_distances: clustered_distances(
                    poles(seg.end_corner),
                    per_pole,
                    basis.length_scale,
                    basis.sigma,
                ),
                uniform: ((density * background * len / total).ceil() as usize).max(4),
            }
        }
    }
}

/// Samples one segment according to `plan`, attaching nearest-corner data
/// and the local tangent frame to every point.
pub fn sample_segment(
    domain: &ProblemDomain,
    segment: usize,
    plan: &SegmentSampling,
) -> Vec<SamplePoint> {
    let seg = &domain.segments[segment];
    let mut params: Vec<f64> = match plan {
        SegmentSampling::Tanh { count, span } => {
            let n = (*count).max(2);
            (0..n)
                .map(|i| {
                    let s = -span + 2.0 * span * i as f64 / (n - 1) as f64;
                    0.5 * (1.0 + s.tanh())
                })
                .collect()
        }
        SegmentSampling::Clustered {
            start_distances,
            end_distances,
            uniform,
        } => {
            let len = seg.curve.length();
            let mut t: Vec<f64> = start_distances
                .iter()
                .map(|d| d / len)
                .filter(|t| *t < 0.5)
                .collect();
            t.extend(
                end_distances
                    .iter()
                    .map(|d| 1.0 - d / len)
                    .filter(|t| *t > 0.5),
            );
            t.extend((0..*uniform).map(|i| (i as f64 + 0.5) / *uniform as f64));
            t.sort_by(f64::total_cmp);
            t.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
            t
        }
    };
    params.retain(|t| *t > 0.0 && *t < 1.0);
    // Points that round onto a corner carry zero weight and can collide with poles.
    let floor = 1e-15 * domain.length_scale;
    params
        .into_iter()
        .filter_map(|t| {
            let z = seg.curve.point(t);
            let (nearest, distance) = nearest_corner(z, &domain.corners);
            (distance > floor).then(|| SamplePoint {
                z,
                t,
                s: seg.curve.arclength_at(t),
                segment,
                nearest_corner: nearest,
                distance,
                frame_angle: seg.curve.tangent(t).arg(),
            })
        })
        .collect()
}
