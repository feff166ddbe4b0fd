//! Target domain, sensors, radii and perturbations.
//!
//! A [`Scenario`] is the single source of the coverage data: the convex target
//! domain `D`, the sensor positions `X`, the radii `r_c, r_s, r_w, r_f` and the
//! perturbation budget `ε` (each sensor may move at most `ε/2`).

use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{dist, dist2, ConvexPolygon, Point, PolygonError, GEOM_TOL};
use crate::metric::FiniteMetric;
use crate::oracle;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error("only dimension 2 is supported, got {0}")]
    Dimension(usize),
    #[error("invalid domain: {0}")]
    Polygon(#[from] PolygonError),
    #[error("radius {name} must be positive and finite, got {value}")]
    BadRadius { name: &'static str, value: f64 },
    #[error("epsilon must be nonnegative and finite, got {0}")]
    BadEpsilon(f64),
    #[error("sensor {index} at ({x}, {y}) lies outside the domain")]
    SensorOutside { index: usize, x: f64, y: f64 },
    #[error("sensors {0} and {1} coincide")]
    DuplicateSensors(usize, usize),
    #[error("expected {expected} points, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("grid step {step} exceeds the allowed maximum {max}")]
    GridTooCoarse { step: f64, max: f64 },
    #[error("restricted domain D - N_r̂(∂D) is empty at r̂ = {r_hat}")]
    EmptyRestrictedDomain { r_hat: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Radii {
    pub r_c: f64,
    pub r_s: f64,
    pub r_w: f64,
    pub r_f: f64,
}

impl Radii {
    /// Radii at the equality bounds `r_c = r_s/√2`, `r_w = r_s·√10`.
    pub fn tight(r_s: f64, r_f: f64) -> Self {
        Radii {
            r_c: r_s / std::f64::consts::SQRT_2,
            r_s,
            r_w: r_s * 10f64.sqrt(),
            r_f,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Domain {
    Polygon(ConvexPolygon),
}

impl Domain {
    pub fn polygon(&self) -> &ConvexPolygon {
        match self {
            Domain::Polygon(p) => p,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScenarioRepr", into = "ScenarioRepr")]
pub struct Scenario {
    domain: Domain,
    radii: Radii,
    epsilon: f64,
    sensors: Vec<Point>,
}

#[derive(Serialize, Deserialize)]
struct ScenarioRepr {
    dimension: usize,
    domain: Domain,
    radii: Radii,
    epsilon: f64,
    sensors: Vec<Point>,
}

impl TryFrom<ScenarioRepr> for Scenario {
    type Error = ScenarioError;
    fn try_from(r: ScenarioRepr) -> Result<Self, Self::Error> {
        if r.dimension != 2 {
            return Err(ScenarioError::Dimension(r.dimension));
        }
        Scenario::new(r.domain.polygon().clone(), r.radii, r.epsilon, r.sensors)
    }
}

impl From<Scenario> for ScenarioRepr {
    fn from(s: Scenario) -> Self {
        ScenarioRepr {
            dimension: 2,
            domain: s.domain,
            radii: s.radii,
            epsilon: s.epsilon,
            sensors: s.sensors,
        }
    }
}

impl Scenario {
    /// Structural validation only; the coverage assumptions are checked by
    /// [`validate_assumptions`].
    pub fn new(
        domain: ConvexPolygon,
        radii: Radii,
        epsilon: f64,
        sensors: Vec<Point>,
    ) -> Result<Self, ScenarioError> {
        for (name, value) in [("r_c", radii.r_c), ("r_s", radii.r_s), ("r_w", radii.r_w), ("r_f", radii.r_f)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ScenarioError::BadRadius { name, value });
            }
        }
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(ScenarioError::BadEpsilon(epsilon));
        }
        for (index, p) in sensors.iter().enumerate() {
            if !p[0].is_finite() || !p[1].is_finite() || !domain.contains(*p) {
                return Err(ScenarioError::SensorOutside { index, x: p[0], y: p[1] });
            }
        }
        check_distinct(&sensors)?;
        Ok(Scenario {
            domain: Domain::Polygon(domain),
            radii,
            epsilon,
            sensors,
        })
    }

    pub fn domain(&self) -> &ConvexPolygon {
        self.domain.polygon()
    }

    pub fn radii(&self) -> Radii {
        self.radii
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn sensors(&self) -> &[Point] {
        &self.sensors
    }

    pub fn len(&self) -> usize {
        self.sensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sensors.is_empty()
    }

    /// `r̂ = r_f + r_s/√2`.
    pub fn r_hat(&self) -> f64 {
        self.radii.r_f + self.radii.r_s / std::f64::consts::SQRT_2
    }

    pub fn boundary_distance(&self, p: Point) -> f64 {
        self.domain().boundary_distance(p)
    }

    /// Same domain, radii and budget with the sensors moved to `targets`.
    pub fn with_sensors(&self, targets: Vec<Point>) -> Result<Self, ScenarioError> {
        Scenario::new(self.domain().clone(), self.radii, self.epsilon, targets)
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self, ScenarioError> {
        Scenario::new(self.domain().clone(), self.radii, epsilon, self.sensors.clone())
    }

    pub fn metric(&self) -> FiniteMetric {
        FiniteMetric::from_points(&self.sensors)
    }

    pub fn fence_mask(&self) -> Vec<bool> {
        let r_f = self.radii.r_f;
        self.sensors
            .iter()
            .map(|&p| self.boundary_distance(p) <= r_f)
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

fn check_distinct(points: &[Point]) -> Result<(), ScenarioError> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points[a][0]
            .total_cmp(&points[b][0])
            .then(points[a][1].total_cmp(&points[b][1]))
    });
    for w in order.windows(2) {
        if points[w[0]] == points[w[1]] {
            let (i, j) = (w[0].min(w[1]), w[0].max(w[1]));
            return Err(ScenarioError::DuplicateSensors(i, j));
        }
    }
    Ok(())
}

/// Indices of the fence sensors `F = X ∩ N_f(∂D)` (closed condition `≤ r_f`).
pub fn fence_sensors(s: &Scenario) -> BTreeSet<usize> {
    s.fence_mask()
        .into_iter()
        .enumerate()
        .filter_map(|(i, f)| f.then_some(i))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Assumption {
    A1,
    A2,
    A3,
    A4,
    A5,
    A6,
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    ByConstruction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionEntry {
    pub assumption: Assumption,
    pub status: Status,
    pub evidence: String,
}

/// One entry per assumption A1–A6, in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub entries: Vec<AssumptionEntry>,
}

impl AssumptionReport {
    pub fn holds(&self) -> bool {
        self.entries.iter().all(|e| e.status != Status::Fail)
    }

    pub fn status(&self, a: Assumption) -> Status {
        self.entries
            .iter()
            .find(|e| e.assumption == a)
            .map(|e| e.status)
            .expect("report has one entry per assumption")
    }

    pub fn failures(&self) -> impl Iterator<Item = &AssumptionEntry> {
        self.entries.iter().filter(|e| e.status == Status::Fail)
    }
}

impl fmt::Display for AssumptionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            let st = match e.status {
                Status::Pass => "pass",
                Status::Fail => "FAIL",
                Status::ByConstruction => "by-construction",
            };
            writeln!(f, "{}: {st} ({})", e.assumption, e.evidence)?;
        }
        Ok(())
    }
}

/// Inequalities at the A3 equality bound must pass despite `√` rounding.
const A3_REL_TOL: f64 = 1e-12;

/// Checks A1–A6. A5 is decided on a raster of `D − N_r̂(∂D)` at `grid_step`;
/// A6 holds by construction for convex polygons with `r_f` below half the inradius.
pub fn validate_assumptions(s: &Scenario, grid_step: f64) -> Result<AssumptionReport, ScenarioError> {
    let Radii { r_c, r_s, r_w, r_f } = s.radii;
    let max_step = r_s / 10.0;
    if !(grid_step > 0.0 && grid_step <= max_step) {
        return Err(ScenarioError::GridTooCoarse { step: grid_step, max: max_step });
    }
    let mut entries = Vec::with_capacity(6);
    entries.push(AssumptionEntry {
        assumption: Assumption::A1,
        status: Status::Pass,
        evidence: format!("cover radius r_c = {r_c}"),
    });
    let a2_ok = r_s <= r_w;
    entries.push(AssumptionEntry {
        assumption: Assumption::A2,
        status: if a2_ok { Status::Pass } else { Status::Fail },
        evidence: format!("communication radii r_s = {r_s}, r_w = {r_w} (need r_s <= r_w)"),
    });

    let rc_min = r_s / std::f64::consts::SQRT_2;
    let rw_min = r_s * 10f64.sqrt();
    let rc_ok = r_c >= rc_min * (1.0 - A3_REL_TOL);
    let rw_ok = r_w >= rw_min * (1.0 - A3_REL_TOL);
    let mut a3 = Vec::new();
    if !rc_ok {
        a3.push(format!("r_c = {r_c} < r_s/sqrt(2) = {rc_min}"));
    }
    if !rw_ok {
        a3.push(format!("r_w = {r_w} < r_s*sqrt(10) = {rw_min}"));
    }
    entries.push(AssumptionEntry {
        assumption: Assumption::A3,
        status: if rc_ok && rw_ok { Status::Pass } else { Status::Fail },
        evidence: if a3.is_empty() {
            format!("r_c = {r_c} >= {rc_min}, r_w = {r_w} >= {rw_min}")
        } else {
            a3.join("; ")
        },
    });

    let fence = fence_sensors(s);
    entries.push(AssumptionEntry {
        assumption: Assumption::A4,
        status: Status::Pass,
        evidence: format!(
            "compact convex polygon; {} of {} sensors within r_f = {r_f} of the boundary",
            fence.len(),
            s.len()
        ),
    });

    let r_hat = s.r_hat();
    let mask = oracle::restricted_mask(s.domain(), r_hat, grid_step)
        .map_err(|_| ScenarioError::EmptyRestrictedDomain { r_hat })?;
    let connected = oracle::connectivity_check(&mask).map_err(|_| ScenarioError::EmptyRestrictedDomain { r_hat })?;
    entries.push(AssumptionEntry {
        assumption: Assumption::A5,
        status: if connected { Status::Pass } else { Status::Fail },
        evidence: format!(
            "{} raster cells at step {grid_step} for r_hat = {r_hat}, {}",
            mask.count(),
            if connected { "4-connected" } else { "disconnected" }
        ),
    });

    let inradius = s.domain().inradius();
    let a6_ok = r_f < inradius / 2.0;
    entries.push(AssumptionEntry {
        assumption: Assumption::A6,
        status: if a6_ok { Status::ByConstruction } else { Status::Fail },
        evidence: if a6_ok {
            format!("convex polygon with r_f = {r_f} < inradius/2 = {}", inradius / 2.0)
        } else {
            format!("r_f = {r_f} >= inradius/2 = {}", inradius / 2.0)
        },
    });
    Ok(AssumptionReport { entries })
}

/// Positions `f(x_i)` after a perturbation, in sensor order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub targets: Vec<Point>,
}

impl Perturbation {
    pub fn identity(s: &Scenario) -> Self {
        Perturbation { targets: s.sensors.clone() }
    }

    pub fn max_displacement(&self, s: &Scenario) -> f64 {
        s.sensors
            .iter()
            .zip(&self.targets)
            .map(|(&a, &b)| dist(a, b))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbationClause {
    /// `‖x − f(x)‖ ≤ ε/2`
    StepBound,
    /// `f(x) ∈ D`
    OutsideDomain,
    /// `f(F) ⊂ N_f(∂D)`
    FenceLeftCollar,
    /// `f(X − F) ⊂ D − N_f(∂D)`
    InteriorEnteredCollar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PerturbationCheck {
    Pass,
    Fail { index: usize, clause: PerturbationClause },
}

impl PerturbationCheck {
    pub fn passed(&self) -> bool {
        matches!(self, PerturbationCheck::Pass)
    }
}

pub fn validate_perturbation(s: &Scenario, p: &Perturbation) -> Result<PerturbationCheck, ScenarioError> {
    if p.targets.len() != s.len() {
        return Err(ScenarioError::LengthMismatch { expected: s.len(), got: p.targets.len() });
    }
    let half = s.epsilon / 2.0;
    let r_f = s.radii.r_f;
    for (index, (&x, &fx)) in s.sensors.iter().zip(&p.targets).enumerate() {
        let fail = |clause| Ok(PerturbationCheck::Fail { index, clause });
        if dist(x, fx) > half + GEOM_TOL {
            return fail(PerturbationClause::StepBound);
        }
        if !fx[0].is_finite() || !fx[1].is_finite() || !s.domain().contains(fx) {
            return fail(PerturbationClause::OutsideDomain);
        }
        let fence = s.boundary_distance(x) <= r_f;
        let target_in_collar = s.boundary_distance(fx) <= r_f;
        if fence && !target_in_collar {
            return fail(PerturbationClause::FenceLeftCollar);
        }
        if !fence && target_in_collar {
            return fail(PerturbationClause::InteriorEnteredCollar);
        }
    }
    Ok(PerturbationCheck::Pass)
}

/// Random perturbation: sensors within `r_f + ε/2` of `∂D` stay put, every
/// other sensor moves uniformly inside the closed disk of radius `ε/2`.
pub fn generate_perturbation(s: &Scenario, seed: u64) -> Perturbation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = s.epsilon / 2.0;
    let keep = s.radii.r_f + half;
    let mut targets = s.sensors.clone();
    if half == 0.0 {
        return Perturbation { targets };
    }
    let fence = s.fence_mask();
    for (i, x) in s.sensors.iter().enumerate() {
        if s.boundary_distance(*x) <= keep {
            continue;
        }
        for _ in 0..1000 {
            let r = half * rng.gen::<f64>().sqrt();
            let theta = rng.gen::<f64>() * std::f64::consts::TAU;
            let cand = [x[0] + r * theta.cos(), x[1] + r * theta.sin()];
            let in_collar = s.boundary_distance(cand) <= s.radii.r_f;
            if dist2(*x, cand).sqrt() <= half && s.domain().contains(cand) && in_collar == fence[i] {
                targets[i] = cand;
                break;
            }
        }
    }
    // two moved sensors landing on one point has probability zero; undo if it happens
    if check_distinct(&targets).is_err() {
        return Perturbation { targets: s.sensors.clone() };
    }
    Perturbation { targets }
}

/// Sensor layouts for scenario generation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SensorLayout {
    /// `n` points uniform in the domain.
    Random(usize),
    /// Jittered triangular lattice at the given spacing plus a fence ring.
    Hex { spacing: f64 },
}

impl std::str::FromStr for SensorLayout {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(rest) = s.strip_prefix("grid:hex:") {
            let spacing: f64 = rest.parse().map_err(|_| format!("bad hex spacing '{rest}'"))?;
            if !(spacing > 0.0 && spacing.is_finite()) {
                return Err(format!("hex spacing must be positive, got {spacing}"));
            }
            return Ok(SensorLayout::Hex { spacing });
        }
        let n: usize = s
            .parse()
            .map_err(|_| format!("expected N or grid:hex:SPACING, got '{s}'"))?;
        Ok(SensorLayout::Random(n))
    }
}

/// Jitter applied to lattice sensors, as a fraction of the lattice spacing.
pub const HEX_JITTER_FRACTION: f64 = 0.025;

/// Sensor positions for `layout` inside `domain`, deterministic in `seed`.
pub fn layout_sensors(domain: &ConvexPolygon, layout: SensorLayout, r_f: f64, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match layout {
        SensorLayout::Random(n) => {
            let (lo, hi) = domain.bounding_box();
            let mut pts = Vec::with_capacity(n);
            while pts.len() < n {
                let p = [rng.gen_range(lo[0]..=hi[0]), rng.gen_range(lo[1]..=hi[1])];
                if domain.contains(p) {
                    pts.push(p);
                }
            }
            pts
        }
        SensorLayout::Hex { spacing } => {
            let jitter = spacing * HEX_JITTER_FRACTION;
            match axis_square(domain) {
                Some((origin, side)) => hex_square(origin, side, spacing, r_f, jitter, &mut rng),
                None => hex_polygon(domain, spacing, r_f, jitter, &mut rng),
            }
        }
    }
}

fn axis_square(domain: &ConvexPolygon) -> Option<(Point, f64)> {
    let v = domain.vertices();
    if v.len() != 4 {
        return None;
    }
    let (lo, hi) = domain.bounding_box();
    let side = hi[0] - lo[0];
    if (hi[1] - lo[1] - side).abs() > 1e-12 * side.max(1.0) {
        return None;
    }
    let corners = [[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]];
    corners.iter().all(|c| v.contains(c)).then_some((lo, side))
}

fn disk_jitter(rng: &mut ChaCha8Rng, radius: f64) -> Point {
    let r = radius * rng.gen::<f64>().sqrt();
    let t = rng.gen::<f64>() * std::f64::consts::TAU;
    [r * t.cos(), r * t.sin()]
}

/// Lattice rows aligned with the square so that the first and last rows and
/// the row end points form the fence ring at inset `r_f/2`.
fn hex_square(origin: Point, side: f64, spacing: f64, r_f: f64, jitter: f64, rng: &mut ChaCha8Rng) -> Vec<Point> {
    let inset = r_f / 2.0;
    let span = side - 2.0 * inset;
    let rows = ((span / (spacing * 3f64.sqrt() / 2.0)).round() as usize).max(1);
    let cols = ((span / spacing).round() as usize).max(1);
    let dy = span / rows as f64;
    let dx = span / cols as f64;
    let lo = origin[0] + inset;
    let hi = origin[0] + side - inset;
    let mut pts = Vec::new();
    for k in 0..=rows {
        let y = origin[1] + inset + k as f64 * dy;
        let edge_row = k == 0 || k == rows;
        let xs: Vec<f64> = if k % 2 == 0 {
            (0..=cols).map(|i| lo + i as f64 * dx).collect()
        } else {
            let mut v = vec![lo];
            v.extend((0..cols).map(|i| lo + (i as f64 + 0.5) * dx));
            v.push(hi);
            v
        };
        let last = xs.len() - 1;
        for (i, x) in xs.into_iter().enumerate() {
            let side_point = i == 0 || i == last;
            let p = if edge_row && side_point {
                [x, y]
            } else if edge_row {
                [x + rng.gen_range(-jitter..=jitter), y]
            } else if side_point {
                [x, y + rng.gen_range(-jitter..=jitter)]
            } else {
                let d = disk_jitter(rng, jitter);
                [x + d[0], y + d[1]]
            };
            pts.push(p);
        }
    }
    pts
}

/// Generic convex polygon: lattice points well inside the domain plus a ring
/// of fence sensors along every edge.
fn hex_polygon(domain: &ConvexPolygon, spacing: f64, r_f: f64, jitter: f64, rng: &mut ChaCha8Rng) -> Vec<Point> {
    let (lo, hi) = domain.bounding_box();
    let dy = spacing * 3f64.sqrt() / 2.0;
    let inner = r_f + 2.0 * jitter + 0.25 * spacing;
    let mut pts = Vec::new();
    let mut k = 0usize;
    loop {
        let y = lo[1] + k as f64 * dy;
        if y > hi[1] {
            break;
        }
        let shift = if k % 2 == 1 { spacing / 2.0 } else { 0.0 };
        let mut i = 0usize;
        loop {
            let x = lo[0] + shift + i as f64 * spacing;
            if x > hi[0] {
                break;
            }
            let d = disk_jitter(rng, jitter);
            let p = [x + d[0], y + d[1]];
            if domain.contains(p) && domain.boundary_distance(p) >= inner {
                pts.push(p);
            }
            i += 1;
        }
        k += 1;
    }
    let inset = r_f / 2.0;
    let ring_step = spacing / 2.0;
    let verts = domain.vertices();
    let n = verts.len();
    for e in 0..n {
        let a = verts[e];
        let b = verts[(e + 1) % n];
        let len = dist(a, b);
        let normal = [-(b[1] - a[1]) / len, (b[0] - a[0]) / len];
        let count = (len / ring_step).ceil() as usize;
        for j in 0..count {
            let t = j as f64 / count as f64;
            let p = [
                a[0] + t * (b[0] - a[0]) + inset * normal[0],
                a[1] + t * (b[1] - a[1]) + inset * normal[1],
            ];
            if domain.contains(p) && domain.boundary_distance(p) <= r_f {
                pts.push(p);
            }
        }
    }
    pts
}

/// Builds a scenario from a layout; radii default to the A3 equality bounds.
pub fn generate_scenario(
    domain: ConvexPolygon,
    layout: SensorLayout,
    radii: Radii,
    epsilon: f64,
    seed: u64,
) -> Result<Scenario, ScenarioError> {
    let sensors = layout_sensors(&domain, layout, radii.r_f, seed);
    Scenario::new(domain, radii, epsilon, sensors)
}

/// Removes every sensor strictly within `radius` of `center`.
pub fn carve_hole(s: &Scenario, center: Point, radius: f64) -> Result<Scenario, ScenarioError> {
    let kept: Vec<Point> = s
        .sensors
        .iter()
        .copied()
        .filter(|&p| dist(p, center) >= radius)
        .collect();
    s.with_sensors(kept)
}
