//! Planar points and convex polygon domains.

use serde::{Deserialize, Serialize};

pub type Point = [f64; 2];

/// Absolute slack used for closed geometric inequalities.
pub const GEOM_TOL: f64 = 1e-12;

pub fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

pub fn dist2(a: Point, b: Point) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

/// Euclidean distance from `p` to the closed segment `ab`.
pub fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0);
    dist(p, [a[0] + t * dx, a[1] + t * dy])
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PolygonError {
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon vertex {0} is not finite")]
    NonFinite(usize),
    #[error("polygon is not strictly convex and counterclockwise at vertex {0}")]
    NotConvexCcw(usize),
}

/// Convex polygon with counterclockwise vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolygonRepr", into = "PolygonRepr")]
pub struct ConvexPolygon {
    vertices: Vec<Point>,
}

#[derive(Serialize, Deserialize)]
struct PolygonRepr {
    vertices: Vec<Point>,
}

impl TryFrom<PolygonRepr> for ConvexPolygon {
    type Error = PolygonError;
    fn try_from(r: PolygonRepr) -> Result<Self, Self::Error> {
        ConvexPolygon::new(r.vertices)
    }
}

impl From<ConvexPolygon> for PolygonRepr {
    fn from(p: ConvexPolygon) -> Self {
        PolygonRepr { vertices: p.vertices }
    }
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

impl ConvexPolygon {
    pub fn new(vertices: Vec<Point>) -> Result<Self, PolygonError> {
        let n = vertices.len();
        if n < 3 {
            return Err(PolygonError::TooFewVertices(n));
        }
        if let Some(i) = vertices.iter().position(|v| !v[0].is_finite() || !v[1].is_finite()) {
            return Err(PolygonError::NonFinite(i));
        }
        for i in 0..n {
            let c = cross(vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]);
            if c <= 0.0 {
                return Err(PolygonError::NotConvexCcw((i + 1) % n));
            }
        }
        // a star-shaped winding above one full turn would pass the local test
        let mut turn = 0.0;
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            let h1 = (b[1] - a[1]).atan2(b[0] - a[0]);
            let h2 = (c[1] - b[1]).atan2(c[0] - b[0]);
            let mut d = h2 - h1;
            while d <= -std::f64::consts::PI {
                d += 2.0 * std::f64::consts::PI;
            }
            while d > std::f64::consts::PI {
                d -= 2.0 * std::f64::consts::PI;
            }
            turn += d;
        }
        if (turn - 2.0 * std::f64::consts::PI).abs() > 1e-6 {
            return Err(PolygonError::NotConvexCcw(0));
        }
        Ok(ConvexPolygon { vertices })
    }

    /// Axis-aligned square `[0, side]²`.
    pub fn square(side: f64) -> Self {
        ConvexPolygon::new(vec![[0.0, 0.0], [side, 0.0], [side, side], [0.0, side]])
            .expect("square is convex")
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Closed containment (boundary inclusive, up to [`GEOM_TOL`]).
    pub fn contains(&self, p: Point) -> bool {
        self.edges().all(|(a, b)| {
            let len = dist(a, b);
            cross(a, b, p) / len >= -GEOM_TOL
        })
    }

    /// Exact distance to the polygon boundary: minimum over edge segments.
    pub fn boundary_distance(&self, p: Point) -> f64 {
        self.edges()
            .map(|(a, b)| segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Signed depth `min_i (distance to edge line i)`, positive inside.
    fn depth(&self, p: Point) -> f64 {
        self.edges()
            .map(|(a, b)| cross(a, b, p) / dist(a, b))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in &self.vertices {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        (lo, hi)
    }

    /// Radius of the largest inscribed disk.
    ///
    /// Depth is concave on a convex polygon, so nested ternary search converges.
    pub fn inradius(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        let best_over_y = |x: f64| {
            let (mut a, mut b) = (lo[1], hi[1]);
            for _ in 0..200 {
                let m1 = a + (b - a) / 3.0;
                let m2 = b - (b - a) / 3.0;
                if self.depth([x, m1]) < self.depth([x, m2]) {
                    a = m1;
                } else {
                    b = m2;
                }
            }
            self.depth([x, 0.5 * (a + b)])
        };
        let (mut a, mut b) = (lo[0], hi[0]);
        for _ in 0..200 {
            let m1 = a + (b - a) / 3.0;
            let m2 = b - (b - a) / 3.0;
            if best_over_y(m1) < best_over_y(m2) {
                a = m1;
            } else {
                b = m2;
            }
        }
        best_over_y(0.5 * (a + b))
    }

    pub fn area(&self) -> f64 {
        let n = self.vertices.len();
        0.5 * (0..n)
            .map(|i| {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % n];
                a[0] * b[1] - a[1] * b[0]
            })
            .sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_distances() {
        let sq = ConvexPolygon::square(1.0);
        assert!((sq.boundary_distance([0.05, 0.5]) - 0.05).abs() < 1e-15);
        assert!((sq.boundary_distance([0.5, 0.5]) - 0.5).abs() < 1e-15);
        assert!((sq.boundary_distance([2.0, 0.5]) - 1.0).abs() < 1e-15);
        assert!(sq.contains([0.0, 0.0]));
        assert!(sq.contains([1.0, 0.3]));
        assert!(!sq.contains([1.0 + 1e-6, 0.3]));
    }

    #[test]
    fn inradius_of_known_shapes() {
        assert!((ConvexPolygon::square(2.0).inradius() - 1.0).abs() < 1e-9);
        let s3 = 3f64.sqrt();
        let tri = ConvexPolygon::new(vec![[0.0, 0.0], [2.0, 0.0], [1.0, s3]]).unwrap();
        assert!((tri.inradius() - s3 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_clockwise_and_reflex() {
        assert!(ConvexPolygon::new(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]]).is_err());
        assert!(ConvexPolygon::new(vec![[0.0, 0.0], [2.0, 0.0], [1.0, 0.2], [1.0, 2.0]]).is_err());
        assert!(ConvexPolygon::new(vec![[0.0, 0.0], [1.0, 0.0]]).is_err());
    }
}
