use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum separation between consecutive vertices, in meters.
pub const MIN_VERTEX_SEPARATION: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }

    pub fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }

    pub fn scale(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn rotate(self, angle: f64) -> Point {
        let (s, c) = angle.sin_cos();
        Point::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

/// Planar rigid transform: rotate by `yaw`, then translate by `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlanarPose {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
}

impl PlanarPose {
    pub const fn new(x: f64, y: f64, yaw: f64) -> Self {
        PlanarPose { x, y, yaw }
    }

    pub fn apply(&self, p: Point) -> Point {
        p.rotate(self.yaw).add(Point::new(self.x, self.y))
    }
}

/// A simple, counter-clockwise polygon. Coordinates are in meters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polygon {
    vertices: Vec<Point>,
}

impl<'de> Deserialize<'de> for Polygon {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            vertices: Vec<Point>,
        }
        let raw = Raw::deserialize(d)?;
        Polygon::new(raw.vertices).map_err(serde::de::Error::custom)
    }
}

impl Polygon {
    /// Validates and wraps a vertex list.
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::InvalidShape(format!(
                "need at least 3 vertices, got {n}"
            )));
        }
        if let Some(v) = vertices
            .iter()
            .find(|v| !(v.x.is_finite() && v.y.is_finite()))
        {
            return Err(Error::InvalidShape(format!("non-finite vertex {v:?}")));
        }
        for i in 0..n {
            let d = vertices[(i + 1) % n].sub(vertices[i]).norm();
            if d <= MIN_VERTEX_SEPARATION {
                return Err(Error::InvalidShape(format!(
                    "zero-length edge at vertex {i}"
                )));
            }
        }
        let area = signed_area(&vertices);
        if area <= 0.0 {
            return Err(Error::InvalidShape(format!(
                "signed area {area:e} is not positive (polygon must be counter-clockwise)"
            )));
        }
        if !is_simple(&vertices) {
            return Err(Error::InvalidShape("polygon self-intersects".into()));
        }
        Ok(Polygon { vertices })
    }

    /// Regular `n`-gon with the given circumradius, first vertex on the +x axis.
    pub fn regular(n: usize, circumradius: f64) -> Result<Self> {
        Self::ellipse(circumradius, circumradius, n)
    }

    /// `n`-gon inscribed in the axis-aligned ellipse with the given semi-axes.
    pub fn ellipse(semi_x: f64, semi_y: f64, n: usize) -> Result<Self> {
        let vertices = (0..n)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / n as f64;
                Point::new(semi_x * a.cos(), semi_y * a.sin())
            })
            .collect();
        Polygon::new(vertices)
    }

    /// Axis-aligned rectangle centered on the origin.
    pub fn rectangle(width: f64, height: f64) -> Result<Self> {
        let (w, h) = (width / 2.0, height / 2.0);
        Polygon::new(vec![
            Point::new(-w, -h),
            Point::new(w, -h),
            Point::new(w, h),
            Point::new(-w, h),
        ])
    }

    /// Parallelogram with horizontal base `base`, height `height` and the top
    /// edge shifted right by `shear`, centered on its centroid.
    pub fn parallelogram(base: f64, height: f64, shear: f64) -> Result<Self> {
        let (b, h, s) = (base / 2.0, height / 2.0, shear / 2.0);
        Polygon::new(vec![
            Point::new(-b - s, -h),
            Point::new(b - s, -h),
            Point::new(b + s, h),
            Point::new(-b + s, h),
        ])
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Iterator over edges `(start, end)`, closing the loop.
    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| b.sub(a).norm()).sum()
    }

    pub fn centroid(&self) -> Point {
        let mut cx = 0.0;
        let mut cy = 0.0;
        for (a, b) in self.edges() {
            let c = a.cross(b);
            cx += (a.x + b.x) * c;
            cy += (a.y + b.y) * c;
        }
        let k = 1.0 / (6.0 * self.area());
        Point::new(cx * k, cy * k)
    }

    /// Largest vertex distance from the origin of the polygon's frame.
    pub fn circumradius(&self) -> f64 {
        self.vertices.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn transformed(&self, pose: &PlanarPose) -> Polygon {
        Polygon {
            vertices: self.vertices.iter().map(|&v| pose.apply(v)).collect(),
        }
    }

    /// Uniform scaling about the frame origin. `factor` must be positive.
    pub fn scaled(&self, factor: f64) -> Result<Polygon> {
        if !(factor > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "scale factor {factor} must be positive"
            )));
        }
        Ok(Polygon {
            vertices: self.vertices.iter().map(|v| v.scale(factor)).collect(),
        })
    }

    /// Same contour starting at vertex `start`.
    pub fn reindexed(&self, start: usize) -> Polygon {
        let mut vertices = self.vertices.clone();
        vertices.rotate_left(start % self.vertices.len());
        Polygon { vertices }
    }

    /// Strict interior test by crossing number; boundary points are unspecified.
    pub fn contains_point(&self, p: Point) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Euclidean distance from `p` to the polygon boundary.
    pub fn boundary_distance(&self, p: Point) -> f64 {
        self.edges()
            .map(|(a, b)| segment_distance_sq(p, a, b))
            .fold(f64::INFINITY, f64::min)
            .sqrt()
    }

    /// Distance from `p` to the closed polygon region (zero inside).
    pub fn distance(&self, p: Point) -> f64 {
        if self.contains_point(p) {
            0.0
        } else {
            self.boundary_distance(p)
        }
    }

    /// Indices of reflex vertices (interior angle above π).
    pub fn reflex_vertices(&self) -> Vec<usize> {
        let n = self.vertices.len();
        (0..n)
            .filter(|&i| {
                let prev = self.vertices[(i + n - 1) % n];
                let cur = self.vertices[i];
                let next = self.vertices[(i + 1) % n];
                cur.sub(prev).cross(next.sub(cur)) < 0.0
            })
            .collect()
    }

    pub fn is_convex(&self) -> bool {
        self.reflex_vertices().is_empty()
    }
}

pub(crate) fn signed_area(vertices: &[Point]) -> f64 {
    let n = vertices.len();
    0.5 * (0..n)
        .map(|i| vertices[i].cross(vertices[(i + 1) % n]))
        .sum::<f64>()
}

pub(crate) fn segment_distance_sq(p: Point, a: Point, b: Point) -> f64 {
    let ab = b.sub(a);
    let len_sq = ab.dot(ab);
    let t = if len_sq > 0.0 {
        (p.sub(a).dot(ab) / len_sq).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let d = p.sub(a.add(ab.scale(t)));
    d.dot(d)
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    b.sub(a).cross(c.sub(a))
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection test.
pub(crate) fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

fn is_simple(vertices: &[Point]) -> bool {
    let n = vertices.len();
    for i in 0..n {
        let (a, b) = (vertices[i], vertices[(i + 1) % n]);
        for j in (i + 1)..n {
            // adjacent edges share a vertex
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (c, d) = (vertices[j], vertices[(j + 1) % n]);
            if segments_intersect(a, b, c, d) {
                return false;
            }
        }
    }
    // Collinear back-tracking between adjacent edges.
    for i in 0..n {
        let prev = vertices[(i + n - 1) % n];
        let cur = vertices[i];
        let next = vertices[(i + 1) % n];
        let u = cur.sub(prev);
        let v = next.sub(cur);
        if u.cross(v) == 0.0 && u.dot(v) < 0.0 {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Polygon {
        Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn rejects_clockwise_and_degenerate() {
        let cw = vec![
            Point::new(0.0, 0.0),
            Point::new(0.0, 1.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
        ];
        assert!(Polygon::new(cw).is_err());
        let dup = vec![
            Point::new(0.0, 0.0),
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ];
        assert!(Polygon::new(dup).is_err());
        let flat = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(2.0, 0.0),
        ];
        assert!(Polygon::new(flat).is_err());
        assert!(Polygon::new(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)]).is_err());
    }

    #[test]
    fn rejects_bowtie() {
        let bowtie = vec![
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(0.0, 1.5),
            Point::new(2.0, 2.0),
            Point::new(-1.0, 1.0),
        ];
        assert!(Polygon::new(bowtie).is_err());
    }

    #[test]
    fn basic_measures() {
        let sq = unit_square();
        assert!((sq.area() - 1.0).abs() < 1e-15);
        assert!((sq.perimeter() - 4.0).abs() < 1e-15);
        let c = sq.centroid();
        assert!((c.x - 0.5).abs() < 1e-15 && (c.y - 0.5).abs() < 1e-15);
        assert!(sq.contains_point(Point::new(0.5, 0.5)));
        assert!(!sq.contains_point(Point::new(1.5, 0.5)));
        assert!((sq.distance(Point::new(1.5, 0.5)) - 0.5).abs() < 1e-15);
        assert!(sq.is_convex());
    }

    #[test]
    fn reflex_detection() {
        let l_shape = Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(2.0, 1.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 2.0),
            Point::new(0.0, 2.0),
        ])
        .unwrap();
        assert_eq!(l_shape.reflex_vertices(), vec![3]);
    }

    #[test]
    fn serde_validates() {
        let bad = r#"{"vertices":[{"x":0,"y":0},{"x":0,"y":1},{"x":1,"y":0}]}"#;
        assert!(serde_json::from_str::<Polygon>(bad).is_err());
        let good = serde_json::to_string(&unit_square()).unwrap();
        assert_eq!(
            serde_json::from_str::<Polygon>(&good).unwrap(),
            unit_square()
        );
    }
}
