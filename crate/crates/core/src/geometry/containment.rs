//! Insertability predicate: does a posed peg cross-section fit the hole?

use super::polygon::{segments_intersect, PlanarPose, Point, Polygon};

/// Precomputed hole data for repeated containment queries.
#[derive(Debug, Clone)]
pub struct HoleRegion {
    hole: Polygon,
    convex: bool,
    /// Disk around `center` inside the hole, and disk enclosing it; used to
    /// settle most point queries without scanning edges.
    center: Point,
    inner_radius: f64,
    outer_radius: f64,
}

impl HoleRegion {
    pub fn new(hole: Polygon) -> Self {
        let convex = hole.is_convex();
        let center = hole.centroid();
        let inner_radius = if hole.contains_point(center) {
            hole.boundary_distance(center)
        } else {
            0.0
        };
        let outer_radius = hole
            .vertices()
            .iter()
            .map(|v| v.sub(center).norm())
            .fold(0.0, f64::max);
        HoleRegion {
            hole,
            convex,
            center,
            inner_radius,
            outer_radius,
        }
    }

    /// Whether `p` lies within `margin` of the hole region.
    fn within(&self, p: Point, margin: f64) -> bool {
        let d = p.sub(self.center).norm();
        if d < self.inner_radius + margin {
            return true;
        }
        if d > self.outer_radius + margin {
            return false;
        }
        self.hole.contains_point(p) || self.hole.boundary_distance(p) <= margin
    }

    pub fn polygon(&self) -> &Polygon {
        &self.hole
    }

    /// True iff `peg` placed at `pose` (in the hole frame) lies inside the hole
    /// dilated by `clearance / 2` and overlaps the hole itself.
    ///
    /// For convex holes the vertex test is exact. For non-convex holes every
    /// peg edge is additionally checked against the dilated region. Dilation
    /// features narrower than the clearance (necks that the offset closes up)
    /// are not modeled.
    pub fn contains(&self, peg: &Polygon, pose: &PlanarPose, clearance: f64) -> bool {
        let margin = 0.5 * clearance.max(0.0);
        let pts: Vec<Point> = peg.vertices().iter().map(|&v| pose.apply(v)).collect();
        if !pts.iter().all(|&p| self.within(p, margin)) {
            return false;
        }
        if !self.convex {
            let n = pts.len();
            for i in 0..n {
                if !segment_within_dilation(&self.hole, pts[i], pts[(i + 1) % n], margin) {
                    return false;
                }
            }
        }
        overlaps(&self.hole, &pts)
    }
}

/// Stateless form of [`HoleRegion::contains`].
pub fn contains_with_clearance(
    hole: &Polygon,
    peg: &Polygon,
    pose: &PlanarPose,
    clearance: f64,
) -> bool {
    HoleRegion::new(hole.clone()).contains(peg, pose, clearance)
}

fn overlaps(hole: &Polygon, peg: &[Point]) -> bool {
    if peg.iter().any(|&p| hole.contains_point(p)) {
        return true;
    }
    let peg_poly_contains = |q: Point| {
        let mut inside = false;
        let n = peg.len();
        for i in 0..n {
            let (a, b) = (peg[i], peg[(i + 1) % n]);
            if (a.y > q.y) != (b.y > q.y) {
                let x = a.x + (q.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if q.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    };
    if hole.vertices().iter().any(|&q| peg_poly_contains(q)) {
        return true;
    }
    let n = peg.len();
    hole.edges()
        .any(|(a, b)| (0..n).any(|i| segments_intersect(a, b, peg[i], peg[(i + 1) % n])))
}

/// Whether every point of segment `p0 → p1` is within `margin` of `hole`.
fn segment_within_dilation(hole: &Polygon, p0: Point, p1: Point, margin: f64) -> bool {
    let d = p1.sub(p0);
    let mut covered: Vec<(f64, f64)> = Vec::new();

    // Parameter intervals where the segment runs inside the hole.
    let mut cuts = vec![0.0, 1.0];
    for (a, b) in hole.edges() {
        if let Some(t) = line_segment_param(p0, d, a, b) {
            cuts.push(t);
        }
    }
    cuts.sort_by(f64::total_cmp);
    for w in cuts.windows(2) {
        if w[1] - w[0] > 0.0 && hole.contains_point(p0.add(d.scale(0.5 * (w[0] + w[1])))) {
            covered.push((w[0], w[1]));
        }
    }

    // Intervals within `margin` of each hole edge (capsule ∩ line is an interval).
    for (a, b) in hole.edges() {
        if let Some(iv) = capsule_interval(p0, d, a, b, margin) {
            covered.push(iv);
        }
    }

    covered.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut reach = 0.0;
    for (lo, hi) in covered {
        if lo > reach + 1e-12 {
            return false;
        }
        reach = f64::max(reach, hi);
        if reach >= 1.0 - 1e-12 {
            return true;
        }
    }
    reach >= 1.0 - 1e-12
}

/// Parameter `t ∈ [0, 1]` where `p0 + t d` crosses segment `a b`, if any.
fn line_segment_param(p0: Point, d: Point, a: Point, b: Point) -> Option<f64> {
    let e = b.sub(a);
    let denom = d.cross(e);
    if denom == 0.0 {
        return None;
    }
    let w = a.sub(p0);
    let t = w.cross(e) / denom;
    let u = w.cross(d) / denom;
    ((0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u)).then_some(t)
}

fn capsule_interval(p0: Point, d: Point, a: Point, b: Point, r: f64) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut take = |iv: Option<(f64, f64)>| {
        if let Some((l, h)) = iv {
            lo = lo.min(l);
            hi = hi.max(h);
        }
    };
    take(disk_interval(p0, d, a, r));
    take(disk_interval(p0, d, b, r));
    take(strip_interval(p0, d, a, b, r));
    let (l, h) = (lo.max(0.0), hi.min(1.0));
    (l <= h).then_some((l, h))
}

fn disk_interval(p0: Point, d: Point, c: Point, r: f64) -> Option<(f64, f64)> {
    let f = p0.sub(c);
    let qa = d.dot(d);
    let qb = 2.0 * f.dot(d);
    let qc = f.dot(f) - r * r;
    if qa == 0.0 {
        return (qc <= 0.0).then_some((0.0, 1.0));
    }
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return None;
    }
    let s = disc.sqrt();
    Some(((-qb - s) / (2.0 * qa), (-qb + s) / (2.0 * qa)))
}

fn strip_interval(p0: Point, d: Point, a: Point, b: Point, r: f64) -> Option<(f64, f64)> {
    let e = b.sub(a);
    let len = e.norm();
    if len == 0.0 {
        return None;
    }
    let u = e.scale(1.0 / len);
    let nrm = Point::new(-u.y, u.x);
    let rel = p0.sub(a);
    // along ∈ [0, len] and |across| ≤ r, both affine in t
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for (c0, c1, min, max) in [
        (rel.dot(u), d.dot(u), 0.0, len),
        (rel.dot(nrm), d.dot(nrm), -r, r),
    ] {
        if c1 == 0.0 {
            if c0 < min || c0 > max {
                return None;
            }
        } else {
            let (t1, t2) = ((min - c0) / c1, (max - c0) / c1);
            lo = lo.max(t1.min(t2));
            hi = hi.min(t1.max(t2));
        }
    }
    (lo <= hi).then_some((lo, hi))
}
