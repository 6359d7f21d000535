//! Turning-function shape signatures and the L1 distance between them.
//!
//! The turning function of a polygon maps normalized arc length `s ∈ [0, 1)`
//! to the direction of the counter-clockwise tangent, measured from the
//! x-axis and accumulated so that it increases by the exterior angle at
//! every vertex. It is piecewise constant with one piece per edge and is
//! extended to all of ℝ by `Θ(s + 1) = Θ(s) + 2π`.
//!
//! The distance minimizes the L1 difference over the choice of starting
//! point `t` and a rotation offset `θ`. For a fixed shift the optimal offset
//! is the length-weighted median of the piecewise difference. As a function
//! of `t` the minimized cost is concave between consecutive breakpoint
//! alignments, so it suffices to evaluate shifts that align one breakpoint
//! of each function.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::polygon::Polygon;
use crate::error::{Error, Result};

const TWO_PI: f64 = 2.0 * PI;

/// Piecewise-constant turning function over normalized arc length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurningFunction {
    /// Start of each piece; `breakpoints[0] == 0`, strictly increasing, all `< 1`.
    pub breakpoints: Vec<f64>,
    /// Tangent angle on each piece, in radians.
    pub values: Vec<f64>,
    /// Turn at the closing vertex (between the last and first edge).
    pub closing_jump: f64,
}

impl TurningFunction {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// End of piece `i`.
    pub fn piece_end(&self, i: usize) -> f64 {
        self.breakpoints.get(i + 1).copied().unwrap_or(1.0)
    }

    /// Jumps at `s = breakpoints[1..]` followed by the closing jump at `s = 1`.
    pub fn jumps(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = (1..self.values.len())
            .map(|i| (self.breakpoints[i], self.values[i] - self.values[i - 1]))
            .collect();
        out.push((1.0, self.closing_jump));
        out
    }

    /// Net turning over one traversal of the contour.
    pub fn total_turning(&self) -> f64 {
        self.values[self.values.len() - 1] - self.values[0] + self.closing_jump
    }

    /// Value at any real `s`, using the periodic extension.
    pub fn value_at(&self, s: f64) -> f64 {
        let wraps = s.floor();
        let mut frac = s - wraps;
        if frac >= 1.0 {
            frac = 0.0;
        }
        let idx = self
            .breakpoints
            .partition_point(|&b| b <= frac)
            .saturating_sub(1);
        self.values[idx] + TWO_PI * wraps
    }
}

/// Turning function of a valid polygon, with the perimeter normalized to 1.
pub fn turning_function(poly: &Polygon) -> Result<TurningFunction> {
    let v = poly.vertices();
    let n = v.len();
    let perimeter = poly.perimeter();
    if !(poly.area() > 0.0) || !(perimeter > 0.0) {
        return Err(Error::InvalidShape("zero-area polygon".into()));
    }
    let edges: Vec<_> = (0..n).map(|i| v[(i + 1) % n].sub(v[i])).collect();
    if edges
        .iter()
        .any(|e| e.norm() <= super::polygon::MIN_VERTEX_SEPARATION)
    {
        return Err(Error::InvalidShape("zero-length edge".into()));
    }
    let turn = |a: super::Point, b: super::Point| a.cross(b).atan2(a.dot(b));

    let mut breakpoints = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    let mut arc = 0.0;
    let mut angle = edges[0].y.atan2(edges[0].x);
    for i in 0..n {
        if i > 0 {
            angle += turn(edges[i - 1], edges[i]);
        }
        breakpoints.push(arc / perimeter);
        values.push(angle);
        arc += edges[i].norm();
    }
    let closing_jump = turn(edges[n - 1], edges[0]);
    Ok(TurningFunction {
        breakpoints,
        values,
        closing_jump,
    })
}

/// Optimal rotation offset and L1 cost for a fixed starting-point shift.
fn cost_at_shift(a: &TurningFunction, b: &TurningFunction, t: f64, scratch: &mut Vec<f64>) -> f64 {
    scratch.clear();
    scratch.extend_from_slice(&b.breakpoints);
    scratch.extend(a.breakpoints.iter().map(|&s| (s - t).rem_euclid(1.0)));
    scratch.push(1.0);
    scratch.sort_by(f64::total_cmp);
    scratch.dedup_by(|x, y| (*x - *y).abs() < 1e-15);

    let mut pieces: Vec<(f64, f64)> = Vec::with_capacity(scratch.len());
    let mut prev = 0.0;
    for &p in scratch.iter() {
        let w = p - prev;
        if w > 0.0 {
            let mid = prev + 0.5 * w;
            pieces.push((a.value_at(mid + t) - b.value_at(mid), w));
        }
        prev = p;
    }
    weighted_l1_spread(&mut pieces)
}

/// `min_c Σ w |f - c|`, attained at the weighted median.
fn weighted_l1_spread(pieces: &mut [(f64, f64)]) -> f64 {
    pieces.sort_by(|x, y| x.0.total_cmp(&y.0));
    let total: f64 = pieces.iter().map(|p| p.1).sum();
    let mut acc = 0.0;
    let mut median = pieces[pieces.len() - 1].0;
    for &(f, w) in pieces.iter() {
        acc += w;
        if acc >= 0.5 * total {
            median = f;
            break;
        }
    }
    pieces.iter().map(|&(f, w)| w * (f - median).abs()).sum()
}

/// L1 distance between turning functions, minimized over starting point and rotation.
pub fn turning_distance(a: &TurningFunction, b: &TurningFunction) -> f64 {
    let mut shifts: Vec<f64> = a
        .breakpoints
        .iter()
        .flat_map(|&sa| {
            b.breakpoints
                .iter()
                .map(move |&sb| (sa - sb).rem_euclid(1.0))
        })
        .map(|t| if t >= 1.0 { 0.0 } else { t })
        .collect();
    shifts.sort_by(f64::total_cmp);
    shifts.dedup_by(|x, y| (*x - *y).abs() < 1e-14);

    let mut scratch = Vec::new();
    shifts
        .into_iter()
        .map(|t| cost_at_shift(a, b, t, &mut scratch))
        .fold(f64::INFINITY, f64::min)
}

/// Turning-function distance between two polygons.
pub fn shape_distance(a: &Polygon, b: &Polygon) -> Result<f64> {
    Ok(turning_distance(
        &turning_function(a)?,
        &turning_function(b)?,
    ))
}

/// Indices of the `count` library shapes closest to `query`, nearest first.
/// Ties keep library order.
pub fn top_l_similar(query: &Polygon, library: &[Polygon], count: usize) -> Result<Vec<usize>> {
    Ok(ranked_by_distance(query, library, count)?
        .into_iter()
        .map(|(i, _)| i)
        .collect())
}

/// Like [`top_l_similar`] but also returns the distances.
pub fn ranked_by_distance(
    query: &Polygon,
    library: &[Polygon],
    count: usize,
) -> Result<Vec<(usize, f64)>> {
    if library.is_empty() {
        return Err(Error::Empty("shape library".into()));
    }
    if count > library.len() {
        return Err(Error::InvalidArgument(format!(
            "requested {count} shapes from a library of {}",
            library.len()
        )));
    }
    let q = turning_function(query)?;
    let mut scored = library
        .iter()
        .enumerate()
        .map(|(i, p)| Ok((i, turning_distance(&q, &turning_function(p)?))))
        .collect::<Result<Vec<_>>>()?;
    scored.sort_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)));
    scored.truncate(count);
    Ok(scored)
}
