//! Independent reference computations shared by the oracle and acceptance
//! tests. Nothing here calls the code under test except for data types.
#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use skillopt::geometry::{Point, Polygon};

/// Polygon with `3..=max_vertices` vertices, star-shaped about the origin
/// (every angular gap between consecutive vertices is below π).
pub fn random_polygon<R: Rng>(rng: &mut R, max_vertices: usize) -> Polygon {
    loop {
        let n = rng.gen_range(3..=max_vertices.max(3));
        let mut angles: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..TAU)).collect();
        angles.sort_by(f64::total_cmp);
        let gaps_ok = (0..n).all(|i| {
            let next = if i + 1 < n {
                angles[i + 1]
            } else {
                angles[0] + TAU
            };
            let gap = next - angles[i];
            gap > 0.15 && gap < PI - 0.05
        });
        if !gaps_ok {
            continue;
        }
        let pts = angles
            .iter()
            .map(|&a| {
                let r = rng.gen_range(0.5..1.5);
                Point::new(r * a.cos(), r * a.sin())
            })
            .collect();
        if let Ok(p) = Polygon::new(pts) {
            return p;
        }
    }
}

/// Turning function rebuilt from the vertices: (piece starts, angles).
pub fn reference_turning(p: &Polygon) -> (Vec<f64>, Vec<f64>) {
    let v = p.vertices();
    let n = v.len();
    let edges: Vec<(f64, f64)> = (0..n)
        .map(|i| (v[(i + 1) % n].x - v[i].x, v[(i + 1) % n].y - v[i].y))
        .collect();
    let lengths: Vec<f64> = edges.iter().map(|e| e.0.hypot(e.1)).collect();
    let perimeter: f64 = lengths.iter().sum();
    let mut starts = Vec::with_capacity(n);
    let mut angles = Vec::with_capacity(n);
    let mut s = 0.0;
    let mut prev = edges[0].1.atan2(edges[0].0);
    for i in 0..n {
        let raw = edges[i].1.atan2(edges[i].0);
        // unwrap into (prev - π, prev + π]
        let mut a = raw;
        while a - prev > PI {
            a -= TAU;
        }
        while a - prev <= -PI {
            a += TAU;
        }
        starts.push(s / perimeter);
        angles.push(a);
        prev = a;
        s += lengths[i];
    }
    (starts, angles)
}

fn eval_periodic(starts: &[f64], angles: &[f64], s: f64) -> f64 {
    let k = s.floor();
    let f = s - k;
    let i = starts.iter().rposition(|&b| b <= f).unwrap_or(0);
    angles[i] + TAU * k
}

/// L1 turning distance with the starting-point shift searched on a uniform
/// grid of spacing `step`. For each shift the rotation is optimized exactly
/// (weighted median of the piecewise-constant difference).
pub fn grid_turning_distance(a: &Polygon, b: &Polygon, step: f64) -> f64 {
    let (sa, va) = reference_turning(a);
    let (sb, vb) = reference_turning(b);
    let shifts = (1.0 / step).round() as usize;
    let mut best = f64::INFINITY;
    let mut cuts = Vec::with_capacity(sa.len() + sb.len() + 1);
    let mut pieces: Vec<(f64, f64)> = Vec::new();
    for k in 0..shifts {
        let t = k as f64 * step;
        cuts.clear();
        cuts.extend_from_slice(&sb);
        cuts.extend(sa.iter().map(|s| (s - t).rem_euclid(1.0)));
        cuts.push(1.0);
        cuts.sort_by(f64::total_cmp);
        pieces.clear();
        let mut lo = 0.0;
        for &hi in &cuts {
            if hi - lo > 1e-15 {
                let m = 0.5 * (lo + hi);
                pieces.push((
                    eval_periodic(&sa, &va, m + t) - eval_periodic(&sb, &vb, m),
                    hi - lo,
                ));
            }
            lo = hi;
        }
        pieces.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut acc = 0.0;
        let mut median = pieces[0].0;
        for &(d, w) in &pieces {
            acc += w;
            if acc >= 0.5 {
                median = d;
                break;
            }
        }
        let cost: f64 = pieces.iter().map(|(d, w)| w * (d - median).abs()).sum();
        best = best.min(cost);
    }
    best
}

/// Random symmetric positive definite matrix with eigenvalues bounded away
/// from zero.
pub fn random_spd<R: Rng>(rng: &mut R, dim: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    &a * a.transpose() + DMatrix::identity(dim, dim) * 0.5
}

/// Conditional of `N(mean, cov)` over `[x; y]` (first `d` coordinates are
/// `x`) given `y`, by explicit inversion of the `y` block.
pub fn analytic_conditional(
    mean: &DVector<f64>,
    cov: &DMatrix<f64>,
    d: usize,
    y: &DVector<f64>,
) -> (DVector<f64>, DMatrix<f64>) {
    let n = mean.len();
    let s11 = cov.view((0, 0), (d, d)).into_owned();
    let s12 = cov.view((0, d), (d, n - d)).into_owned();
    let s22 = cov.view((d, d), (n - d, n - d)).into_owned();
    let inv = s22.try_inverse().expect("invertible block");
    let m = mean.rows(0, d) + &s12 * &inv * (y - mean.rows(d, n - d));
    let c = &s11 - &s12 * &inv * s12.transpose();
    (m, c)
}

/// Monte-Carlo `E[max(f - best, 0)]` for `f ~ N(mean, variance)`.
pub fn mc_expected_improvement<R: Rng>(
    rng: &mut R,
    mean: f64,
    variance: f64,
    best: f64,
    samples: usize,
) -> f64 {
    let sd = variance.sqrt();
    let mut sum = 0.0;
    for _ in 0..samples {
        let z: f64 = StandardNormal.sample(rng);
        sum += (mean + sd * z - best).max(0.0);
    }
    sum / samples as f64
}

/// Elementwise min and max.
pub fn brute_force_box(points: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let d = points[0].len();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for p in points {
        for i in 0..d {
            if p[i] < lo[i] {
                lo[i] = p[i];
            }
            if p[i] > hi[i] {
                hi[i] = p[i];
            }
        }
    }
    (lo, hi)
}

/// Median; the mean of the two middle values for even counts.
pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
