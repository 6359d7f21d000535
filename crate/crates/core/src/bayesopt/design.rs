use rand::Rng;

use crate::error::{Error, Result};
use crate::primitives::ParamSpace;

/// Maps `params` into the unit cube of `space`. Zero-width dimensions map to 0.5.
pub fn normalize(params: &[f64], space: &ParamSpace) -> Result<Vec<f64>> {
    if params.len() != space.dim() {
        return Err(Error::InvalidArgument(format!(
            "{} parameters for a {}-D space",
            params.len(),
            space.dim()
        )));
    }
    if !space.contains(params) {
        return Err(Error::OutOfBounds(format!(
            "{params:?} outside the search space"
        )));
    }
    Ok(params
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let w = space.width(i);
            if w > 0.0 {
                (p - space.lower[i]) / w
            } else {
                0.5
            }
        })
        .collect())
}

/// Inverse of [`normalize`]; inputs are clamped to the unit cube.
pub fn denormalize(unit: &[f64], space: &ParamSpace) -> Result<Vec<f64>> {
    if unit.len() != space.dim() {
        return Err(Error::InvalidArgument(format!(
            "{} coordinates for a {}-D space",
            unit.len(),
            space.dim()
        )));
    }
    if unit.iter().any(|u| !u.is_finite()) {
        return Err(Error::NonFinite(format!("unit-cube point {unit:?}")));
    }
    Ok(unit
        .iter()
        .enumerate()
        .map(|(i, &u)| {
            (space.lower[i] + u.clamp(0.0, 1.0) * space.width(i))
                .clamp(space.lower[i], space.upper[i])
        })
        .collect())
}

const PRIMES: [u32; 32] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
    101, 103, 107, 109, 113, 127, 131,
];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += (i % b) as f64 * f;
        i /= b;
        f *= inv;
    }
    r
}

/// First `n` points of a Halton sequence in `dim` dimensions, shifted by a
/// random offset modulo 1 (Cranley–Patterson rotation). Index 0 is skipped.
pub fn halton_design<R: Rng + ?Sized>(n: usize, dim: usize, rng: &mut R) -> Result<Vec<Vec<f64>>> {
    if dim > PRIMES.len() {
        return Err(Error::InvalidArgument(format!(
            "Halton design supports up to {} dimensions",
            PRIMES.len()
        )));
    }
    let shift: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
    Ok((1..=n as u64)
        .map(|i| {
            (0..dim)
                .map(|d| (radical_inverse(i, PRIMES[d]) + shift[d]).fract())
                .collect()
        })
        .collect())
}
