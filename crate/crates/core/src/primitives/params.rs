use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::Stiffness;

/// Number of scalar learnable parameters.
pub const PARAM_DIM: usize = 21;

/// Names of the flat parameter vector entries, in serialization order.
pub const PARAM_NAMES: [&str; PARAM_DIM] = [
    "delta",
    "eta",
    "amp_x",
    "amp_y",
    "n1_over_t",
    "n2_over_t",
    "gamma",
    "zeta",
    "k_search_x",
    "k_search_y",
    "k_search_z",
    "k_search_roll",
    "k_search_pitch",
    "k_search_yaw",
    "lambda",
    "k_insertion_x",
    "k_insertion_y",
    "k_insertion_z",
    "k_insertion_roll",
    "k_insertion_pitch",
    "k_insertion_yaw",
];

/// Learnable primitive parameters.
///
/// Flat layout (see [`PARAM_NAMES`]): `[δ, η, A, B, n1/T, n2/T, γ, ζ,
/// k_search(6), λ, k_insertion(6)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveParams {
    /// Commanded descent in move-until-contact, m.
    pub delta: f64,
    /// Contact force threshold, N.
    pub eta: f64,
    /// Lissajous amplitudes, m.
    pub amp_x: f64,
    pub amp_y: f64,
    /// Lissajous translation frequency, 1/s.
    pub n1_over_t: f64,
    /// Yaw oscillation frequency, 1/s.
    pub n2_over_t: f64,
    /// Downward press offset during search, m.
    pub gamma: f64,
    /// Drop that ends the search, m.
    pub zeta: f64,
    pub k_search: Stiffness,
    /// Commanded insertion depth below the search exit pose, m.
    pub lambda: f64,
    pub k_insertion: Stiffness,
}

impl PrimitiveParams {
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = vec![
            self.delta,
            self.eta,
            self.amp_x,
            self.amp_y,
            self.n1_over_t,
            self.n2_over_t,
            self.gamma,
            self.zeta,
        ];
        v.extend(self.k_search.to_array());
        v.push(self.lambda);
        v.extend(self.k_insertion.to_array());
        v
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        if v.len() != PARAM_DIM {
            return Err(Error::InvalidArgument(format!(
                "parameter vector has {} entries, expected {PARAM_DIM}",
                v.len()
            )));
        }
        let k = |o: usize| {
            Stiffness::from_array([v[o], v[o + 1], v[o + 2], v[o + 3], v[o + 4], v[o + 5]])
        };
        Ok(PrimitiveParams {
            delta: v[0],
            eta: v[1],
            amp_x: v[2],
            amp_y: v[3],
            n1_over_t: v[4],
            n2_over_t: v[5],
            gamma: v[6],
            zeta: v[7],
            k_search: k(8),
            lambda: v[14],
            k_insertion: k(15),
        })
    }
}

/// Axis-aligned box over the flat parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpace {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl ParamSpace {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "bounds of length {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !(l.is_finite() && u.is_finite() && l <= u) {
                return Err(Error::InvalidArgument(format!("dimension {i}: [{l}, {u}]")));
            }
        }
        Ok(ParamSpace { lower, upper })
    }

    /// The initial primitive parameter ranges.
    pub fn initial() -> Self {
        let k = Stiffness::MAX.to_array();
        let mut upper = vec![0.1, 10.0, 0.02, 0.02, 0.2, 2.0, 0.02, 0.02];
        upper.extend(k);
        upper.push(0.05);
        upper.extend(k);
        let mut lower = vec![0.0; PARAM_DIM];
        lower[1] = 1.0;
        ParamSpace { lower, upper }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    pub fn contains(&self, v: &[f64]) -> bool {
        v.len() == self.dim()
            && v.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(x, (l, u))| *l <= *x && *x <= *u)
    }

    /// Whether `other` lies inside this box.
    pub fn encloses(&self, other: &ParamSpace) -> bool {
        self.dim() == other.dim()
            && (0..self.dim())
                .all(|i| self.lower[i] <= other.lower[i] && other.upper[i] <= self.upper[i])
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|i| self.width(i)).product()
    }

    pub fn midpoint(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|i| 0.5 * (self.lower[i] + self.upper[i]))
            .collect()
    }
}
