//! Markov trajectory likelihood from a mixture over consecutive-state pairs.
//!
//! The mixture models `[x_i; x_{i-1}]`. Conditioning every component on the
//! previous state gives the transition density `p(x_i | x_{i-1})`; the
//! marginal over the second block scores the initial state.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::gmm::{fit_gmm, log_sum_exp, EmOptions, Gaussian, Gmm};
use crate::error::{Error, Result};

/// How conditional components are weighted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightMode {
    /// Keep the prior mixture weights φ_j.
    #[default]
    Prior,
    /// Reweight by each component's responsibility for `x_{i-1}`.
    Responsibility,
}

/// One conditional Gaussian `N(μ̄, Σ̄)` with its mixture weight.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalComponent {
    pub weight: f64,
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
}

#[derive(Debug, Clone)]
struct Block {
    log_weight: f64,
    mean_cur: DVector<f64>,
    mean_prev: DVector<f64>,
    /// Σ12 Σ22⁻¹
    gain: DMatrix<f64>,
    conditional: Gaussian,
    marginal_prev: Gaussian,
}

/// Precomputed conditionals of a pair mixture.
#[derive(Debug, Clone)]
pub struct TransitionModel {
    blocks: Vec<Block>,
    state_dim: usize,
    mode: WeightMode,
}

impl TransitionModel {
    pub fn new(gmm: &Gmm, mode: WeightMode) -> Result<Self> {
        let dim = gmm.dim();
        if dim % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "pair mixture has odd dimension {dim}"
            )));
        }
        let d = dim / 2;
        let blocks = gmm
            .weights()
            .iter()
            .zip(gmm.means().iter().zip(gmm.covariances()))
            .map(|(&w, (mu, sigma))| {
                // Factor the joint in [prev; cur] order: with L = [[A, 0], [C, D]],
                // Σ22 = AAᵀ, Σ12 = CAᵀ, so the gain is C A⁻¹ and the
                // conditional covariance is DDᵀ. No subtraction of nearly equal
                // blocks is needed.
                let mut permuted = DMatrix::zeros(dim, dim);
                for i in 0..dim {
                    for j in 0..dim {
                        permuted[(i, j)] = sigma[((i + d) % dim, (j + d) % dim)];
                    }
                }
                let l = permuted
                    .cholesky()
                    .ok_or_else(|| Error::NotPositiveDefinite("pair covariance".into()))?
                    .l();
                let a = l.view((0, 0), (d, d)).into_owned();
                let c = l.view((d, 0), (d, d)).into_owned();
                let dd = l.view((d, d), (d, d)).into_owned();
                // gain A = C  ⇔  Aᵀ gainᵀ = Cᵀ
                let gain = a
                    .transpose()
                    .solve_upper_triangular(&c.transpose())
                    .ok_or_else(|| Error::NotPositiveDefinite("Σ22 block".into()))?
                    .transpose();
                let mean_cur = mu.rows(0, d).into_owned();
                let mean_prev = mu.rows(d, d).into_owned();
                Ok(Block {
                    log_weight: w.ln(),
                    conditional: Gaussian::from_factor(DVector::zeros(d), dd)?,
                    marginal_prev: Gaussian::from_factor(mean_prev.clone(), a)?,
                    mean_cur,
                    mean_prev,
                    gain,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TransitionModel {
            blocks,
            state_dim: d,
            mode,
        })
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn mode(&self) -> WeightMode {
        self.mode
    }

    fn log_weights(&self, x_prev: &DVector<f64>) -> Vec<f64> {
        match self.mode {
            WeightMode::Prior => self.blocks.iter().map(|b| b.log_weight).collect(),
            WeightMode::Responsibility => {
                let raw: Vec<f64> = self
                    .blocks
                    .iter()
                    .map(|b| b.log_weight + b.marginal_prev.log_pdf(x_prev))
                    .collect();
                let norm = log_sum_exp(&raw);
                raw.into_iter().map(|v| v - norm).collect()
            }
        }
    }

    fn conditional_mean(&self, b: &Block, x_prev: &DVector<f64>) -> DVector<f64> {
        &b.mean_cur + &b.gain * (x_prev - &b.mean_prev)
    }

    /// Per-component conditional Gaussians given the previous state.
    pub fn conditional(&self, x_prev: &DVector<f64>) -> Result<Vec<ConditionalComponent>> {
        self.check(x_prev)?;
        let lw = self.log_weights(x_prev);
        Ok(self
            .blocks
            .iter()
            .zip(lw)
            .map(|(b, w)| ConditionalComponent {
                weight: w.exp(),
                mean: self.conditional_mean(b, x_prev),
                covariance: b.conditional.covariance(),
            })
            .collect())
    }

    /// `log p(x | x_prev)`.
    pub fn log_transition(&self, x_prev: &DVector<f64>, x: &DVector<f64>) -> Result<f64> {
        self.check(x_prev)?;
        self.check(x)?;
        let lw = self.log_weights(x_prev);
        let terms: Vec<f64> = self
            .blocks
            .iter()
            .zip(lw)
            .map(|(b, w)| {
                w + b
                    .conditional
                    .log_pdf_centered(&(x - self.conditional_mean(b, x_prev)))
            })
            .collect();
        Ok(log_sum_exp(&terms))
    }

    /// `log p(x_0)` from the marginal over the previous-state block.
    pub fn log_initial(&self, x0: &DVector<f64>) -> Result<f64> {
        self.check(x0)?;
        let terms: Vec<f64> = self
            .blocks
            .iter()
            .map(|b| b.log_weight + b.marginal_prev.log_pdf(x0))
            .collect();
        Ok(log_sum_exp(&terms))
    }

    fn check(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.state_dim {
            return Err(Error::InvalidArgument(format!(
                "state of length {}, model expects {}",
                x.len(),
                self.state_dim
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("state {:?}", x.as_slice())));
        }
        Ok(())
    }
}

/// Streaming evaluation of `log p(ξ) = log p(x_0) + Σ log p(x_i | x_{i-1})`.
#[derive(Debug)]
pub struct LikelihoodAccumulator<'a> {
    model: &'a TransitionModel,
    prev: Option<DVector<f64>>,
    total: f64,
}

impl<'a> LikelihoodAccumulator<'a> {
    pub fn new(model: &'a TransitionModel) -> Self {
        LikelihoodAccumulator {
            model,
            prev: None,
            total: 0.0,
        }
    }

    pub fn push(&mut self, x: &DVector<f64>) -> Result<()> {
        self.total += match &self.prev {
            None => self.model.log_initial(x)?,
            Some(p) => self.model.log_transition(p, x)?,
        };
        self.prev = Some(x.clone());
        Ok(())
    }

    pub fn extend<'b>(&mut self, xs: impl IntoIterator<Item = &'b DVector<f64>>) -> Result<()> {
        for x in xs {
            self.push(x)?;
        }
        Ok(())
    }

    pub fn total(&self) -> f64 {
        self.total
    }
}

/// Log-likelihood of a whole state sequence.
pub fn traj_log_likelihood(model: &TransitionModel, states: &[DVector<f64>]) -> Result<f64> {
    if states.is_empty() {
        return Err(Error::Empty("trajectory".into()));
    }
    let mut acc = LikelihoodAccumulator::new(model);
    acc.extend(states)?;
    Ok(acc.total())
}

/// Stacks consecutive states as `[x_i; x_{i-1}]` training pairs.
pub fn transition_pairs(states: &[DVector<f64>]) -> Vec<DVector<f64>> {
    states
        .windows(2)
        .map(|w| {
            let d = w[1].len();
            let mut v = DVector::zeros(2 * d);
            v.rows_mut(0, d).copy_from(&w[1]);
            v.rows_mut(d, d).copy_from(&w[0]);
            v
        })
        .collect()
}

/// Diagonal regularization of a pair mixture, applied in increment
/// coordinates `[x_i - x_{i-1}; x_{i-1}]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairFloors {
    /// Lower bound on the variance of every increment coordinate.
    pub increment: f64,
    /// Lower bound on the variance of every previous-state coordinate.
    pub state: f64,
}

/// Fits a pair mixture in increment coordinates with every component
/// covariance constrained to `Σ ⪰ diag(floors)`, and maps the result back to
/// `[x_i; x_{i-1}]`.
///
/// The map has unit Jacobian, so transition densities are unchanged by the
/// change of coordinates; only the regularization differs from a direct fit.
/// A broad state floor smooths over where the demonstrations went while a
/// tighter increment floor keeps how they moved. Floors of zero fall back to
/// the plain EM floor.
pub fn fit_transition_gmm(
    pairs: &[DVector<f64>],
    k: usize,
    seed: u64,
    options: &EmOptions,
    floors: PairFloors,
) -> Result<Gmm> {
    let dim = pairs.first().map_or(0, |p| p.len());
    if dim == 0 || dim % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "pair dimension {dim} must be even and positive"
        )));
    }
    let plain = floors.increment == 0.0 && floors.state == 0.0;
    if !plain && !(floors.increment > 0.0 && floors.state > 0.0) {
        return Err(Error::InvalidArgument(
            "pair floors must both be positive or both zero".into(),
        ));
    }
    let d = dim / 2;
    // Whitening by the floors turns Σ ⪰ D into an eigenvalue floor of 1,
    // which EM enforces exactly in its M-step.
    let scale = DVector::from_fn(dim, |i, _| match (plain, i < d) {
        (true, _) => 1.0,
        (false, true) => floors.increment.sqrt(),
        (false, false) => floors.state.sqrt(),
    });
    let increments: Vec<DVector<f64>> = pairs
        .iter()
        .map(|p| {
            let mut z = p.clone();
            for i in 0..d {
                z[i] = p[i] - p[i + d];
            }
            z.component_div(&scale)
        })
        .collect();
    let em = if plain {
        *options
    } else {
        EmOptions {
            covariance_floor: options.covariance_floor.max(1.0),
            ..*options
        }
    };
    let fit = fit_gmm(&increments, k, seed, &em)?.gmm;
    // [x_i; x_{i-1}] = T S [Δ'; x'_{i-1}], T = [[I, I], [0, I]], S = diag(scale)
    let mut t = DMatrix::from_diagonal(&scale);
    for i in 0..d {
        t[(i, i + d)] = scale[i + d];
    }
    let means = fit.means().iter().map(|m| &t * m).collect();
    let covs = fit
        .covariances()
        .iter()
        .map(|c| &t * c * t.transpose())
        .collect();
    Gmm::new(fit.weights().to_vec(), means, covs)
}
