//! Exact Gaussian-process regression with a Matérn-5/2 ARD kernel.
//!
//! Inputs are expected in the unit cube. Targets are standardized internally;
//! predictions come back in the caller's units. Hyperparameters are fitted by
//! maximizing the log marginal likelihood with Adam from several starts, in
//! log space and within box bounds.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SQRT5: f64 = 2.236_067_977_499_79;

/// Kernel hyperparameters (natural scale).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpHyperparameters {
    pub length_scales: Vec<f64>,
    pub signal_variance: f64,
    pub noise_variance: f64,
}

impl GpHyperparameters {
    pub fn isotropic(
        dim: usize,
        length_scale: f64,
        signal_variance: f64,
        noise_variance: f64,
    ) -> Self {
        GpHyperparameters {
            length_scales: vec![length_scale; dim],
            signal_variance,
            noise_variance,
        }
    }

    fn to_log(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.length_scales.iter().map(|l| l.ln()).collect();
        v.push(self.signal_variance.ln());
        v.push(self.noise_variance.ln());
        v
    }

    fn from_log(v: &[f64]) -> Self {
        let d = v.len() - 2;
        GpHyperparameters {
            length_scales: v[..d].iter().map(|x| x.exp()).collect(),
            signal_variance: v[d].exp(),
            noise_variance: v[d + 1].exp(),
        }
    }
}

/// Fitting options. Bounds are on the natural scale, for standardized targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpFitOptions {
    pub restarts: usize,
    pub adam_steps: usize,
    pub learning_rate: f64,
    pub length_scale_bounds: (f64, f64),
    pub signal_variance_bounds: (f64, f64),
    pub noise_variance_bounds: (f64, f64),
}

impl Default for GpFitOptions {
    fn default() -> Self {
        GpFitOptions {
            restarts: 3,
            adam_steps: 80,
            learning_rate: 0.08,
            length_scale_bounds: (0.03, 20.0),
            signal_variance_bounds: (0.05, 20.0),
            noise_variance_bounds: (1e-6, 1.0),
        }
    }
}

/// Matérn-5/2 ARD covariance between two points.
pub fn matern52(a: &[f64], b: &[f64], hyp: &GpHyperparameters) -> f64 {
    let r2: f64 = a
        .iter()
        .zip(b)
        .zip(&hyp.length_scales)
        .map(|((x, y), l)| ((x - y) / l).powi(2))
        .sum();
    let r = r2.sqrt();
    hyp.signal_variance * (1.0 + SQRT5 * r + 5.0 / 3.0 * r2) * (-SQRT5 * r).exp()
}

/// Cholesky factor of `k`, adding diagonal jitter in growing steps if needed.
fn robust_cholesky(k: &DMatrix<f64>) -> Result<(Cholesky<f64, Dyn>, f64)> {
    if let Some(c) = k.clone().cholesky() {
        return Ok((c, 0.0));
    }
    let scale = k.diagonal().mean().abs().max(1e-12);
    let mut jitter = 1e-10 * scale;
    while jitter <= 1e-3 * scale {
        let mut kj = k.clone();
        for i in 0..kj.nrows() {
            kj[(i, i)] += jitter;
        }
        if let Some(c) = kj.cholesky() {
            return Ok((c, jitter));
        }
        jitter *= 10.0;
    }
    Err(Error::NotPositiveDefinite(format!(
        "kernel matrix of size {} even with jitter",
        k.nrows()
    )))
}

/// A fitted GP posterior.
#[derive(Debug, Clone)]
pub struct GaussianProcess {
    x: Vec<Vec<f64>>,
    hyp: GpHyperparameters,
    y_mean: f64,
    y_scale: f64,
    chol: Cholesky<f64, Dyn>,
    /// `K⁻¹ y` for standardized `y`.
    alpha: DVector<f64>,
    log_marginal_likelihood: f64,
}

impl GaussianProcess {
    /// Posterior with fixed hyperparameters (for standardized targets).
    pub fn with_hyperparameters(
        x: Vec<Vec<f64>>,
        y: &[f64],
        hyp: GpHyperparameters,
    ) -> Result<Self> {
        let (y_mean, y_scale) = standardization(&x, y)?;
        let ys = DVector::from_iterator(y.len(), y.iter().map(|v| (v - y_mean) / y_scale));
        Self::build(x, &ys, hyp, y_mean, y_scale)
    }

    /// Posterior with hyperparameters fitted by multi-start marginal-likelihood
    /// maximization.
    pub fn fit<R: Rng + ?Sized>(
        x: Vec<Vec<f64>>,
        y: &[f64],
        options: &GpFitOptions,
        rng: &mut R,
    ) -> Result<Self> {
        let (y_mean, y_scale) = standardization(&x, y)?;
        let ys = DVector::from_iterator(y.len(), y.iter().map(|v| (v - y_mean) / y_scale));
        let d = x[0].len();
        let (lo, hi) = log_bounds(d, options);

        let mut starts = vec![GpHyperparameters::isotropic(d, 0.5, 1.0, 1e-2).to_log()];
        for _ in 1..options.restarts.max(1) {
            starts.push((0..d + 2).map(|i| rng.gen_range(lo[i]..=hi[i])).collect());
        }
        let mut best: Option<(f64, Vec<f64>)> = None;
        for start in starts {
            let theta = adam(&x, &ys, start, &lo, &hi, options);
            if let Ok((lml, _)) = lml_and_grad(&x, &ys, &GpHyperparameters::from_log(&theta)) {
                if lml.is_finite() && best.as_ref().map_or(true, |(b, _)| lml > *b) {
                    best = Some((lml, theta));
                }
            }
        }
        let (_, theta) =
            best.ok_or_else(|| Error::NotPositiveDefinite("no usable GP hyperparameters".into()))?;
        Self::build(x, &ys, GpHyperparameters::from_log(&theta), y_mean, y_scale)
    }

    fn build(
        x: Vec<Vec<f64>>,
        ys: &DVector<f64>,
        hyp: GpHyperparameters,
        y_mean: f64,
        y_scale: f64,
    ) -> Result<Self> {
        let k = kernel_matrix(&x, &hyp);
        let (chol, _) = robust_cholesky(&k)?;
        let alpha = chol.solve(ys);
        let n = ys.len() as f64;
        let log_det: f64 = chol.l().diagonal().iter().map(|v| v.ln()).sum();
        let lml = -0.5 * ys.dot(&alpha) - log_det - 0.5 * n * (2.0 * std::f64::consts::PI).ln();
        Ok(GaussianProcess {
            x,
            hyp,
            y_mean,
            y_scale,
            chol,
            alpha,
            log_marginal_likelihood: lml,
        })
    }

    pub fn hyperparameters(&self) -> &GpHyperparameters {
        &self.hyp
    }

    pub fn n_observations(&self) -> usize {
        self.x.len()
    }

    /// Log marginal likelihood of the standardized targets.
    pub fn log_marginal_likelihood(&self) -> f64 {
        self.log_marginal_likelihood
    }

    /// Posterior mean and variance of the latent function at `x`.
    pub fn predict(&self, x: &[f64]) -> (f64, f64) {
        let ks = DVector::from_iterator(
            self.x.len(),
            self.x.iter().map(|xi| matern52(xi, x, &self.hyp)),
        );
        let mean = ks.dot(&self.alpha);
        let v = self
            .chol
            .l()
            .solve_lower_triangular(&ks)
            .unwrap_or_else(|| ks.clone());
        let var = (self.hyp.signal_variance - v.norm_squared()).max(0.0);
        (
            self.y_mean + self.y_scale * mean,
            var * self.y_scale * self.y_scale,
        )
    }
}

fn standardization(x: &[Vec<f64>], y: &[f64]) -> Result<(f64, f64)> {
    if x.is_empty() || x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "GP needs matching non-empty data, got {} inputs and {} targets",
            x.len(),
            y.len()
        )));
    }
    let d = x[0].len();
    if d == 0 || x.iter().any(|r| r.len() != d) {
        return Err(Error::InvalidArgument(
            "GP inputs of inconsistent dimension".into(),
        ));
    }
    if x.iter().flatten().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("GP training data".into()));
    }
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let scale = if var.sqrt() > 1e-12 { var.sqrt() } else { 1.0 };
    Ok((mean, scale))
}

fn kernel_matrix(x: &[Vec<f64>], hyp: &GpHyperparameters) -> DMatrix<f64> {
    let n = x.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = matern52(&x[i], &x[j], hyp);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
        k[(i, i)] += hyp.noise_variance;
    }
    k
}

fn log_bounds(d: usize, o: &GpFitOptions) -> (Vec<f64>, Vec<f64>) {
    let mut lo = vec![o.length_scale_bounds.0.ln(); d];
    let mut hi = vec![o.length_scale_bounds.1.ln(); d];
    lo.push(o.signal_variance_bounds.0.ln());
    hi.push(o.signal_variance_bounds.1.ln());
    lo.push(o.noise_variance_bounds.0.ln());
    hi.push(o.noise_variance_bounds.1.ln());
    (lo, hi)
}

/// Log marginal likelihood and its gradient with respect to the log
/// hyperparameters `[log ℓ_1..d, log σ_f², log σ_n²]`.
pub fn lml_and_grad(
    x: &[Vec<f64>],
    y: &DVector<f64>,
    hyp: &GpHyperparameters,
) -> Result<(f64, Vec<f64>)> {
    let n = x.len();
    let d = hyp.length_scales.len();
    let k = kernel_matrix(x, hyp);
    let (chol, _) = robust_cholesky(&k)?;
    let alpha = chol.solve(y);
    let log_det: f64 = chol.l().diagonal().iter().map(|v| v.ln()).sum();
    let lml = -0.5 * y.dot(&alpha) - log_det - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();

    // W = α αᵀ − K⁻¹ ; ∂LML/∂θ = ½ tr(W ∂K/∂θ)
    let kinv = chol.inverse();
    let w = &alpha * alpha.transpose() - kinv;
    let mut grad = vec![0.0; d + 2];
    for i in 0..n {
        for j in 0..n {
            let wij = w[(i, j)];
            let r2: f64 = (0..d)
                .map(|c| ((x[i][c] - x[j][c]) / hyp.length_scales[c]).powi(2))
                .sum();
            let r = r2.sqrt();
            let e = (-SQRT5 * r).exp();
            let kf = hyp.signal_variance * (1.0 + SQRT5 * r + 5.0 / 3.0 * r2) * e;
            grad[d] += 0.5 * wij * kf;
            if i != j {
                let common = 5.0 / 3.0 * hyp.signal_variance * (1.0 + SQRT5 * r) * e;
                for c in 0..d {
                    let s = (x[i][c] - x[j][c]) / hyp.length_scales[c];
                    grad[c] += 0.5 * wij * common * s * s;
                }
            }
        }
        grad[d + 1] += 0.5 * w[(i, i)] * hyp.noise_variance;
    }
    Ok((lml, grad))
}

fn adam(
    x: &[Vec<f64>],
    y: &DVector<f64>,
    start: Vec<f64>,
    lo: &[f64],
    hi: &[f64],
    o: &GpFitOptions,
) -> Vec<f64> {
    let (b1, b2, eps) = (0.9, 0.999, 1e-8);
    let mut theta: Vec<f64> = start
        .iter()
        .zip(lo.iter().zip(hi))
        .map(|(t, (l, h))| t.clamp(*l, *h))
        .collect();
    let mut m = vec![0.0; theta.len()];
    let mut v = vec![0.0; theta.len()];
    let mut best = (f64::NEG_INFINITY, theta.clone());
    for step in 1..=o.adam_steps {
        let Ok((lml, g)) = lml_and_grad(x, y, &GpHyperparameters::from_log(&theta)) else {
            break;
        };
        if lml > best.0 {
            best = (lml, theta.clone());
        }
        for i in 0..theta.len() {
            // ascent
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            let mh = m[i] / (1.0 - b1.powi(step as i32));
            let vh = v[i] / (1.0 - b2.powi(step as i32));
            theta[i] = (theta[i] + o.learning_rate * mh / (vh.sqrt() + eps)).clamp(lo[i], hi[i]);
        }
    }
    if let Ok((lml, _)) = lml_and_grad(x, y, &GpHyperparameters::from_log(&theta)) {
        if lml > best.0 {
            best = (lml, theta);
        }
    }
    best.1
}
