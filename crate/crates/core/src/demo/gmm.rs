//! Full-covariance Gaussian mixtures fitted by expectation-maximization.

use std::path::Path;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmOptions {
    pub max_iterations: usize,
    /// Stop once the mean per-sample log-likelihood improves by less than this.
    pub tolerance: f64,
    /// Lower bound on every covariance diagonal entry.
    pub covariance_floor: f64,
}

impl Default for EmOptions {
    fn default() -> Self {
        EmOptions {
            max_iterations: 200,
            tolerance: 1e-6,
            covariance_floor: 1e-6,
        }
    }
}

/// Gaussian mixture over stacked vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Gmm {
    weights: Vec<f64>,
    means: Vec<DVector<f64>>,
    covariances: Vec<DMatrix<f64>>,
}

/// Cholesky-factored Gaussian for repeated density evaluation.
#[derive(Debug, Clone)]
pub struct Gaussian {
    pub mean: DVector<f64>,
    chol: Cholesky<f64, Dyn>,
    log_norm: f64,
}

impl Gaussian {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        if cov.nrows() != d || cov.ncols() != d {
            return Err(Error::InvalidArgument(format!(
                "covariance {}x{} for mean of length {d}",
                cov.nrows(),
                cov.ncols()
            )));
        }
        let chol = Cholesky::new(cov)
            .ok_or_else(|| Error::NotPositiveDefinite("Gaussian covariance".into()))?;
        let log_det: f64 = 2.0
            * chol
                .l_dirty()
                .diagonal()
                .iter()
                .map(|v| v.ln())
                .sum::<f64>();
        Ok(Gaussian {
            mean,
            chol,
            log_norm: -0.5 * (d as f64 * LN_2PI + log_det),
        })
    }

    /// Gaussian with covariance `L Lᵀ` for a lower-triangular `factor` with a
    /// positive diagonal.
    pub fn from_factor(mean: DVector<f64>, factor: DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        if factor.nrows() != d || factor.ncols() != d {
            return Err(Error::InvalidArgument(format!(
                "factor {}x{} for mean of length {d}",
                factor.nrows(),
                factor.ncols()
            )));
        }
        if factor
            .diagonal()
            .iter()
            .any(|v| !(*v > 0.0 && v.is_finite()))
        {
            return Err(Error::NotPositiveDefinite(
                "Cholesky factor diagonal".into(),
            ));
        }
        let l = factor.lower_triangle();
        let log_det: f64 = 2.0 * l.diagonal().iter().map(|v| v.ln()).sum::<f64>();
        Ok(Gaussian {
            mean,
            chol: Cholesky::pack_dirty(l),
            log_norm: -0.5 * (d as f64 * LN_2PI + log_det),
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn covariance(&self) -> DMatrix<f64> {
        let l = self.chol.l();
        &l * l.transpose()
    }

    /// Log density at `x`, using the stored mean.
    pub fn log_pdf(&self, x: &DVector<f64>) -> f64 {
        self.log_pdf_centered(&(x - &self.mean))
    }

    /// Log density of a zero-mean Gaussian with this covariance at `diff`.
    pub fn log_pdf_centered(&self, diff: &DVector<f64>) -> f64 {
        let l = self.chol.l_dirty();
        // Solve L z = diff; Mahalanobis distance is |z|².
        let n = diff.len();
        let mut z = diff.clone();
        for i in 0..n {
            let mut s = z[i];
            for j in 0..i {
                s -= l[(i, j)] * z[j];
            }
            z[i] = s / l[(i, i)];
        }
        self.log_norm - 0.5 * z.norm_squared()
    }
}

pub(crate) fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + values.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

impl Gmm {
    pub fn new(
        weights: Vec<f64>,
        means: Vec<DVector<f64>>,
        covariances: Vec<DMatrix<f64>>,
    ) -> Result<Self> {
        let k = weights.len();
        if k == 0 || means.len() != k || covariances.len() != k {
            return Err(Error::InvalidArgument(format!(
                "{k} weights, {} means, {} covariances",
                means.len(),
                covariances.len()
            )));
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|w| !(*w >= 0.0)) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "mixture weights sum to {total}"
            )));
        }
        let d = means[0].len();
        for (j, (m, c)) in means.iter().zip(&covariances).enumerate() {
            if m.len() != d || c.nrows() != d || c.ncols() != d {
                return Err(Error::InvalidArgument(format!(
                    "cluster {j} has inconsistent dimensions"
                )));
            }
            if (c - c.transpose()).amax() > 1e-9 * c.amax().max(1.0) {
                return Err(Error::NotPositiveDefinite(format!(
                    "cluster {j} covariance is not symmetric"
                )));
            }
            if Cholesky::new(c.clone()).is_none() {
                return Err(Error::NotPositiveDefinite(format!(
                    "cluster {j} covariance"
                )));
            }
        }
        Ok(Gmm {
            weights,
            means,
            covariances,
        })
    }

    pub fn n_components(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.means[0].len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn means(&self) -> &[DVector<f64>] {
        &self.means
    }

    pub fn covariances(&self) -> &[DMatrix<f64>] {
        &self.covariances
    }

    /// Mean log-likelihood of the samples.
    pub fn mean_log_likelihood(&self, data: &[DVector<f64>]) -> Result<f64> {
        let comps = self.components()?;
        let lw: Vec<f64> = self.weights.iter().map(|w| w.ln()).collect();
        let mut buf = vec![0.0; comps.len()];
        let mut total = 0.0;
        for x in data {
            for (j, g) in comps.iter().enumerate() {
                buf[j] = lw[j] + g.log_pdf(x);
            }
            total += log_sum_exp(&buf);
        }
        Ok(total / data.len() as f64)
    }

    fn components(&self) -> Result<Vec<Gaussian>> {
        self.means
            .iter()
            .zip(&self.covariances)
            .map(|(m, c)| Gaussian::new(m.clone(), c.clone()))
            .collect()
    }

    pub fn to_file(&self) -> GmmFile {
        GmmFile {
            dim: self.dim(),
            weights: self.weights.clone(),
            means: self
                .means
                .iter()
                .map(|m| m.iter().copied().collect())
                .collect(),
            covariances: self
                .covariances
                .iter()
                .map(|c| c.transpose().iter().copied().collect())
                .collect(),
        }
    }

    pub fn from_file(f: &GmmFile) -> Result<Self> {
        let d = f.dim;
        let means = f
            .means
            .iter()
            .map(|m| {
                if m.len() == d {
                    Ok(DVector::from_vec(m.clone()))
                } else {
                    Err(Error::InvalidArgument("mean length mismatch".into()))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let covariances = f
            .covariances
            .iter()
            .map(|c| {
                if c.len() == d * d {
                    Ok(DMatrix::from_row_slice(d, d, c))
                } else {
                    Err(Error::InvalidArgument("covariance size mismatch".into()))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Gmm::new(f.weights.clone(), means, covariances)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = serde_json::to_string(&self.to_file())?;
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Gmm::from_file(&serde_json::from_str(&text)?)
    }
}

/// Serialized mixture: `dim`, `weights[K]`, `means[K][dim]`, and
/// `covariances[K][dim*dim]` in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmmFile {
    pub dim: usize,
    pub weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub covariances: Vec<Vec<f64>>,
}

/// Result of an EM fit.
#[derive(Debug, Clone)]
pub struct FitReport {
    pub gmm: Gmm,
    /// Mean per-sample training log-likelihood after each E-step.
    pub log_likelihood: Vec<f64>,
    /// Iterations after which a collapsed cluster was re-seeded.
    pub reseeded_at: Vec<usize>,
    pub converged: bool,
}

impl FitReport {
    /// EM never decreased the training likelihood, except right after a
    /// cluster re-seed.
    pub fn is_monotone(&self) -> bool {
        self.log_likelihood.windows(2).enumerate().all(|(i, w)| {
            self.reseeded_at.contains(&i) || w[1] >= w[0] - 1e-9 * w[0].abs().max(1.0)
        })
    }
}

fn kmeans_pp(data: &[DVector<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<DVector<f64>> {
    let n = data.len();
    let mut centers = vec![data[rng.gen_range(0..n)].clone()];
    let mut d2: Vec<f64> = data
        .iter()
        .map(|x| (x - &centers[0]).norm_squared())
        .collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let idx = if total > 0.0 {
            let mut r = rng.gen::<f64>() * total;
            let mut pick = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                if r < d {
                    pick = i;
                    break;
                }
                r -= d;
            }
            pick
        } else {
            rng.gen_range(0..n)
        };
        let c = data[idx].clone();
        for (i, x) in data.iter().enumerate() {
            d2[i] = d2[i].min((x - &c).norm_squared());
        }
        centers.push(c);
    }
    centers
}

/// Symmetrizes `cov` and lifts its spectrum to at least `floor`, and to at
/// least a 1e-9 fraction of the largest eigenvalue so that every block
/// ordering of the matrix factors reliably.
/// Eigenvalues clipped from below: the likelihood maximizer under
/// `λ_min ≥ floor`, so a fixed floor keeps EM monotone.
fn floored(cov: DMatrix<f64>, floor: f64) -> DMatrix<f64> {
    let sym = 0.5 * (&cov + cov.transpose());
    let eig = sym.symmetric_eigen();
    let lifted = eig.eigenvalues.map(|v| v.max(floor));
    let out = &eig.eigenvectors * DMatrix::from_diagonal(&lifted) * eig.eigenvectors.transpose();
    0.5 * (&out + out.transpose())
}

fn data_covariance(data: &[DVector<f64>]) -> DMatrix<f64> {
    let n = data.len() as f64;
    let d = data[0].len();
    let mean = data.iter().fold(DVector::zeros(d), |a, x| a + x) / n;
    let mut cov = DMatrix::zeros(d, d);
    for x in data {
        let c = x - &mean;
        cov += &c * c.transpose();
    }
    cov / n
}

/// Fits a `k`-component mixture by EM with k-means++ initialization.
pub fn fit_gmm(
    data: &[DVector<f64>],
    k: usize,
    seed: u64,
    options: &EmOptions,
) -> Result<FitReport> {
    if k == 0 {
        return Err(Error::InvalidArgument(
            "need at least one mixture component".into(),
        ));
    }
    if data.len() < k {
        return Err(Error::InvalidArgument(format!(
            "{} samples cannot support {k} clusters",
            data.len()
        )));
    }
    let d = data[0].len();
    if data
        .iter()
        .any(|x| x.len() != d || x.iter().any(|v| !v.is_finite()))
    {
        return Err(Error::NonFinite("training data".into()));
    }
    let n = data.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw_cov = data_covariance(data);
    // Relative part keeps factorizations well conditioned; fixed for the whole fit.
    let top = raw_cov
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(0.0, f64::max);
    let floor = options.covariance_floor.max(1e-9 * top);

    // Hard assignment to the k-means++ centers seeds the first M-step.
    let centers = kmeans_pp(data, k, &mut rng);
    let mut resp = DMatrix::<f64>::zeros(n, k);
    for (i, x) in data.iter().enumerate() {
        let j = (0..k)
            .min_by(|&a, &b| {
                (x - &centers[a])
                    .norm_squared()
                    .total_cmp(&(x - &centers[b]).norm_squared())
            })
            .unwrap_or(0);
        resp[(i, j)] = 1.0;
    }

    let global_cov = floored(raw_cov, floor);
    let mut weights = vec![1.0 / k as f64; k];
    let mut means = centers;
    let mut covs = vec![global_cov.clone(); k];
    let mut history = Vec::new();
    let mut reseeded_at = Vec::new();
    let mut converged = false;
    let mut point_ll = vec![0.0f64; n];
    let mut iter = 0;

    loop {
        // M-step.
        let mut reseeded = false;
        for j in 0..k {
            let nj: f64 = resp.column(j).sum();
            if nj < 1e-8 * n as f64 || nj < 1e-12 {
                // Collapsed cluster: restart it at the worst-explained sample.
                let worst = (0..n)
                    .min_by(|&a, &b| point_ll[a].total_cmp(&point_ll[b]))
                    .unwrap_or(0);
                log::warn!("GMM cluster {j} collapsed at iteration {iter}; re-seeding");
                means[j] = data[worst].clone();
                covs[j] = global_cov.clone();
                weights[j] = 1.0 / n as f64;
                reseeded = true;
                continue;
            }
            let mut mean = DVector::zeros(d);
            for (i, x) in data.iter().enumerate() {
                mean += resp[(i, j)] * x;
            }
            mean /= nj;
            let mut cov = DMatrix::zeros(d, d);
            for (i, x) in data.iter().enumerate() {
                let c = x - &mean;
                cov += resp[(i, j)] * (&c * c.transpose());
            }
            covs[j] = floored(cov / nj, floor);
            means[j] = mean;
            weights[j] = nj / n as f64;
        }
        let wsum: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= wsum);
        if reseeded {
            reseeded_at.push(history.len().saturating_sub(1));
        }

        // E-step.
        let comps = means
            .iter()
            .zip(&covs)
            .map(|(m, c)| Gaussian::new(m.clone(), c.clone()))
            .collect::<Result<Vec<_>>>()?;
        let lw: Vec<f64> = weights.iter().map(|w| w.ln()).collect();
        let mut buf = vec![0.0; k];
        let mut total = 0.0;
        for (i, x) in data.iter().enumerate() {
            for j in 0..k {
                buf[j] = lw[j] + comps[j].log_pdf(x);
            }
            let lse = log_sum_exp(&buf);
            point_ll[i] = lse;
            total += lse;
            for j in 0..k {
                resp[(i, j)] = (buf[j] - lse).exp();
            }
        }
        let mean_ll = total / n as f64;
        let prev = history.last().copied();
        history.push(mean_ll);
        iter += 1;
        if let Some(p) = prev {
            if !reseeded && (mean_ll - p).abs() < options.tolerance {
                converged = true;
                break;
            }
        }
        if iter >= options.max_iterations {
            break;
        }
    }

    let gmm = Gmm::new(weights, means, covs)?;
    Ok(FitReport {
        gmm,
        log_likelihood: history,
        reseeded_at,
        converged,
    })
}

/// Log density of a multivariate normal; convenience for tests and oracles.
pub fn normal_log_pdf(x: &DVector<f64>, mean: &DVector<f64>, cov: &DMatrix<f64>) -> Result<f64> {
    Ok(Gaussian::new(mean.clone(), cov.clone())?.log_pdf(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn ln_2pi_constant() {
        assert!((LN_2PI - (2.0 * PI).ln()).abs() < 1e-15);
    }

    #[test]
    fn single_cluster_is_sample_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let data: Vec<DVector<f64>> = (0..200)
            .map(|_| DVector::from_vec(vec![rng.gen::<f64>() * 3.0, rng.gen::<f64>() - 0.5]))
            .collect();
        let fit = fit_gmm(&data, 1, 0, &EmOptions::default()).unwrap();
        let g = &fit.gmm;
        assert_eq!(g.weights(), &[1.0]);
        let n = data.len() as f64;
        let mean = data.iter().fold(DVector::zeros(2), |a, x| a + x) / n;
        assert!((&g.means()[0] - &mean).amax() < 1e-12);
        let mut cov = DMatrix::zeros(2, 2);
        for x in &data {
            let c = x - &mean;
            cov += &c * c.transpose();
        }
        cov /= n;
        assert!((&g.covariances()[0] - &cov).amax() < 1e-12);
        assert!(fit.is_monotone());
    }

    #[test]
    fn rejects_too_many_clusters() {
        let data = vec![DVector::from_vec(vec![0.0]); 3];
        assert!(fit_gmm(&data, 4, 0, &EmOptions::default()).is_err());
    }

    #[test]
    fn serialization_roundtrip() {
        let g = Gmm::new(
            vec![0.25, 0.75],
            vec![
                DVector::from_vec(vec![0.0, 1.0]),
                DVector::from_vec(vec![2.0, 3.0]),
            ],
            vec![
                DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]),
                DMatrix::identity(2, 2),
            ],
        )
        .unwrap();
        assert_eq!(Gmm::from_file(&g.to_file()).unwrap(), g);
    }

    #[test]
    fn rejects_bad_mixtures() {
        let m = vec![DVector::from_vec(vec![0.0])];
        assert!(Gmm::new(vec![0.9], m.clone(), vec![DMatrix::identity(1, 1)]).is_err());
        assert!(Gmm::new(vec![1.0], m, vec![DMatrix::from_element(1, 1, -1.0)]).is_err());
    }
}
