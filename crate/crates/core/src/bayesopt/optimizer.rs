use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::acquisition::expected_improvement;
use super::design::{denormalize, halton_design, normalize};
use super::gp::{GaussianProcess, GpFitOptions};
use crate::demo::J_FAIL;
use crate::error::{Error, Result};
use crate::primitives::ParamSpace;
use crate::seed::{child_seed, indexed_seed};

/// Outcome of one objective evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub value: f64,
    pub success: bool,
    /// Simulated execution time, seconds.
    pub elapsed: f64,
}

/// Objective signature: parameters (in the original space) and an evaluation
/// seed.
pub type Objective<'a> = dyn FnMut(&[f64], u64) -> Result<Evaluation> + 'a;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub seed: u64,
    pub value: f64,
    pub success: bool,
    pub elapsed: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Proposal {
    Initial,
    Model,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// 1-based.
    pub iteration: usize,
    pub proposal: Proposal,
    pub params: Vec<f64>,
    /// Mean over the iteration's evaluations.
    pub value: f64,
    pub evaluations: Vec<EvalRecord>,
    /// Any evaluation succeeded.
    pub success: bool,
    /// Best mean value up to and including this iteration.
    pub best_value: f64,
}

/// Full optimization history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptRecord {
    pub optimizer: String,
    pub seed: u64,
    pub space: ParamSpace,
    pub iterations: Vec<IterationRecord>,
    /// Free-form annotations (task, method, selected library entries, ...).
    #[serde(default)]
    pub tags: BTreeMap<String, String>,
}

impl OptRecord {
    /// Index of the iteration with the highest mean objective (first on ties).
    pub fn best_index(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, it) in self.iterations.iter().enumerate() {
            if best.map_or(true, |b| it.value > self.iterations[b].value) {
                best = Some(i);
            }
        }
        best
    }

    pub fn best_params(&self) -> Option<&[f64]> {
        self.best_index()
            .map(|i| self.iterations[i].params.as_slice())
    }

    pub fn best_value(&self) -> Option<f64> {
        self.best_index().map(|i| self.iterations[i].value)
    }

    /// 1-based iteration of the first successful evaluation.
    pub fn iterations_to_first_success(&self) -> Option<usize> {
        self.iterations
            .iter()
            .find(|it| it.success)
            .map(|it| it.iteration)
    }

    /// Total simulated execution time over all evaluations.
    pub fn total_elapsed(&self) -> f64 {
        self.iterations
            .iter()
            .flat_map(|it| &it.evaluations)
            .map(|e| e.elapsed)
            .sum()
    }

    pub fn n_evaluations(&self) -> usize {
        self.iterations.iter().map(|it| it.evaluations.len()).sum()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Monotone transform applied to objective values before GP modeling.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutputWarp {
    None,
    /// `sign(y) · ln(1 + |y|)`: tames the gap between bonus and failure scores.
    #[default]
    Symlog,
}

impl OutputWarp {
    pub fn apply(self, y: f64) -> f64 {
        match self {
            OutputWarp::None => y,
            OutputWarp::Symlog => y.signum() * y.abs().ln_1p(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoConfig {
    pub iterations: usize,
    pub evals_per_iter: usize,
    /// Quasi-random points evaluated before the surrogate is used.
    pub initial_points: usize,
    /// Uniform EI candidates per suggestion.
    pub candidates: usize,
    /// Best candidates refined by local search.
    pub refine_top: usize,
    pub refine_steps: usize,
    pub warp: OutputWarp,
    /// Value recorded for evaluations that raised an error.
    pub failure_value: f64,
    pub gp: GpFitOptions,
}

impl Default for BoConfig {
    fn default() -> Self {
        BoConfig {
            iterations: 40,
            evals_per_iter: 2,
            initial_points: 5,
            candidates: 1024,
            refine_top: 8,
            refine_steps: 30,
            warp: OutputWarp::Symlog,
            failure_value: J_FAIL,
            gp: GpFitOptions::default(),
        }
    }
}

/// A black-box maximizer over a parameter box.
pub trait Optimizer {
    fn name(&self) -> &str;
    fn optimize(
        &self,
        objective: &mut Objective<'_>,
        space: &ParamSpace,
        seed: u64,
    ) -> Result<OptRecord>;
}

/// GP-EI Bayesian optimization.
#[derive(Debug, Clone, Default)]
pub struct BayesOpt {
    pub config: BoConfig,
}

/// Uniform random search with the same bookkeeping.
#[derive(Debug, Clone)]
pub struct RandomSearch {
    pub iterations: usize,
    pub evals_per_iter: usize,
    pub failure_value: f64,
}

impl Default for RandomSearch {
    fn default() -> Self {
        RandomSearch {
            iterations: 40,
            evals_per_iter: 2,
            failure_value: J_FAIL,
        }
    }
}

fn uniform_point<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    (0..dim).map(|_| rng.gen::<f64>()).collect()
}

/// Next point (unit cube) maximizing EI over `gp`; uniform if there is no model.
pub fn suggest_next<R: Rng + ?Sized>(
    gp: Option<&GaussianProcess>,
    best: f64,
    dim: usize,
    config: &BoConfig,
    rng: &mut R,
) -> Vec<f64> {
    let Some(gp) = gp else {
        return uniform_point(dim, rng);
    };
    let score = |x: &[f64]| {
        let (m, v) = gp.predict(x);
        expected_improvement(m, v, best)
    };
    let mut cands: Vec<(f64, Vec<f64>)> = (0..config.candidates.max(1))
        .map(|_| {
            let x = uniform_point(dim, rng);
            (score(&x), x)
        })
        .collect();
    cands.sort_by(|a, b| b.0.total_cmp(&a.0));
    if cands[0].0 <= 0.0 {
        // EI underflowed everywhere: fall back to the most uncertain candidate.
        return cands
            .into_iter()
            .map(|(_, x)| (gp.predict(&x).1, x))
            .max_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, x)| x)
            .unwrap_or_else(|| uniform_point(dim, rng));
    }
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut best_point = cands[0].clone();
    for (ei0, x0) in cands.into_iter().take(config.refine_top.max(1)) {
        let (mut ei, mut x) = (ei0, x0);
        let mut step = 0.05;
        for _ in 0..config.refine_steps {
            let y: Vec<f64> = x
                .iter()
                .map(|v| (v + step * normal.sample(rng)).clamp(0.0, 1.0))
                .collect();
            let e = score(&y);
            if e > ei {
                ei = e;
                x = y;
                step = (step * 1.5).min(0.2);
            } else {
                step *= 0.7;
            }
        }
        if ei > best_point.0 {
            best_point = (ei, x);
        }
    }
    best_point.1
}

struct Loop<'s> {
    space: &'s ParamSpace,
    evals_per_iter: usize,
    failure_value: f64,
    eval_seed: u64,
    record: OptRecord,
}

impl<'s> Loop<'s> {
    fn new(
        name: &str,
        space: &'s ParamSpace,
        seed: u64,
        evals_per_iter: usize,
        failure_value: f64,
    ) -> Self {
        Loop {
            space,
            evals_per_iter,
            failure_value,
            eval_seed: child_seed(seed, "evaluations"),
            record: OptRecord {
                optimizer: name.to_string(),
                seed,
                space: space.clone(),
                iterations: Vec::new(),
                tags: BTreeMap::new(),
            },
        }
    }

    /// Evaluates the unit-cube point `u`; returns the mean objective.
    fn run(&mut self, u: &[f64], proposal: Proposal, objective: &mut Objective<'_>) -> Result<f64> {
        let params = denormalize(u, self.space)?;
        let iteration = self.record.iterations.len() + 1;
        let evaluations: Vec<EvalRecord> = (0..self.evals_per_iter)
            .map(|r| {
                let seed = indexed_seed(
                    self.eval_seed,
                    ((iteration - 1) * self.evals_per_iter + r) as u64,
                );
                match objective(&params, seed) {
                    Ok(e) if e.value.is_finite() => EvalRecord {
                        seed,
                        value: e.value,
                        success: e.success,
                        elapsed: e.elapsed,
                        error: None,
                    },
                    Ok(e) => EvalRecord {
                        seed,
                        value: self.failure_value,
                        success: false,
                        elapsed: e.elapsed,
                        error: Some(format!("non-finite objective {}", e.value)),
                    },
                    Err(err) => {
                        log::warn!("evaluation {iteration}.{r} failed: {err}");
                        EvalRecord {
                            seed,
                            value: self.failure_value,
                            success: false,
                            elapsed: 0.0,
                            error: Some(err.to_string()),
                        }
                    }
                }
            })
            .collect();
        let value = evaluations.iter().map(|e| e.value).sum::<f64>() / evaluations.len() as f64;
        let best_value = self
            .record
            .iterations
            .last()
            .map_or(value, |last| last.best_value.max(value));
        self.record.iterations.push(IterationRecord {
            iteration,
            proposal,
            success: evaluations.iter().any(|e| e.success),
            params,
            value,
            evaluations,
            best_value,
        });
        Ok(value)
    }
}

fn check_counts(iterations: usize, evals: usize) -> Result<()> {
    if iterations == 0 || evals == 0 {
        return Err(Error::InvalidArgument(format!(
            "need at least one iteration and evaluation, got {iterations} and {evals}"
        )));
    }
    Ok(())
}

impl Optimizer for BayesOpt {
    fn name(&self) -> &str {
        "bayes-opt"
    }

    fn optimize(
        &self,
        objective: &mut Objective<'_>,
        space: &ParamSpace,
        seed: u64,
    ) -> Result<OptRecord> {
        let c = &self.config;
        check_counts(c.iterations, c.evals_per_iter)?;
        let dim = space.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(child_seed(seed, "bayes-opt"));
        let mut lp = Loop::new(self.name(), space, seed, c.evals_per_iter, c.failure_value);
        let initial = halton_design(c.initial_points.min(c.iterations), dim, &mut rng)?;
        let mut xs: Vec<Vec<f64>> = Vec::with_capacity(c.iterations);
        let mut ys: Vec<f64> = Vec::with_capacity(c.iterations);

        for i in 0..c.iterations {
            let (u, proposal) = if i < initial.len() {
                (initial[i].clone(), Proposal::Initial)
            } else {
                match GaussianProcess::fit(xs.clone(), &ys, &c.gp, &mut rng) {
                    Ok(gp) => {
                        let best = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                        (
                            suggest_next(Some(&gp), best, dim, c, &mut rng),
                            Proposal::Model,
                        )
                    }
                    Err(e) => {
                        log::warn!("surrogate fit failed at iteration {}: {e}", i + 1);
                        (uniform_point(dim, &mut rng), Proposal::Random)
                    }
                }
            };
            let value = lp.run(&u, proposal, objective)?;
            // Record the clamped point actually evaluated.
            let params = &lp.record.iterations[i].params;
            xs.push(normalize(params, space)?);
            ys.push(c.warp.apply(value));
        }
        Ok(lp.record)
    }
}

impl Optimizer for RandomSearch {
    fn name(&self) -> &str {
        "random-search"
    }

    fn optimize(
        &self,
        objective: &mut Objective<'_>,
        space: &ParamSpace,
        seed: u64,
    ) -> Result<OptRecord> {
        check_counts(self.iterations, self.evals_per_iter)?;
        let mut rng = ChaCha8Rng::seed_from_u64(child_seed(seed, "random-search"));
        let mut lp = Loop::new(
            self.name(),
            space,
            seed,
            self.evals_per_iter,
            self.failure_value,
        );
        for _ in 0..self.iterations {
            let u = uniform_point(space.dim(), &mut rng);
            lp.run(&u, Proposal::Random, objective)?;
        }
        Ok(lp.record)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad(x: &[f64], _seed: u64) -> Result<Evaluation> {
        let v = -x.iter().map(|v| (v - 0.3).powi(2)).sum::<f64>();
        Ok(Evaluation {
            value: v,
            success: v > -0.01,
            elapsed: 1.0,
        })
    }

    fn small_bo(iterations: usize) -> BayesOpt {
        BayesOpt {
            config: BoConfig {
                iterations,
                warp: OutputWarp::None,
                ..Default::default()
            },
        }
    }

    #[test]
    fn one_iteration_two_evaluations() {
        let space = ParamSpace::new(vec![0.0; 2], vec![1.0; 2]).unwrap();
        let mut calls = 0;
        let mut f = |x: &[f64], s: u64| {
            calls += 1;
            quad(x, s)
        };
        let rec = small_bo(1).optimize(&mut f, &space, 3).unwrap();
        assert_eq!(calls, 2);
        assert_eq!(rec.iterations.len(), 1);
        assert_ne!(
            rec.iterations[0].evaluations[0].seed,
            rec.iterations[0].evaluations[1].seed
        );
    }

    #[test]
    fn reproducible_and_monotone_best() {
        let space = ParamSpace::new(vec![0.0; 2], vec![1.0; 2]).unwrap();
        let a = small_bo(12).optimize(&mut quad, &space, 5).unwrap();
        let b = small_bo(12).optimize(&mut quad, &space, 5).unwrap();
        assert_eq!(a, b);
        assert!(a
            .iterations
            .windows(2)
            .all(|w| w[1].best_value >= w[0].best_value));
        assert!(a.iterations.iter().all(|it| space.contains(&it.params)));
        assert_eq!(a.iterations[5].proposal, Proposal::Model);
    }

    #[test]
    fn errors_become_failures() {
        let space = ParamSpace::new(vec![0.0], vec![1.0]).unwrap();
        let mut f =
            |_: &[f64], _: u64| -> Result<Evaluation> { Err(Error::Missing("boom".into())) };
        let rec = RandomSearch {
            iterations: 3,
            ..Default::default()
        }
        .optimize(&mut f, &space, 1)
        .unwrap();
        assert!(rec
            .iterations
            .iter()
            .all(|it| it.value == J_FAIL && !it.success));
        assert_eq!(rec.iterations_to_first_success(), None);
        assert!(rec.iterations[0].evaluations[0].error.is_some());
    }

    #[test]
    fn zero_iterations_rejected() {
        let space = ParamSpace::new(vec![0.0], vec![1.0]).unwrap();
        assert!(small_bo(0).optimize(&mut quad, &space, 0).is_err());
    }

    #[test]
    fn symlog_is_monotone() {
        let w = OutputWarp::Symlog;
        let ys = [-1e6, -1e3, -1.0, 0.0, 0.5, 1e4];
        assert!(ys.windows(2).all(|p| w.apply(p[0]) < w.apply(p[1])));
    }
}
