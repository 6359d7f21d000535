use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bayesopt::BoConfig;
use crate::demo::{
    EmOptions, OracleConfig, PairFloors, StateFeatures, WeightMode, DEFAULT_BONUS, J_FAIL,
};
use crate::error::{Error, Result};
use crate::sim::{PerturbationBounds, RolloutConfig};

/// Every knob of the learning and transfer experiments. Missing fields in a
/// config file take their default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Master seeds; each one is an independent repetition of the grid.
    pub seeds: Vec<u64>,
    pub bo_iterations: usize,
    pub evals_per_iter: usize,
    pub n_eval_trials: usize,
    pub n_demos: usize,
    /// Mixture components of the demonstration model.
    pub gmm_clusters: usize,
    /// Minimum variance of the per-step increments of the demonstration
    /// model, in squared feature units.
    pub gmm_increment_floor: f64,
    /// Minimum variance of the previous-state block, in squared feature units.
    pub gmm_state_floor: f64,
    pub weight_mode: WeightMode,
    pub features: StateFeatures,
    /// Source tasks used by similarity-based transfer.
    pub similar_tasks: usize,
    pub bonus: f64,
    pub failure_value: f64,
    pub perturbation: PerturbationBounds,
    pub rollout: RolloutConfig,
    pub oracle: OracleConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seeds: vec![0, 1, 2],
            bo_iterations: 40,
            evals_per_iter: 2,
            n_eval_trials: 20,
            n_demos: 10,
            gmm_clusters: 25,
            // 2 mm / 2° / 2 N per step and 4 mm / 4° / 4 N overall, in 0.1-unit features
            gmm_increment_floor: 400.0,
            gmm_state_floor: 1600.0,
            weight_mode: WeightMode::Prior,
            features: StateFeatures::PoseAndForce,
            similar_tasks: 3,
            bonus: DEFAULT_BONUS,
            failure_value: J_FAIL,
            perturbation: PerturbationBounds::default(),
            rollout: RolloutConfig::default(),
            oracle: OracleConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("bo_iterations", self.bo_iterations),
            ("evals_per_iter", self.evals_per_iter),
            ("n_eval_trials", self.n_eval_trials),
            ("n_demos", self.n_demos),
            ("gmm_clusters", self.gmm_clusters),
            ("similar_tasks", self.similar_tasks),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(Error::InvalidArgument(format!("{name} must be positive")));
        }
        if !(self.gmm_increment_floor > 0.0 && self.gmm_state_floor > 0.0) {
            return Err(Error::InvalidArgument("gmm floors must be positive".into()));
        }
        if !(self.bonus >= 0.0) || !self.failure_value.is_finite() {
            return Err(Error::InvalidArgument(
                "bonus must be ≥ 0 and failure_value finite".into(),
            ));
        }
        let p = &self.perturbation;
        if !(p.translation >= 0.0 && p.yaw >= 0.0) {
            return Err(Error::InvalidArgument(
                "perturbation bounds must be ≥ 0".into(),
            ));
        }
        if !(self.rollout.max_duration > 0.0 && self.rollout.control_rate > 0.0)
            || self.rollout.substeps == 0
        {
            return Err(Error::InvalidArgument(
                "rollout settings must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(&path, serde_json::to_string_pretty(self)?).map_err(|e| Error::io(&path, e))
    }

    pub fn bo(&self) -> BoConfig {
        BoConfig {
            iterations: self.bo_iterations,
            evals_per_iter: self.evals_per_iter,
            failure_value: self.failure_value,
            ..BoConfig::default()
        }
    }

    pub fn em(&self) -> EmOptions {
        EmOptions::default()
    }

    pub fn pair_floors(&self) -> PairFloors {
        PairFloors {
            increment: self.gmm_increment_floor,
            state: self.gmm_state_floor,
        }
    }

    /// Marker standing in for "never succeeded" when ranking iteration counts.
    pub fn none_marker(&self) -> usize {
        self.bo_iterations + 1
    }
}
