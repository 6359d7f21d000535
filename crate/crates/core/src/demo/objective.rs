use serde::{Deserialize, Serialize};

use super::features::StateFeatures;
use super::gmm::Gmm;
use super::likelihood::{traj_log_likelihood, TransitionModel, WeightMode};
use crate::error::{Error, Result};
use crate::sim::RolloutResult;

/// Success bonus added to the objective.
pub const DEFAULT_BONUS: f64 = 1e4;
/// Objective assigned to failed runs under the time objective, and to
/// evaluations that raised an error.
pub const J_FAIL: f64 = -1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObjectiveMode {
    /// Demonstration log-likelihood plus success bonus.
    Lfd,
    /// Bonus minus completion time; a flat `J_FAIL` on failure.
    TimeBaseline,
}

/// Scores a rollout for the optimizer (larger is better).
#[derive(Debug, Clone)]
pub struct TrajectoryObjective {
    mode: ObjectiveMode,
    bonus: f64,
    model: Option<TransitionModel>,
    features: StateFeatures,
}

impl TrajectoryObjective {
    pub fn lfd(
        gmm: &Gmm,
        features: StateFeatures,
        weights: WeightMode,
        bonus: f64,
    ) -> Result<Self> {
        check_bonus(bonus)?;
        let model = TransitionModel::new(gmm, weights)?;
        if model.state_dim() != features.dim() {
            return Err(Error::InvalidArgument(format!(
                "mixture over {}-D states used with {}-D features",
                model.state_dim(),
                features.dim()
            )));
        }
        Ok(TrajectoryObjective {
            mode: ObjectiveMode::Lfd,
            bonus,
            model: Some(model),
            features,
        })
    }

    pub fn time_baseline(bonus: f64) -> Result<Self> {
        check_bonus(bonus)?;
        Ok(TrajectoryObjective {
            mode: ObjectiveMode::TimeBaseline,
            bonus,
            model: None,
            features: StateFeatures::default(),
        })
    }

    pub fn mode(&self) -> ObjectiveMode {
        self.mode
    }

    pub fn bonus(&self) -> f64 {
        self.bonus
    }

    pub fn evaluate(&self, result: &RolloutResult) -> Result<f64> {
        let bonus = if result.success { self.bonus } else { 0.0 };
        match (&self.mode, &self.model) {
            (ObjectiveMode::Lfd, Some(model)) => {
                let states = self.features.trajectory(&result.trajectory);
                Ok(traj_log_likelihood(model, &states)? + bonus)
            }
            (ObjectiveMode::TimeBaseline, _) => Ok(if result.success {
                self.bonus - result.elapsed
            } else {
                J_FAIL
            }),
            (ObjectiveMode::Lfd, None) => {
                unreachable!("LfD objective is always built with a model")
            }
        }
    }
}

fn check_bonus(bonus: f64) -> Result<()> {
    if bonus >= 0.0 && bonus.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "bonus {bonus} must be finite and non-negative"
        )))
    }
}
