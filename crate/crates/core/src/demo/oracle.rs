//! Scripted demonstrator standing in for kinesthetic teaching.
//!
//! The oracle knows the true hole pose. It moves above the *estimated* hole,
//! lowers until it feels the surface, slides over to the true hole while
//! keeping a light press, and pushes the peg down once it drops in. States
//! are recorded in the estimated hole frame, like policy rollouts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::Demonstration;
use crate::error::{Error, Result};
use crate::primitives::interpolate;
use crate::sim::{
    rollout, Action, PerturbationBounds, Policy, Pose, RobotState, RolloutConfig, Stiffness,
    TaskInstance,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Cartesian speed of the demonstrator, m/s.
    pub speed: f64,
    /// Hover height above the surface before descending, m.
    pub hover_height: f64,
    /// How far below the surface the press target sits, m.
    pub press_depth: f64,
    /// Force that counts as touching the surface, N.
    pub contact_force: f64,
    /// Half-width of the uniform jitter on commanded positions, m.
    pub position_noise: f64,
    /// Relative half-width of the per-demo speed jitter.
    pub speed_jitter: f64,
    pub perturbation: PerturbationBounds,
    pub rollout: RolloutConfig,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            speed: 0.0175,
            hover_height: 0.03,
            press_depth: 0.003,
            contact_force: 1.0,
            position_noise: 2e-4,
            speed_jitter: 0.1,
            perturbation: PerturbationBounds::default(),
            rollout: RolloutConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stage {
    Approach,
    Descend,
    Slide,
    Insert,
}

/// Demonstrator policy for one episode.
#[derive(Debug, Clone)]
pub struct OraclePolicy {
    config: OracleConfig,
    speed: f64,
    rng: ChaCha8Rng,
    stage: Stage,
    from: Option<Pose>,
    stage_start: f64,
}

impl OraclePolicy {
    pub fn new(config: OracleConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let j = config.speed_jitter;
        let speed = config.speed * (1.0 + if j > 0.0 { rng.gen_range(-j..=j) } else { 0.0 });
        OraclePolicy {
            config,
            speed,
            rng,
            stage: Stage::Approach,
            from: None,
            stage_start: 0.0,
        }
    }

    fn jitter(&mut self) -> f64 {
        let a = self.config.position_noise;
        if a > 0.0 {
            self.rng.gen_range(-a..=a)
        } else {
            0.0
        }
    }

    fn goal(&self, task: &TaskInstance) -> Pose {
        let c = &self.config;
        let est = &task.hole_pose_estimated;
        let tru = &task.hole_pose_true;
        match self.stage {
            Stage::Approach => {
                Pose::xyz_yaw(est.x, est.y, task.surface_z + c.hover_height, est.yaw)
            }
            Stage::Descend => Pose::xyz_yaw(est.x, est.y, task.surface_z - c.press_depth, est.yaw),
            Stage::Slide => Pose::xyz_yaw(tru.x, tru.y, task.surface_z - c.press_depth, tru.yaw),
            Stage::Insert => Pose::xyz_yaw(
                tru.x,
                tru.y,
                task.surface_z - task.success_depth - c.press_depth,
                tru.yaw,
            ),
        }
    }

    fn next_stage(&self, state: &RobotState, task: &TaskInstance) -> Option<Stage> {
        match self.stage {
            Stage::Approach => {
                (state.pose.translation_distance(&self.goal(task)) < 1e-3).then_some(Stage::Descend)
            }
            Stage::Descend => (state.sensed.fz > self.config.contact_force
                || state.pose.z < task.surface_z)
                .then_some(Stage::Slide),
            Stage::Slide => (state.pose.z < task.surface_z - 2e-3).then_some(Stage::Insert),
            Stage::Insert => None,
        }
    }
}

impl Policy for OraclePolicy {
    fn next_action(&mut self, state: &RobotState, task: &TaskInstance) -> Result<Action> {
        if self.from.is_none() {
            self.from = Some(state.pose);
            self.stage_start = state.t;
        }
        while let Some(next) = self.next_stage(state, task) {
            self.stage = next;
            self.from = Some(state.pose);
            self.stage_start = state.t;
        }
        let from = self.from.unwrap_or(state.pose);
        let goal = self.goal(task);
        // Aim one tick ahead so a stage switch never stalls the motion.
        let lead = 1.0 / self.config.rollout.control_rate;
        let mut desired = interpolate(&from, &goal, self.speed, state.t - self.stage_start + lead);
        desired.x += self.jitter();
        desired.y += self.jitter();
        Ok(Action::Command {
            desired,
            stiffness: Stiffness::MAX,
        })
    }
}

/// Records `n` successful demonstrations, each on its own perturbed instance
/// of `task`.
pub fn oracle_demonstrate(
    task: &TaskInstance,
    n: usize,
    seed: u64,
    config: &OracleConfig,
) -> Result<Vec<Demonstration>> {
    let mut seeds = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let instance = task.with_perturbation(&config.perturbation, seeds.gen());
            let mut oracle = OraclePolicy::new(*config, seeds.gen());
            let result = rollout(&mut oracle, &instance, &config.rollout)?;
            if !result.success {
                return Err(Error::DemonstrationFailed(format!(
                    "demonstration {i} on '{}' did not reach the hole",
                    task.name
                )));
            }
            Demonstration::new(result.trajectory)
        })
        .collect()
}
