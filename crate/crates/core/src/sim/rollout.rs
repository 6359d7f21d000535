use std::path::Path;

use serde::{Deserialize, Serialize};

use super::simulator::{SimDiagnostics, Simulator};
use super::task::TaskInstance;
use super::types::{Pose, RobotState, Stiffness};
use crate::error::{Error, Result};

/// Policy output for one control tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Action {
    Command { desired: Pose, stiffness: Stiffness },
    Done,
}

/// Anything that maps the sensed state to impedance-controller commands.
pub trait Policy {
    fn next_action(&mut self, state: &RobotState, task: &TaskInstance) -> Result<Action>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RolloutConfig {
    /// Simulated time limit, seconds.
    pub max_duration: f64,
    /// Policy rate, Hz.
    pub control_rate: f64,
    /// Simulator steps per control tick.
    pub substeps: usize,
}

impl Default for RolloutConfig {
    fn default() -> Self {
        RolloutConfig {
            max_duration: 60.0,
            control_rate: 10.0,
            substeps: 10,
        }
    }
}

/// States recorded at the control rate, plus the frame the policy believed
/// the hole to be in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub hole_frame: Pose,
    pub states: Vec<RobotState>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = serde_json::to_string(self)?;
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RolloutResult {
    pub trajectory: Trajectory,
    pub success: bool,
    /// Simulated seconds until success, policy completion or timeout.
    pub elapsed: f64,
    pub diagnostics: SimDiagnostics,
}

/// Runs `policy` on `task` from the task's start pose.
///
/// The policy is queried at `control_rate`; each command is held for
/// `substeps` simulator steps. The rollout stops as soon as the peg reaches
/// the success region, when the policy reports completion, or at the time
/// limit.
pub fn rollout<P: Policy + ?Sized>(
    policy: &mut P,
    task: &TaskInstance,
    config: &RolloutConfig,
) -> Result<RolloutResult> {
    if !(config.max_duration > 0.0) || !(config.control_rate > 0.0) || config.substeps == 0 {
        return Err(Error::InvalidArgument(format!(
            "bad rollout config {config:?}"
        )));
    }
    let mut sim = Simulator::new(task);
    let tick = 1.0 / config.control_rate;
    let dt = tick / config.substeps as f64;
    let max_ticks = (config.max_duration * config.control_rate + 1e-9).floor() as usize;

    let mut state = RobotState {
        pose: task.start_pose,
        ..Default::default()
    };
    let mut states = Vec::with_capacity(max_ticks + 1);
    states.push(state);
    let mut success = task.is_success(&state.pose);

    for i in 0..max_ticks {
        if success {
            break;
        }
        let (desired, stiffness) = match policy.next_action(&state, task)? {
            Action::Command { desired, stiffness } => (desired, stiffness),
            Action::Done => break,
        };
        for _ in 0..config.substeps {
            state = sim.step(&state, &desired, &stiffness, dt)?;
        }
        state.t = (i + 1) as f64 * tick;
        states.push(state);
        success = task.is_success(&state.pose);
    }

    Ok(RolloutResult {
        elapsed: state.t,
        trajectory: Trajectory {
            hole_frame: task.hole_pose_estimated,
            states,
        },
        success,
        diagnostics: *sim.diagnostics(),
    })
}
