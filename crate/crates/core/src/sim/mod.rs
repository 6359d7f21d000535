//! Quasi-static peg-in-hole simulator driven by impedance-control commands.

mod rollout;
mod simulator;
mod task;
mod types;

pub use rollout::{rollout, Action, Policy, RolloutConfig, RolloutResult, Trajectory};
pub use simulator::{step, SimDiagnostics, Simulator, APPROACH_RATE};
pub use task::{
    perturb_hole_pose, PerturbationBounds, TaskInstance, DEFAULT_CHAMFER, DEFAULT_SUCCESS_DEPTH,
    SUCCESS_TOLERANCE,
};
pub use types::{wrap_angle, Pose, RobotState, Stiffness, Wrench};
