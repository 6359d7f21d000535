//! The insertion state machine: align, move until contact, search, insert.
//!
//! Primitives are expressed in the task frame given by the estimated hole
//! pose. Each one has a desired-trajectory generator, an exit condition on
//! the sensed state and a stiffness vector.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::params::PrimitiveParams;
use crate::error::Result;
use crate::sim::{Action, Policy, Pose, RobotState, Stiffness, TaskInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Phase {
    Align,
    MoveUntilContact,
    Search,
    Insert,
    Done,
}

/// Fixed (non-learned) executor constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveConstants {
    /// Lissajous frequency ratios.
    pub lissajous_a: f64,
    pub lissajous_b: f64,
    /// Yaw search amplitude, rad.
    pub yaw_amplitude: f64,
    /// Arrival threshold for the alignment primitive, m.
    pub arrival_threshold: f64,
    /// Height of the coarse alignment pose above the hole surface, m.
    pub hover_height: f64,
    /// Speed of linearly interpolated motions, m/s.
    pub speed: f64,
    pub k_max: Stiffness,
}

impl Default for PrimitiveConstants {
    fn default() -> Self {
        PrimitiveConstants {
            lissajous_a: 7.0,
            lissajous_b: 6.0,
            yaw_amplitude: 6.0 * PI / 180.0,
            arrival_threshold: 1e-3,
            hover_height: 0.03,
            speed: 0.02,
            k_max: Stiffness::MAX,
        }
    }
}

/// Coarse alignment pose: the estimated hole pose raised by the hover height.
pub fn align_target(task: &TaskInstance, hover_height: f64) -> Pose {
    Pose::compose(
        &task.hole_pose_estimated,
        &Pose::xyz_yaw(0.0, 0.0, hover_height, 0.0),
    )
}

/// Move-until-contact exit: sensed `fz` strictly above `eta`.
pub fn move_until_contact_exit(state: &RobotState, eta: f64) -> bool {
    state.sensed.fz > eta
}

/// Lissajous search pose `t` seconds after entering the search phase.
pub fn lissajous_pose(t: f64, x_enter: &Pose, p: &PrimitiveParams, c: &PrimitiveConstants) -> Pose {
    let w1 = 2.0 * PI * p.n1_over_t * t;
    let w2 = 2.0 * PI * p.n2_over_t * t;
    Pose::new(
        x_enter.x + p.amp_x * (c.lissajous_a * w1).sin(),
        x_enter.y + p.amp_y * (c.lissajous_b * w1).sin(),
        x_enter.z - p.gamma,
        x_enter.roll,
        x_enter.pitch,
        x_enter.yaw + c.yaw_amplitude * w2.sin(),
    )
}

/// Search exit: the peg dropped more than `zeta` below its entry height.
pub fn search_exit(state_pose: &Pose, x_enter: &Pose, zeta: f64) -> bool {
    x_enter.z - state_pose.z > zeta
}

/// Final target of the insertion primitive.
pub fn insertion_desired(x_enter: &Pose, lambda: f64) -> Pose {
    Pose::new(
        x_enter.x,
        x_enter.y,
        x_enter.z - lambda,
        x_enter.roll,
        x_enter.pitch,
        x_enter.yaw,
    )
}

/// Linear motion from `from` to `to` at constant Cartesian speed, evaluated
/// `elapsed` seconds after the start. Orientation follows the same fraction.
pub fn interpolate(from: &Pose, to: &Pose, speed: f64, elapsed: f64) -> Pose {
    let dist = from.translation_distance(to);
    let frac = if dist <= 1e-12 || speed <= 0.0 {
        1.0
    } else {
        (speed * elapsed.max(0.0) / dist).min(1.0)
    };
    let lerp = |a: f64, b: f64| a + frac * (b - a);
    let dyaw = crate::sim::wrap_angle(to.yaw - from.yaw);
    Pose::new(
        lerp(from.x, to.x),
        lerp(from.y, to.y),
        lerp(from.z, to.z),
        lerp(from.roll, to.roll),
        lerp(from.pitch, to.pitch),
        from.yaw + frac * dyaw,
    )
}

/// Runs the four primitives in order for one rollout.
#[derive(Debug, Clone)]
pub struct PolicyExecutor {
    params: PrimitiveParams,
    constants: PrimitiveConstants,
    phase: Phase,
    /// Task-frame pose latched on entering the current phase.
    x_enter: Option<Pose>,
    phase_start: f64,
    history: Vec<Phase>,
}

impl PolicyExecutor {
    pub fn new(params: PrimitiveParams) -> Self {
        Self::with_constants(params, PrimitiveConstants::default())
    }

    pub fn with_constants(params: PrimitiveParams, constants: PrimitiveConstants) -> Self {
        PolicyExecutor {
            params,
            constants,
            phase: Phase::Align,
            x_enter: None,
            phase_start: 0.0,
            history: vec![Phase::Align],
        }
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    /// Phases visited so far, in order.
    pub fn history(&self) -> &[Phase] {
        &self.history
    }

    pub fn params(&self) -> &PrimitiveParams {
        &self.params
    }

    /// Entry pose of the current phase, in the task frame.
    pub fn entry_pose(&self) -> Option<Pose> {
        self.x_enter
    }

    fn advance(&mut self, next: Phase, local: Pose, t: f64) {
        self.phase = next;
        self.x_enter = Some(local);
        self.phase_start = t;
        self.history.push(next);
    }

    /// Next controller command, or `Done` once the insertion succeeded.
    pub fn next_action(&mut self, state: &RobotState, task: &TaskInstance) -> Action {
        let frame = task.hole_pose_estimated;
        let local = state.pose.relative_to(&frame);
        let c = self.constants;
        let p = self.params;
        if self.x_enter.is_none() {
            self.x_enter = Some(local);
            self.phase_start = state.t;
        }
        let hover = Pose::xyz_yaw(0.0, 0.0, c.hover_height, 0.0);

        // Exit conditions may chain within a single tick.
        loop {
            let enter = self.x_enter.unwrap_or(local);
            let next = match self.phase {
                Phase::Align => (state
                    .pose
                    .translation_distance(&align_target(task, c.hover_height))
                    < c.arrival_threshold)
                    .then_some(Phase::MoveUntilContact),
                Phase::MoveUntilContact => {
                    move_until_contact_exit(state, p.eta).then_some(Phase::Search)
                }
                Phase::Search => search_exit(&local, &enter, p.zeta).then_some(Phase::Insert),
                Phase::Insert => task.is_success(&state.pose).then_some(Phase::Done),
                Phase::Done => None,
            };
            match next {
                Some(phase) => self.advance(phase, local, state.t),
                None => break,
            }
        }

        let enter = self.x_enter.unwrap_or(local);
        let elapsed = state.t - self.phase_start;
        let (target, stiffness) = match self.phase {
            Phase::Align => (interpolate(&enter, &hover, c.speed, elapsed), c.k_max),
            Phase::MoveUntilContact => {
                let goal = insertion_desired(&enter, p.delta);
                (interpolate(&enter, &goal, c.speed, elapsed), c.k_max)
            }
            Phase::Search => (lissajous_pose(elapsed, &enter, &p, &c), p.k_search),
            Phase::Insert => {
                let goal = insertion_desired(&enter, p.lambda);
                (interpolate(&enter, &goal, c.speed, elapsed), p.k_insertion)
            }
            Phase::Done => return Action::Done,
        };
        // The planar-extrusion model keeps roll and pitch at zero.
        let target = Pose::new(target.x, target.y, target.z, 0.0, 0.0, target.yaw);
        Action::Command {
            desired: Pose::compose(&frame, &target),
            stiffness,
        }
    }
}

impl Policy for PolicyExecutor {
    fn next_action(&mut self, state: &RobotState, task: &TaskInstance) -> Result<Action> {
        Ok(PolicyExecutor::next_action(self, state, task))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitives::ParamSpace;

    fn midpoint() -> PrimitiveParams {
        PrimitiveParams::from_slice(&ParamSpace::initial().midpoint()).unwrap()
    }

    #[test]
    fn lissajous_at_entry() {
        let c = PrimitiveConstants::default();
        let p = midpoint();
        let e = Pose::xyz_yaw(0.01, 0.02, 0.0, 0.1);
        let q = lissajous_pose(0.0, &e, &p, &c);
        assert_eq!((q.x, q.y, q.yaw), (e.x, e.y, e.yaw));
        assert!((q.z - (e.z - p.gamma)).abs() < 1e-15);
    }

    #[test]
    fn lissajous_constant_without_oscillation() {
        let c = PrimitiveConstants::default();
        let mut p = midpoint();
        p.amp_x = 0.0;
        p.amp_y = 0.0;
        p.n2_over_t = 0.0;
        let e = Pose::default();
        for i in 0..50 {
            let q = lissajous_pose(i as f64 * 0.37, &e, &p, &c);
            assert_eq!((q.x, q.y, q.yaw), (0.0, 0.0, 0.0));
            assert!((q.z + p.gamma).abs() < 1e-15);
        }
    }

    #[test]
    fn lissajous_scalar_value() {
        let c = PrimitiveConstants::default();
        let mut p = midpoint();
        p.amp_x = 0.01;
        p.n1_over_t = 0.1;
        let q = lissajous_pose(0.25, &Pose::default(), &p, &c);
        // 2π · 7 · 0.1 · 0.25 = 0.35π
        let expected = 0.01 * (0.35 * PI).sin();
        assert!((q.x - expected).abs() < 1e-15);
        assert!((q.x - 0.008_910_065_241_883_678).abs() < 1e-15);
    }

    #[test]
    fn exit_conditions_are_strict() {
        let mut s = RobotState::default();
        assert!(!move_until_contact_exit(&s, 1.0));
        s.sensed.fz = 6.0;
        assert!(move_until_contact_exit(&s, 5.0));
        assert!(!move_until_contact_exit(&s, 6.0));

        let e = Pose::xyz_yaw(0.0, 0.0, 0.0, 0.0);
        assert!(search_exit(
            &Pose::xyz_yaw(0.0, 0.0, -0.005, 0.0),
            &e,
            0.002
        ));
        assert!(!search_exit(&e, &e, 0.002));
        let zeta = 0.002;
        assert!(!search_exit(&Pose::xyz_yaw(0.0, 0.0, -zeta, 0.0), &e, zeta));
    }

    #[test]
    fn insertion_targets() {
        let e = Pose::xyz_yaw(0.001, 0.002, -0.003, 0.2);
        assert_eq!(insertion_desired(&e, 0.0), e);
        assert!((insertion_desired(&e, 0.05).z - (e.z - 0.05)).abs() < 1e-15);
        // 20 mm at 20 mm/s: halfway after 0.5 s
        let goal = insertion_desired(&e, 0.02);
        let mid = interpolate(&e, &goal, 0.02, 0.5);
        assert!((mid.z - (e.z - 0.01)).abs() < 1e-12);
        assert_eq!(interpolate(&e, &goal, 0.02, 5.0), goal);
    }

    #[test]
    fn align_target_composition() {
        let sq = crate::geometry::Polygon::rectangle(0.02, 0.02).unwrap();
        let mut task = TaskInstance::new("sq", sq.clone(), sq, 1e-3).unwrap();
        let t = align_target(&task, 0.03);
        assert_eq!(t.to_array(), [0.0, 0.0, 0.03, 0.0, 0.0, 0.0]);
        task.hole_pose_estimated = Pose::xyz_yaw(0.01, 0.02, 0.0, 0.0);
        let t = align_target(&task, 0.03);
        assert!((t.x - 0.01).abs() < 1e-15 && (t.y - 0.02).abs() < 1e-15);
        task.hole_pose_estimated = Pose::xyz_yaw(0.0, 0.0, 0.0, 6f64.to_radians());
        let t = align_target(&task, 0.03);
        assert!((t.yaw - 6f64.to_radians()).abs() < 1e-15);
        assert!(t.x.abs() < 1e-15 && (t.z - 0.03).abs() < 1e-15);
    }

    #[test]
    fn fresh_executor_aligns_at_max_stiffness() {
        let sq = crate::geometry::Polygon::rectangle(0.02, 0.02).unwrap();
        let task = TaskInstance::new("sq", sq.clone(), sq, 1e-3).unwrap();
        let mut ex = PolicyExecutor::new(midpoint());
        let s = RobotState {
            pose: task.start_pose,
            ..Default::default()
        };
        match ex.next_action(&s, &task) {
            Action::Command { stiffness, .. } => assert_eq!(stiffness, Stiffness::MAX),
            Action::Done => panic!("unexpected completion"),
        }
        assert_eq!(ex.phase(), Phase::Align);
    }
}
