use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{RobotState, Trajectory};

/// Length unit of the feature vector, m (0.1 mm).
pub const POSITION_UNIT: f64 = 1e-4;
/// Angle unit, rad (0.1°).
pub const ANGLE_UNIT: f64 = std::f64::consts::PI / 1800.0;
/// Force unit, N.
pub const FORCE_UNIT: f64 = 0.1;

/// Which quantities enter the demonstration model's state vector.
///
/// Poses are relative to the estimated hole frame. The units are fine enough
/// that a typical step of a demonstration has log density below zero, so the
/// trajectory log-likelihood does not reward dawdling: every extra step costs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum StateFeatures {
    /// `(x, y, z, yaw)`
    PoseOnly,
    /// `(x, y, z, yaw, fz)`
    #[default]
    PoseAndForce,
}

impl StateFeatures {
    pub fn dim(self) -> usize {
        match self {
            StateFeatures::PoseOnly => 4,
            StateFeatures::PoseAndForce => 5,
        }
    }

    pub fn state_vector(self, state: &RobotState, hole_frame: &crate::sim::Pose) -> DVector<f64> {
        let local = state.pose.relative_to(hole_frame);
        let mut v = vec![
            local.x / POSITION_UNIT,
            local.y / POSITION_UNIT,
            local.z / POSITION_UNIT,
            local.yaw / ANGLE_UNIT,
        ];
        if self == StateFeatures::PoseAndForce {
            v.push(state.sensed.fz / FORCE_UNIT);
        }
        DVector::from_vec(v)
    }

    /// Feature vectors of every recorded state.
    pub fn trajectory(self, traj: &Trajectory) -> Vec<DVector<f64>> {
        traj.states
            .iter()
            .map(|s| self.state_vector(s, &traj.hole_frame))
            .collect()
    }
}

/// A successful demonstration, recorded at the control rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Demonstration {
    pub trajectory: Trajectory,
}

impl Demonstration {
    pub fn new(trajectory: Trajectory) -> Result<Self> {
        if trajectory.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "demonstration needs at least 2 states, got {}",
                trajectory.len()
            )));
        }
        let finite = trajectory.states.iter().all(|s| {
            s.pose.is_finite()
                && s.t.is_finite()
                && s.sensed.to_array().iter().all(|v| v.is_finite())
        });
        if !finite {
            return Err(Error::NonFinite("demonstration state".into()));
        }
        Ok(Demonstration { trajectory })
    }

    pub fn len(&self) -> usize {
        self.trajectory.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectory.is_empty()
    }
}

/// `[x_i; x_{i-1}]` training pairs pooled over all demonstrations.
pub fn demonstration_pairs(demos: &[Demonstration], features: StateFeatures) -> Vec<DVector<f64>> {
    demos
        .iter()
        .flat_map(|d| super::likelihood::transition_pairs(&features.trajectory(&d.trajectory)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{Pose, Wrench};

    #[test]
    fn units_and_frame() {
        let frame = Pose::xyz_yaw(0.01, 0.0, 0.0, std::f64::consts::FRAC_PI_2);
        let s = RobotState {
            pose: Pose::xyz_yaw(0.01, 0.002, 0.005, std::f64::consts::FRAC_PI_2 + 0.1),
            sensed: Wrench {
                fz: 3.0,
                ..Default::default()
            },
            t: 0.0,
        };
        let v = StateFeatures::PoseAndForce.state_vector(&s, &frame);
        assert_eq!(v.len(), 5);
        assert!((v[0] - 20.0).abs() < 1e-8);
        assert!(v[1].abs() < 1e-8);
        assert!((v[2] - 50.0).abs() < 1e-10);
        assert!((v[3] - 10.0 * 0.1f64.to_degrees()).abs() < 1e-9);
        assert!((v[4] - 30.0).abs() < 1e-12);
        assert_eq!(StateFeatures::PoseOnly.state_vector(&s, &frame).len(), 4);
    }

    #[test]
    fn short_demo_rejected() {
        let t = Trajectory {
            hole_frame: Pose::default(),
            states: vec![RobotState::default()],
        };
        assert!(Demonstration::new(t).is_err());
    }
}
