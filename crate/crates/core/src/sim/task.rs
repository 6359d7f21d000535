use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::types::Pose;
use crate::error::{Error, Result};
use crate::geometry::Polygon;

/// Success tolerance ε on the distance to the fully inserted pose, in meters.
pub const SUCCESS_TOLERANCE: f64 = 1e-3;
/// Insertion depth counted as success, in meters.
pub const DEFAULT_SUCCESS_DEPTH: f64 = 0.02;
/// Width of the lead-in chamfer around the hole mouth, in meters.
pub const DEFAULT_CHAMFER: f64 = 5e-4;
/// Coulomb friction coefficient between peg and hole walls.
pub const DEFAULT_FRICTION: f64 = 0.5;

/// Bounds of the uniform hole-pose estimation error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationBounds {
    /// Half-width of the x and y offsets, meters.
    pub translation: f64,
    /// Half-width of the yaw offset, radians.
    pub yaw: f64,
}

impl Default for PerturbationBounds {
    fn default() -> Self {
        PerturbationBounds {
            translation: 0.005,
            yaw: 6f64.to_radians(),
        }
    }
}

impl PerturbationBounds {
    pub const ZERO: PerturbationBounds = PerturbationBounds {
        translation: 0.0,
        yaw: 0.0,
    };
}

/// Samples an estimated hole pose around `true_pose`. Only x, y and yaw are
/// perturbed; z, roll and pitch are passed through.
pub fn perturb_hole_pose(true_pose: &Pose, bounds: &PerturbationBounds, seed: u64) -> Pose {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |half: f64| {
        if half > 0.0 {
            rng.gen_range(-half..=half)
        } else {
            0.0
        }
    };
    let dx = draw(bounds.translation);
    let dy = draw(bounds.translation);
    let dyaw = draw(bounds.yaw);
    Pose::new(
        true_pose.x + dx,
        true_pose.y + dy,
        true_pose.z,
        true_pose.roll,
        true_pose.pitch,
        true_pose.yaw + dyaw,
    )
}

/// One peg-in-hole episode: geometry plus true and estimated hole poses.
///
/// Hole and peg cross-sections are given in their own frames; the peg frame
/// coincides with the end-effector frame and its tip is at the end-effector z.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskInstance {
    pub name: String,
    pub hole: Polygon,
    pub peg: Polygon,
    pub hole_pose_true: Pose,
    pub hole_pose_estimated: Pose,
    /// Total dimensional gap; the peg may sit `clearance / 2` past the hole edge.
    pub clearance: f64,
    pub success_depth: f64,
    pub surface_z: f64,
    pub chamfer: f64,
    pub friction: f64,
    pub start_pose: Pose,
}

impl TaskInstance {
    /// A task with the hole at the origin, exact pose estimate and default
    /// depth, surface height and start pose (50 mm above the hole).
    pub fn new(
        name: impl Into<String>,
        hole: Polygon,
        peg: Polygon,
        clearance: f64,
    ) -> Result<Self> {
        if !(clearance > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "clearance {clearance} must be positive"
            )));
        }
        Ok(TaskInstance {
            name: name.into(),
            hole,
            peg,
            hole_pose_true: Pose::default(),
            hole_pose_estimated: Pose::default(),
            clearance,
            success_depth: DEFAULT_SUCCESS_DEPTH,
            surface_z: 0.0,
            chamfer: DEFAULT_CHAMFER,
            friction: DEFAULT_FRICTION,
            start_pose: Pose::xyz_yaw(0.0, 0.0, 0.05, 0.0),
        })
    }

    /// Copy of this task with a freshly sampled pose estimate.
    pub fn with_perturbation(&self, bounds: &PerturbationBounds, seed: u64) -> TaskInstance {
        TaskInstance {
            hole_pose_estimated: perturb_hole_pose(&self.hole_pose_true, bounds, seed),
            ..self.clone()
        }
    }

    /// Fully inserted end-effector pose.
    pub fn success_pose(&self) -> Pose {
        let h = &self.hole_pose_true;
        Pose::xyz_yaw(h.x, h.y, self.surface_z - self.success_depth, h.yaw)
    }

    pub fn is_success(&self, pose: &Pose) -> bool {
        pose.translation_distance(&self.success_pose()) < SUCCESS_TOLERANCE
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perturbation_is_deterministic_and_bounded() {
        let b = PerturbationBounds::default();
        let p = Pose::default();
        assert_eq!(perturb_hole_pose(&p, &b, 7), perturb_hole_pose(&p, &b, 7));
        let mut max_xy: f64 = 0.0;
        let mut max_yaw: f64 = 0.0;
        for seed in 0..10_000 {
            let q = perturb_hole_pose(&p, &b, seed);
            max_xy = max_xy.max(q.x.abs()).max(q.y.abs());
            max_yaw = max_yaw.max(q.yaw.abs());
            assert_eq!((q.z, q.roll, q.pitch), (0.0, 0.0, 0.0));
        }
        assert!(max_xy <= 0.005 && max_xy > 0.0049);
        assert!(max_yaw <= 6f64.to_radians() && max_yaw > 5.9f64.to_radians());
    }

    #[test]
    fn perturbation_not_degenerate() {
        let b = PerturbationBounds::default();
        for seed in 0..100 {
            let q = perturb_hole_pose(&Pose::default(), &b, seed);
            assert!(q.x != 0.0 || q.y != 0.0 || q.yaw != 0.0);
        }
    }

    #[test]
    fn success_region() {
        let sq = Polygon::rectangle(0.02, 0.02).unwrap();
        let task = TaskInstance::new("square", sq.clone(), sq, 1e-3).unwrap();
        assert!(task.is_success(&Pose::xyz_yaw(0.0, 0.0, -0.0195, 0.0)));
        assert!(!task.is_success(&Pose::xyz_yaw(0.0, 0.0, -0.018, 0.0)));
    }
}
