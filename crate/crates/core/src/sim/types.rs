use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PlanarPose;

/// Wraps an angle to `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}

/// End-effector (or frame) pose. Angles in radians, wrapped to `(-π, π]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, z: f64, roll: f64, pitch: f64, yaw: f64) -> Self {
        Pose {
            x,
            y,
            z,
            roll: wrap_angle(roll),
            pitch: wrap_angle(pitch),
            yaw: wrap_angle(yaw),
        }
    }

    pub fn xyz_yaw(x: f64, y: f64, z: f64, yaw: f64) -> Self {
        Pose::new(x, y, z, 0.0, 0.0, yaw)
    }

    pub fn planar(&self) -> PlanarPose {
        PlanarPose::new(self.x, self.y, self.yaw)
    }

    pub fn translation_distance(&self, other: &Pose) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2) + (self.z - other.z).powi(2))
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.x, self.y, self.z, self.roll, self.pitch, self.yaw]
    }

    /// Pose expressed relative to `frame` (yaw-only frame rotation; roll and
    /// pitch are carried through unchanged).
    pub fn relative_to(&self, frame: &Pose) -> Pose {
        let (s, c) = frame.yaw.sin_cos();
        let dx = self.x - frame.x;
        let dy = self.y - frame.y;
        Pose::new(
            c * dx + s * dy,
            -s * dx + c * dy,
            self.z - frame.z,
            self.roll,
            self.pitch,
            self.yaw - frame.yaw,
        )
    }

    /// Inverse of [`Pose::relative_to`]: maps a `frame`-relative pose to world.
    pub fn compose(frame: &Pose, local: &Pose) -> Pose {
        let (s, c) = frame.yaw.sin_cos();
        Pose::new(
            frame.x + c * local.x - s * local.y,
            frame.y + s * local.x + c * local.y,
            frame.z + local.z,
            local.roll,
            local.pitch,
            frame.yaw + local.yaw,
        )
    }
}

/// Diagonal Cartesian stiffness. Translational entries in N/m, rotational in Nm/rad.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Stiffness {
    pub kx: f64,
    pub ky: f64,
    pub kz: f64,
    pub kroll: f64,
    pub kpitch: f64,
    pub kyaw: f64,
}

impl Stiffness {
    /// Highest admissible stiffness per axis.
    pub const MAX: Stiffness = Stiffness {
        kx: 600.0,
        ky: 600.0,
        kz: 600.0,
        kroll: 40.0,
        kpitch: 40.0,
        kyaw: 40.0,
    };

    pub fn from_array(a: [f64; 6]) -> Self {
        Stiffness {
            kx: a[0],
            ky: a[1],
            kz: a[2],
            kroll: a[3],
            kpitch: a[4],
            kyaw: a[5],
        }
    }

    pub fn to_array(&self) -> [f64; 6] {
        [
            self.kx,
            self.ky,
            self.kz,
            self.kroll,
            self.kpitch,
            self.kyaw,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let max = Stiffness::MAX.to_array();
        for (i, (k, m)) in self.to_array().into_iter().zip(max).enumerate() {
            if !(k.is_finite() && (0.0..=m).contains(&k)) {
                return Err(Error::InvalidStiffness(format!(
                    "axis {i}: {k} outside [0, {m}]"
                )));
            }
        }
        Ok(())
    }
}

/// Sensed wrench. Forces in N, torques in Nm. A peg pressed down onto a
/// surface reads positive `fz`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Wrench {
    pub fx: f64,
    pub fy: f64,
    pub fz: f64,
    pub tx: f64,
    pub ty: f64,
    pub tz: f64,
}

impl Wrench {
    pub fn from_array(a: [f64; 6]) -> Self {
        Wrench {
            fx: a[0],
            fy: a[1],
            fz: a[2],
            tx: a[3],
            ty: a[4],
            tz: a[5],
        }
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.fx, self.fy, self.fz, self.tx, self.ty, self.tz]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RobotState {
    pub pose: Pose,
    pub sensed: Wrench,
    /// Seconds since rollout start.
    pub t: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert!((wrap_angle(0.1) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn relative_compose_roundtrip() {
        let frame = Pose::xyz_yaw(0.01, -0.02, 0.0, 0.3);
        let p = Pose::xyz_yaw(0.015, 0.004, 0.03, -0.2);
        let back = Pose::compose(&frame, &p.relative_to(&frame));
        for (a, b) in back.to_array().iter().zip(p.to_array()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn stiffness_bounds() {
        assert!(Stiffness::MAX.validate().is_ok());
        assert!(Stiffness::default().validate().is_ok());
        let mut k = Stiffness::MAX;
        k.kyaw = 41.0;
        assert!(k.validate().is_err());
        k.kyaw = f64::NAN;
        assert!(k.validate().is_err());
        k.kyaw = -1.0;
        assert!(k.validate().is_err());
    }
}
