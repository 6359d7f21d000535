//! Quasi-static contact resolution under Cartesian stiffness control.
//!
//! Each step moves every actuated axis a fixed fraction of the way toward its
//! desired value (a critically damped first-order approach), then projects the
//! result onto the contact constraints:
//!
//! * above the hole surface the peg slides freely; it can only pass below the
//!   surface where its cross-section fits the hole within the clearance,
//!   otherwise z is floored at the surface;
//! * below the surface the planar pose is confined so that the peg keeps
//!   fitting, and the hole bottom floors z.
//!
//! A pressed peg that is misaligned by less than the lead-in chamfer is pushed
//! into alignment, provided the press force can overcome the lateral springs.
//! A peg pressed onto the surface slides only once the lateral springs beat
//! Coulomb friction; inside the hole, a peg held against the walls stalls when
//! wall friction exceeds the downward push.
//! Sensed wrench on constrained axes is the spring deflection `k ⊙ (x − x_d)`.

use serde::{Deserialize, Serialize};

use super::task::TaskInstance;
use super::types::{wrap_angle, Pose, RobotState, Stiffness, Wrench};
use crate::error::{Error, Result};
use crate::geometry::{HoleRegion, PlanarPose};

/// First-order approach rate toward the desired pose, 1/s.
pub const APPROACH_RATE: f64 = 20.0;

const BISECTION_STEPS: usize = 20;
const WRENCH_TOLERANCE: f64 = 1e-9;

/// Invariant violations observed by a simulator. Both counters stay at zero
/// for a correct contact model.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimDiagnostics {
    pub steps: u64,
    /// Steps ending below the surface while the containment predicate is false.
    pub tunneling_violations: u64,
    /// Steps where a constrained axis' force differs from `k · deflection`.
    pub wrench_violations: u64,
}

impl SimDiagnostics {
    pub fn merge(&mut self, other: &SimDiagnostics) {
        self.steps += other.steps;
        self.tunneling_violations += other.tunneling_violations;
        self.wrench_violations += other.wrench_violations;
    }

    pub fn is_clean(&self) -> bool {
        self.tunneling_violations == 0 && self.wrench_violations == 0
    }
}

pub struct Simulator<'a> {
    task: &'a TaskInstance,
    hole: HoleRegion,
    peg_radius: f64,
    approach_rate: f64,
    diagnostics: SimDiagnostics,
}

// Axis indices into 6-vectors.
const X: usize = 0;
const Y: usize = 1;
const Z: usize = 2;
const YAW: usize = 5;

impl<'a> Simulator<'a> {
    pub fn new(task: &'a TaskInstance) -> Self {
        Simulator {
            task,
            hole: HoleRegion::new(task.hole.clone()),
            peg_radius: task.peg.circumradius().max(1e-6),
            approach_rate: APPROACH_RATE,
            diagnostics: SimDiagnostics::default(),
        }
    }

    pub fn task(&self) -> &TaskInstance {
        self.task
    }

    pub fn diagnostics(&self) -> &SimDiagnostics {
        &self.diagnostics
    }

    /// Peg pose (world, planar) expressed in the true hole frame.
    fn to_hole(&self, p: &PlanarPose) -> PlanarPose {
        let h = &self.task.hole_pose_true;
        let (s, c) = h.yaw.sin_cos();
        let dx = p.x - h.x;
        let dy = p.y - h.y;
        PlanarPose::new(c * dx + s * dy, -s * dx + c * dy, wrap_angle(p.yaw - h.yaw))
    }

    fn from_hole(&self, p: &PlanarPose) -> PlanarPose {
        let h = &self.task.hole_pose_true;
        let (s, c) = h.yaw.sin_cos();
        PlanarPose::new(
            h.x + c * p.x - s * p.y,
            h.y + s * p.x + c * p.y,
            wrap_angle(p.yaw + h.yaw),
        )
    }

    /// Containment predicate for a world planar pose of the peg.
    pub fn fits(&self, p: &PlanarPose) -> bool {
        self.hole
            .contains(&self.task.peg, &self.to_hole(p), self.task.clearance)
    }

    /// Advances the state by `dt` seconds toward `desired` with stiffness `k`.
    pub fn step(
        &mut self,
        state: &RobotState,
        desired: &Pose,
        k: &Stiffness,
        dt: f64,
    ) -> Result<RobotState> {
        k.validate()?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "time step {dt} must be positive"
            )));
        }
        if !desired.is_finite() {
            return Err(Error::NonFinite(format!("desired pose {desired:?}")));
        }
        let alpha = (dt * self.approach_rate).min(1.0);
        let cur = state.pose;
        let kv = k.to_array();
        let toward = |axis: usize, c: f64, d: f64| {
            if kv[axis] > 0.0 {
                c + alpha * (d - c)
            } else {
                c
            }
        };

        let cand_lat = PlanarPose::new(
            toward(X, cur.x, desired.x),
            toward(Y, cur.y, desired.y),
            wrap_angle(toward(YAW, 0.0, wrap_angle(desired.yaw - cur.yaw)) + cur.yaw),
        );
        let cand_z = toward(Z, cur.z, desired.z);
        let surface = self.task.surface_z;
        let bottom = surface - self.task.success_depth;

        let mut constrained = [false; 6];
        let lateral;
        let mut z;

        if cur.z < surface {
            // Inside the hole: walls confine the planar pose.
            let from = cur.planar();
            z = cand_z;
            if self.fits(&cand_lat) {
                lateral = cand_lat;
            } else {
                lateral = self.confine(&from, &cand_lat);
                constrained[X] = true;
                constrained[Y] = true;
                constrained[YAW] = true;
                // Wall friction against the lateral springs can stall a
                // downward push.
                if cand_z < cur.z && self.jammed(&lateral, desired, k, cur.z) {
                    z = cur.z;
                    constrained[Z] = true;
                }
            }
        } else {
            z = cand_z;
            if cand_z < surface {
                if self.fits(&cand_lat) {
                    lateral = cand_lat;
                } else if let Some(aligned) = self.chamfer_capture(&cand_lat, desired, k) {
                    lateral = aligned;
                    constrained[X] = true;
                    constrained[Y] = true;
                    constrained[YAW] = true;
                } else {
                    // Resting on the surface: Coulomb friction under the press
                    // force holds the peg until the springs overcome it.
                    let press = k.kz * (surface - desired.z);
                    let hold = self.task.friction * press;
                    let spring = self.wall_force(&cur.planar(), desired, k);
                    lateral = if spring <= hold {
                        cur.planar()
                    } else {
                        let s = hold / spring;
                        PlanarPose::new(
                            toward(X, cur.x, desired.x - s * (desired.x - cur.x)),
                            toward(Y, cur.y, desired.y - s * (desired.y - cur.y)),
                            wrap_angle(
                                cur.yaw
                                    + toward(
                                        YAW,
                                        0.0,
                                        (1.0 - s) * wrap_angle(desired.yaw - cur.yaw),
                                    ),
                            ),
                        )
                    };
                    z = surface;
                    constrained[Z] = desired.z < surface;
                }
            } else {
                lateral = cand_lat;
            }
        }
        if z < bottom {
            z = bottom;
            constrained[Z] = desired.z < bottom;
        }

        let achieved = Pose::new(lateral.x, lateral.y, z, 0.0, 0.0, lateral.yaw);
        let deflection = deflection(&achieved, desired);
        let mut wrench = [0.0; 6];
        for axis in 0..6 {
            if constrained[axis] {
                wrench[axis] = kv[axis] * deflection[axis];
            }
        }

        self.diagnostics.steps += 1;
        if achieved.z < surface && !self.fits(&lateral) {
            self.diagnostics.tunneling_violations += 1;
        }
        if (0..6)
            .any(|a| constrained[a] && (wrench[a] - kv[a] * deflection[a]).abs() > WRENCH_TOLERANCE)
        {
            self.diagnostics.wrench_violations += 1;
        }

        Ok(RobotState {
            pose: achieved,
            sensed: Wrench::from_array(wrench),
            t: state.t + dt,
        })
    }

    /// Furthest point along `from → to` (planar) that still fits the hole.
    fn confine(&self, from: &PlanarPose, to: &PlanarPose) -> PlanarPose {
        let dyaw = wrap_angle(to.yaw - from.yaw);
        let at = |s: f64| {
            PlanarPose::new(
                from.x + s * (to.x - from.x),
                from.y + s * (to.y - from.y),
                wrap_angle(from.yaw + s * dyaw),
            )
        };
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            if self.fits(&at(mid)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        at(lo)
    }

    /// Spring force pressing the peg against the walls at `lateral`, with the
    /// yaw torque converted to a rim force.
    fn wall_force(&self, lateral: &PlanarPose, desired: &Pose, k: &Stiffness) -> f64 {
        (k.kx * (lateral.x - desired.x)).hypot(k.ky * (lateral.y - desired.y))
            + k.kyaw * wrap_angle(lateral.yaw - desired.yaw).abs() / self.peg_radius
    }

    fn jammed(&self, lateral: &PlanarPose, desired: &Pose, k: &Stiffness, z: f64) -> bool {
        let push = k.kz * (z - desired.z);
        self.task.friction * self.wall_force(lateral, desired, k) >= push
    }

    /// Lead-in alignment of a pressed, slightly misaligned peg.
    ///
    /// Finds the smallest correction toward exact alignment that makes the
    /// peg fit. The correction must lie within the chamfer, and the 45° lead-in
    /// turns the press force into the lateral force needed to hold the springs
    /// at the corrected pose.
    fn chamfer_capture(
        &self,
        lat: &PlanarPose,
        desired: &Pose,
        k: &Stiffness,
    ) -> Option<PlanarPose> {
        let chamfer = self.task.chamfer;
        if chamfer <= 0.0 {
            return None;
        }
        let rel = self.to_hole(lat);
        if rel.x.hypot(rel.y) > chamfer + self.task.clearance {
            return None;
        }
        let press = k.kz * (self.task.surface_z - desired.z);
        if press <= 0.0 {
            return None;
        }
        let at =
            |s: f64| PlanarPose::new(rel.x * (1.0 - s), rel.y * (1.0 - s), rel.yaw * (1.0 - s));
        let fits_rel = |p: &PlanarPose| self.hole.contains(&self.task.peg, p, self.task.clearance);
        if !fits_rel(&at(1.0)) {
            return None;
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            if fits_rel(&at(mid)) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let shift = (rel.x * hi).hypot(rel.y * hi);
        let turn = (rel.yaw * hi).abs();
        if shift > chamfer || turn * self.peg_radius > chamfer {
            return None;
        }
        let aligned = self.from_hole(&at(hi));
        (self.wall_force(&aligned, desired, k) <= press).then_some(aligned)
    }
}

/// `achieved − desired` per axis, angles wrapped.
fn deflection(achieved: &Pose, desired: &Pose) -> [f64; 6] {
    [
        achieved.x - desired.x,
        achieved.y - desired.y,
        achieved.z - desired.z,
        wrap_angle(achieved.roll - desired.roll),
        wrap_angle(achieved.pitch - desired.pitch),
        wrap_angle(achieved.yaw - desired.yaw),
    ]
}

/// One simulator step on a throwaway simulator.
pub fn step(
    state: &RobotState,
    desired: &Pose,
    k: &Stiffness,
    dt: f64,
    task: &TaskInstance,
) -> Result<RobotState> {
    Simulator::new(task).step(state, desired, k, dt)
}
