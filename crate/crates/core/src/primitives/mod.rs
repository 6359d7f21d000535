//! Parameterized insertion primitives and the executor that sequences them.

mod executor;
mod params;

pub use executor::{
    align_target, insertion_desired, interpolate, lissajous_pose, move_until_contact_exit,
    search_exit, Phase, PolicyExecutor, PrimitiveConstants,
};
pub use params::{ParamSpace, PrimitiveParams, PARAM_DIM, PARAM_NAMES};
