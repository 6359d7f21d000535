//! Learning and adapting primitive-based insertion skills.
//!
//! The crate provides a quasi-static peg-in-hole simulator ([`sim`]), a
//! four-phase motion-primitive policy ([`primitives`]), a demonstration
//! likelihood objective built from a Gaussian mixture over consecutive states
//! ([`demo`]), Gaussian-process Bayesian optimization ([`bayesopt`]),
//! similarity-gated search-space transfer ([`transfer`]) on top of polygon
//! turning-function distances ([`geometry`]), and the experiment harness used
//! by the command-line tool ([`harness`]).

pub mod bayesopt;
pub mod demo;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod primitives;
pub mod seed;
pub mod sim;
pub mod transfer;

pub use error::{Error, Result};
