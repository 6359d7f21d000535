//! Demonstrations and the likelihood objective learned from them.

mod features;
mod gmm;
mod likelihood;
mod objective;
mod oracle;

pub use features::{
    demonstration_pairs, Demonstration, StateFeatures, ANGLE_UNIT, FORCE_UNIT, POSITION_UNIT,
};
pub use gmm::{fit_gmm, normal_log_pdf, EmOptions, FitReport, Gaussian, Gmm, GmmFile};
pub use likelihood::{
    fit_transition_gmm, traj_log_likelihood, transition_pairs, ConditionalComponent,
    LikelihoodAccumulator, PairFloors, TransitionModel, WeightMode,
};
pub use objective::{ObjectiveMode, TrajectoryObjective, DEFAULT_BONUS, J_FAIL};
pub use oracle::{oracle_demonstrate, OracleConfig, OraclePolicy};
