//! Bayesian optimization with a Gaussian-process surrogate and expected
//! improvement, plus a random-search baseline behind the same interface.

mod acquisition;
mod design;
mod gp;
mod optimizer;

pub use acquisition::{expected_improvement, normal_cdf, normal_pdf};
pub use design::{denormalize, halton_design, normalize};
pub use gp::{lml_and_grad, matern52, GaussianProcess, GpFitOptions, GpHyperparameters};
pub use optimizer::{
    suggest_next, BayesOpt, BoConfig, EvalRecord, Evaluation, IterationRecord, Objective,
    OptRecord, Optimizer, OutputWarp, Proposal, RandomSearch,
};
