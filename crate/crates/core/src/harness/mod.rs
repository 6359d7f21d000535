//! Experiment orchestration: the benchmark tasks, the learning and
//! leave-one-out transfer grids, and their result tables.
//!
//! Seeds fan out from a master seed by label (`demo/<task>`, `gmm/<task>`,
//! `learn/<task>`, `transfer/<task>`, `evaluate/<task>`), so any cell can be
//! rerun on its own and reproduce the grid's numbers.

mod config;
mod experiment;
mod results;
mod tasks;

pub use config::ExperimentConfig;
pub use experiment::{
    learning_grid, transfer_grid, CellOutcome, EvalSummary, GridOutcome, Harness, OutputLayout,
};
pub use results::{Method, ResultRow, ResultTable, CSV_HEADER};
pub use tasks::{shape_library, task_library, CLEARANCE, TASK_NAMES};
