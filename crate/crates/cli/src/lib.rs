//! Configuration, persistence and orchestration around `inlslab-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analyze;
pub mod campaign;
pub mod config;
pub mod experiment;
pub mod ground_state;
pub mod io;
pub mod sweep;

pub use config::{load_config, RunConfig};
pub use experiment::{exit_code, run_experiment};
