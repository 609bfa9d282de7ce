//! File formats, the parallel experiment runner and the command-line front
//! end for `riskflow-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod format;
pub mod io;
pub mod output;
pub mod runner;

pub use error::{Error, Result};
pub use riskflow_core as core;
