//! Experiments, file formats and property suites on top of `wks-core`.

pub mod commands;
pub mod config;
pub mod error;
pub mod instances;
pub mod seeding;
pub mod stats;
pub mod suites;
pub mod trace_io;

pub use error::{HarnessError, Result};
