//! Experiment driver for `dgsem-core`: problem definitions, spec files,
//! convergence and maximum-principle studies, CSV reports and the block
//! solver benchmark.

pub mod bench;
pub mod error;
pub mod experiments;
pub mod problems;
pub mod report;
pub mod spec;

pub use error::{HarnessError, Result};
