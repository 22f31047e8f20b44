//! File formats, experiment configuration and the benchmark runner behind
//! the `twinsvm` command.

pub mod config;
pub mod dataset;
pub mod error;
pub mod fixtures;
pub mod kv;
pub mod model_io;
pub mod report;
pub mod runner;

pub use error::{BenchError, ParseError, Result};
