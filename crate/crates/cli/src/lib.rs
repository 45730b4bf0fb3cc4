//! Ingestion, file formats and the batch command line for `emdx-core`.

pub mod cli;
pub mod config;
mod error;
pub mod export;
pub mod ingest;
pub mod pipeline;

pub use config::{RunConfig, Transform};
pub use error::{Error, Result};
