//! Data pipeline, file formats and command line built on `qmlids-core`.

pub mod cli;
pub mod config;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod formats;
pub mod ingest;
pub mod manifest;
pub mod pipeline;
pub mod preprocess;
pub mod report;
pub mod synth;

pub use dataset::Dataset;
pub use error::{Error, Result};
