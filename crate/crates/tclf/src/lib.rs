//! File formats, ingestion and the `tclf` command-line pipeline built on
//! [`tclf_core`].

pub mod cli;
pub mod error;
pub mod formats;
pub mod ingest;
pub mod manifest;
pub mod model_file;
pub mod sst;
pub mod synth;

pub use error::{Error, Result};
