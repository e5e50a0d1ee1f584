//! Files, parallel drivers and reports around `pcqa-core`: PLY input and
//! output, PNG snapshot export, JSON score records, distortion spec files
//! and manifests, and benchmark ingestion and reporting.

pub mod bench;
pub mod config;
pub mod distort;
mod error;
pub mod ply;
pub mod score;
pub mod snapshot;

pub use error::{Error, Location, Result};
pub use pcqa_core as core;
