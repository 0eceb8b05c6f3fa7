//! File formats: PGM/PNG images, run configuration documents and sweep
//! manifests. Configuration and manifests are JSON.

pub mod config;
pub mod manifest;
pub mod pgm;
pub mod png;

pub use config::{read_config, write_config, InitialPoint, RunConfigDocument, RunConfigPatch};
pub use manifest::{read_manifest, write_manifest};
pub use pgm::{encode_pgm, write_pgm};
pub use png::write_png;
