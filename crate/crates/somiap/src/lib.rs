//! IO and orchestration around `somiap-core`: image decoding, cascade model
//! files, the persistent place/face index, calibration and speed harnesses,
//! and the command-line interface.

pub mod cascade_xml;
pub mod cli;
pub mod decode;
pub mod error;
pub mod fetch;
pub mod harness;
pub mod manifest;
pub mod report;
pub mod synth;

pub use error::{Result, ToolError};
