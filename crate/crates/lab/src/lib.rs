//! Command-line runs, verification suites and file formats built on
//! `thetalab-core`.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod output;
pub mod rng;
pub mod verify;

pub use error::{LabError, Result};
