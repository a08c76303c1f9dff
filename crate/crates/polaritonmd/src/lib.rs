//! Spectral analysis, configuration, file formats and command
//! implementations on top of `polaritonmd-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;

pub use error::{Error, Result};
