//! File formats, run configuration and command-line front end for the gated
//! CHSH toolkit in [`bellgate_core`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod formats;
pub mod report;

pub use bellgate_core as core;
pub use error::CliError;
