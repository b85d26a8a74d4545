//! File formats, run configuration and the command-line front end for
//! `tunnelsense-core`.

// `!(x > 0.0)` guards double as NaN rejection.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod commands;
pub mod config;
pub mod csvio;
pub mod error;
pub mod iqfile;

pub use error::{Error, Result};
