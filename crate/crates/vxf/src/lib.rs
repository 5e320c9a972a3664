//! File formats, run manifests and the `vxf` command line on top of
//! [`vxf_core`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod io;
pub mod manifest;
pub mod report;

pub use cli::{run, RunReport};
pub use error::{CliError, CliResult};
