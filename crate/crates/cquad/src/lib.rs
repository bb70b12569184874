//! Convergence studies, report formats and the `cquad` command-line tool on
//! top of [`cquad_core`].

pub use cquad_core as core;

pub mod experiment;
pub mod harness;
pub mod report;
