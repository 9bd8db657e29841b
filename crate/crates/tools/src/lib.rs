//! File formats, canned experiments, reports and the `chanocc` command-line
//! front end for [`chanocc_core`].

pub use chanocc_core as core;

pub mod cli;
pub mod error;
pub mod io;
pub mod plot;
pub mod preset;
pub mod report;
pub mod run;
pub mod scenario;

pub use error::{Error, Result};
