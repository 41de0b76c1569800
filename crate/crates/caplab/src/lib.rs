//! Scenario runner, file formats and command-line front end for
//! [`caplab_core`].

pub mod config;
pub mod error;
pub mod io;
pub mod runner;

pub use config::Scenario;
pub use error::{Error, Result};
pub use runner::{run, Outcome, Report};
