//! Build commands, HTTP API and one-shot queries over the topictrap core.
//!
//! The `topictrap` binary wires these modules to a command line; the
//! integration tests drive them directly.

pub mod api;
pub mod build;
pub mod config;
pub mod error;
pub mod server;
pub mod store;

pub use config::ServiceConfig;
pub use error::{Category, CliError};
