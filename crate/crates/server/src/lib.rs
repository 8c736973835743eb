//! HTTP service over the newslens engine, plus the shared pieces of the
//! `newslens` command-line tool.

pub mod api;
pub mod config;
pub mod error;

pub use api::{router, AppState};
pub use config::{load_workbench, ServiceConfig};
