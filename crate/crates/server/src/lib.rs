//! HTTP/JSON API and command-line front end over `synopsviz-core`.

pub mod api;
pub mod cache;
pub mod cli;
pub mod error;
pub mod registry;

pub use api::{router, AppState, ServerConfig};
pub use error::ApiError;
