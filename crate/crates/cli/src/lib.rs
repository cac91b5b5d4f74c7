//! Command implementations behind the `familiar` binary: a WebSocket or stdio
//! session server, headless script replay, and config validation.

pub mod commands;
pub mod server;

pub use commands::{run_script, validate_file, CliError, RunOutput};
pub use server::{drive_session, router, serve, serve_stdio, ServeOptions};
