//! Command-line front end: `fit` a CSV into a path document, `simulate` a
//! scenario grid, `serve` a document over HTTP.
//!
//! Exit codes: 0 success, 1 I/O or server failure, 2 malformed input (CSV,
//! scenario file, path document, flag values), 3 solver failure.

pub mod args;
pub mod commands;
pub mod server;

pub use args::{Cli, Command, FitArgs, Screen, ServeArgs, SimulateArgs};
pub use commands::{fit, run, simulate, CliError};
