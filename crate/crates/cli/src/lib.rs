//! Command-line front end for `etacert`.
//!
//! Exit codes: 0 success or verified, 1 error, 2 counterexample,
//! 3 indeterminate, 4 certification stopped early (resumable).

pub mod commands;
pub mod output;

pub use commands::{run, Cli};
