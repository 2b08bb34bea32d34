//! Command-line front end: configuration, figure datasets and plot scripts.

pub mod args;
pub mod commands;
pub mod config;
pub mod figures;
pub mod plot;
pub mod table;

pub use commands::{run, Outcome};
pub use config::{Figure, Format, RunConfig, Task, UsageError};
pub use plot::emit_plot_script;

/// Exit status for flagged degenerate points without `--allow-degenerate`.
pub const EXIT_DEGENERATE: i32 = 3;
/// Exit status for usage and configuration errors.
pub const EXIT_USAGE: i32 = 2;
