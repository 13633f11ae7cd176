//! Parser, experiment configuration and command dispatch.

pub mod config;
pub mod parse;
pub mod run;

pub use config::{Command, ExperimentConfig};
pub use parse::{parse_expr, parse_lefun, print_lefun, ParseError};
pub use run::{run, Format, Outcome, RunError};
