//! Configuration, experiment drivers and output writers behind the
//! `specstat` binary.

pub mod config;
pub mod error;
pub mod experiments;
pub mod props;
pub mod runner;
pub mod table;

pub use config::{parse_config, Kind, RunConfig};
pub use error::{CliError, CliResult, Issue};
pub use table::{Cell, Stamp, Table};
