//! Config parsing and output writers. Mesh files are handled by
//! [`crate::mesh::load_mesh`].

pub mod config;
pub mod expr;
pub mod writers;

pub use config::{parse_config, parse_config_str, serialize_config, ConfigError, OutputFormat, RunConfig};
pub use writers::{write_diagnostics, write_snapshot, CellFields, WriteError};
