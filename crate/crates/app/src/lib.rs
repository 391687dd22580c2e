//! Configuration, presets, mesh and snapshot IO, and the run loop behind the
//! `vofl` command.

pub mod config;
pub mod error;
pub mod mesh_io;
pub mod presets;
pub mod simulation;
pub mod snapshot;
pub mod threshold;

pub use config::{parse_config, SimulationConfig};
pub use error::{AppError, Result};
pub use simulation::{RunOptions, RunSummary, Simulation};
pub use threshold::find_diastolic_threshold;
