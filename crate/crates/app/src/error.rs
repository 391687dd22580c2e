use std::path::PathBuf;

use thiserror::Error;
use vofl_core::error::Error as CoreError;

use crate::config::ConfigError;
use crate::mesh_io::MeshError;
use crate::snapshot::SnapshotError;

#[derive(Debug, Error)]
pub enum AppError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Numerical(#[from] CoreError),
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("stimulus region selects no nodes")]
    EmptyStimulus,
    #[error("amplitude {upper} does not propagate to the probe; raise `threshold.upper`")]
    NoPropagation { upper: f64 },
}

impl AppError {
    /// 2 for anything the user fixes in the configuration or inputs, 3 for
    /// numerical failures, 1 for output problems.
    pub fn exit_code(&self) -> u8 {
        match self {
            AppError::Config(_) | AppError::Mesh(_) | AppError::EmptyStimulus | AppError::NoPropagation { .. } => 2,
            AppError::Numerical(e) => match e {
                CoreError::InvalidMesh(_)
                | CoreError::DegenerateElement { .. }
                | CoreError::NonPositiveMass { .. }
                | CoreError::InvalidParameter { .. }
                | CoreError::TooManyRegions { .. } => 2,
                _ => 3,
            },
            AppError::Snapshot(_) | AppError::Io { .. } => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, AppError>;
