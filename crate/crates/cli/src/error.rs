use std::path::PathBuf;

use fracflow::flow::FlowError;
use fracflow::geometry::io::FixtureError;
use fracflow::geometry::GeometryError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// The scenario or an input file does not match its schema.
    #[error("schema: {0}")]
    Schema(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("i/o on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// Verification ran to completion but some checks failed.
    #[error("{0} check(s) failed")]
    Failed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Schema(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

impl From<FlowError> for CliError {
    fn from(e: FlowError) -> Self {
        match e {
            FlowError::InvalidConfig(_) | FlowError::Cfl { .. } | FlowError::Shape(_) => CliError::Schema(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        match e {
            GeometryError::InvalidChart(_) | GeometryError::FieldSize { .. } => CliError::Schema(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<FixtureError> for CliError {
    fn from(e: FixtureError) -> Self {
        CliError::Schema(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
