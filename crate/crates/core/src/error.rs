use std::fmt;

use thiserror::Error;

/// Pipeline stage that raised an error.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Geometry,
    Partition,
    Trails,
    Assignment,
    AccessOpt,
    Routing,
    Pipeline,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Geometry => "geometry",
            Stage::Partition => "partition",
            Stage::Trails => "trails",
            Stage::Assignment => "assignment",
            Stage::AccessOpt => "access_opt",
            Stage::Routing => "routing",
            Stage::Pipeline => "pipeline",
        };
        f.write_str(name)
    }
}

/// One problem found while ingesting a map file.
#[derive(Clone, Debug, PartialEq)]
pub struct LoadIssue {
    /// Index of the offending feature, when the issue is tied to one.
    pub feature: Option<usize>,
    pub message: String,
}

impl fmt::Display for LoadIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.feature {
            Some(i) => write!(f, "feature {i}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{stage}: infeasible: {constraint}")]
    Infeasible { stage: Stage, constraint: String },

    #[error("map load failed: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Load(Vec<LoadIssue>),

    #[error("input error: {0}")]
    Input(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn infeasible(stage: Stage, constraint: impl Into<String>) -> Self {
        Error::Infeasible {
            stage,
            constraint: constraint.into(),
        }
    }

    pub fn geometry(msg: impl Into<String>) -> Self {
        Error::InvalidGeometry(msg.into())
    }

    pub fn argument(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Process exit code for the CLI: 2 for infeasible missions, 3 for bad input.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Infeasible { .. } => 2,
            _ => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
