use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the planning pipeline.
///
/// Variants are grouped by the stage that raises them so that callers
/// (the CLI in particular) can map them onto exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{0}: input contains no points")]
    EmptyInput(PathBuf),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid model: {0}")]
    Model(String),

    #[error("no slices: slice spacing {delta_lambda} is not smaller than the vertical extent {extent}")]
    NoSlices { delta_lambda: f64, extent: f64 },

    #[error("spectral loop count {spectral} disagrees with component count {components}")]
    LoopCountMismatch { spectral: usize, components: usize },

    #[error("cannot form {k} clusters from {points} points")]
    TooManyClusters { k: usize, points: usize },

    #[error("offset loop needs at least 3 points, got {0}")]
    DegenerateLoop(usize),

    #[error("slice {slice}: {branches} branches but only {agents} agents")]
    NotEnoughAgents {
        slice: usize,
        branches: usize,
        agents: usize,
    },

    #[error("scheduling infeasible at slice {slice}, step {step}: agent {agent} has no waypoint farther than {d_s} m from agent {leader}")]
    SchedulingInfeasible {
        slice: usize,
        step: usize,
        agent: usize,
        leader: usize,
        d_s: f64,
    },

    #[error("transfer infeasible: clearance {clearance:.3} m < {d_s} m after {iterations} pushes")]
    TransferInfeasible {
        clearance: f64,
        d_s: f64,
        iterations: usize,
    },

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
