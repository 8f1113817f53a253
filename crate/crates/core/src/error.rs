use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything that can go wrong between loading a network and writing a mapping.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed {what}: {message}")]
    Parse { what: String, message: String },

    #[error("invalid input: {0}")]
    Validation(#[from] ValidationError),

    #[error("infeasible mapping: {0}")]
    Infeasible(#[from] InfeasibleError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("duplicate neuron id {0}")]
    DuplicateNeuron(u64),
    #[error("synapse {src}->{dst} references unknown neuron id {missing}")]
    DanglingEndpoint { src: u64, dst: u64, missing: u64 },
    #[error("duplicate synapse {src}->{dst}")]
    DuplicateSynapse { src: u64, dst: u64 },
    #[error("self-loop synapse on neuron {0}")]
    SelfLoop(u64),
    #[error("synapse {src}->{dst} has non-finite weight")]
    NonFiniteWeight { src: u64, dst: u64 },
    #[error("input neuron {0} has incoming synapses")]
    InputWithFanIn(u64),
    #[error("spike trace references unknown neuron id {0}")]
    UnknownTraceNeuron(u64),
    #[error("duplicate timestamp {timestep} for neuron {neuron}")]
    DuplicateTimestamp { neuron: u64, timestep: u64 },
    #[error("invalid hardware configuration: {0}")]
    Hardware(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("inconsistent artifact: {0}")]
    Artifact(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InfeasibleError {
    #[error("neuron {neuron} has fan-in {fan_in}, above the crossbar limit {limit}")]
    FanInExceeded {
        neuron: usize,
        fan_in: usize,
        limit: usize,
    },
    #[error("{clusters} clusters do not fit on {tiles} tiles")]
    TooManyClusters { clusters: usize, tiles: usize },
    #[error("instance too large for exhaustive search: {size} > {limit}")]
    TooLarge { size: usize, limit: usize },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(what: impl Into<String>, message: impl ToString) -> Self {
        Error::Parse {
            what: what.into(),
            message: message.to_string(),
        }
    }

    /// Process exit code: 1 validation, 2 infeasible, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Validation(_) => 1,
            Error::Infeasible(_) => 2,
            Error::Io { .. } => 3,
        }
    }
}
