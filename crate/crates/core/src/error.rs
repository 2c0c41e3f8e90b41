use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("model has no variables")]
    EmptyModel,

    #[error("duplicate name `{0}`")]
    DuplicateName(String),

    #[error("variable `{0}` has an empty domain")]
    EmptyDomain(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("value `{value}` is not in the domain of `{variable}`")]
    UnknownValue { variable: String, value: String },

    #[error("duplicate edge {parent} -> {child}")]
    DuplicateEdge { parent: String, child: String },

    #[error("graph contains a directed cycle through {0:?}")]
    CyclicGraph(Vec<String>),

    #[error("invalid CPT for `{variable}`: {reason}")]
    InvalidCpt { variable: String, reason: String },

    #[error("assignment does not cover variable `{0}`")]
    IncompleteAssignment(String),

    #[error("intervention must force at least one variable")]
    EmptyIntervention,

    #[error("variable `{0}` is assigned more than once")]
    DuplicateAssignment(String),

    #[error("evidence has probability zero")]
    ZeroProbabilityEvidence,

    #[error("invalid decision problem: {0}")]
    InvalidProblem(String),

    #[error("model family is empty")]
    EmptyFamily,

    #[error("heterogeneous model family: {0}")]
    HeterogeneousFamily(String),

    #[error("all weights are zero")]
    AllZeroWeights,

    #[error("expected {expected} weights, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("observation has zero likelihood under every model with positive weight")]
    ZeroTotalLikelihood,

    #[error("player `{player}` has no signal `{signal}`")]
    UnknownSignal { player: String, signal: String },

    #[error("unknown player `{0}`")]
    UnknownPlayer(String),

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("invalid action profile: {0}")]
    InvalidProfile(String),

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    #[error("episode failed at round {round}: {source}")]
    EpisodeFailed {
        round: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}
