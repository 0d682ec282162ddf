use thiserror::Error;

/// Failures while reading or building a scenario.
#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario parse error in `{field}`: {message}")]
    Schema { field: String, message: String },
    #[error("scenario validation error: {0}")]
    Validation(String),
    #[error("malformed scenario document: {0}")]
    Json(#[from] serde_json::Error),
}

impl ScenarioError {
    pub(crate) fn schema(field: impl Into<String>, message: impl Into<String>) -> Self {
        ScenarioError::Schema {
            field: field.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded (all variables should be boxed)")]
    Unbounded,
    #[error("simplex did not terminate within {0} iterations")]
    IterationLimit(usize),
    #[error("linear program dimensions are inconsistent: {0}")]
    Dimension(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("unservable demand at node {} (player {player})", nodes.join(", "))]
    UnservableDemand { player: String, nodes: Vec<String> },
    #[error("internal LP failure: {0}")]
    Lp(LpError),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("player count {0} outside the supported range 1..=12")]
    PlayerCount(usize),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error("partition function has no entry for coalition {coalition} in partition {partition}")]
    MissingValue { coalition: String, partition: String },
    #[error("recursive core of residual game {0} is empty and the pessimistic fallback is disabled")]
    EmptyRecursiveCore(String),
}

/// Top-level error for the analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("export failed: {0}")]
    Export(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
