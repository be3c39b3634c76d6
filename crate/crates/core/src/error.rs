use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid variable `{name}`: {reason}")]
    InvalidVariable { name: String, reason: String },

    #[error("factor construction failed: {0}")]
    Construction(String),

    #[error("variable `{name}` appears with conflicting state lists")]
    ScopeConflict { name: String },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("unknown state `{state}` for variable `{variable}` (legal states: {legal})")]
    UnknownState {
        variable: String,
        state: String,
        legal: String,
    },

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("degenerate distribution: {0}")]
    Degenerate(String),

    #[error("impossible evidence {{{evidence}}}: posterior mass is zero")]
    ImpossibleEvidence { evidence: String },

    #[error("graph contains a directed cycle through {0}")]
    Cycle(String),

    #[error("network structure error: {0}")]
    Structure(String),

    #[error("invalid CPT for `{variable}`: {reason}")]
    InvalidCpt { variable: String, reason: String },

    #[error("conditional p(R | {cell}) is undefined: cell has no exposures and alpha = 0")]
    UndefinedConditional { cell: String },

    #[error("invalid trip legs: {0}")]
    Leg(String),

    #[error("risk ratio undefined: {0}")]
    Ratio(String),

    #[error("division by zero: {0}")]
    Division(String),

    #[error("invalid bucket maps: {0}")]
    Buckets(String),

    #[error("invalid schedule: {0}")]
    Schedule(String),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("inconsistent data: {0}")]
    Inconsistent(String),

    #[error("calibration failed:\n{0}")]
    Calibration(String),

    #[error("model file schema: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
