use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid task `{id}`: {reason}")]
    InvalidTask { id: String, reason: String },

    #[error("empty task set")]
    EmptyTaskSet,

    #[error("invalid analysis problem: {0}")]
    InvalidProblem(String),

    #[error("invalid k-point parameters: {0}")]
    InvalidParams(String),

    #[error("index order violated: {0}")]
    IndexOrderViolated(String),

    #[error("uniform bound violated: {0}")]
    UniformBoundViolated(String),

    #[error("degenerate ratio: {0}")]
    DegenerateRatio(String),

    #[error("constrained-deadline required: D_k = {deadline} > T_k = {period}")]
    ConstrainedDeadlineRequired { deadline: f64, period: f64 },

    #[error("effective execution time must be positive, got {0}")]
    NonPositiveWcet(f64),

    #[error("jitter ratio {0} is integral; use constant-inflation path")]
    IntegralJitter(f64),

    #[error("jitter missing for task `{0}`")]
    MissingJitter(String),

    #[error("inflation b = {0} cannot be combined with arrival jitter")]
    InflationWithJitter(f64),

    #[error("service curve must be reduced to identity before deriving parameters")]
    UnreducedService,

    #[error("invalid service curve: {0}")]
    InvalidService(String),

    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),

    #[error("preset `{preset}` requires config field `{field}`")]
    MissingConfig { preset: String, field: String },

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("task index {index} out of range for {len} tasks")]
    TaskIndex { index: usize, len: usize },

    #[error("implicit deadlines required: {0}")]
    ImplicitDeadlineRequired(String),

    #[error("infeasible generator spec: {0}")]
    InfeasibleSpec(String),

    #[error("malformed task set: {0}")]
    Parse(String),
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse(err.to_string())
    }
}
