use thiserror::Error;

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("evaluation failed: non-finite value at coordinate {coord}")]
    Evaluation { coord: usize },
    #[error("non-finite gradient during {0}")]
    NonFiniteGradient(&'static str),
    #[error("capacity exceeded: dimension {dim} above cap {cap}")]
    Capacity { dim: usize, cap: usize },
    #[error("construction error: {0}")]
    Construction(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("inconsistent optimum: {0}")]
    Inconsistent(String),
    #[error("iteration {iter} is outside the schedule horizon {total}")]
    OutOfHorizon { iter: usize, total: usize },
    #[error("missing capability: {0}")]
    Capability(&'static str),
    #[error("sampler could not satisfy region constraints after {attempts} attempts: {region}")]
    Sampler { attempts: usize, region: String },
    #[error("fit error: {0}")]
    Fit(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

impl LabError {
    /// Prefixes config messages with the file they came from.
    pub fn in_file(self, path: &std::path::Path) -> Self {
        match self {
            LabError::Config(m) => LabError::Config(format!("{}: {m}", path.display())),
            other => other,
        }
    }
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

impl From<csv::Error> for LabError {
    fn from(e: csv::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for LabError {
    fn from(e: serde_json::Error) -> Self {
        LabError::Io(e.to_string())
    }
}
