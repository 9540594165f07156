use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("{path}:{line}: {msg}")]
    Param { path: String, line: usize, msg: String },
    #[error("scenario: {0}")]
    Scenario(String),
    #[error("invalid configuration: {0}")]
    Config(#[from] soar_core::Error),
    #[error("reading {path}: {source}")]
    Input { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("{path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("simulation failed: {0}")]
    Simulation(soar_core::Error),
    #[error("writing {path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },
}

impl SimError {
    /// 2 for bad inputs, 3 for failures while simulating or writing results.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Simulation(_) | SimError::Output { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
