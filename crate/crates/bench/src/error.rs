use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("config error in `{field}`: {msg}")]
    Config { field: &'static str, msg: String },

    #[error("degenerate filter at iteration {iteration}: {msg}")]
    DegenerateFilter { iteration: usize, msg: String },

    #[error(transparent)]
    Core(#[from] tsdf_mcl::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl BenchError {
    /// Process exit code: 1 for configuration problems, 2 for a collapsed filter.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::DegenerateFilter { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;
