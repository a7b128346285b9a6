use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("non-uniform sampling: step {index} is {found}, expected {expected}")]
    Sampling {
        index: usize,
        found: f64,
        expected: f64,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("evaluation of `{term}` failed: {reason}")]
    Evaluation { term: String, reason: String },

    #[error("singular basis evaluation at row {row}, column {column} (`{term}`)")]
    Singular {
        row: usize,
        column: usize,
        term: String,
    },

    #[error("simulation diverged at step {step}")]
    Divergence { step: usize },

    #[error("factorization failed after jitter escalation (last jitter {jitter:e})")]
    Factorization { jitter: f64 },

    #[error("degenerate fit: effective parameter count {gamma_sum} is not below sample count {samples}")]
    DegenerateFit { gamma_sum: f64, samples: usize },

    #[error("rank-deficient support (numerical rank {rank} of {size})")]
    RankDeficient { rank: usize, size: usize },

    #[error("hill parameters are not identifiable: {0}")]
    NonIdentifiable(String),

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("experiment failed: every round failed ({0})")]
    ExperimentFailed(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-greppable code of the form `module.operation`.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Parse { .. } => "timeseries.load_csv.parse",
            Error::Sampling { .. } => "timeseries.load_csv.sampling",
            Error::InsufficientData(_) => "timeseries.insufficient_data",
            Error::Invalid(_) => "input.invalid",
            Error::Evaluation { .. } => "simulator.eval_rhs",
            Error::Singular { .. } => "dictionary.build_design_matrix",
            Error::Divergence { .. } => "simulator.simulate_euler",
            Error::Factorization { .. } => "rvm.posterior",
            Error::DegenerateFit { .. } => "rvm.reestimate",
            Error::RankDeficient { .. } => "rvm.ls_on_support",
            Error::NonIdentifiable(_) => "dictionary.recover_hill_params",
            Error::BasisMismatch(_) => "pipeline.score_against_truth",
            Error::ExperimentFailed(_) => "benchmark.run_experiment",
            Error::Json(_) => "io.json",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
