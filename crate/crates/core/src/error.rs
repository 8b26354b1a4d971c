use std::path::PathBuf;

/// Errors raised anywhere in the identification pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("schema error: missing or unknown channel {channel}")]
    Schema { channel: String },

    #[error("format error: {0}")]
    Format(String),

    #[error("gap error: channel {channel} has no sample between t={start} s and t={end} s")]
    Gap {
        channel: String,
        start: f64,
        end: f64,
    },

    #[error("invalid segment: {0}")]
    InvalidSegment(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("singular model: {0}")]
    SingularModel(String),

    #[error("step {step} failed: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("degenerate mean: |mean| = {mean_abs:e} is too close to zero")]
    DegenerateMean { mean_abs: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::Numeric(_) | Error::SingularModel(_) | Error::DegenerateMean { .. } => true,
            Error::Step { source, .. } => source.is_numeric(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
