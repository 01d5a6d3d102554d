use thiserror::Error;

/// Errors raised by the analysis pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    #[error("evaluation not supported: {0}")]
    Unsupported(String),

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("segment too short for a slope fit: {len} points (need at least 3)")]
    InsufficientSegment { len: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },

    #[error("i/o error on {path}: {msg}")]
    Io { path: String, msg: String },

    #[error("report failed validation: {0}")]
    Report(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::ParameterDomain(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::DegenerateSample(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Tags an error with the pipeline stage that produced it.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage { stage, source: Box::new(self) }
    }

    /// The innermost error, with stage tags stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    /// Process exit status: 2 for configuration, 3 for input data, 4 for
    /// failures during computation.
    pub fn exit_code(&self) -> i32 {
        if let Error::Stage { stage: "configuration", .. } = self {
            return 2;
        }
        match self.root() {
            Error::Config(_) | Error::ParameterDomain(_) | Error::Unsupported(_) => 2,
            Error::Parse { .. } | Error::Io { .. } | Error::InsufficientData(_) => 3,
            _ => 4,
        }
    }
}
