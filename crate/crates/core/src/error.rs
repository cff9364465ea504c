use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Document does not match the instance schema.
    #[error("schema error at {location}: {message}")]
    Schema { location: String, message: String },
    /// A type invariant failed during validation.
    #[error("invalid instance ({subject}): {message}")]
    Invariant { subject: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("model error: {0}")]
    Model(String),
    #[error("solver failed with status {status:?}")]
    Solver { status: crate::conic::Status },
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("enumeration cap exceeded: {0}")]
    EnumerationCap(String),
    #[error("unknown constraint group '{0}'")]
    UnknownGroup(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn schema(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema { location: location.into(), message: message.into() }
    }

    pub(crate) fn invariant(subject: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Invariant { subject: subject.into(), message: message.into() }
    }
}
