use thiserror::Error;

/// Error categories map one-to-one onto CLI exit codes:
/// schema = 2, domain = 3, resolution = 4 (usage errors are the CLI's own).
#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a mathematical precondition (off-manifold point,
    /// nonpositive radius, mismatched grids, antipodal geodesic, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed or inconsistent serialized data.
    #[error("schema error: {0}")]
    Schema(String),

    /// A requested scale is finer than the discrete model can resolve
    /// (cutoff below grid scale, misaligned dyadic level, h_fine too coarse).
    #[error("resolution error: {0}")]
    Resolution(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn schema(msg: impl Into<String>) -> Self {
        Error::Schema(msg.into())
    }

    pub fn resolution(msg: impl Into<String>) -> Self {
        Error::Resolution(msg.into())
    }

    /// Machine-readable error category, also used as the CLI exit code.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Schema(_) => 2,
            Error::Domain(_) => 3,
            Error::Resolution(_) => 4,
        }
    }

    pub fn category(&self) -> &'static str {
        match self {
            Error::Schema(_) => "schema",
            Error::Domain(_) => "domain",
            Error::Resolution(_) => "resolution",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
