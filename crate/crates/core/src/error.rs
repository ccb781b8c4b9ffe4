use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("lattice dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("site {site} has zero density")]
    ZeroDensity { site: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },

    #[error("payload is not unitary (deviation {deviation:.3e})")]
    NonUnitary { deviation: f64 },

    #[error("permutation payload is not a bijection")]
    NotBijective,

    #[error("gate is malformed for this layout: {0}")]
    MalformedGate(String),

    #[error("postselection impossible: probability {probability:.3e}")]
    PostselectionImpossible { probability: f64 },

    #[error("SVD did not converge")]
    SvdNonConvergence,

    #[error("initial distribution is identically zero")]
    ZeroField,

    #[error("malformed CSV at line {line}: {reason}")]
    Csv { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
