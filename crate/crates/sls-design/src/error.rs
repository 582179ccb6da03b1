use thiserror::Error;

/// Errors shared across the space, information, solver and construction modules.
#[derive(Debug, Error)]
pub enum Error {
    /// Requested dimension is outside the enumerable range.
    #[error("dimension q={q} outside supported range [{min}, {max}]")]
    Capacity { q: usize, min: usize, max: usize },

    /// A design measure violates nonnegativity or normalization.
    #[error("invalid design measure: {0}")]
    InvalidMeasure(String),

    /// Inputs outside an operation's domain.
    #[error("{0}")]
    Domain(String),

    /// Central moments describe a distribution whose asymmetry parameter
    /// falls outside [0, 1).
    #[error("degenerate error moments: asymmetry parameter t={t} not in [0, 1)")]
    DegenerateMoments { t: f64 },

    /// The information matrix is singular where a nonsingular one is required.
    #[error("singular information matrix")]
    SingularInformation,

    /// No implemented Hadamard construction covers the requested order.
    #[error("no supported Hadamard construction of order {0}")]
    UnsupportedOrder(usize),

    /// A combinatorial construction failed its certification gate.
    #[error("block design construction failed: {0}")]
    Construction(String),
}

pub type Result<T> = std::result::Result<T, Error>;
