use thiserror::Error;

/// Errors raised by the numerical and algebraic routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty generating functional")]
    EmptyGeneratingFunctional,

    #[error("cannot invert the zero series")]
    ZeroSeries,

    #[error("series known only down to u^{known}, but u^{needed} was requested")]
    InsufficientPrecision { known: i32, needed: i32 },

    #[error("matrix product over an empty list")]
    EmptyProduct,

    #[error("singular lattice state: v vanishes at site {site}")]
    SingularSite { site: usize },

    #[error("site index {site} out of range 1..={len}")]
    SiteOutOfRange { site: usize, len: usize },

    #[error("lattice needs at least {min} sites, got {got}")]
    TooFewSites { min: usize, got: usize },

    #[error("field arrays have mismatched lengths")]
    LengthMismatch,

    #[error("defect field X vanishes")]
    SingularDefect,

    #[error("defect at site {site} must satisfy 2 <= n <= N-1 (N = {len})")]
    DefectPlacement { site: usize, len: usize },

    #[error("r-matrix pole: sinh(lambda - mu) = 0")]
    RMatrixPole,

    #[error("unknown field reference `{0}`")]
    UnknownField(String),

    #[error("degenerate defect: D = 0")]
    DegenerateDefect,

    #[error("degenerate Backlund configuration: linear system for (Y, Z) is singular")]
    DegenerateConfiguration,

    #[error("monodromy overflow at x = {x}")]
    MonodromyOverflow { x: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("solution blew up at ({s}, {t})")]
    BlowUp { s: f64, t: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
