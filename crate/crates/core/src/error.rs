use num_complex::Complex64;
use thiserror::Error;

use crate::farey::FareyPair;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid order n = {0}: must be between 1 and 1000000")]
    InvalidOrder(u64),

    #[error("order n = {0} is not supported here (need n >= {1})")]
    UnsupportedOrder(u64, u64),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("parameter outside its domain: {0}")]
    Domain(String),

    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),

    #[error("degenerate polynomial: {0}")]
    DegeneratePolynomial(String),

    #[error("root finder did not converge after {iterations} iterations (residual {residual:e})")]
    ConvergenceFailure {
        iterations: usize,
        residual: f64,
        best: Vec<Complex64>,
    },

    #[error("path ambiguity on alpha interval [{lo}, {hi}]: refinement cap reached")]
    PathAmbiguity { lo: f64, hi: f64 },

    #[error("arc identification failed for {pair}: {detail}")]
    ArcIdentification { pair: FareyPair, detail: String },

    #[error("sector violation for {pair} at alpha = {alpha}: Arg/2pi = {turns}")]
    SectorViolation {
        pair: FareyPair,
        alpha: f64,
        turns: f64,
    },

    #[error("not a power pair: {0}")]
    NotAPowerPair(String),

    #[error("power map mismatch: {0}")]
    PowerMap(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("arc {pair}: {source}")]
    Arc {
        pair: FareyPair,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn for_pair(self, pair: FareyPair) -> Error {
        match self {
            e @ Error::Arc { .. } => e,
            e @ Error::ArcIdentification { .. } => e,
            e @ Error::SectorViolation { .. } => e,
            other => Error::Arc {
                pair,
                source: Box::new(other),
            },
        }
    }
}
