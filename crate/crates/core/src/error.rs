//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Scenario document could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// A scenario or option invariant is violated; names the constraint.
    #[error("invariant violated: {0}")]
    Invariant(String),

    /// Invalid or inconsistent geometry input.
    #[error("geometry error: {0}")]
    Geometry(String),

    /// Unknown preset name.
    #[error("unknown preset `{0}`; valid names: example1_empty, example1_lossy, example2_coated, example3_humps, example4_sweep")]
    UnknownPreset(String),

    /// Point location failed (outside the meshed domain).
    #[error("point ({0}, {1}) not found in mesh")]
    PointNotFound(f64, f64),

    /// Special function evaluation outside its supported domain.
    #[error("special function domain error: {0}")]
    SpecFun(String),

    /// Special function value exceeds the representable range.
    #[error("special function overflow: {0}")]
    Overflow(String),

    /// Linear system is singular to working precision.
    #[error("singular matrix: {0}")]
    Singular(String),

    /// Matrix/vector dimensions do not agree.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Quadrature degree not available.
    #[error("no quadrature rule of degree {0}")]
    Quadrature(usize),

    /// Adaptive loop cannot make progress (all indicators zero).
    #[error("stagnation at iteration {0}: no elements marked while tolerance unmet")]
    Stagnation(usize),

    /// Solver failure propagated from an adaptive iteration.
    #[error("iteration {iteration}: {source}")]
    AtIteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    /// PML parameter search exhausted its bounds.
    #[error("PML selection failed: cannot reach cap {0:.3e} within sigma0 <= 128 and rho <= 8R")]
    PmlSelection(f64),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Parse(_)
                | Error::Invariant(_)
                | Error::Geometry(_)
                | Error::UnknownPreset(_)
                | Error::Quadrature(_)
        )
    }
}
