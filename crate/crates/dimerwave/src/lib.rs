//! Acoustic bubble-dimer toolkit: layer potentials on sphere clusters,
//! hybridized Minnaert resonances, point-scatterer reduction, and
//! effective-medium dispersion for dilute dimer ensembles.
//!
//! Conventions fixed repo-wide:
//! - fundamental solution `G(x, k) = -exp(ik|x|) / (4π|x|)` (note the sign);
//! - complex spherical harmonics `Y_n^m`, orthonormal on the unit sphere,
//!   Condon-Shortley phase included;
//! - time dependence `exp(-iωt)`, so radiating waves carry `h_n^(1)`;
//! - surface densities live in the per-sphere `Y_n^m` coefficient basis.

pub mod basis;
pub mod foldy;
pub mod geom;
pub mod homogenize;
pub mod layerpot;
pub mod linalg;
pub mod quad;
pub mod resonance;
pub mod scatter;
pub mod specfun;

use thiserror::Error;

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex64;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {what}: {why}")]
    InvalidInput { what: &'static str, why: String },

    #[error("linear solve failed in {context}: {source}")]
    LinearSolve {
        context: &'static str,
        #[source]
        source: ndarray_linalg::error::LinalgError,
    },

    #[error("{context}: system numerically singular (relative smallest singular value {rcond:.2e})")]
    Singular { context: &'static str, rcond: f64 },

    #[error("root search did not converge after {iterations} iterations (last |f| = {residual:.2e})")]
    RootSearch { iterations: usize, residual: f64 },

    #[error("root search found coinciding roots near {omega} (guesses {guess1}, {guess2})")]
    RootCollision { omega: C64, guess1: C64, guess2: C64 },

    #[error("iterative solve stalled at relative residual {residual:.2e} after {iterations} iterations")]
    IterativeSolve { iterations: usize, residual: f64 },

    #[error("independent routes for {context} disagree: relative gap {gap:.2e}")]
    RouteMismatch { context: &'static str, gap: f64 },

    #[error("sampling failed: {0}")]
    Sampling(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("ensemble file parse error at line {line}: {message}")]
    EnsembleParse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(what: &'static str, why: impl Into<String>) -> Self {
        Error::InvalidInput { what, why: why.into() }
    }
}
