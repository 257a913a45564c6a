use thiserror::Error;

use crate::iterate::SolveResult;
use crate::model::PropertyReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Parameters violate a structural requirement (N < 2, g <= 0, a <= 0, ...).
    #[error("structural parameter error: {0}")]
    Structural(String),

    #[error("radius {r} is outside the domain r >= 0")]
    Domain { r: f64 },

    /// The w-property check ran on parameters outside the sufficient window.
    /// The report is still attached so callers can inspect it.
    #[error("parameters lie outside the hierarchy window; w-property report is advisory only")]
    InvalidWindow { report: Box<PropertyReport> },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("non-finite value encountered in {context}")]
    NonFinite { context: &'static str },

    #[error("iterate f_{m} is non-positive at r = {r} (value {value})")]
    NonpositiveIterate { m: usize, r: f64, value: f64 },

    /// Origin normalization produced f_m(r_max) <= 0. `partial` holds the
    /// sequences up to and including iteration m when raised by `solve`.
    #[error("boundary breakdown at iteration {m}: f_m(r_max) = {f_far}")]
    BoundaryBreakdown {
        m: usize,
        f_far: f64,
        partial: Option<Box<SolveResult>>,
    },

    #[error("no convergence after {} iterations (last |dE| = {last_delta:e})", .partial.iterations_used)]
    NotConverged {
        last_delta: f64,
        partial: Box<SolveResult>,
    },

    #[error("overflow while forming {context}")]
    Overflow { context: &'static str },

    #[error("eigenvalue bisection could not bracket the ground state in [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("solve refused: parameters outside the hierarchy window (pass force to override)")]
    OutsideWindow,
}
