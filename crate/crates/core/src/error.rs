use alloc::string::String;
use alloc::vec::Vec;

use crate::model::Violation;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("time {t} outside the domain [{lo}, {hi}]")]
    Domain { t: f64, lo: f64, hi: f64 },

    #[error("structural mismatch: {0}")]
    Structure(String),

    #[error("impulse index {index} out of range 1..={count}")]
    Index { index: usize, count: usize },

    #[error("Picard iteration on segment {segment} did not converge in {iterations} iterations (last gap {gap:e})")]
    NonConvergence {
        segment: usize,
        iterations: usize,
        gap: f64,
    },

    #[error("maximal-solution sweep diverged after {sweeps} sweeps")]
    Divergence { sweeps: usize },

    #[error("problem violates {} standing assumption(s)", .0.len())]
    InvalidProblem(Vec<Violation>),

    #[error("parameter `{name}`: {reason}")]
    Parameter { name: String, reason: String },

    #[error("invalid setting `{name}`: {reason}")]
    Setting { name: &'static str, reason: String },
}
