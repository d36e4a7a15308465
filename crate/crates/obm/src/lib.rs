//! Online bipartite matching on degree-bounded graphs.
//!
//! A `(k,d)`-bounded instance has every offline server adjacent to at least
//! `k` online requests and every request adjacent to at most `d` servers.
//! This crate bundles everything needed to study the classic online matching
//! algorithms in that regime:
//!
//! - [`instance`]: the instance data model, validation, and the offline
//!   optimum (maximum matching) used as the competitive-ratio denominator;
//! - [`generators`]: the hard instance families (layered RANKING adversaries,
//!   the two-phase adversary for all randomized algorithms, cycles, ...);
//! - [`engines`]: executable online algorithms — RANKING, the OCS-based
//!   weighted-selection algorithm, Random, and Greedy;
//! - [`candidate`]: candidate functions for the OCS analysis, the optimal
//!   recurrence, feasibility verification, and the certified lower-bound
//!   series `g_d`;
//! - [`exact`]: exact-expectation oracles (permutation enumeration for
//!   RANKING, subset DP for OCS, the Markov-chain expectation for the
//!   layered adversary);
//! - [`analysis`]: closed-form competitive-ratio bounds and comparison
//!   tables;
//! - [`sim`]: a reproducible Monte-Carlo harness with shared-seed
//!   comparisons.

pub mod analysis;
pub mod candidate;
pub mod engines;
pub mod exact;
pub mod generators;
pub mod instance;
pub mod rational;
pub mod sim;

pub use instance::{offline_optimum, validate_instance, Instance, MatchingOutcome};
pub use rational::Ratio;

use std::fmt;

/// Crate-wide error type.
#[derive(Debug)]
pub enum Error {
    /// A parameter violated an operation's precondition.
    InvalidParam(String),
    /// An enumeration or DP exceeded its configured budget.
    BudgetExceeded(String),
    /// A candidate function is not tabulated far enough for the instance.
    TabulationTooShort { needed: usize, have: usize },
    /// A rank assignment does not match the instance's server count.
    PermutationMismatch { expected: usize, got: usize },
    Io(std::io::Error),
    Json(serde_json::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParam(msg) => write!(f, "invalid parameter: {msg}"),
            Error::BudgetExceeded(msg) => write!(f, "budget exceeded: {msg}"),
            Error::TabulationTooShort { needed, have } => write!(
                f,
                "candidate function tabulated to {have} levels, instance needs {needed}"
            ),
            Error::PermutationMismatch { expected, got } => {
                write!(f, "rank permutation has length {got}, expected {expected}")
            }
            Error::Io(e) => write!(f, "io error: {e}"),
            Error::Json(e) => write!(f, "json error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            Error::Json(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e)
    }
}

/// Shorthand used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
