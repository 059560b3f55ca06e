//! Exact and numerical machinery for deciding whether the field `F_{q^m}`
//! contains a primitive pair `(α, f(α))` avoiding a system of `F_q`-affine
//! hyperplanes in general position, where `f` is a fixed quadratic.
//!
//! The crate is organized around six subsystems:
//!
//! - [`numtheory`]: integer factorization of `q^m − 1`, arithmetic functions
//!   (`μ`, `φ`, `θ`, `W`), and the squarefree-divisor growth bound.
//! - [`finitefield`]: exact arithmetic in the tower `F_p ⊂ F_q ⊂ F_{q^m}`,
//!   element orders, primitivity, discrete logs.
//! - [`hyperplane`]: hyperplane systems in general position, coordinates,
//!   and the avoiding set `S_c^*`.
//! - [`characters`]: multiplicative characters, the characteristic functions
//!   of primitive / e-free elements, pair counting by character sums, and
//!   numerical audits of every character-sum bound the criteria rest on.
//! - [`criteria`]: the exact base inequality, the prime-sieve inequality with
//!   automatic plan search, asymptotic thresholds, and `(q, m)` classification.
//! - [`search`]: brute-force enumeration over `S_c^*` with witness replay and
//!   deterministic parallel partitioning.
//!
//! The [`cli`] module wires everything into batch subcommands with
//! deterministic JSON reports; [`report`] holds the report plumbing.

pub mod bigfloat;
pub mod characters;
pub mod cli;
pub mod criteria;
pub mod finitefield;
pub mod hyperplane;
pub mod numtheory;
pub mod report;
pub mod search;

mod poly;

/// Crate-wide error type. Refusals are always explicit: budget limits,
/// precondition violations and malformed inputs never degrade silently.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
    pub(crate) fn budget(msg: impl Into<String>) -> Self {
        Error::Budget(msg.into())
    }
}
