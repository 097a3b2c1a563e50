//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by game construction, policy algebra, solvers and IO.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid game spec: {0}")]
    InvalidSpec(String),

    #[error("illegal action {action} for player {player} at turn {turn}")]
    IllegalAction { player: usize, action: u8, turn: u8 },

    #[error("state is not terminal (turn {turn} of {num_cards})")]
    NotTerminal { turn: u8, num_cards: u8 },

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("invalid mixture weights: {0}")]
    InvalidMixture(String),

    #[error("game spec mismatch: {0}")]
    SpecMismatch(String),

    #[error("matrix is not antisymmetric: |U[{i}][{j}] + U[{j}][{i}]| = {delta}")]
    NotAntisymmetric { i: usize, j: usize, delta: f64 },

    #[error("solver failed to certify gap {gap} <= tolerance {tol}")]
    Convergence { gap: f64, tol: f64 },

    #[error("observation history is impossible under every opponent in the population")]
    ImpossibleEvidence,

    #[error("conditional policy store is empty")]
    EmptyStore,

    #[error("policy does not cover information state {0}")]
    MissingKey(String),

    #[error("game too large for brute-force enumeration: num_cards {num_cards} > {max}")]
    BruteForceTooLarge { num_cards: u8, max: u8 },

    #[error("checkpoint schema error: {0}")]
    Schema(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
