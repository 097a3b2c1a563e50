//! Exact tabular population learning for imperfect-information goofspiel.
//!
//! The crate is organized bottom-up:
//!
//! - [`game`]: rules, information-state keys, state transitions.
//! - [`table`]: the precomputed joint-history arena and key tree.
//! - [`policy`]: tabular policies, mixtures, realization-equivalent
//!   aggregation, population snapshots.
//! - [`best_response`]: exact expected values, exact best responses, and a
//!   brute-force oracle for small games.
//! - [`nash`]: a dense simplex solver for two-player zero-sum matrix games.
//! - [`meta`]: payoff matrices, certified equilibria, the meta-graph of
//!   training priors, and effective-population bookkeeping.
//! - [`trainer`]: the population training loop and the conditional
//!   best-response store over the population simplex.
//! - [`posterior`]: exact Bayesian opponent identification from one seat's
//!   observations.
//! - [`eval`]: experiment harnesses (any-mixture returns, exploitability,
//!   relative population performance, divergence matrices) and CSV output.
//! - [`checkpoint`]: run configuration and atomic, schema-versioned
//!   persistence.
//! - [`rng`]: label-forked deterministic RNG streams.

pub mod best_response;
pub mod checkpoint;
pub mod error;
pub mod eval;
pub mod game;
pub mod meta;
pub mod nash;
pub mod policy;
pub mod posterior;
pub mod rng;
pub mod table;
pub mod trainer;

pub use best_response::{
    best_response_to_mixture, brute_force_best_response, exact_best_response, expected_value,
    mixture_best_response, mixture_value, MAX_BRUTE_FORCE_CARDS,
};
pub use checkpoint::{
    write_atomic, Checkpoint, EvalSettings, ExperimentConfig, DEFAULT_LEVELS, SCHEMA_VERSION,
};
pub use error::{Error, Result};
pub use eval::{
    any_mixture_csv, any_mixture_experiment, cross_payoff_matrix, entropy, exploitability,
    exploitability_csv, jsd, jsd_matrix, matrix_csv, posterior_weighted_csv,
    posterior_weighted_divergence, rollout_return, rpp, rpp_csv, sign_test_p_value, spearman,
    AnyMixtureReport, Candidate, DivergenceMatrix, EvalMode, LevelReport, PosteriorWeightedCurve,
    SampleRecord,
};
pub use game::{
    enumerate_infostates, new_game, CardSet, GameSpec, GameState, InfoStateKey, TieRule,
};
pub use meta::{
    eval_payoff_matrix, psro_nash_meta_graph, solve_zero_sum_nash, unique_rows, MetaGraph,
    NashCertificate, PayoffMatrix,
};
pub use nash::{solve_matrix_game, MatrixGameSolution};
pub use policy::{
    aggregate_mixture, own_reach_probs, point_matching_policy, random_policy,
    sacrifice_top_policy, uniform_random_policy, ActionDistribution, MixtureWeights,
    PopulationSnapshot, TabularPolicy,
};
pub use posterior::{
    consistent_opponent_sequences, opponent_likelihood, posterior_trace,
    simulate_posterior_episode, PosteriorState,
};
pub use rng::RngForge;
pub use table::GameTable;
pub use trainer::{
    abr_exact, abr_tabular_q, anchor_set, compositions, dirichlet_draw, final_gain,
    sample_opponent_prior, train, AbrKind, ConditionalPolicyStore, RoundRecord, TrainResult,
    TrainerConfig, NASH_TOL,
};
