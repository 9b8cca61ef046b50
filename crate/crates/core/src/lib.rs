//! Optimistic Bayesian exploration for stochastic bandits and bilinear
//! saddle-point problems.
//!
//! The central object is the optimism map: a concave function on the
//! probability simplex that upper-bounds the posterior expected optimal
//! value for every policy in the optimistic set. Maximizing it yields the
//! variational Bayesian optimistic sampling (VBOS) policy.

pub mod agents;
pub mod environments;
pub mod error;
pub mod lp;
pub mod matrix;
pub mod optimism;
pub mod posteriors;
pub mod rng;
pub mod saddle;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use optimism::{
    KLearningSolution, McEstimate, Membership, OptimismEvaluation, Policy, SolverConfig, VbosSolution,
};
pub use posteriors::{
    Belief, CellPosterior, GaussianPosterior, PosteriorMatrix, RateBonus, ScalarLaw, TwoPointLaw,
    TwoPointPosterior,
};
pub use rng::RngStream;
pub use agents::{act, observe, AgentKind, AgentSpec, AgentState, Beliefs, Decision, Observation};
pub use environments::{Environment, Opponent, Transcript};
pub use saddle::{DualSet, SaddleProblem, SaddleSolution};
