//! Solvers and simulators for repeated decision problems in which an action's
//! stage payoff decays linearly in the action's historical frequency.
//!
//! A decision maker repeatedly picks one of finitely many actions; choosing
//! `a` at period `t` pays `(1 - gamma * phi(a | h^{t-1})) * u(a)`, where
//! `phi` is the empirical frequency of `a` so far and `gamma` in (0, 1] is
//! the fatigue factor. The crate computes:
//!
//! - optimal stationary frequencies and their limit value `V*`
//!   ([`stationary`]), plus greedy fixed points and fatigue comparative
//!   statics;
//! - exact finite-horizon optima `v^T` by dynamic programming on the count
//!   lattice ([`horizon`]), with a brute-force oracle and convergence
//!   diagnostics;
//! - history generators, block statistics, and certified pairwise-swap
//!   improvements ([`trajectories`]);
//! - empirical liminf/limsup diagnostics of average-utility traces
//!   ([`model`]);
//! - dual-discounted valuations with recency-weighted frequencies and
//!   bracketed search for their optimum ([`discounted`]).
//!
//! All numeric code is generic over the scalar type via [`real::Real`];
//! `f64` is the default parameter everywhere and the aliases below pin the
//! common instantiations.

pub mod discounted;
pub mod horizon;
pub mod model;
pub mod real;
pub mod stationary;
pub mod trajectories;

pub use model::{FrequencyVector, History, ProblemSpec};
pub use real::Real;

/// `f64` instantiations of the core types.
pub type Spec = model::ProblemSpec<f64>;
pub type Frequencies = model::FrequencyVector<f64>;
pub type Trace = model::UtilityTrace<f64>;

/// `f32` instantiations, for callers trading precision for footprint.
pub type Spec32 = model::ProblemSpec<f32>;
pub type Frequencies32 = model::FrequencyVector<f32>;
pub type Trace32 = model::UtilityTrace<f32>;
