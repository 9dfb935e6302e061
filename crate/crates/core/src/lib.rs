//! Consensus-based distributed Nash-equilibrium seeking over directed graphs,
//! with pluggable event-triggered communication laws.
//!
//! Players run projected gradient play on their own action while keeping an
//! estimate of every other player's action. Estimates are exchanged over a
//! strongly connected digraph, but a player only broadcasts when its
//! triggering law fires. The stochastic law fires with a probability that
//! grows with the triggering function, which cuts the communication rate
//! compared with deterministic thresholds.
//!
//! The dynamics path (games, oracle, triggers, engine, metrics) is generic over
//! [`Scalar`]; spectral analysis of the graph and the convergence-bound report
//! run in `f64`.

pub mod bounds;
pub mod engine;
pub mod error;
pub mod game;
pub mod graph;
pub mod metrics;
pub mod oracle;
pub mod scalar;
pub mod scenario;
pub mod trigger;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use bounds::BoundsReport;
pub use engine::{EngineConfig, EngineState, RunOutput, Simulation, TriggerEvent};
pub use game::{ActionInterval, Game, GameConstants, GameSpec, QuadraticGame, SpectrumGame};
pub use graph::{DirectedGraph, LyapunovPair};
pub use metrics::{EnsembleMetrics, IntervalStats, RunMetrics};
pub use oracle::NeSolution;
pub use scenario::Scenario;
pub use trigger::{LawKind, TriggerContext, TriggerParams};

/// Double-precision aliases used by the CLI and most callers.
pub type Graph64 = DirectedGraph<f64>;
pub type GameSpec64 = GameSpec<f64>;
pub type TriggerParams64 = TriggerParams<f64>;
pub type EngineConfig64 = EngineConfig<f64>;
pub type Scenario64 = Scenario<f64>;
pub type RunOutput64 = RunOutput<f64>;

/// Single-precision aliases.
pub type Graph32 = DirectedGraph<f32>;
pub type GameSpec32 = GameSpec<f32>;
pub type Scenario32 = Scenario<f32>;
