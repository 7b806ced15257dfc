//! Repeated two-player games between scripted or LLM-backed agents, with
//! bias and consistency metrics over the recorded decisions.

pub mod agent;
pub mod analytics;
pub mod campaign;
pub mod config;
pub mod engine;
pub mod numfmt;
pub mod payoff;
pub mod scalar;
pub mod seed;
pub mod template;
pub mod validation;

pub use scalar::Scalar;

pub type PayoffMatrix = payoff::PayoffMatrix<f64>;
pub type PayoffMatrixF32 = payoff::PayoffMatrix<f32>;
pub type Scorecard = analytics::Scorecard<f64>;
pub type ScorecardF32 = analytics::Scorecard<f32>;
pub type AggregateCell = analytics::AggregateCell<f64>;
pub type AggregateCellF32 = analytics::AggregateCell<f32>;
