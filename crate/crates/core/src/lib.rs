//! Monte Carlo evaluation of physical-layer channel-based authentication.
//!
//! Bob compares the channel estimate of each incoming packet against a
//! reference obtained during a trusted setup phase. A forging Eve, who
//! observes correlated channels, tries to synthesise an estimate that
//! passes. The crate provides the channel model, Bob's detectors (the
//! LLR test, a combined LLR/modulus test and one-class nearest-neighbour
//! classifiers), Eve's attacks, and the Monte Carlo machinery that turns
//! a [`Scenario`] into false-alarm and missed-detection rates.

// `!(x > 0.0)` checks are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attacks;
pub mod channel;
pub mod config;
pub mod detectors;
pub mod error;
pub mod experiments;
pub mod montecarlo;
pub mod ocnn;
pub mod report;
pub mod rng;
pub mod stats;

pub use attacks::AttackStrategy;
pub use channel::{Hypothesis, SystemParams};
pub use detectors::{BobModel, CombinedRule, DecisionRule, LlrRule};
pub use error::{Error, Result};
pub use experiments::{run_scenario, sweep, ErrorRates, Scenario};
pub use ocnn::{OcnnModel, OcnnVariant};
pub use rng::StreamKey;
pub use stats::{ComplexVector, RateEstimate};
