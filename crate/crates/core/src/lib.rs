//! Deterministic multi-round reverse-auction simulator for mobile crowd
//! sensing incentives.
//!
//! Participants bid before performing a sensing task using an assumed cost,
//! revise their bids against noisy cost signals, and stay or leave based on
//! an EWMA-driven return on investment. Three mechanisms are provided:
//! assumed-bid-cost reverse auction (`RaAbc`), the same with Poisson dynamic
//! recruitment (`RaAbcDr`), and a Tullock lottery contest baseline.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bidding;
pub mod cli;
pub mod engagement;
pub mod error;
pub mod harness;
pub mod mechanisms;
pub mod metrics;
pub mod model;
pub mod rng;

pub use error::{Error, Result};
pub use harness::{derive_seed, run_experiment, ExperimentPlan, SweepAxis};
pub use mechanisms::MechanismEngine;
pub use metrics::MetricSeries;
pub use model::{Mechanism, Participant, RoundRecord, ScenarioConfig, Status};
pub use rng::SimRng;
