//! Round-synchronous federated-learning simulator built around MURIM, a
//! multidimensional reputation-based incentive mechanism.
//!
//! Each round, clients train locally, optionally attack their own update,
//! privatize it with the Gaussian mechanism, and upload. The server scores
//! contributions against the mean update direction, verifies resource
//! reports through latency inversion and privacy behavior through IQR
//! outlier detection, fuses the evidence into subjective-logic reliability
//! opinions, drops clients below a reliability threshold, aggregates the
//! survivors with the Subspace Leverage Equalizer (or a FedAvg mean), and
//! pays reliability-weighted incentives.

pub mod attacks;
pub mod contribution;
pub mod dp;
pub mod error;
pub mod incentive;
pub mod latency;
pub mod model;
pub mod report;
pub mod reputation;
pub mod rng;
pub mod simulator;
pub mod sle;

pub use error::{Error, Result};
pub use model::{Dataset, ModelVector, PartitionMode};
pub use simulator::{RoundRecord, RunConfig, RunOutput, RunSummary};
