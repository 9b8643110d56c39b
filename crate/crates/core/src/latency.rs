//! Latency generation for simulated clients and server-side inversion back
//! to effective resources.
//!
//! Observed latency is produced from the client's true capacity while the
//! expectation uses the reported one; the gap between the two is what
//! resource verification exploits.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::rng::{stream_rng, Stream};

/// Static compute characteristics of one client.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResourceProfile {
    /// MAC cost of one local update.
    pub rho: f64,
    /// Fixed per-round overhead, seconds.
    pub lambda_overhead: f64,
    /// True compute capacity, MAC/s.
    pub r_true: f64,
    /// Declared capacity, MAC/s. Equal to `r_true` for honest clients.
    pub r_reported: f64,
}

/// Latency implied by the client's declared resources.
pub fn expected_latency(p: &ResourceProfile) -> f64 {
    p.rho / p.r_reported + p.lambda_overhead
}

/// Latency the server actually observes: the true-capacity latency under
/// multiplicative Gaussian jitter, floored at 5% of the noiseless value.
pub fn observe_latency(p: &ResourceProfile, jitter_cv: f64, seed: u64) -> f64 {
    debug_assert!((0.0..0.5).contains(&jitter_cv));
    let base = p.rho / p.r_true + p.lambda_overhead;
    if jitter_cv == 0.0 {
        return base;
    }
    let mut rng = stream_rng(seed, Stream::Latency, 0, 0);
    let noise: f64 = StandardNormal.sample(&mut rng);
    (base * (1.0 + jitter_cv * noise)).max(0.05 * base)
}

/// Inverts the latency model to the capacity that explains an observation.
/// Observations at or below the overhead return infinity; the caller maps
/// that to disbelief.
pub fn infer_resources(observed: f64, p: &ResourceProfile) -> f64 {
    let compute = observed - p.lambda_overhead;
    if compute <= 0.0 {
        f64::INFINITY
    } else {
        p.rho / compute
    }
}
