//! Gaussian differential-privacy mechanism applied to client updates
//! before upload: clip to a sensitivity bound, then add calibrated noise.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelVector;
use crate::rng::{stream_rng, Stream};

/// Sanity cap on epsilon accepted by the calibration.
pub const DEFAULT_EPSILON_CAP: f64 = 50.0;

/// Per-client privacy parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyParams {
    /// Privacy budget epsilon.
    pub epsilon: f64,
    /// Failure probability delta, in (0, 1).
    pub delta: f64,
    /// L2 sensitivity bound applied before noising.
    pub clip_norm: f64,
}

impl PrivacyParams {
    pub fn validate(&self) -> Result<()> {
        if self.epsilon <= 0.0 {
            return Err(Error::config("epsilon must be positive"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::config("delta must lie in (0, 1)"));
        }
        if self.clip_norm <= 0.0 {
            return Err(Error::config("clip_norm must be positive"));
        }
        Ok(())
    }
}

/// Scales `update` by `min(1, clip_norm / ||update||)` so the output norm
/// never exceeds `clip_norm`.
pub fn clip(update: &ModelVector, clip_norm: f64) -> ModelVector {
    let norm = update.norm();
    if norm <= clip_norm || norm == 0.0 {
        update.clone()
    } else {
        update.scaled(clip_norm / norm)
    }
}

/// Classical (epsilon, delta) Gaussian-mechanism calibration:
/// `sigma = clip_norm * sqrt(2 ln(1.25/delta)) / epsilon`.
pub fn gaussian_noise_sigma(params: &PrivacyParams, epsilon_cap: f64) -> Result<f64> {
    params.validate()?;
    if params.epsilon > epsilon_cap {
        return Err(Error::config(format!(
            "epsilon {} exceeds the sanity cap {epsilon_cap}",
            params.epsilon
        )));
    }
    Ok(params.clip_norm * (2.0 * (1.25 / params.delta).ln()).sqrt() / params.epsilon)
}

/// Clips the update and adds seeded N(0, sigma^2 I) noise.
pub fn privatize(
    update: &ModelVector,
    params: &PrivacyParams,
    epsilon_cap: f64,
    seed: u64,
) -> Result<ModelVector> {
    let sigma = gaussian_noise_sigma(params, epsilon_cap)?;
    let clipped = clip(update, params.clip_norm);
    let mut rng = stream_rng(seed, Stream::Privacy, 0, 0);
    let values = clipped
        .values
        .iter()
        .map(|v| {
            let n: f64 = StandardNormal.sample(&mut rng);
            v + sigma * n
        })
        .collect();
    Ok(ModelVector { values })
}
