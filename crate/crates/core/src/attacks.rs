//! Gradient-level adversaries: sign-flip model poisoning and noisy-gradient
//! injection. Attacks rewrite the raw local update before DP privatization.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::model::ModelVector;
use crate::rng::{stream_rng, Stream};

/// Which gradient attack active clients mount.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum AttackKind {
    #[default]
    None,
    /// Model poisoning: submit `-gamma * update`.
    Mpa,
    /// Noisy gradient: submit `update + sigma * N(0, I)`.
    Nga,
}

/// Attack settings for a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttackConfig {
    pub kind: AttackKind,
    /// Poisoning scale gamma.
    pub mpa_scale: f64,
    /// Injected noise scale sigma.
    pub nga_sigma: f64,
    /// Fraction of clients acting as attackers.
    pub attacker_fraction: f64,
}

impl Default for AttackConfig {
    fn default() -> Self {
        AttackConfig {
            kind: AttackKind::None,
            mpa_scale: 2.0,
            nga_sigma: 1.0,
            attacker_fraction: 0.1,
        }
    }
}

/// Inverts and scales an update: `-gamma * update`.
pub fn poison(update: &ModelVector, gamma: f64) -> ModelVector {
    update.scaled(-gamma)
}

/// Adds seeded `sigma * N(0, I)` noise to an update.
pub fn noisy(update: &ModelVector, sigma: f64, seed: u64) -> ModelVector {
    let mut rng = stream_rng(seed, Stream::Attack, 0, 0);
    let values = update
        .values
        .iter()
        .map(|v| {
            let n: f64 = StandardNormal.sample(&mut rng);
            v + sigma * n
        })
        .collect();
    ModelVector { values }
}

/// Applies the configured attack to one client's update.
pub fn apply(update: &ModelVector, config: &AttackConfig, seed: u64) -> ModelVector {
    match config.kind {
        AttackKind::None => update.clone(),
        AttackKind::Mpa => poison(update, config.mpa_scale),
        AttackKind::Nga => noisy(update, config.nga_sigma, seed),
    }
}
