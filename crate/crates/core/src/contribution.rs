//! Server-side contribution scoring of client updates against the global
//! update direction: the update's norm weighted by a signed-squared cosine.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelVector;

/// Scalar contribution of one update, with the cosine it came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContributionScore {
    /// `||update|| * cos * |cos|`, signed.
    pub value: f64,
    /// Cosine similarity to the global direction, in [-1, 1].
    pub cosine: f64,
}

/// Coordinate-wise mean of the round's received updates.
pub fn global_direction(updates: &[ModelVector]) -> Result<ModelVector> {
    let first = updates
        .first()
        .ok_or_else(|| Error::protocol("no updates received this round"))?;
    let dim = first.dim();
    if updates.iter().any(|u| u.dim() != dim) {
        return Err(Error::protocol("updates have mismatched dimensions"));
    }
    let mut mean = vec![0.0; dim];
    for u in updates {
        for (m, v) in mean.iter_mut().zip(&u.values) {
            *m += v;
        }
    }
    let n = updates.len() as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    Ok(ModelVector { values: mean })
}

/// Scores one update against the global direction. A zero-norm update or
/// direction scores zero by convention.
pub fn score(update: &ModelVector, direction: &ModelVector) -> ContributionScore {
    let un = update.norm();
    let vn = direction.norm();
    if un == 0.0 || vn == 0.0 {
        return ContributionScore {
            value: 0.0,
            cosine: 0.0,
        };
    }
    let cosine = (update.dot(direction) / (un * vn)).clamp(-1.0, 1.0);
    ContributionScore {
        value: un * cosine * cosine.abs(),
        cosine,
    }
}
