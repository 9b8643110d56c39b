//! Reward and utility computation: incentives combine contribution,
//! inverse latency, and a sigmoid-gated reliability term; utility nets the
//! incentive against normalized resource expenditure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weights and shape parameters of the incentive function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IncentiveParams {
    pub w_contribution: f64,
    pub w_latency: f64,
    pub w_reliability: f64,
    /// Sigmoid midpoint of the reliability transition.
    pub r0: f64,
    /// Sigmoid scale of the reliability transition.
    pub s: f64,
    /// Reliability exponent.
    pub zeta: f64,
    /// Normalizer between incentive and MAC-level resource cost. `None`
    /// auto-calibrates to the largest first-round resource report.
    pub omega: Option<f64>,
}

impl Default for IncentiveParams {
    fn default() -> Self {
        IncentiveParams {
            w_contribution: 1.0,
            w_latency: 1.0,
            w_reliability: 1.0,
            r0: 0.5,
            s: 0.1,
            zeta: 2.0,
            omega: None,
        }
    }
}

impl IncentiveParams {
    pub fn validate(&self) -> Result<()> {
        if self.s <= 0.0 {
            return Err(Error::config("incentive.s must be positive"));
        }
        if self.zeta <= 0.0 {
            return Err(Error::config("incentive.zeta must be positive"));
        }
        if let Some(omega) = self.omega {
            if omega <= 0.0 {
                return Err(Error::config("incentive.omega must be positive"));
            }
        }
        if self.w_contribution < 0.0 || self.w_latency < 0.0 || self.w_reliability < 0.0 {
            return Err(Error::config("incentive weights must be nonnegative"));
        }
        if !(0.0..=1.0).contains(&self.r0) {
            return Err(Error::config("incentive.r0 must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Per-client payment for one round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Payment {
    pub incentive: f64,
    pub utility: f64,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Incentive for one client-round:
/// contribution term + inverse-latency term + sigmoid-gated reliability term.
pub fn incentive(
    c_score: f64,
    latency: f64,
    p_rel: f64,
    params: &IncentiveParams,
) -> Result<f64> {
    if latency <= 0.0 {
        return Err(Error::config("latency must be positive"));
    }
    let reliability_term = p_rel.powf(params.zeta) * sigmoid((p_rel - params.r0) / params.s);
    Ok(params.w_contribution * c_score
        + params.w_latency / latency
        + params.w_reliability * reliability_term)
}

/// Net benefit: `(incentive * omega - resources_used) / omega`.
pub fn utility(incentive: f64, resources_used: f64, omega: f64) -> f64 {
    (incentive * omega - resources_used) / omega
}

/// Inputs for one client's payment.
#[derive(Debug, Clone, Copy)]
pub struct PaymentInput {
    pub contribution: f64,
    pub latency: f64,
    pub p_reliability: f64,
    pub resources_used: f64,
    pub dropped: bool,
}

/// Pays one round: dropped clients earn nothing but still bear their
/// resource cost.
pub fn pay_round(
    inputs: &[PaymentInput],
    params: &IncentiveParams,
    omega: f64,
) -> Result<Vec<Payment>> {
    if omega <= 0.0 {
        return Err(Error::config("omega must be positive"));
    }
    inputs
        .iter()
        .map(|inp| {
            let inc = if inp.dropped {
                0.0
            } else {
                incentive(inp.contribution, inp.latency, inp.p_reliability, params)?
            };
            Ok(Payment {
                incentive: inc,
                utility: utility(inc, inp.resources_used, omega),
            })
        })
        .collect()
}
