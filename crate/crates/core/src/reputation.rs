//! Subjective-logic reliability assessment.
//!
//! Two verification channels produce a per-round indicator each: resource
//! verification compares latency-inferred capacity against the declared one
//! inside relative bands, and privacy verification runs an IQR outlier test
//! over the round's contribution scores. Indicators accumulate into binomial
//! opinions whose expectations multiply into the reliability probability.

use serde::{Deserialize, Serialize};

/// Per-round verification outcome for one channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Indicator {
    Belief,
    Uncertainty,
    Disbelief,
}

impl std::fmt::Display for Indicator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Indicator::Belief => write!(f, "belief"),
            Indicator::Uncertainty => write!(f, "uncertainty"),
            Indicator::Disbelief => write!(f, "disbelief"),
        }
    }
}

/// Binomial subjective-logic opinion with its evidence counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Opinion {
    pub belief: f64,
    pub disbelief: f64,
    pub uncertainty: f64,
    pub base_rate: f64,
    pub pos_evidence: f64,
    pub neg_evidence: f64,
    pub prior_weight: f64,
}

impl Opinion {
    /// Vacuous opinion: no evidence, full uncertainty, base rate 1/2.
    pub fn vacuous() -> Self {
        let mut op = Opinion {
            belief: 0.0,
            disbelief: 0.0,
            uncertainty: 1.0,
            base_rate: 0.5,
            pos_evidence: 0.0,
            neg_evidence: 0.0,
            prior_weight: 2.0,
        };
        op.recompute();
        op
    }

    fn recompute(&mut self) {
        let total = self.pos_evidence + self.neg_evidence + self.prior_weight;
        self.belief = self.pos_evidence / total;
        self.disbelief = self.neg_evidence / total;
        self.uncertainty = self.prior_weight / total;
    }
}

/// Folds one round's indicator into the opinion. Belief and disbelief add
/// evidence; uncertainty leaves the counts untouched.
pub fn update_opinion(op: &Opinion, indicator: Indicator) -> Opinion {
    let mut next = *op;
    match indicator {
        Indicator::Belief => next.pos_evidence += 1.0,
        Indicator::Disbelief => next.neg_evidence += 1.0,
        Indicator::Uncertainty => {}
    }
    next.recompute();
    next
}

/// Projected probability of the opinion: `b + a * u`.
pub fn expectation(op: &Opinion) -> f64 {
    op.belief + op.base_rate * op.uncertainty
}

/// Verification bands and the drop rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BandParams {
    /// Relative belief-band half-width for resource deviation.
    pub alpha: f64,
    /// Extension of the resource band that still counts as uncertainty.
    pub eps_r: f64,
    /// IQR fence multiplier for the trusted interval.
    pub kappa: f64,
    /// Uncertainty-margin multiplier around the trusted interval.
    pub gamma_margin: f64,
    /// Minimum reliability to stay in the federation.
    pub reliability_threshold: f64,
    /// Rounds before the threshold starts applying.
    pub grace_rounds: u32,
}

impl Default for BandParams {
    fn default() -> Self {
        BandParams {
            alpha: 0.10,
            eps_r: 0.10,
            kappa: 1.5,
            gamma_margin: 0.5,
            reliability_threshold: 0.25,
            grace_rounds: 3,
        }
    }
}

/// Classifies the relative deviation between inferred and reported
/// resources. An infinite inference (degenerate latency) is disbelief.
pub fn classify_resource(r_inferred: f64, r_reported: f64, bands: &BandParams) -> Indicator {
    debug_assert!(r_reported > 0.0);
    if !r_inferred.is_finite() {
        return Indicator::Disbelief;
    }
    let dev = (r_inferred - r_reported).abs() / r_reported;
    if dev <= bands.alpha {
        Indicator::Belief
    } else if dev <= bands.alpha + bands.eps_r {
        Indicator::Uncertainty
    } else {
        Indicator::Disbelief
    }
}

/// Linear-interpolation (type-7) quantile of a sorted slice.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    if sorted.len() == 1 {
        return sorted[0];
    }
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// IQR fences over one round's contribution scores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IqrFences {
    pub lower: f64,
    pub upper: f64,
    pub margin: f64,
}

/// Computes the trusted interval `[q1 - kappa IQR, q3 + kappa IQR]` and the
/// uncertainty margin `gamma * IQR` from the round's scores.
pub fn iqr_fences(all_scores: &[f64], bands: &BandParams) -> Option<IqrFences> {
    if all_scores.len() < 4 {
        return None;
    }
    let mut sorted = all_scores.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q1 = quantile_sorted(&sorted, 0.25);
    let q3 = quantile_sorted(&sorted, 0.75);
    let iqr = q3 - q1;
    Some(IqrFences {
        lower: q1 - bands.kappa * iqr,
        upper: q3 + bands.kappa * iqr,
        margin: bands.gamma_margin * iqr,
    })
}

/// Classifies one contribution score against the round's population.
/// Fewer than four scores give everyone uncertainty. The trusted interval
/// is closed; the margin zones are open.
pub fn classify_privacy(score: f64, all_scores: &[f64], bands: &BandParams) -> Indicator {
    let Some(fences) = iqr_fences(all_scores, bands) else {
        return Indicator::Uncertainty;
    };
    classify_against_fences(score, &fences)
}

pub fn classify_against_fences(score: f64, fences: &IqrFences) -> Indicator {
    if score >= fences.lower && score <= fences.upper {
        Indicator::Belief
    } else if (score > fences.lower - fences.margin && score < fences.lower)
        || (score > fences.upper && score < fences.upper + fences.margin)
    {
        Indicator::Uncertainty
    } else {
        Indicator::Disbelief
    }
}

/// Reliability bookkeeping for one client.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityState {
    pub resource_opinion: Opinion,
    pub privacy_opinion: Opinion,
    pub p_resources: f64,
    pub p_privacy: f64,
    pub p_reliability: f64,
    pub dropped: bool,
    pub dropped_round: Option<u32>,
}

impl ReliabilityState {
    pub fn new() -> Self {
        let vacuous = Opinion::vacuous();
        let p = expectation(&vacuous);
        ReliabilityState {
            resource_opinion: vacuous,
            privacy_opinion: vacuous,
            p_resources: p,
            p_privacy: p,
            p_reliability: p * p,
            dropped: false,
            dropped_round: None,
        }
    }

    /// Absorbs this round's channel indicators and refreshes probabilities.
    pub fn observe(&mut self, resource: Indicator, privacy: Indicator) {
        self.resource_opinion = update_opinion(&self.resource_opinion, resource);
        self.privacy_opinion = update_opinion(&self.privacy_opinion, privacy);
        self.p_resources = expectation(&self.resource_opinion);
        self.p_privacy = expectation(&self.privacy_opinion);
        self.p_reliability = reliability(self);
    }
}

impl Default for ReliabilityState {
    fn default() -> Self {
        Self::new()
    }
}

/// Combined reliability probability: the product of both channel
/// expectations.
pub fn reliability(state: &ReliabilityState) -> f64 {
    expectation(&state.resource_opinion) * expectation(&state.privacy_opinion)
}

/// Applies the drop rule. Once the grace period has elapsed, reliability
/// strictly below the threshold drops the client permanently.
pub fn apply_threshold(state: &mut ReliabilityState, round: u32, bands: &BandParams) -> bool {
    if !state.dropped
        && round >= bands.grace_rounds
        && state.p_reliability < bands.reliability_threshold
    {
        state.dropped = true;
        state.dropped_round = Some(round);
    }
    state.dropped
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn vacuous_opinion_has_expectation_half() {
        let op = Opinion::vacuous();
        assert_eq!(op.belief, 0.0);
        assert_eq!(op.disbelief, 0.0);
        assert_eq!(op.uncertainty, 1.0);
        assert_relative_eq!(expectation(&op), 0.5);
    }

    #[test]
    fn eight_beliefs_give_point_nine() {
        let mut op = Opinion::vacuous();
        for _ in 0..8 {
            op = update_opinion(&op, Indicator::Belief);
        }
        assert_relative_eq!(op.belief, 0.8, epsilon = 1e-12);
        assert_relative_eq!(expectation(&op), 0.9, epsilon = 1e-12);
    }

    #[test]
    fn uncertainty_leaves_counts_unchanged() {
        let op = update_opinion(&Opinion::vacuous(), Indicator::Uncertainty);
        assert_eq!(op.pos_evidence, 0.0);
        assert_eq!(op.neg_evidence, 0.0);
        assert_relative_eq!(op.uncertainty, 1.0);
    }

    #[test]
    fn expectation_cases() {
        let mut op = Opinion::vacuous();
        op.belief = 1.0;
        op.disbelief = 0.0;
        op.uncertainty = 0.0;
        assert_relative_eq!(expectation(&op), 1.0);
        op.belief = 0.6;
        op.disbelief = 0.2;
        op.uncertainty = 0.2;
        assert_relative_eq!(expectation(&op), 0.7);
    }

    #[test]
    fn resource_bands() {
        let bands = BandParams {
            alpha: 0.1,
            eps_r: 0.1,
            ..BandParams::default()
        };
        assert_eq!(classify_resource(100.0, 100.0, &bands), Indicator::Belief);
        assert_eq!(classify_resource(115.0, 100.0, &bands), Indicator::Uncertainty);
        assert_eq!(classify_resource(150.0, 100.0, &bands), Indicator::Disbelief);
        assert_eq!(
            classify_resource(f64::INFINITY, 100.0, &bands),
            Indicator::Disbelief
        );
    }

    #[test]
    fn identical_scores_degenerate_to_belief() {
        let scores = vec![2.0; 6];
        let bands = BandParams::default();
        for &s in &scores {
            assert_eq!(classify_privacy(s, &scores, &bands), Indicator::Belief);
        }
    }

    #[test]
    fn hand_quantile_outlier_case() {
        // scores {1,2,3,4,100}: q1=2, q3=4, IQR=2, fences [-1, 7], margin 1.
        let scores = vec![1.0, 2.0, 3.0, 4.0, 100.0];
        let bands = BandParams {
            kappa: 1.5,
            gamma_margin: 0.5,
            ..BandParams::default()
        };
        let fences = iqr_fences(&scores, &bands).unwrap();
        assert_relative_eq!(fences.lower, -1.0);
        assert_relative_eq!(fences.upper, 7.0);
        assert_relative_eq!(fences.margin, 1.0);
        assert_eq!(classify_privacy(100.0, &scores, &bands), Indicator::Disbelief);
        assert_eq!(classify_privacy(3.0, &scores, &bands), Indicator::Belief);
        // Exactly at the upper fence: closed interval, still belief.
        assert_eq!(classify_privacy(7.0, &scores, &bands), Indicator::Belief);
        // Inside the margin zone: uncertainty.
        assert_eq!(classify_privacy(7.5, &scores, &bands), Indicator::Uncertainty);
    }

    #[test]
    fn tiny_populations_yield_uncertainty() {
        let bands = BandParams::default();
        assert_eq!(
            classify_privacy(1.0, &[1.0, 2.0, 3.0], &bands),
            Indicator::Uncertainty
        );
    }

    #[test]
    fn fresh_state_reliability_is_quarter() {
        let state = ReliabilityState::new();
        assert_relative_eq!(state.p_reliability, 0.25);
    }

    #[test]
    fn reliability_is_a_product() {
        let mut state = ReliabilityState::new();
        state.observe(Indicator::Belief, Indicator::Disbelief);
        let expected =
            expectation(&state.resource_opinion) * expectation(&state.privacy_opinion);
        assert_relative_eq!(state.p_reliability, expected);
        // One channel at zero pins the product at zero.
        let mut zeroed = ReliabilityState::new();
        zeroed.privacy_opinion.pos_evidence = 0.0;
        zeroed.privacy_opinion.neg_evidence = 1e12;
        zeroed.privacy_opinion.prior_weight = 2.0;
        zeroed.observe(Indicator::Belief, Indicator::Disbelief);
        assert!(zeroed.p_reliability < 1e-10);
    }

    #[test]
    fn threshold_zero_never_drops() {
        let mut state = ReliabilityState::new();
        let bands = BandParams {
            reliability_threshold: 0.0,
            grace_rounds: 0,
            ..BandParams::default()
        };
        for round in 0..50 {
            state.observe(Indicator::Disbelief, Indicator::Disbelief);
            assert!(!apply_threshold(&mut state, round, &bands));
        }
    }

    #[test]
    fn threshold_boundary_is_strict() {
        let mut state = ReliabilityState::new();
        let bands = BandParams {
            reliability_threshold: 0.25,
            grace_rounds: 0,
            ..BandParams::default()
        };
        // Fresh state sits exactly at 0.25: strict inequality keeps it.
        assert!(!apply_threshold(&mut state, 0, &bands));
        assert!(!state.dropped);
    }

    #[test]
    fn below_threshold_after_grace_drops_permanently() {
        let mut state = ReliabilityState::new();
        state.p_reliability = 0.2;
        let bands = BandParams {
            reliability_threshold: 0.25,
            grace_rounds: 3,
            ..BandParams::default()
        };
        assert!(!apply_threshold(&mut state, 2, &bands));
        assert!(apply_threshold(&mut state, 3, &bands));
        assert_eq!(state.dropped_round, Some(3));
        // Recovery does not undo the drop.
        state.p_reliability = 1.0;
        assert!(apply_threshold(&mut state, 4, &bands));
        assert_eq!(state.dropped_round, Some(3));
    }

    #[test]
    fn honest_all_belief_trajectory_converges_to_one() {
        let mut state = ReliabilityState::new();
        let mut prev = state.p_resources;
        for _ in 0..30 {
            state.observe(Indicator::Belief, Indicator::Belief);
            assert!(state.p_resources >= prev);
            prev = state.p_resources;
        }
        assert!(state.p_resources > 0.96);
    }

    #[test]
    fn liar_all_disbelief_trajectory_falls_below_any_threshold() {
        let mut state = ReliabilityState::new();
        let bands = BandParams::default();
        let mut dropped_at = None;
        for round in 0..20 {
            state.observe(Indicator::Disbelief, Indicator::Belief);
            if apply_threshold(&mut state, round, &bands) && dropped_at.is_none() {
                dropped_at = Some(round);
            }
        }
        assert_eq!(dropped_at, Some(3));
    }

    proptest! {
        #[test]
        fn opinion_simplex_holds_under_any_sequence(
            seq in prop::collection::vec(0u8..3, 0..64)
        ) {
            let mut op = Opinion::vacuous();
            for s in seq {
                let ind = match s {
                    0 => Indicator::Belief,
                    1 => Indicator::Uncertainty,
                    _ => Indicator::Disbelief,
                };
                let before = expectation(&op);
                op = update_opinion(&op, ind);
                prop_assert!((op.belief + op.disbelief + op.uncertainty - 1.0).abs() < 1e-9);
                let after = expectation(&op);
                match ind {
                    Indicator::Belief => prop_assert!(after >= before - 1e-12),
                    Indicator::Disbelief => prop_assert!(after <= before + 1e-12),
                    Indicator::Uncertainty => prop_assert!((after - before).abs() < 1e-12),
                }
            }
        }

        #[test]
        fn far_low_outliers_are_always_disbelief(
            base in prop::collection::vec(-1.0f64..1.0, 4..32),
            extra in 0.1f64..100.0
        ) {
            let bands = BandParams::default();
            if let Some(fences) = iqr_fences(&base, &bands) {
                prop_assume!(fences.upper > fences.lower); // IQR > 0
                let outlier = fences.lower - fences.margin - extra;
                prop_assert_eq!(
                    classify_against_fences(outlier, &fences),
                    Indicator::Disbelief
                );
            }
        }
    }
}
