//! Round-synchronous orchestration: local training, attacks, DP upload,
//! server-side scoring and verification, dropout, aggregation, payment.
//! Also hosts the full run configuration and the FedAvg baseline path.

use serde::{Deserialize, Serialize};

use crate::attacks::{self, AttackConfig, AttackKind};
use crate::contribution::{global_direction, score};
use crate::dp::{privatize, PrivacyParams};
use crate::error::{Error, Result};
use crate::incentive::{pay_round, IncentiveParams, PaymentInput};
use crate::latency::{expected_latency, infer_resources, observe_latency, ResourceProfile};
use crate::model::{
    evaluate, load_csv, load_idx, make_synthetic, partition, split_train_val_test, train_local,
    CsvSchema, Dataset, ModelVector, PartitionMode,
};
use crate::reputation::{
    apply_threshold, classify_against_fences, classify_resource, iqr_fences, BandParams,
    Indicator, ReliabilityState,
};
use crate::rng::{derive_seed, stream_rng, Stream};
use crate::sle::{aggregate, sle_weights, SleParams};

use rand::Rng;

/// Which aggregation rule combines surviving updates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Aggregator {
    #[serde(rename = "SLE")]
    #[default]
    Sle,
    FedAvg,
}

/// Local training hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingParams {
    pub epochs: u32,
    pub lr: f64,
    pub batch_size: usize,
}

impl Default for TrainingParams {
    fn default() -> Self {
        TrainingParams {
            epochs: 2,
            lr: 0.1,
            batch_size: 32,
        }
    }
}

/// Privacy-budget contract and mechanism settings.
///
/// Honest clients draw their true epsilon from `[eps_min, eps_max]`;
/// privacy liars draw from `[eps_min/4, eps_min/2]`, injecting more noise
/// than the contract permits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrivacyConfig {
    pub eps_min: f64,
    pub eps_max: f64,
    pub delta: f64,
    pub clip_norm: f64,
    /// Sanity cap passed to the noise calibration.
    pub epsilon_cap: f64,
}

impl Default for PrivacyConfig {
    fn default() -> Self {
        PrivacyConfig {
            eps_min: 230.0,
            eps_max: 280.0,
            delta: 1e-5,
            clip_norm: 1.0,
            epsilon_cap: 400.0,
        }
    }
}

/// Simulated compute heterogeneity and the latency channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatencyConfig {
    /// Coefficient of variation of multiplicative latency jitter.
    pub jitter_cv: f64,
    /// MAC cost of one local update, drawn uniformly per client.
    pub rho_range: (f64, f64),
    /// True capacity in MAC/s, drawn uniformly per client.
    pub r_true_range: (f64, f64),
    /// Fixed per-round overhead in seconds, drawn uniformly per client.
    pub overhead_range: (f64, f64),
    /// Resource liars report `overreport_factor * r_true`.
    pub overreport_factor: f64,
}

impl Default for LatencyConfig {
    fn default() -> Self {
        LatencyConfig {
            jitter_cv: 0.05,
            rho_range: (1.0e6, 5.0e6),
            r_true_range: (1.0e5, 1.0e6),
            overhead_range: (0.1, 1.0),
            overreport_factor: 3.0,
        }
    }
}

/// Where client data comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetConfig {
    Synthetic {
        num_classes: usize,
        feature_dim: usize,
        /// Average shard size; the generated source is sized so the 80%
        /// train split covers `num_clients * samples_per_client`.
        samples_per_client: usize,
        separation: f64,
    },
    Csv {
        path: String,
        schema: CsvSchema,
    },
    Idx {
        images: String,
        labels: String,
    },
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig::Synthetic {
            num_classes: 2,
            feature_dim: 1000,
            samples_per_client: 64,
            separation: 24.0,
        }
    }
}

/// Full experiment configuration. `Default` is the desk-scale IID scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub num_clients: usize,
    pub rounds: u32,
    pub liar_fraction: f64,
    /// Fraction of liars misreporting resources; the rest violate the
    /// privacy contract.
    pub liar_resource_mix: f64,
    pub partition_mode: PartitionMode,
    pub dirichlet_alpha: f64,
    pub aggregator: Aggregator,
    /// Gates the reliability drop rule; diagnostics are always computed.
    pub reputation_enabled: bool,
    pub seed: u64,
    pub dataset: DatasetConfig,
    pub training: TrainingParams,
    pub privacy: PrivacyConfig,
    pub bands: BandParams,
    pub sle: SleParams,
    pub incentive: IncentiveParams,
    pub attack: AttackConfig,
    pub latency: LatencyConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            num_clients: 100,
            rounds: 20,
            liar_fraction: 0.1,
            liar_resource_mix: 0.5,
            partition_mode: PartitionMode::Iid,
            dirichlet_alpha: 0.5,
            aggregator: Aggregator::Sle,
            reputation_enabled: true,
            seed: 0,
            dataset: DatasetConfig::default(),
            training: TrainingParams::default(),
            privacy: PrivacyConfig::default(),
            bands: BandParams::default(),
            sle: SleParams::default(),
            incentive: IncentiveParams::default(),
            attack: AttackConfig::default(),
            latency: LatencyConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_clients == 0 {
            return Err(Error::config("num_clients must be positive"));
        }
        if !(0.0..=1.0).contains(&self.liar_fraction) {
            return Err(Error::config("liar_fraction must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.liar_resource_mix) {
            return Err(Error::config("liar_resource_mix must lie in [0, 1]"));
        }
        if self.partition_mode == PartitionMode::NonIid && self.dirichlet_alpha <= 0.0 {
            return Err(Error::config("dirichlet_alpha must be positive"));
        }
        if self.training.epochs == 0 {
            return Err(Error::config("training.epochs must be positive"));
        }
        if self.training.lr <= 0.0 {
            return Err(Error::config("training.lr must be positive"));
        }
        if self.training.batch_size == 0 {
            return Err(Error::config("training.batch_size must be positive"));
        }
        let p = &self.privacy;
        if !(p.eps_min > 0.0 && p.eps_min <= p.eps_max) {
            return Err(Error::config("privacy: need 0 < eps_min <= eps_max"));
        }
        if p.eps_max > p.epsilon_cap {
            return Err(Error::config("privacy.eps_max exceeds privacy.epsilon_cap"));
        }
        if !(p.delta > 0.0 && p.delta < 1.0) {
            return Err(Error::config("privacy.delta must lie in (0, 1)"));
        }
        if p.clip_norm <= 0.0 {
            return Err(Error::config("privacy.clip_norm must be positive"));
        }
        let b = &self.bands;
        if b.alpha <= 0.0 || b.eps_r <= 0.0 || b.kappa <= 0.0 || b.gamma_margin <= 0.0 {
            return Err(Error::config(
                "bands: alpha, eps_r, kappa, gamma_margin must be positive",
            ));
        }
        if !(0.0..=1.0).contains(&b.reliability_threshold) {
            return Err(Error::config("bands.reliability_threshold must lie in [0, 1]"));
        }
        if self.sle.lambda_ridge < 0.0 {
            return Err(Error::config("sle.lambda_ridge must be nonnegative"));
        }
        self.incentive.validate()?;
        let a = &self.attack;
        if a.mpa_scale <= 0.0 || a.nga_sigma <= 0.0 {
            return Err(Error::config("attack scales must be positive"));
        }
        if !(0.0..=1.0).contains(&a.attacker_fraction) {
            return Err(Error::config("attack.attacker_fraction must lie in [0, 1]"));
        }
        if a.kind != AttackKind::None && a.attacker_fraction + self.liar_fraction > 1.0 {
            return Err(Error::config(
                "attack.attacker_fraction + liar_fraction must not exceed 1",
            ));
        }
        let l = &self.latency;
        if !(0.0..0.5).contains(&l.jitter_cv) {
            return Err(Error::config("latency.jitter_cv must lie in [0, 0.5)"));
        }
        for (name, (lo, hi)) in [
            ("rho_range", l.rho_range),
            ("r_true_range", l.r_true_range),
        ] {
            if !(lo > 0.0 && lo <= hi) {
                return Err(Error::config(format!("latency.{name} must satisfy 0 < lo <= hi")));
            }
        }
        let (olo, ohi) = l.overhead_range;
        if !(olo >= 0.0 && olo <= ohi) {
            return Err(Error::config("latency.overhead_range must satisfy 0 <= lo <= hi"));
        }
        if l.overreport_factor <= 1.0 {
            return Err(Error::config("latency.overreport_factor must exceed 1"));
        }
        match &self.dataset {
            DatasetConfig::Synthetic {
                num_classes,
                feature_dim,
                samples_per_client,
                ..
            } => {
                if *num_classes < 2 || *feature_dim == 0 || *samples_per_client == 0 {
                    return Err(Error::config(
                        "dataset: num_classes >= 2, feature_dim and samples_per_client positive",
                    ));
                }
            }
            DatasetConfig::Csv { path, schema } => {
                if path.is_empty() || schema.columns.is_empty() {
                    return Err(Error::config("dataset: csv path and schema required"));
                }
            }
            DatasetConfig::Idx { images, labels } => {
                if images.is_empty() || labels.is_empty() {
                    return Err(Error::config("dataset: idx image and label paths required"));
                }
            }
        }
        Ok(())
    }

    fn liar_count(&self) -> usize {
        (self.liar_fraction * self.num_clients as f64).round() as usize
    }

    fn attacker_count(&self) -> usize {
        if self.attack.kind == AttackKind::None {
            0
        } else {
            (self.attack.attacker_fraction * self.num_clients as f64).round() as usize
        }
    }
}

/// Behavior class of a simulated client.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HonestyClass {
    Honest,
    ResourceLiar,
    PrivacyLiar,
}

impl HonestyClass {
    pub fn is_liar(self) -> bool {
        self != HonestyClass::Honest
    }
}

impl std::fmt::Display for HonestyClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HonestyClass::Honest => write!(f, "honest"),
            HonestyClass::ResourceLiar => write!(f, "resource_liar"),
            HonestyClass::PrivacyLiar => write!(f, "privacy_liar"),
        }
    }
}

/// Static ground truth about one simulated client.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClientProfile {
    pub id: usize,
    pub honesty: HonestyClass,
    pub attacker: bool,
    pub resources: ResourceProfile,
    /// The client's true privacy parameters (its real epsilon).
    pub privacy: PrivacyParams,
}

/// Per-client observables for one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: u32,
    pub client_id: usize,
    pub honesty: HonestyClass,
    pub attacker: bool,
    pub contribution: f64,
    pub observed_latency: f64,
    pub expected_latency: f64,
    pub r_inferred: f64,
    pub resource_indicator: Indicator,
    pub privacy_indicator: Indicator,
    pub p_resources: f64,
    pub p_privacy: f64,
    pub p_reliability: f64,
    pub dropped: bool,
    pub incentive: f64,
    pub utility: f64,
}

/// Aggregate outcome of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub rounds_completed: u32,
    pub terminated_early: bool,
    pub train_accuracy: Vec<f64>,
    pub val_accuracy: Vec<f64>,
    pub test_accuracy: Vec<f64>,
    pub final_train_accuracy: f64,
    pub final_val_accuracy: f64,
    pub final_test_accuracy: f64,
    pub liars_injected: usize,
    pub attackers_injected: usize,
    pub innocent_drops: usize,
    pub liars_survived: usize,
    pub attackers_dropped: usize,
    pub total_dropouts: usize,
    pub mean_utility_reliable: Option<f64>,
    pub mean_utility_unreliable: Option<f64>,
    pub delta_acc_vs_clean: Option<f64>,
}

/// Everything a run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub summary: RunSummary,
    pub records: Vec<RoundRecord>,
    /// Input configuration with auto-calibrated values resolved, so feeding
    /// it back reproduces the run bit-exactly.
    pub resolved_config: RunConfig,
    pub final_model: ModelVector,
}

/// Builds the source dataset named by the config.
pub fn build_dataset(config: &RunConfig) -> Result<Dataset> {
    match &config.dataset {
        DatasetConfig::Synthetic {
            num_classes,
            feature_dim,
            samples_per_client,
            separation,
        } => {
            // Size the source so the 80% train split covers every shard.
            let train_total = config.num_clients * samples_per_client;
            let source_total = (train_total as f64 / 0.8).ceil() as usize;
            let per_class = source_total.div_ceil(*num_classes);
            make_synthetic(
                *num_classes,
                *feature_dim,
                per_class,
                *separation,
                config.seed,
            )
        }
        DatasetConfig::Csv { path, schema } => load_csv(std::path::Path::new(path), schema),
        DatasetConfig::Idx { images, labels } => load_idx(
            std::path::Path::new(images),
            std::path::Path::new(labels),
        ),
    }
}

/// Draws the static client population for a run.
pub fn build_profiles(config: &RunConfig) -> Vec<ClientProfile> {
    let n = config.num_clients;
    let liars = config.liar_count();
    let resource_liars = (liars as f64 * config.liar_resource_mix).round() as usize;
    let attackers = config.attacker_count();
    (0..n)
        .map(|id| {
            let honesty = if id < resource_liars {
                HonestyClass::ResourceLiar
            } else if id < liars {
                HonestyClass::PrivacyLiar
            } else {
                HonestyClass::Honest
            };
            let attacker = id >= liars && id < liars + attackers;
            let mut rng = stream_rng(config.seed, Stream::Profile, 0, id as u64);
            let l = &config.latency;
            let rho = rng.random_range(l.rho_range.0..=l.rho_range.1);
            let r_true = rng.random_range(l.r_true_range.0..=l.r_true_range.1);
            let lambda_overhead = rng.random_range(l.overhead_range.0..=l.overhead_range.1);
            let r_reported = if honesty == HonestyClass::ResourceLiar {
                r_true * l.overreport_factor
            } else {
                r_true
            };
            let p = &config.privacy;
            let epsilon = if honesty == HonestyClass::PrivacyLiar {
                rng.random_range(p.eps_min / 4.0..=p.eps_min / 2.0)
            } else {
                rng.random_range(p.eps_min..=p.eps_max)
            };
            ClientProfile {
                id,
                honesty,
                attacker,
                resources: ResourceProfile {
                    rho,
                    lambda_overhead,
                    r_true,
                    r_reported,
                },
                privacy: PrivacyParams {
                    epsilon,
                    delta: p.delta,
                    clip_norm: p.clip_norm,
                },
            }
        })
        .collect()
}

struct ClientRoundOutput {
    update: ModelVector,
    observed_latency: f64,
}

/// One client's round: train, attack, privatize, and time the upload.
fn client_round(
    global: &ModelVector,
    profile: &ClientProfile,
    shard: &Dataset,
    config: &RunConfig,
    round: u32,
) -> Result<ClientRoundOutput> {
    let id = profile.id as u64;
    let local = train_local(
        global,
        shard,
        config.training.epochs,
        config.training.lr,
        config.training.batch_size,
        derive_seed(config.seed, Stream::Training, round as u64, id),
    )?;
    let mut update = local.sub(global);
    if profile.attacker {
        update = attacks::apply(
            &update,
            &config.attack,
            derive_seed(config.seed, Stream::Attack, round as u64, id),
        );
    }
    let update = privatize(
        &update,
        &profile.privacy,
        config.privacy.epsilon_cap,
        derive_seed(config.seed, Stream::Privacy, round as u64, id),
    )?;
    let observed_latency = observe_latency(
        &profile.resources,
        config.latency.jitter_cv,
        derive_seed(config.seed, Stream::Latency, round as u64, id),
    );
    Ok(ClientRoundOutput {
        update,
        observed_latency,
    })
}

/// Combines surviving updates into a model delta.
fn aggregate_survivors(
    updates: &[&ModelVector],
    aggregator: Aggregator,
    sle: &SleParams,
    dim: usize,
) -> Result<ModelVector> {
    if updates.is_empty() {
        return Ok(ModelVector::zeros(dim));
    }
    let owned: Vec<ModelVector> = updates.iter().map(|u| (*u).clone()).collect();
    match aggregator {
        Aggregator::FedAvg => global_direction(&owned),
        Aggregator::Sle => {
            // Zero-norm updates carry no direction: weight zero, out of U.
            let nonzero: Vec<ModelVector> = owned
                .iter()
                .filter(|u| u.norm() > 0.0)
                .cloned()
                .collect();
            if nonzero.is_empty() {
                return Ok(ModelVector::zeros(dim));
            }
            let w = sle_weights(&nonzero, sle)?;
            aggregate(&nonzero, &w.weights)
        }
    }
}

/// Executes one full run.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    config.validate()?;
    let source = build_dataset(config)?;
    let (train, val, test) = split_train_val_test(&source, 0.1, 0.1, config.seed)?;
    drop(source);
    let split = partition(
        &train,
        config.num_clients,
        config.partition_mode,
        config.dirichlet_alpha,
        config.seed,
    )?;
    let profiles = build_profiles(config);
    let n = config.num_clients;
    let mut states: Vec<ReliabilityState> = vec![ReliabilityState::new(); n];
    let mut global = ModelVector::zeros(train.model_dim());
    let mut omega = config.incentive.omega;
    let mut records: Vec<RoundRecord> = Vec::new();
    let mut train_acc = Vec::new();
    let mut val_acc = Vec::new();
    let mut test_acc = Vec::new();
    let mut terminated_early = false;
    let mut rounds_completed = 0;

    for round in 0..config.rounds {
        let active: Vec<usize> = (0..n).filter(|&i| !states[i].dropped).collect();
        if active.is_empty() {
            terminated_early = true;
            break;
        }

        // Client phase: independent per client.
        let outputs: Vec<ClientRoundOutput> = active
            .iter()
            .map(|&i| client_round(&global, &profiles[i], &split.shards[i], config, round))
            .collect::<Result<_>>()?;

        // Server phase: score every received update against their mean.
        let updates: Vec<ModelVector> = outputs.iter().map(|o| o.update.clone()).collect();
        let direction = global_direction(&updates)?;
        let scores: Vec<f64> = updates.iter().map(|u| score(u, &direction).value).collect();
        let fences = iqr_fences(&scores, &config.bands);

        if omega.is_none() {
            let max_report = active
                .iter()
                .map(|&i| profiles[i].resources.r_reported)
                .fold(0.0f64, f64::max);
            omega = Some(max_report);
        }
        let omega_value = omega.expect("omega resolved above");

        // Verification, opinion updates, and the drop rule.
        let mut round_rows: Vec<RoundRecord> = Vec::with_capacity(active.len());
        for (k, &i) in active.iter().enumerate() {
            let profile = &profiles[i];
            let observed = outputs[k].observed_latency;
            let r_inferred = infer_resources(observed, &profile.resources);
            let resource_indicator =
                classify_resource(r_inferred, profile.resources.r_reported, &config.bands);
            let privacy_indicator = match &fences {
                Some(f) => classify_against_fences(scores[k], f),
                None => Indicator::Uncertainty,
            };
            states[i].observe(resource_indicator, privacy_indicator);
            if config.reputation_enabled {
                apply_threshold(&mut states[i], round, &config.bands);
            }
            round_rows.push(RoundRecord {
                round,
                client_id: i,
                honesty: profile.honesty,
                attacker: profile.attacker,
                contribution: scores[k],
                observed_latency: observed,
                expected_latency: expected_latency(&profile.resources),
                r_inferred,
                resource_indicator,
                privacy_indicator,
                p_resources: states[i].p_resources,
                p_privacy: states[i].p_privacy,
                p_reliability: states[i].p_reliability,
                dropped: states[i].dropped,
                incentive: 0.0,
                utility: 0.0,
            });
        }

        // Aggregate the survivors into the next global model.
        let survivor_updates: Vec<&ModelVector> = active
            .iter()
            .enumerate()
            .filter(|(_, &i)| !states[i].dropped)
            .map(|(k, _)| &updates[k])
            .collect();
        let delta = aggregate_survivors(
            &survivor_updates,
            config.aggregator,
            &config.sle,
            global.dim(),
        )?;
        global = global.add(&delta);

        train_acc.push(evaluate(&global, &train)?);
        val_acc.push(evaluate(&global, &val)?);
        test_acc.push(evaluate(&global, &test)?);

        // Payment: just-dropped clients earn nothing but bear their cost.
        let payment_inputs: Vec<PaymentInput> = active
            .iter()
            .enumerate()
            .map(|(k, &i)| PaymentInput {
                contribution: scores[k],
                latency: outputs[k].observed_latency,
                p_reliability: states[i].p_reliability,
                resources_used: profiles[i].resources.r_reported,
                dropped: states[i].dropped,
            })
            .collect();
        let payments = pay_round(&payment_inputs, &config.incentive, omega_value)?;
        for (row, payment) in round_rows.iter_mut().zip(&payments) {
            row.incentive = payment.incentive;
            row.utility = payment.utility;
        }
        records.extend(round_rows);
        rounds_completed = round + 1;

        if (0..n).all(|i| states[i].dropped) {
            terminated_early = true;
            break;
        }
    }

    let summary = summarize(
        config,
        &profiles,
        &states,
        &records,
        train_acc,
        val_acc,
        test_acc,
        rounds_completed,
        terminated_early,
    );
    let mut resolved_config = config.clone();
    resolved_config.incentive.omega = omega;
    Ok(RunOutput {
        summary,
        records,
        resolved_config,
        final_model: global,
    })
}

#[allow(clippy::too_many_arguments)]
fn summarize(
    config: &RunConfig,
    profiles: &[ClientProfile],
    states: &[ReliabilityState],
    records: &[RoundRecord],
    train_acc: Vec<f64>,
    val_acc: Vec<f64>,
    test_acc: Vec<f64>,
    rounds_completed: u32,
    terminated_early: bool,
) -> RunSummary {
    let mut innocent_drops = 0;
    let mut liars_survived = 0;
    let mut attackers_dropped = 0;
    let mut total_dropouts = 0;
    for (profile, state) in profiles.iter().zip(states) {
        if state.dropped {
            total_dropouts += 1;
            if profile.attacker {
                attackers_dropped += 1;
            } else if !profile.honesty.is_liar() {
                innocent_drops += 1;
            }
        } else if profile.honesty.is_liar() {
            liars_survived += 1;
        }
    }
    let mean_of = |keep: &dyn Fn(&RoundRecord) -> bool| -> Option<f64> {
        let mut sum = 0.0;
        let mut count = 0usize;
        for r in records.iter().filter(|r| keep(r)) {
            sum += r.utility;
            count += 1;
        }
        (count > 0).then(|| sum / count as f64)
    };
    RunSummary {
        rounds_completed,
        terminated_early,
        final_train_accuracy: train_acc.last().copied().unwrap_or(0.0),
        final_val_accuracy: val_acc.last().copied().unwrap_or(0.0),
        final_test_accuracy: test_acc.last().copied().unwrap_or(0.0),
        train_accuracy: train_acc,
        val_accuracy: val_acc,
        test_accuracy: test_acc,
        liars_injected: config.liar_count(),
        attackers_injected: config.attacker_count(),
        innocent_drops,
        liars_survived,
        attackers_dropped,
        total_dropouts,
        mean_utility_reliable: mean_of(&|r| !r.honesty.is_liar() && !r.attacker),
        mean_utility_unreliable: mean_of(&|r| r.honesty.is_liar()),
        delta_acc_vs_clean: None,
    }
}

/// Runs each configuration independently, collecting per-run results.
/// A failing entry does not stop the remainder.
pub fn sweep(configs: &[RunConfig]) -> Result<Vec<Result<RunOutput>>> {
    if configs.is_empty() {
        return Err(Error::protocol("sweep requires at least one configuration"));
    }
    Ok(configs.iter().map(run).collect())
}

/// Outcome of an attacked run next to its clean twin.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackOutcome {
    /// `clean final test accuracy - attacked final test accuracy`.
    pub delta_acc: f64,
    pub attacked: RunOutput,
    pub clean: RunOutput,
}

/// Runs the configured attack and a clean twin with the same seed; the
/// accuracy drop between them is the attack damage.
pub fn attack_experiment(config: &RunConfig) -> Result<AttackOutcome> {
    let mut attacked = run(config)?;
    let mut clean_config = config.clone();
    clean_config.attack.kind = AttackKind::None;
    let clean = run(&clean_config)?;
    let delta_acc = clean.summary.final_test_accuracy - attacked.summary.final_test_accuracy;
    attacked.summary.delta_acc_vs_clean = Some(delta_acc);
    Ok(AttackOutcome {
        delta_acc,
        attacked,
        clean,
    })
}
