//! Browser bindings for the simulator. Three operations back the static
//! demo page: run one simulation and stream back plot-ready series, sweep
//! the reliability threshold, and explore SLE weights on a clustered
//! population. All inputs and outputs are JSON strings to keep the JS glue
//! trivial.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use murim_core::model::ModelVector;
use murim_core::report::parse_config;
use murim_core::simulator::{run, HonestyClass, RunOutput};
use murim_core::sle::{sle_weights, SleParams};

#[derive(Serialize)]
struct ClientSeries {
    id: usize,
    honesty: String,
    attacker: bool,
    dropped_round: Option<u32>,
    reliability: Vec<f64>,
}

#[derive(Serialize)]
struct SimulationResult {
    rounds: u32,
    threshold: f64,
    clients: Vec<ClientSeries>,
    test_accuracy: Vec<f64>,
    train_accuracy: Vec<f64>,
    honest_utility_per_round: Vec<f64>,
    liar_utility_per_round: Vec<f64>,
    innocent_drops: usize,
    liars_survived: usize,
    total_dropouts: usize,
    mean_utility_honest: Option<f64>,
    mean_utility_liars: Option<f64>,
}

#[derive(Serialize)]
struct ErrorResult {
    error: String,
}

fn err_json(message: impl std::fmt::Display) -> String {
    serde_json::to_string(&ErrorResult {
        error: message.to_string(),
    })
    .expect("error serializes")
}

fn simulation_result(output: &RunOutput) -> SimulationResult {
    let config = &output.resolved_config;
    let rounds = output.summary.rounds_completed;
    let mut clients: Vec<ClientSeries> = Vec::new();
    for record in &output.records {
        if record.round == 0 || clients.iter().all(|c| c.id != record.client_id) {
            clients.push(ClientSeries {
                id: record.client_id,
                honesty: record.honesty.to_string(),
                attacker: record.attacker,
                dropped_round: None,
                reliability: Vec::new(),
            });
        }
    }
    clients.sort_by_key(|c| c.id);
    for record in &output.records {
        let client = clients
            .iter_mut()
            .find(|c| c.id == record.client_id)
            .expect("client series exists");
        client.reliability.push(record.p_reliability);
        if record.dropped && client.dropped_round.is_none() {
            client.dropped_round = Some(record.round);
        }
    }
    let mut honest_utility_per_round = Vec::new();
    let mut liar_utility_per_round = Vec::new();
    for round in 0..rounds {
        let mut honest = (0.0, 0usize);
        let mut liars = (0.0, 0usize);
        for r in output.records.iter().filter(|r| r.round == round) {
            if r.honesty == HonestyClass::Honest && !r.attacker {
                honest.0 += r.utility;
                honest.1 += 1;
            } else if r.honesty.is_liar() {
                liars.0 += r.utility;
                liars.1 += 1;
            }
        }
        honest_utility_per_round.push(if honest.1 > 0 { honest.0 / honest.1 as f64 } else { f64::NAN });
        liar_utility_per_round.push(if liars.1 > 0 { liars.0 / liars.1 as f64 } else { f64::NAN });
    }
    SimulationResult {
        rounds,
        threshold: config.bands.reliability_threshold,
        clients,
        test_accuracy: output.summary.test_accuracy.clone(),
        train_accuracy: output.summary.train_accuracy.clone(),
        honest_utility_per_round,
        liar_utility_per_round,
        innocent_drops: output.summary.innocent_drops,
        liars_survived: output.summary.liars_survived,
        total_dropouts: output.summary.total_dropouts,
        mean_utility_honest: output.summary.mean_utility_reliable,
        mean_utility_liars: output.summary.mean_utility_unreliable,
    }
}

/// Runs one simulation. `config_json` is a (possibly partial) run
/// configuration; missing fields take the defaults. Returns plot-ready
/// per-client reliability trajectories, accuracy curves, and utilities, or
/// `{"error": ...}`.
#[wasm_bindgen]
pub fn run_simulation(config_json: &str) -> String {
    let config = match parse_config(config_json) {
        Ok(c) => c,
        Err(e) => return err_json(e),
    };
    match run(&config) {
        Ok(output) => serde_json::to_string(&simulation_result(&output))
            .unwrap_or_else(err_json),
        Err(e) => err_json(e),
    }
}

#[derive(Serialize)]
struct SweepRow {
    threshold: f64,
    test_accuracy: f64,
    innocent_drops: usize,
    liars_survived: usize,
    total_dropouts: usize,
}

/// Reruns the configuration at each comma-separated reliability threshold
/// and tabulates the outcomes.
#[wasm_bindgen]
pub fn threshold_sweep(config_json: &str, thresholds: &str) -> String {
    let base = match parse_config(config_json) {
        Ok(c) => c,
        Err(e) => return err_json(e),
    };
    let mut rows = Vec::new();
    for part in thresholds.split(',') {
        let threshold: f64 = match part.trim().parse() {
            Ok(t) => t,
            Err(_) => return err_json(format!("bad threshold '{part}'")),
        };
        let mut config = base.clone();
        config.bands.reliability_threshold = threshold;
        match run(&config) {
            Ok(output) => rows.push(SweepRow {
                threshold,
                test_accuracy: output.summary.final_test_accuracy,
                innocent_drops: output.summary.innocent_drops,
                liars_survived: output.summary.liars_survived,
                total_dropouts: output.summary.total_dropouts,
            }),
            Err(e) => return err_json(e),
        }
    }
    serde_json::to_string(&rows).unwrap_or_else(err_json)
}

#[derive(Serialize)]
struct SleExplorerResult {
    leverage: Vec<f64>,
    weights: Vec<f64>,
    uniform: f64,
}

/// SLE weights for a population of `num_clients` where `num_rare` clients
/// push along their own axes and the rest share one direction. Shows how
/// ridge leverage amplifies rare update directions.
#[wasm_bindgen]
pub fn sle_explorer(num_clients: usize, num_rare: usize, lambda: f64) -> String {
    if num_clients < 2 || num_rare >= num_clients {
        return err_json("need num_clients >= 2 and num_rare < num_clients");
    }
    if lambda < 0.0 {
        return err_json("lambda must be nonnegative");
    }
    let dim = num_rare + 1;
    let mut updates = Vec::with_capacity(num_clients);
    for _ in 0..num_clients - num_rare {
        let mut values = vec![0.0; dim];
        values[0] = 1.0;
        updates.push(ModelVector::new(values).expect("finite"));
    }
    for rare in 0..num_rare {
        let mut values = vec![0.0; dim];
        values[rare + 1] = 1.0;
        updates.push(ModelVector::new(values).expect("finite"));
    }
    match sle_weights(&updates, &SleParams { lambda_ridge: lambda }) {
        Ok(w) => serde_json::to_string(&SleExplorerResult {
            leverage: w.leverage,
            weights: w.weights,
            uniform: 1.0 / num_clients as f64,
        })
        .unwrap_or_else(err_json),
        Err(e) => err_json(e),
    }
}
