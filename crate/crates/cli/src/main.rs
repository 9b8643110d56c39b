//! `murim` — experiment runner for the reputation-based FL simulator.
//!
//! Subcommands: `run` a single configuration, `sweep` a grid of thresholds /
//! client counts / liar fractions over a base configuration, or measure an
//! `attack` against a clean twin. Reports land in the output directory as
//! `summary.csv`, `rounds.csv`, and `config.json`.

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use murim_core::attacks::AttackKind;
use murim_core::report::{parse_config, write_run_report, write_sweep_report, ReportFormat};
use murim_core::simulator::{attack_experiment, run, RunConfig, RunOutput};

/// Environment variable naming the default output directory.
const OUT_DIR_ENV: &str = "MURIM_OUT_DIR";

#[derive(Parser)]
#[command(name = "murim", version, about = "Reputation-based federated learning simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Configuration file (JSON). `-` reads stdin; omitted means defaults.
    #[arg(long)]
    config: Option<String>,

    /// Override the configuration's seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Output directory (default: $MURIM_OUT_DIR or ./murim-out).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Report format for the tabular files.
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one run and write its report.
    Run(CommonArgs),

    /// Run a grid over thresholds, client counts, and liar fractions.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,

        /// Reliability thresholds, comma separated (e.g. 0.1,0.25,0.35).
        #[arg(long, value_delimiter = ',')]
        thresholds: Vec<f64>,

        /// Client counts, comma separated.
        #[arg(long, value_delimiter = ',')]
        clients: Vec<usize>,

        /// Liar fractions, comma separated.
        #[arg(long, value_delimiter = ',')]
        liar_fractions: Vec<f64>,

        /// Seeds per grid point; run i uses base seed + i.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
    },

    /// Run the configured attack and its clean twin; report the accuracy drop.
    Attack {
        #[command(flatten)]
        common: CommonArgs,

        /// Attack kind: mpa or nga (overrides the config).
        #[arg(long)]
        kind: Option<String>,
    },
}

fn load_config(common: &CommonArgs) -> Result<RunConfig, murim_core::Error> {
    let mut config = match common.config.as_deref() {
        None => RunConfig::default(),
        Some("-") => {
            let mut text = String::new();
            std::io::stdin().read_to_string(&mut text)?;
            parse_config(&text)?
        }
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            parse_config(&text)?
        }
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn out_dir(common: &CommonArgs) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("murim-out"))
}

fn print_summary(label: &str, output: &RunOutput) {
    let s = &output.summary;
    println!(
        "{label}: rounds {} test_acc {:.4} dropouts {} (innocent {}, liars survived {}){}",
        s.rounds_completed,
        s.final_test_accuracy,
        s.total_dropouts,
        s.innocent_drops,
        s.liars_survived,
        s.delta_acc_vs_clean
            .map(|d| format!(" delta_acc {d:+.4}"))
            .unwrap_or_default()
    );
}

fn cmd_run(common: CommonArgs) -> Result<(), murim_core::Error> {
    let config = load_config(&common)?;
    let format: ReportFormat = common.format.parse()?;
    let output = run(&config)?;
    let dir = out_dir(&common);
    let written = write_run_report(&dir, "run", &output, format)?;
    print_summary("run", &output);
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_sweep(
    common: CommonArgs,
    thresholds: Vec<f64>,
    clients: Vec<usize>,
    liar_fractions: Vec<f64>,
    seeds: u64,
) -> Result<(), murim_core::Error> {
    let base = load_config(&common)?;
    let format: ReportFormat = common.format.parse()?;
    if seeds == 0 {
        return Err(murim_core::Error::Config("--seeds must be positive".into()));
    }
    // Missing axes keep the base value; present axes form a grid.
    let thresholds = if thresholds.is_empty() {
        vec![base.bands.reliability_threshold]
    } else {
        thresholds
    };
    let clients = if clients.is_empty() {
        vec![base.num_clients]
    } else {
        clients
    };
    let liar_fractions = if liar_fractions.is_empty() {
        vec![base.liar_fraction]
    } else {
        liar_fractions
    };
    let mut configs = Vec::new();
    for &threshold in &thresholds {
        for &num_clients in &clients {
            for &liar_fraction in &liar_fractions {
                for offset in 0..seeds {
                    let mut config = base.clone();
                    config.bands.reliability_threshold = threshold;
                    config.num_clients = num_clients;
                    config.liar_fraction = liar_fraction;
                    config.seed = base.seed + offset;
                    configs.push(config);
                }
            }
        }
    }
    let results: Vec<(String, Result<RunOutput, murim_core::Error>)> = configs
        .par_iter()
        .enumerate()
        .map(|(i, config)| (format!("run_{i:03}"), run(config)))
        .collect();
    let mut entries = Vec::new();
    let mut failed = 0usize;
    for (label, result) in results {
        match result {
            Ok(output) => entries.push((label, output)),
            Err(e) => {
                failed += 1;
                eprintln!("{label}: {e}");
            }
        }
    }
    if entries.is_empty() {
        return Err(murim_core::Error::Protocol(
            "every sweep entry failed".into(),
        ));
    }
    let dir = out_dir(&common);
    write_sweep_report(&dir, &entries, format)?;
    for (label, output) in &entries {
        print_summary(label, output);
    }
    println!(
        "sweep complete: {} runs ({failed} failed), report in {}",
        entries.len(),
        dir.display()
    );
    Ok(())
}

fn cmd_attack(common: CommonArgs, kind: Option<String>) -> Result<(), murim_core::Error> {
    let mut config = load_config(&common)?;
    let format: ReportFormat = common.format.parse()?;
    if let Some(kind) = kind {
        config.attack.kind = match kind.to_ascii_lowercase().as_str() {
            "mpa" => AttackKind::Mpa,
            "nga" => AttackKind::Nga,
            "none" => AttackKind::None,
            other => {
                return Err(murim_core::Error::Config(format!(
                    "unknown attack kind '{other}' (expected mpa, nga, or none)"
                )))
            }
        };
    }
    let outcome = attack_experiment(&config)?;
    let dir = out_dir(&common);
    let entries = vec![
        ("clean".to_string(), outcome.clean),
        ("attacked".to_string(), outcome.attacked),
    ];
    write_sweep_report(&dir, &entries, format)?;
    print_summary("clean", &entries[0].1);
    print_summary("attacked", &entries[1].1);
    println!("delta_acc (clean - attacked): {:+.4}", outcome.delta_acc);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(common) => cmd_run(common),
        Command::Sweep {
            common,
            thresholds,
            clients,
            liar_fractions,
            seeds,
        } => cmd_sweep(common, thresholds, clients, liar_fractions, seeds),
        Command::Attack { common, kind } => cmd_attack(common, kind),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
