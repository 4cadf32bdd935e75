use std::path::PathBuf;

use anyhow::Result;
use clap::{Parser, Subcommand};

use kgossip_cli::commands::{self, OfflineArgs, SampleArgs, SimulateArgs};
use kgossip_cli::experiment::{parse_overrides, run_experiment, ExperimentConfig, SCENARIOS};
use kgossip_cli::spec;

/// Simulation laboratory and offline schedulers for k-token dissemination
/// on adversarial dynamic networks.
#[derive(Parser)]
#[command(name = "kgossip", version, about, long_about = None)]
struct Cli {
    /// Root seed; all randomized behavior derives from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Directory for CSV and schedule artifacts.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Worker threads for sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one adversary/protocol simulation and write its trace CSV.
    ///
    /// Trace columns: round,progress,missing_total,groups,inter_group_edges,
    /// witness_size,color.
    Simulate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        /// strong | rotating | static-path | static-star | static-clique |
        /// random:<p> | tree | file:<path>
        #[arg(long)]
        adversary: String,
        /// symdiff | symdiff-oriented | det-symdiff | bcast:random |
        /// bcast:round-robin | bcast:min-id | bcast:flood
        #[arg(long)]
        protocol: String,
        /// well-mixed:<p> | singleton | all-at-one:<v> | file:<path>
        #[arg(long)]
        init: String,
        #[arg(long, default_value_t = 10_000)]
        max_rounds: usize,
        /// Fraction of a node's missing tokens that colors a round green.
        #[arg(long, default_value_t = 0.125)]
        green_fraction: f64,
    },
    /// Compute an offline schedule from a graph-sequence file.
    Offline {
        /// multiport | broadcast | derandomize
        #[arg(long)]
        mode: String,
        /// Graph-sequence file: `n L` header, then `round r m` blocks of
        /// `u v` lines.
        #[arg(long)]
        graphs: PathBuf,
        /// well-mixed:<p> | singleton | all-at-one:<v> | file:<path>
        #[arg(long)]
        init: String,
        /// Token count (required unless --init is a file).
        #[arg(long)]
        k: Option<usize>,
        /// Schedule file to write: `mode ...` header, then `r u v t` lines.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replay the schedule and check feasibility plus the goal.
        #[arg(long)]
        validate: bool,
        /// Summary CSV (length, per-phase flows, retries, hubs).
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Phase window constant for the multiport scheduler.
        #[arg(long, default_value_t = 4)]
        c1: usize,
    },
    /// Run the two-party symmetric-difference sampler and report the
    /// element histogram plus transcript-bit statistics.
    Sample {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        eps: f64,
        /// Comma-separated token ids held by Alice.
        #[arg(long, alias = "A", default_value = "")]
        a: String,
        /// Comma-separated token ids held by Bob.
        #[arg(long, alias = "B", default_value = "")]
        b: String,
        /// true-random | prf | prf:<seedbits>
        #[arg(long, default_value = "true-random")]
        gen: String,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
    },
    /// Run a registered experiment scenario.
    ///
    /// Scenarios: symdiff-scaling, strong-adversary, det-symdiff-lb,
    /// offline-multiport, offline-broadcast, derandomize, sample-dist.
    Experiment {
        scenario: String,
        /// Optional `key = value` config file; --set pairs override it.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Inline overrides, e.g. --set seeds=5 --set n=64.
        #[arg(long = "set")]
        sets: Vec<String>,
    },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let ok = match cli.command {
        Command::Simulate {
            n,
            k,
            adversary,
            protocol,
            init,
            max_rounds,
            green_fraction,
        } => commands::simulate(&SimulateArgs {
            n,
            k,
            adversary: spec::parse_adversary(&adversary)?,
            protocol: spec::parse_protocol(&protocol)?,
            init: spec::parse_init(&init)?,
            max_rounds,
            seed: cli.seed,
            green_fraction,
            out_dir: cli.out_dir,
        })?,
        Command::Offline {
            mode,
            graphs,
            init,
            k,
            out,
            validate,
            summary,
            c1,
        } => commands::offline(&OfflineArgs {
            mode,
            graphs,
            init: spec::parse_init(&init)?,
            k,
            seed: cli.seed,
            out,
            summary,
            out_dir: cli.out_dir,
            validate,
            c1,
        })?,
        Command::Sample {
            k,
            eps,
            a,
            b,
            gen,
            trials,
        } => commands::sample(&SampleArgs {
            k,
            eps,
            a: spec::parse_token_list(&a)?,
            b: spec::parse_token_list(&b)?,
            gen,
            trials,
            seed: cli.seed,
            out_dir: cli.out_dir,
        })?,
        Command::Experiment {
            scenario,
            config,
            sets,
        } => {
            if !SCENARIOS.contains(&scenario.as_str()) {
                anyhow::bail!("unknown scenario `{scenario}`; registered: {SCENARIOS:?}");
            }
            let overrides = parse_overrides(config.as_deref(), &sets)?;
            let outcome = run_experiment(&ExperimentConfig {
                scenario: scenario.clone(),
                seed: cli.seed,
                out_dir: cli.out_dir,
                jobs: cli.jobs.max(1),
                overrides,
            })?;
            println!(
                "scenario={} rows={} ok={} summary={}",
                scenario,
                outcome.rows,
                outcome.ok,
                outcome.summary_path.display()
            );
            outcome.ok
        }
    };
    if !ok {
        std::process::exit(1);
    }
    Ok(())
}
