//! Implementations behind the `simulate`, `offline` and `sample`
//! subcommands.

use std::io::Write;

use anyhow::{bail, Context, Result};
use kgossip::engine::{run_simulation, SimOptions};
use kgossip::offline::{algorithm1, algorithm2, algorithm3_derandomize, hub_schedule};
use kgossip::sampling::{sample_symdiff, SampleOutcome, SamplingParams, SequenceGenerator};
use kgossip::schedule::{validate_schedule, GoalSpec, Verdict};
use kgossip::{GraphSequence, RunRng, Schedule, TokenDistribution, TokenSet};

use crate::csv;
use crate::spec::{resolve_init, InitSource};

pub struct SimulateArgs {
    pub n: usize,
    pub k: usize,
    pub adversary: kgossip::engine::AdversarySpec,
    pub protocol: kgossip::engine::ProtocolSpec,
    pub init: InitSource,
    pub max_rounds: usize,
    pub seed: u64,
    pub green_fraction: f64,
    pub out_dir: std::path::PathBuf,
}

pub fn simulate(args: &SimulateArgs) -> Result<bool> {
    let rng = RunRng::new(args.seed);
    let init = resolve_init(&args.init, args.n, args.k, &rng)?;
    let trace = run_simulation(
        &args.adversary,
        &args.protocol,
        init,
        args.max_rounds,
        &rng,
        SimOptions {
            green_fraction: args.green_fraction,
            ..SimOptions::default()
        },
    )?;
    let path = args.out_dir.join(format!(
        "trace_n{}_k{}_seed{}.csv",
        args.n, args.k, args.seed
    ));
    csv::write_trace(&path, &trace)?;
    let completion = trace
        .completion_round
        .map(|r| r.to_string())
        .unwrap_or_else(|| "timeout".to_string());
    println!(
        "n={} k={} seed={} rounds={} completion={} final_missing={} max_witness={} trace={}",
        args.n,
        args.k,
        args.seed,
        trace.records.len(),
        completion,
        trace.final_missing,
        trace.max_witness_size(),
        path.display()
    );
    Ok(trace.completion_round.is_some())
}

fn token_sources_from(init: &TokenDistribution) -> Result<Vec<usize>> {
    (0..init.k())
        .map(|t| {
            (0..init.n())
                .find(|&v| init.node(v).contains(t))
                .with_context(|| format!("token {t} has no source node"))
        })
        .collect()
}

pub struct OfflineArgs {
    pub mode: String,
    pub graphs: std::path::PathBuf,
    pub init: InitSource,
    pub k: Option<usize>,
    pub seed: u64,
    pub out: Option<std::path::PathBuf>,
    pub summary: Option<std::path::PathBuf>,
    pub out_dir: std::path::PathBuf,
    pub validate: bool,
    pub c1: usize,
}

pub fn offline(args: &OfflineArgs) -> Result<bool> {
    let file = std::fs::File::open(&args.graphs)
        .with_context(|| format!("cannot open {}", args.graphs.display()))?;
    let graphs = GraphSequence::read_from(
        std::io::BufReader::new(file),
        &args.graphs.to_string_lossy(),
    )?;
    let n = graphs.n();
    let k = match (&args.init, args.k) {
        (InitSource::File(path), _) => {
            let file = std::fs::File::open(path)?;
            TokenDistribution::read_from(std::io::BufReader::new(file), &path.to_string_lossy())?
                .k()
        }
        (_, Some(k)) => k,
        (_, None) => bail!("--k is required when --init is not a file"),
    };
    let rng = RunRng::new(args.seed);
    let init = resolve_init(&args.init, n, k, &rng)?;

    let mut phase_flows = String::new();
    let mut phase_retries = String::new();
    let mut hubs = String::new();
    let rounds_used;

    let schedule: Schedule = match args.mode.as_str() {
        "multiport" => {
            let result = algorithm1(&graphs, &init, &rng, args.c1)?;
            phase_flows = join(&result.phase_flows);
            phase_retries = join(&result.phase_retries);
            rounds_used = result.rounds_used;
            result.schedule
        }
        "broadcast" => {
            let sources = token_sources_from(&init)?;
            let result = algorithm2(&graphs, &sources, &rng)?;
            hubs = join(&result.hubs);
            rounds_used = result.rounds_used;
            result.schedule
        }
        "derandomize" => {
            let sources = token_sources_from(&init)?;
            let result = algorithm3_derandomize(&graphs, k)?;
            hubs = join(&result.hubs);
            rounds_used = result.gather_rounds + k * result.flood_window;
            hub_schedule(
                &graphs,
                &sources,
                &result.hubs,
                result.q_total,
                result.flood_window,
            )?
        }
        other => bail!("unknown offline mode `{other}`"),
    };

    if let Some(out) = &args.out {
        if let Some(dir) = out.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let mut file = std::io::BufWriter::new(std::fs::File::create(out)?);
        schedule.write_to(&mut file)?;
    }

    let verdict = if args.validate {
        Some(validate_schedule(
            &schedule,
            &graphs,
            &init,
            &GoalSpec::AllNodesAllTokens,
        )?)
    } else {
        None
    };
    let valid = verdict.as_ref().map(Verdict::is_ok);

    {
        let summary = args
            .summary
            .clone()
            .unwrap_or_else(|| args.out_dir.join("offline_summary.csv"));
        let mut out = csv::create(&summary)?;
        writeln!(
            out,
            "mode,n,k,seed,length,rounds_used,phase_flows,phase_retries,hubs,valid"
        )?;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            args.mode,
            n,
            k,
            args.seed,
            schedule.length(),
            rounds_used,
            phase_flows,
            phase_retries,
            hubs,
            valid.map(|v| v.to_string()).unwrap_or_default()
        )?;
    }

    match &verdict {
        Some(Verdict::Ok) => println!(
            "mode={} n={n} k={k} length={} valid=true",
            args.mode,
            schedule.length()
        ),
        Some(v) => println!(
            "mode={} n={n} k={k} length={} valid=false ({v:?})",
            args.mode,
            schedule.length()
        ),
        None => println!(
            "mode={} n={n} k={k} length={}",
            args.mode,
            schedule.length()
        ),
    }
    Ok(valid.unwrap_or(true))
}

fn join<T: ToString>(items: &[T]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(";")
}

pub fn parse_generator(s: &str, params: &SamplingParams) -> Result<SequenceGenerator> {
    Ok(match s {
        "true-random" => SequenceGenerator::TrueRandom,
        "prf" => SequenceGenerator::default_prf(params),
        other => {
            if let Some(bits) = other.strip_prefix("prf:") {
                SequenceGenerator::KeyedPrf {
                    seed_bits: bits.parse().context("bad seed bit count")?,
                }
            } else {
                bail!("unknown generator `{other}`");
            }
        }
    })
}

pub struct SampleArgs {
    pub k: usize,
    pub eps: f64,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub gen: String,
    pub trials: u64,
    pub seed: u64,
    pub out_dir: std::path::PathBuf,
}

pub fn sample(args: &SampleArgs) -> Result<bool> {
    let params = SamplingParams::new(args.k, args.eps);
    let generator = parse_generator(&args.gen, &params)?;
    let a = TokenSet::from_ids(args.k, args.a.iter().copied());
    let b = TokenSet::from_ids(args.k, args.b.iter().copied());
    let rng = RunRng::new(args.seed);

    let mut counts = vec![0u64; args.k];
    let mut empty = 0u64;
    let mut bits_total = Vec::with_capacity(args.trials as usize);
    let mut bits_alice = 0u64;
    let mut bits_bob = 0u64;
    for trial in 0..args.trials {
        let mut stream = rng.stream("sample-trial", &[trial]);
        let (outcome, transcript) = sample_symdiff(&a, &b, args.eps, &generator, &mut stream);
        match outcome {
            SampleOutcome::Element(e) => counts[e] += 1,
            SampleOutcome::Empty => empty += 1,
        }
        bits_total.push(transcript.total_bits() as u64);
        bits_alice += transcript.bits_alice_to_bob as u64;
        bits_bob += transcript.bits_bob_to_alice as u64;
    }

    let hist_path = args.out_dir.join("sample_hist.csv");
    let mut out = csv::create(&hist_path)?;
    writeln!(out, "element,count,frequency")?;
    for (e, &c) in counts.iter().enumerate() {
        if c > 0 {
            writeln!(out, "{e},{c},{}", c as f64 / args.trials as f64)?;
        }
    }
    writeln!(out, "empty,{empty},{}", empty as f64 / args.trials as f64)?;

    let bits_path = args.out_dir.join("sample_bits.csv");
    let mut out = csv::create(&bits_path)?;
    writeln!(out, "metric,value")?;
    writeln!(out, "trials,{}", args.trials)?;
    writeln!(out, "d,{}", params.d)?;
    writeln!(out, "alpha,{}", params.alpha)?;
    let min = bits_total.iter().min().copied().unwrap_or(0);
    let max = bits_total.iter().max().copied().unwrap_or(0);
    let mean = bits_total.iter().sum::<u64>() as f64 / args.trials.max(1) as f64;
    writeln!(out, "bits_total_min,{min}")?;
    writeln!(out, "bits_total_mean,{mean}")?;
    writeln!(out, "bits_total_max,{max}")?;
    writeln!(
        out,
        "bits_alice_to_bob_mean,{}",
        bits_alice as f64 / args.trials.max(1) as f64
    )?;
    writeln!(
        out,
        "bits_bob_to_alice_mean,{}",
        bits_bob as f64 / args.trials.max(1) as f64
    )?;

    println!(
        "k={} eps={} trials={} empty={} mean_bits={:.1} hist={} bits={}",
        args.k,
        args.eps,
        args.trials,
        empty,
        mean,
        hist_path.display(),
        bits_path.display()
    );
    Ok(true)
}
