//! Registered experiment scenarios and the sweep runner.
//!
//! Every scenario reads its parameters from an override map (config file
//! plus `--set` pairs), derives all randomness from the root seed, and
//! emits one trace CSV per run plus a summary CSV. Runs inside a sweep may
//! execute on worker threads; outputs are assembled in run order so
//! identical configurations produce byte-identical artifacts.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{bail, Context, Result};
use kgossip::adversary::GraphFamily;
use kgossip::dist::InitSpec;
use kgossip::engine::{run_simulation, AdversarySpec, ProtocolSpec, SimOptions};
use kgossip::offline::{
    algorithm1, algorithm2, algorithm3_derandomize, flood_window, hub_count, hub_schedule,
    round_budget, DEFAULT_PHASE_CONSTANT,
};
use kgossip::sampling::{sample_symdiff, SampleOutcome, SamplingParams, SequenceGenerator};
use kgossip::schedule::{validate_schedule, GoalSpec};
use kgossip::{init_distribution, RunRng, TokenSet};

use crate::csv::{self, SummaryRow};

pub const SCENARIOS: &[&str] = &[
    "symdiff-scaling",
    "strong-adversary",
    "det-symdiff-lb",
    "offline-multiport",
    "offline-broadcast",
    "derandomize",
    "sample-dist",
];

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub scenario: String,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub jobs: usize,
    pub overrides: BTreeMap<String, String>,
}

#[derive(Debug)]
pub struct ExperimentOutcome {
    pub summary_path: PathBuf,
    pub rows: usize,
    /// False when a run missed its budget and the scenario does not expect
    /// timeouts; drives the exit code.
    pub ok: bool,
}

pub fn parse_overrides(
    config_file: Option<&Path>,
    sets: &[String],
) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    if let Some(path) = config_file {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))?;
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').with_context(|| {
                format!("{}:{}: expected `key = value`", path.display(), idx + 1)
            })?;
            map.insert(key.trim().to_string(), value.trim().to_string());
        }
    }
    for pair in sets {
        let (key, value) = pair
            .split_once('=')
            .with_context(|| format!("--set `{pair}`: expected `key=value`"))?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

struct Params<'a>(&'a BTreeMap<String, String>);

impl Params<'_> {
    fn usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.0.get(key) {
            Some(v) => v.parse().with_context(|| format!("bad `{key}` = `{v}`")),
            None => Ok(default),
        }
    }

    fn u64(&self, key: &str, default: u64) -> Result<u64> {
        match self.0.get(key) {
            Some(v) => v.parse().with_context(|| format!("bad `{key}` = `{v}`")),
            None => Ok(default),
        }
    }

    fn f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.0.get(key) {
            Some(v) => v.parse().with_context(|| format!("bad `{key}` = `{v}`")),
            None => Ok(default),
        }
    }

    fn usize_list(&self, key: &str, default: &[usize]) -> Result<Vec<usize>> {
        match self.0.get(key) {
            Some(v) => v
                .split(',')
                .map(|p| {
                    p.trim()
                        .parse()
                        .with_context(|| format!("bad `{key}` entry `{p}`"))
                })
                .collect(),
            None => Ok(default.to_vec()),
        }
    }

    fn string(&self, key: &str, default: &str) -> String {
        self.0
            .get(key)
            .cloned()
            .unwrap_or_else(|| default.to_string())
    }
}

/// Runs `f` over `0..count` on up to `jobs` threads, returning results in
/// index order.
pub fn parallel_map<T, F>(jobs: usize, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    if jobs <= 1 || count <= 1 {
        return (0..count).map(f).collect();
    }
    let slots: Vec<Mutex<Option<T>>> = (0..count).map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(count) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= count {
                    break;
                }
                let value = f(i);
                *slots[i].lock().unwrap() = Some(value);
            });
        }
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().unwrap().expect("worker filled every slot"))
        .collect()
}

fn ceil_log2(n: usize) -> usize {
    n.next_power_of_two().trailing_zeros() as usize
}

/// Round budget for the symmetric-difference protocol runs.
pub fn symdiff_round_budget(n: usize, k: usize) -> usize {
    4 * (n + k) * ceil_log2(n).max(1) * ceil_log2(k).max(1)
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let dir = config.out_dir.join(&config.scenario);
    std::fs::create_dir_all(&dir)?;
    let params = Params(&config.overrides);
    match config.scenario.as_str() {
        "symdiff-scaling" => symdiff_scaling(config, &dir, &params),
        "strong-adversary" => strong_adversary(config, &dir, &params),
        "det-symdiff-lb" => det_symdiff_lb(config, &dir, &params),
        "offline-multiport" => offline_multiport(config, &dir, &params),
        "offline-broadcast" => offline_broadcast(config, &dir, &params),
        "derandomize" => derandomize(config, &dir, &params),
        "sample-dist" => sample_dist(config, &dir, &params),
        other => bail!("unknown scenario `{other}`; registered: {SCENARIOS:?}"),
    }
}

fn symdiff_scaling(
    config: &ExperimentConfig,
    dir: &Path,
    params: &Params,
) -> Result<ExperimentOutcome> {
    let sizes = params.usize_list("sizes", &[32, 64, 128])?;
    let seeds = params.u64("seeds", 10)?;
    let edge_prob = params.f64("edge_prob", 0.05)?;
    let init_p = params.f64("init_p", 0.5)?;

    let cases: Vec<(usize, u64)> = sizes
        .iter()
        .flat_map(|&n| (0..seeds).map(move |s| (n, s)))
        .collect();
    let root = RunRng::new(config.seed);
    let runs = parallel_map(config.jobs, cases.len(), |i| {
        let (n, seed) = cases[i];
        let rng = root.child("run", &[n as u64, seed]);
        let init = init_distribution(&InitSpec::WellMixed { p: init_p }, n, n, &rng)?;
        let trace = run_simulation(
            &AdversarySpec::Oblivious(GraphFamily::RandomConnected(edge_prob)),
            &ProtocolSpec::SymDiff,
            init,
            symdiff_round_budget(n, n),
            &rng,
            SimOptions::default(),
        )?;
        Ok::<_, anyhow::Error>((n, seed, trace))
    });

    let mut rows = Vec::new();
    let mut ok = true;
    for run in runs {
        let (n, seed, trace) = run?;
        csv::write_trace(&dir.join(format!("trace_n{n}_k{n}_seed{seed}.csv")), &trace)?;
        ok &= trace.completion_round.is_some();
        rows.push(SummaryRow {
            n,
            k: n,
            seed,
            trace,
        });
    }
    let summary_path = dir.join("summary.csv");
    csv::write_summary(&summary_path, &rows)?;
    Ok(ExperimentOutcome {
        summary_path,
        rows: rows.len(),
        ok,
    })
}

fn strong_adversary(
    config: &ExperimentConfig,
    dir: &Path,
    params: &Params,
) -> Result<ExperimentOutcome> {
    let n = params.usize("n", 128)?;
    let k = params.usize("k", 128)?;
    let seeds = params.u64("seeds", 100)?;
    let init_p = params.f64("init_p", 0.75)?;
    let max_rounds = params.usize("max_rounds", 150)?;
    let protocol = crate::spec::parse_protocol(&params.string("protocol", "bcast:random"))?;

    let root = RunRng::new(config.seed);
    let runs = parallel_map(config.jobs, seeds as usize, |i| {
        let seed = i as u64;
        let rng = root.child("run", &[seed]);
        let init = init_distribution(&InitSpec::WellMixed { p: init_p }, n, k, &rng)?;
        let trace = run_simulation(
            &AdversarySpec::Strong,
            &protocol,
            init,
            max_rounds,
            &rng,
            SimOptions::default(),
        )?;
        Ok::<_, anyhow::Error>((seed, trace))
    });

    let witness_cap = (5.0 * (n as f64).log2()).ceil() as usize;
    let mut rows = Vec::new();
    let mut within_cap = 0usize;
    for run in runs {
        let (seed, trace) = run?;
        csv::write_trace(&dir.join(format!("trace_n{n}_k{k}_seed{seed}.csv")), &trace)?;
        if trace.max_witness_size() <= witness_cap {
            within_cap += 1;
        }
        rows.push(SummaryRow { n, k, seed, trace });
    }
    let summary_path = dir.join("summary.csv");
    csv::write_summary(&summary_path, &rows)?;
    // timeouts are expected here; the witness-size profile is the product
    let ok = within_cap * 100 >= rows.len() * 95;
    Ok(ExperimentOutcome {
        summary_path,
        rows: rows.len(),
        ok,
    })
}

fn det_symdiff_lb(
    config: &ExperimentConfig,
    dir: &Path,
    params: &Params,
) -> Result<ExperimentOutcome> {
    let n = params.usize("n", 10)?;
    let k = params.usize("k", 5)?;
    let seeds = params.u64("seeds", 1)?;
    let max_rounds = params.usize("max_rounds", n * k + 10)?;
    let floor = k * ((n - 2) / 2 + 1);

    let root = RunRng::new(config.seed);
    let mut rows = Vec::new();
    let mut ok = true;
    for seed in 0..seeds {
        let rng = root.child("run", &[seed]);
        let init = init_distribution(&InitSpec::AllAtOne { node: 0 }, n, k, &rng)?;
        let trace = run_simulation(
            &AdversarySpec::RotatingLine,
            &ProtocolSpec::DetSymDiff,
            init,
            max_rounds,
            &rng,
            SimOptions::default(),
        )?;
        csv::write_trace(&dir.join(format!("trace_n{n}_k{k}_seed{seed}.csv")), &trace)?;
        ok &= trace.completion_round.map(|r| r >= floor).unwrap_or(false);
        rows.push(SummaryRow { n, k, seed, trace });
    }
    let summary_path = dir.join("summary.csv");
    csv::write_summary(&summary_path, &rows)?;
    Ok(ExperimentOutcome {
        summary_path,
        rows: rows.len(),
        ok,
    })
}

struct OfflineRow {
    n: usize,
    k: usize,
    seed: u64,
    length: usize,
    bound: usize,
    detail: String,
    valid: bool,
}

fn write_offline_summary(path: &Path, header: &str, rows: &[OfflineRow]) -> Result<()> {
    let mut out = csv::create(path)?;
    writeln!(out, "{header}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.n, r.k, r.seed, r.length, r.bound, r.detail, r.valid
        )?;
    }
    Ok(())
}

fn offline_multiport(
    config: &ExperimentConfig,
    dir: &Path,
    params: &Params,
) -> Result<ExperimentOutcome> {
    let n = params.usize("n", 32)?;
    let k = params.usize("k", 32)?;
    let instances = params.usize("instances", 20)?;
    let edge_prob = params.f64("edge_prob", 0.1)?;
    let c1 = params.usize("c1", DEFAULT_PHASE_CONSTANT)?;
    let bound = round_budget(n, k, c1);

    let root = RunRng::new(config.seed);
    let runs = parallel_map(config.jobs, instances, |i| {
        let seed = i as u64;
        let rng = root.child("instance", &[seed]);
        let graphs = kgossip::adversary::oblivious_sequence(
            &GraphFamily::RandomConnected(edge_prob),
            n,
            bound,
            &rng,
        )?;
        let assignment: Vec<usize> = (0..k).map(|t| t % n).collect();
        let init = init_distribution(&InitSpec::Singleton { assignment }, n, k, &rng)?;
        let result = algorithm1(&graphs, &init, &rng, c1)?;
        let verdict = validate_schedule(
            &result.schedule,
            &graphs,
            &init,
            &GoalSpec::AllNodesAllTokens,
        )?;
        let valid = verdict.is_ok()
            && result.schedule.length() <= bound
            && result.phase_retries.iter().all(|&r| r <= 3);
        let detail = format!(
            "flows {} retries {}",
            result
                .phase_flows
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(";"),
            result
                .phase_retries
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(";")
        );
        Ok::<_, anyhow::Error>(OfflineRow {
            n,
            k,
            seed,
            length: result.schedule.length(),
            bound,
            detail,
            valid,
        })
    });

    let rows: Vec<OfflineRow> = runs.into_iter().collect::<Result<_>>()?;
    let ok = rows.iter().all(|r| r.valid);
    let summary_path = dir.join("summary.csv");
    write_offline_summary(&summary_path, "n,k,seed,length,bound,detail,valid", &rows)?;
    Ok(ExperimentOutcome {
        summary_path,
        rows: rows.len(),
        ok,
    })
}

fn offline_broadcast(
    config: &ExperimentConfig,
    dir: &Path,
    params: &Params,
) -> Result<ExperimentOutcome> {
    let ns = params.usize_list("ns", &[32, 64])?;
    let ks = params.usize_list("ks", &[8, 16])?;
    if ns.len() != ks.len() {
        bail!("`ns` and `ks` must have equal length");
    }
    let instances = params.usize("instances", 20)?;
    let edge_prob = params.f64("edge_prob", 0.1)?;

    let cases: Vec<(usize, usize, u64)> = ns
        .iter()
        .zip(&ks)
        .flat_map(|(&n, &k)| (0..instances as u64).map(move |s| (n, k, s)))
        .collect();
    let root = RunRng::new(config.seed);
    let runs = parallel_map(config.jobs, cases.len(), |i| {
        let (n, k, seed) = cases[i];
        let rng = root.child("instance", &[n as u64, k as u64, seed]);
        let q = hub_count(n, k);
        let window = flood_window(n, k);
        let bound = q * (n + k) + k * window;
        let graphs = kgossip::adversary::oblivious_sequence(
            &GraphFamily::RandomConnected(edge_prob),
            n,
            bound,
            &rng,
        )?;
        let sources: Vec<usize> = (0..k).map(|t| t % n).collect();
        let result = algorithm2(&graphs, &sources, &rng)?;
        let assignment = sources.clone();
        let init = init_distribution(&InitSpec::Singleton { assignment }, n, k, &rng)?;
        let verdict = validate_schedule(
            &result.schedule,
            &graphs,
            &init,
            &GoalSpec::AllNodesAllTokens,
        )?;
        let valid = verdict.is_ok() && result.schedule.length() <= bound;
        Ok::<_, anyhow::Error>(OfflineRow {
            n,
            k,
            seed,
            length: result.schedule.length(),
            bound,
            detail: format!("hubs {}", result.hubs.len()),
            valid,
        })
    });

    let rows: Vec<OfflineRow> = runs.into_iter().collect::<Result<_>>()?;
    let ok = rows.iter().all(|r| r.valid);
    let summary_path = dir.join("summary.csv");
    write_offline_summary(&summary_path, "n,k,seed,length,bound,detail,valid", &rows)?;
    Ok(ExperimentOutcome {
        summary_path,
        rows: rows.len(),
        ok,
    })
}

fn derandomize(
    config: &ExperimentConfig,
    dir: &Path,
    params: &Params,
) -> Result<ExperimentOutcome> {
    let n = params.usize("n", 32)?;
    let k = params.usize("k", 8)?;
    let instances = params.usize("instances", 10)?;
    let edge_prob = params.f64("edge_prob", 0.1)?;

    let root = RunRng::new(config.seed);
    let runs = parallel_map(config.jobs, instances, |i| {
        let seed = i as u64;
        let rng = root.child("instance", &[seed]);
        let q = kgossip::offline::derandomized_hub_count(n, k);
        let window = flood_window(n, k);
        let rounds = q * (n + k) + k * window;
        let graphs = kgossip::adversary::oblivious_sequence(
            &GraphFamily::RandomConnected(edge_prob),
            n,
            rounds,
            &rng,
        )?;
        let result = algorithm3_derandomize(&graphs, k)?;
        let sources: Vec<usize> = (0..k).map(|t| t % n).collect();
        let schedule = hub_schedule(
            &graphs,
            &sources,
            &result.hubs,
            result.q_total,
            result.flood_window,
        )?;
        let assignment = sources.clone();
        let init = init_distribution(&InitSpec::Singleton { assignment }, n, k, &rng)?;
        let verdict = validate_schedule(&schedule, &graphs, &init, &GoalSpec::AllNodesAllTokens)?;
        let cap = 2.0 * ((k as f64) * (n as f64).log2()).sqrt();
        let valid = verdict.is_ok() && result.covered && (result.hubs.len() as f64) <= cap;
        Ok::<_, anyhow::Error>(OfflineRow {
            n,
            k,
            seed,
            length: schedule.length(),
            bound: rounds,
            detail: format!(
                "hubs {} root {}/{}",
                result.hubs.len(),
                result.root_probability.0,
                result.root_probability.1
            ),
            valid,
        })
    });

    let rows: Vec<OfflineRow> = runs.into_iter().collect::<Result<_>>()?;
    let ok = rows.iter().all(|r| r.valid);
    let summary_path = dir.join("summary.csv");
    write_offline_summary(&summary_path, "n,k,seed,length,bound,detail,valid", &rows)?;
    Ok(ExperimentOutcome {
        summary_path,
        rows: rows.len(),
        ok,
    })
}

/// Samples (A, B) pairs with nonempty symmetric difference uniformly from
/// the full pair space.
pub fn sample_pairs(k: usize, count: usize, rng: &RunRng) -> Vec<(TokenSet, TokenSet)> {
    use rand::Rng;
    assert!(k <= 63, "pair sampling enumerates 2^k masks");
    let mut stream = rng.stream("pairs", &[]);
    let mut pairs = Vec::with_capacity(count);
    while pairs.len() < count {
        let a: u64 = stream.random_range(0..(1u64 << k));
        let b: u64 = stream.random_range(0..(1u64 << k));
        if a == b {
            continue;
        }
        let set = |mask: u64| TokenSet::from_ids(k, (0..k).filter(|&t| mask >> t & 1 == 1));
        pairs.push((set(a), set(b)));
    }
    pairs
}

/// Total-variation distance of observed counts from uniform over `support`.
pub fn tv_from_uniform(counts: &[u64], support: usize, trials: u64) -> f64 {
    let uniform = 1.0 / support as f64;
    0.5 * counts
        .iter()
        .map(|&c| (c as f64 / trials as f64 - uniform).abs())
        .sum::<f64>()
}

fn sample_dist(
    config: &ExperimentConfig,
    dir: &Path,
    params: &Params,
) -> Result<ExperimentOutcome> {
    let k = params.usize("k", 6)?;
    let eps = params.f64("eps", 0.1)?;
    let pair_count = params.usize("pairs", 50)?;
    let trials = params.u64("trials", 200_000)?;
    let bits_eps = params.f64("bits_eps", 0.05)?;
    let bits_trials = params.u64("bits_trials", 50)?;
    let bits_ks = params.usize_list("bits_ks", &[4, 8, 16, 32, 64, 128, 256, 512, 1024])?;

    let root = RunRng::new(config.seed);
    let pairs = sample_pairs(k, pair_count, &root);

    let results = parallel_map(config.jobs, pairs.len(), |i| {
        let (a, b) = &pairs[i];
        let rng = root.child("pair", &[i as u64]);
        let diff = a.symmetric_difference(b);
        let support: Vec<usize> = diff.iter().collect();
        let mut counts = vec![0u64; support.len()];
        let mut off_support = 0u64;
        for trial in 0..trials {
            let mut stream = rng.stream("trial", &[trial]);
            let (outcome, _) =
                sample_symdiff(a, b, eps, &SequenceGenerator::TrueRandom, &mut stream);
            match outcome {
                SampleOutcome::Element(e) => match support.iter().position(|&s| s == e) {
                    Some(idx) => counts[idx] += 1,
                    None => off_support += 1,
                },
                SampleOutcome::Empty => off_support += 1,
            }
        }
        // mass off the support counts fully against the distance
        let tv = tv_from_uniform(&counts, support.len(), trials)
            + 0.5 * off_support as f64 / trials as f64;
        (support.len(), tv)
    });

    let summary_path = dir.join("summary.csv");
    let mut out = csv::create(&summary_path)?;
    writeln!(out, "pair,a,b,diff_size,tv")?;
    let mut ok = true;
    for (i, (diff_size, tv)) in results.iter().enumerate() {
        let (a, b) = &pairs[i];
        let fmt = |s: &TokenSet| {
            s.iter()
                .map(|t| t.to_string())
                .collect::<Vec<_>>()
                .join(";")
        };
        writeln!(out, "{i},{},{},{diff_size},{tv}", fmt(a), fmt(b))?;
        ok &= *tv <= eps;
    }
    drop(out);

    // transcript growth across universe sizes, keyed-prf accounting
    let bits_rows = parallel_map(config.jobs, bits_ks.len(), |i| {
        let kk = bits_ks[i];
        let params = SamplingParams::new(kk, bits_eps);
        let generator = SequenceGenerator::default_prf(&params);
        let rng = root.child("bits", &[kk as u64]);
        use rand::Rng;
        let mut setup = rng.stream("sets", &[]);
        let mut total = 0u64;
        for trial in 0..bits_trials {
            let a = TokenSet::from_ids(kk, (0..kk).filter(|_| setup.random_bool(0.5)));
            let b = TokenSet::from_ids(kk, (0..kk).filter(|_| setup.random_bool(0.5)));
            let mut stream = rng.stream("trial", &[trial]);
            let (_, transcript) = sample_symdiff(&a, &b, bits_eps, &generator, &mut stream);
            total += transcript.total_bits() as u64;
        }
        (kk, total as f64 / bits_trials.max(1) as f64)
    });
    let bits_path = dir.join("bits.csv");
    let mut out = csv::create(&bits_path)?;
    writeln!(out, "k,mean_bits")?;
    let mut prev = 0.0;
    for (kk, mean) in &bits_rows {
        writeln!(out, "{kk},{mean}")?;
        ok &= *mean >= prev;
        prev = *mean;
    }

    Ok(ExperimentOutcome {
        summary_path,
        rows: pairs.len(),
        ok,
    })
}
