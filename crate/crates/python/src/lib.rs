//! Python bindings over the core types and operations: distributions,
//! graph sequences, the simulation engine, the two-party sampler and the
//! offline schedulers. Spec strings (adversaries, protocols, inits) match
//! the `kgossip` command line.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use kgossip::dist::TokenDistribution;
use kgossip::engine::{run_simulation, SimOptions};
use kgossip::offline;
use kgossip::sampling::{self, SampleOutcome, SamplingParams, SequenceGenerator};
use kgossip::schedule::{validate_schedule, GoalSpec, Schedule, ScheduleMode, Transfer, Verdict};
use kgossip::{GraphSequence, RoundGraph, RunRng, TokenSet};
use kgossip_cli::spec;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "TokenSet")]
struct PyTokenSet {
    inner: TokenSet,
}

#[pymethods]
impl PyTokenSet {
    #[new]
    #[pyo3(signature = (k, ids = vec![]))]
    fn new(k: usize, ids: Vec<usize>) -> PyResult<Self> {
        for &t in &ids {
            if t >= k {
                return Err(value_err(format!("token {t} out of range {k}")));
            }
        }
        Ok(PyTokenSet {
            inner: TokenSet::from_ids(k, ids),
        })
    }

    fn insert(&mut self, id: usize) -> bool {
        self.inner.insert(id)
    }

    fn contains(&self, id: usize) -> bool {
        self.inner.contains(id)
    }

    fn ids(&self) -> Vec<usize> {
        self.inner.iter().collect()
    }

    fn width(&self) -> usize {
        self.inner.width()
    }

    fn symmetric_difference(&self, other: &PyTokenSet) -> PyResult<PyTokenSet> {
        if self.inner.width() != other.inner.width() {
            return Err(value_err("widths differ"));
        }
        Ok(PyTokenSet {
            inner: self.inner.symmetric_difference(&other.inner),
        })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("TokenSet(k={}, ids={:?})", self.inner.width(), self.ids())
    }
}

#[pyclass(name = "TokenDistribution")]
struct PyTokenDistribution {
    inner: TokenDistribution,
}

#[pymethods]
impl PyTokenDistribution {
    /// Build from a spec string: `well-mixed:<p>`, `singleton`,
    /// `all-at-one:<v>` or `file:<path>`.
    #[staticmethod]
    #[pyo3(signature = (init, n, k, seed = 0))]
    fn from_spec(init: &str, n: usize, k: usize, seed: u64) -> PyResult<Self> {
        let source = spec::parse_init(init).map_err(value_err)?;
        let dist = spec::resolve_init(&source, n, k, &RunRng::new(seed)).map_err(value_err)?;
        Ok(PyTokenDistribution { inner: dist })
    }

    #[staticmethod]
    fn from_holdings(n: usize, k: usize, holdings: Vec<Vec<usize>>) -> PyResult<Self> {
        let dist = kgossip::init_distribution(
            &kgossip::InitSpec::Explicit { holdings },
            n,
            k,
            &RunRng::new(0),
        )
        .map_err(value_err)?;
        Ok(PyTokenDistribution { inner: dist })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    fn holdings(&self, v: usize) -> PyResult<Vec<usize>> {
        if v >= self.inner.n() {
            return Err(value_err(format!("node {v} out of range")));
        }
        Ok(self.inner.node(v).iter().collect())
    }

    fn missing_total(&self) -> u64 {
        self.inner.missing_total()
    }

    fn is_complete(&self) -> bool {
        self.inner.is_complete()
    }

    fn __repr__(&self) -> String {
        format!(
            "TokenDistribution(n={}, k={}, missing={})",
            self.inner.n(),
            self.inner.k(),
            self.inner.missing_total()
        )
    }
}

#[pyclass(name = "RoundGraph")]
struct PyRoundGraph {
    inner: RoundGraph,
}

#[pymethods]
impl PyRoundGraph {
    #[new]
    fn new(n: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        Ok(PyRoundGraph {
            inner: RoundGraph::new(n, edges).map_err(value_err)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges().to_vec()
    }

    fn has_edge(&self, u: usize, v: usize) -> bool {
        self.inner.has_edge(u, v)
    }

    fn neighbors(&self, v: usize) -> Vec<usize> {
        self.inner.neighbors(v).to_vec()
    }
}

#[pyclass(name = "GraphSequence")]
struct PyGraphSequence {
    inner: GraphSequence,
}

#[pymethods]
impl PyGraphSequence {
    /// Generate from a family spec: `static-path`, `static-star`,
    /// `static-clique`, `random:<p>`, `tree` or `file:<path>`.
    #[staticmethod]
    #[pyo3(signature = (family, n, length, seed = 0))]
    fn generate(family: &str, n: usize, length: usize, seed: u64) -> PyResult<Self> {
        let fam = spec::parse_family(family).map_err(value_err)?;
        let seq = kgossip::adversary::oblivious_sequence(&fam, n, length, &RunRng::new(seed))
            .map_err(value_err)?;
        Ok(PyGraphSequence { inner: seq })
    }

    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        let file = std::fs::File::open(path).map_err(value_err)?;
        let seq =
            GraphSequence::read_from(std::io::BufReader::new(file), path).map_err(value_err)?;
        Ok(PyGraphSequence { inner: seq })
    }

    fn to_file(&self, path: &str) -> PyResult<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(value_err)?);
        self.inner.write_to(&mut out).map_err(value_err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn round(&self, r: usize) -> PyResult<PyRoundGraph> {
        if r == 0 || r > self.inner.len() {
            return Err(value_err(format!("round {r} out of range (1-based)")));
        }
        Ok(PyRoundGraph {
            inner: self.inner.round(r).clone(),
        })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

#[pyclass(name = "Schedule")]
struct PySchedule {
    inner: Schedule,
}

#[pymethods]
impl PySchedule {
    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        let file = std::fs::File::open(path).map_err(value_err)?;
        let schedule =
            Schedule::read_from(std::io::BufReader::new(file), path).map_err(value_err)?;
        Ok(PySchedule { inner: schedule })
    }

    fn to_file(&self, path: &str) -> PyResult<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(value_err)?);
        self.inner.write_to(&mut out).map_err(value_err)
    }

    #[getter]
    fn mode(&self) -> &'static str {
        self.inner.mode.as_str()
    }

    fn length(&self) -> usize {
        self.inner.length()
    }

    /// Transfers as (round, from, to, token) tuples.
    fn transfers(&self) -> Vec<(usize, usize, usize, usize)> {
        self.inner
            .transfers
            .iter()
            .map(|t| (t.round, t.from, t.to, t.token))
            .collect()
    }

    fn __len__(&self) -> usize {
        self.inner.transfers.len()
    }
}

#[pyclass(name = "RunTrace")]
struct PyRunTrace {
    inner: kgossip::engine::RunTrace,
}

#[pymethods]
impl PyRunTrace {
    #[getter]
    fn completion_round(&self) -> Option<usize> {
        self.inner.completion_round
    }

    #[getter]
    fn final_missing(&self) -> u64 {
        self.inner.final_missing
    }

    fn max_witness_size(&self) -> usize {
        self.inner.max_witness_size()
    }

    /// Per-round records as (round, progress, missing_total, groups,
    /// inter_group_edges, witness_size, color) tuples.
    fn records(&self) -> Vec<(usize, u64, u64, usize, usize, Option<usize>, &'static str)> {
        self.inner
            .records
            .iter()
            .map(|r| {
                (
                    r.round,
                    r.progress,
                    r.missing_total,
                    r.groups,
                    r.inter_group_edges,
                    r.witness_size,
                    r.color.as_str(),
                )
            })
            .collect()
    }

    fn color_counts(&self) -> (usize, usize, usize, usize) {
        let [r, g, b, k] = self.inner.color_counts();
        (r, g, b, k)
    }
}

/// Run one adversary/protocol simulation.
#[pyfunction]
#[pyo3(signature = (n, k, adversary, protocol, init, max_rounds, seed = 0, green_fraction = 0.125))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    n: usize,
    k: usize,
    adversary: &str,
    protocol: &str,
    init: &str,
    max_rounds: usize,
    seed: u64,
    green_fraction: f64,
) -> PyResult<PyRunTrace> {
    let rng = RunRng::new(seed);
    let adversary = spec::parse_adversary(adversary).map_err(value_err)?;
    let protocol = spec::parse_protocol(protocol).map_err(value_err)?;
    let source = spec::parse_init(init).map_err(value_err)?;
    let dist = spec::resolve_init(&source, n, k, &rng).map_err(value_err)?;
    let trace = run_simulation(
        &adversary,
        &protocol,
        dist,
        max_rounds,
        &rng,
        SimOptions {
            green_fraction,
            ..SimOptions::default()
        },
    )
    .map_err(value_err)?;
    Ok(PyRunTrace { inner: trace })
}

fn parse_mode(mode: &str) -> PyResult<ScheduleMode> {
    ScheduleMode::parse(mode).ok_or_else(|| value_err(format!("unknown mode `{mode}`")))
}

/// Replay a schedule; returns None when feasible and the goal is met,
/// otherwise a description of the first violation.
#[pyfunction]
#[pyo3(signature = (schedule, graphs, init, sinks = None))]
fn validate(
    schedule: &PySchedule,
    graphs: &PyGraphSequence,
    init: &PyTokenDistribution,
    sinks: Option<Vec<usize>>,
) -> PyResult<Option<String>> {
    let goal = match sinks {
        Some(s) => GoalSpec::Sinks(s),
        None => GoalSpec::AllNodesAllTokens,
    };
    let verdict =
        validate_schedule(&schedule.inner, &graphs.inner, &init.inner, &goal).map_err(value_err)?;
    Ok(match verdict {
        Verdict::Ok => None,
        other => Some(format!("{other:?}")),
    })
}

/// Gather every token at `target` within `n + k` rounds.
#[pyfunction]
#[pyo3(signature = (graphs, token_sources, target, mode = "multiport", offset = 0))]
fn gather_schedule(
    graphs: &PyGraphSequence,
    token_sources: Vec<usize>,
    target: usize,
    mode: &str,
    offset: usize,
) -> PyResult<PySchedule> {
    let schedule = offline::gather_schedule(
        &graphs.inner,
        offset,
        &token_sources,
        target,
        parse_mode(mode)?,
    )
    .map_err(value_err)?;
    Ok(PySchedule { inner: schedule })
}

/// Multiport scheduler; returns (schedule, gather_node, phase_flows,
/// phase_retries).
#[pyfunction]
#[pyo3(signature = (graphs, init, seed = 0, c1 = 4))]
fn algorithm1(
    graphs: &PyGraphSequence,
    init: &PyTokenDistribution,
    seed: u64,
    c1: usize,
) -> PyResult<(PySchedule, usize, Vec<i64>, Vec<usize>)> {
    let result = offline::algorithm1(&graphs.inner, &init.inner, &RunRng::new(seed), c1)
        .map_err(value_err)?;
    Ok((
        PySchedule {
            inner: result.schedule,
        },
        result.gather_node,
        result.phase_flows,
        result.phase_retries,
    ))
}

/// Broadcast scheduler; returns (schedule, hubs).
#[pyfunction]
#[pyo3(signature = (graphs, token_sources, seed = 0))]
fn algorithm2(
    graphs: &PyGraphSequence,
    token_sources: Vec<usize>,
    seed: u64,
) -> PyResult<(PySchedule, Vec<usize>)> {
    let result = offline::algorithm2(&graphs.inner, &token_sources, &RunRng::new(seed))
        .map_err(value_err)?;
    Ok((
        PySchedule {
            inner: result.schedule,
        },
        result.hubs,
    ))
}

/// Derandomized hub selection; returns (hubs, covered, root probability as
/// a `num/den` string, schedule).
#[pyfunction]
fn algorithm3(
    graphs: &PyGraphSequence,
    token_sources: Vec<usize>,
) -> PyResult<(Vec<usize>, bool, String, PySchedule)> {
    let k = token_sources.len();
    let result = offline::algorithm3_derandomize(&graphs.inner, k).map_err(value_err)?;
    let schedule = offline::hub_schedule(
        &graphs.inner,
        &token_sources,
        &result.hubs,
        result.q_total,
        result.flood_window,
    )
    .map_err(value_err)?;
    Ok((
        result.hubs,
        result.covered,
        format!(
            "{}/{}",
            result.root_probability.0, result.root_probability.1
        ),
        PySchedule { inner: schedule },
    ))
}

/// Partition a tree into bounded subtrees; returns (nodes, edges) pairs.
#[pyfunction]
fn tree_decompose(
    n: usize,
    edges: Vec<(usize, usize)>,
    s: usize,
) -> PyResult<Vec<(Vec<usize>, Vec<(usize, usize)>)>> {
    let tree = RoundGraph::new(n, edges).map_err(value_err)?;
    let parts = offline::tree_decompose(&tree, s).map_err(value_err)?;
    Ok(parts.into_iter().map(|p| (p.nodes, p.edges)).collect())
}

/// One run of the two-party sampler; returns (element or None, total bits).
#[pyfunction]
#[pyo3(signature = (k, a, b, eps, gen = "true-random", seed = 0))]
fn sample_symdiff(
    k: usize,
    a: Vec<usize>,
    b: Vec<usize>,
    eps: f64,
    gen: &str,
    seed: u64,
) -> PyResult<(Option<usize>, usize)> {
    let params = SamplingParams::new(k, eps);
    let generator = match gen {
        "true-random" => SequenceGenerator::TrueRandom,
        "prf" => SequenceGenerator::default_prf(&params),
        other => match other.strip_prefix("prf:") {
            Some(bits) => SequenceGenerator::KeyedPrf {
                seed_bits: bits.parse().map_err(value_err)?,
            },
            None => return Err(value_err(format!("unknown generator `{other}`"))),
        },
    };
    let sa = TokenSet::from_ids(k, a);
    let sb = TokenSet::from_ids(k, b);
    let mut stream = RunRng::new(seed).stream("py-sample", &[]);
    let (outcome, transcript) = sampling::sample_symdiff(&sa, &sb, eps, &generator, &mut stream);
    let element = match outcome {
        SampleOutcome::Element(e) => Some(e),
        SampleOutcome::Empty => None,
    };
    Ok((element, transcript.total_bits()))
}

/// Exact probability that a fixed member of a size-`m` set appears first
/// among the set in a random length-`d` sequence over `[0, k)`.
#[pyfunction]
fn first_appearance_probability(k: usize, d: usize, m: usize) -> f64 {
    sampling::first_appearance_probability(k, d, m)
}

/// Apply one round of transfers (round, from, to, token); returns the new
/// distribution and the progress count.
#[pyfunction]
fn apply_exchanges(
    dist: &PyTokenDistribution,
    graph: &PyRoundGraph,
    transfers: Vec<(usize, usize, usize, usize)>,
) -> PyResult<(PyTokenDistribution, u64)> {
    let transfers: Vec<Transfer> = transfers
        .into_iter()
        .map(|(round, from, to, token)| Transfer {
            round,
            from,
            to,
            token,
        })
        .collect();
    let (next, progress) =
        kgossip::apply_exchanges(&dist.inner, &graph.inner, &transfers).map_err(value_err)?;
    Ok((PyTokenDistribution { inner: next }, progress))
}

#[pymodule]
fn kgossip_rs(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTokenSet>()?;
    m.add_class::<PyTokenDistribution>()?;
    m.add_class::<PyRoundGraph>()?;
    m.add_class::<PyGraphSequence>()?;
    m.add_class::<PySchedule>()?;
    m.add_class::<PyRunTrace>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(gather_schedule, m)?)?;
    m.add_function(wrap_pyfunction!(algorithm1, m)?)?;
    m.add_function(wrap_pyfunction!(algorithm2, m)?)?;
    m.add_function(wrap_pyfunction!(algorithm3, m)?)?;
    m.add_function(wrap_pyfunction!(tree_decompose, m)?)?;
    m.add_function(wrap_pyfunction!(sample_symdiff, m)?)?;
    m.add_function(wrap_pyfunction!(first_appearance_probability, m)?)?;
    m.add_function(wrap_pyfunction!(apply_exchanges, m)?)?;
    Ok(())
}
