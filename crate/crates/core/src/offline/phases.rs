//! Multiport offline scheduling: gather everything at a random node, then
//! disseminate to geometrically growing random sink sets.
//!
//! Phase `i` pushes a flow of value `|S_i| * k` from the nodes that already
//! hold everything (the gather node plus all earlier sink sets) to the
//! fresh sinks, inside a window of `c1 * (n+k) * ceil(log2 n)` rounds. On a
//! flow deficit the phase retries on the next window of doubled length, up
//! to three times.

use rand::seq::index::sample;

use crate::dist::TokenDistribution;
use crate::error::{Error, Result};
use crate::graph::GraphSequence;
use crate::rng::RunRng;
use crate::schedule::{Schedule, ScheduleMode};
use crate::token::TokenSet;

use super::evolution::build_evolution;
use super::gather::{gather_schedule, paths_to_schedule, LabeledPath};

pub const DEFAULT_PHASE_CONSTANT: usize = 4;
const MAX_RETRIES: usize = 3;

fn ceil_log2(n: usize) -> usize {
    n.next_power_of_two().trailing_zeros() as usize
}

/// Rounds one phase window occupies before any retry doubling.
pub fn phase_window(n: usize, k: usize, c1: usize) -> usize {
    c1 * (n + k) * ceil_log2(n).max(1)
}

/// Number of phases: sink sets grow as `min(2^i, n)` until they cover
/// every node.
pub fn phase_count(n: usize) -> usize {
    ceil_log2(n) + 1
}

/// Worst-case rounds consumed when no phase retries: the gather plus one
/// window per phase.
pub fn round_budget(n: usize, k: usize, c1: usize) -> usize {
    (n + k) + phase_count(n) * phase_window(n, k, c1)
}

#[derive(Debug, Clone)]
pub struct Algorithm1Result {
    pub schedule: Schedule,
    pub gather_node: usize,
    pub phase_sizes: Vec<usize>,
    pub phase_flows: Vec<i64>,
    pub phase_retries: Vec<usize>,
    pub rounds_used: usize,
}

/// Computes a multiport schedule delivering every token to every node.
pub fn algorithm1(
    graphs: &GraphSequence,
    init: &TokenDistribution,
    rng: &RunRng,
    c1: usize,
) -> Result<Algorithm1Result> {
    let n = graphs.n();
    let k = init.k();
    if init.n() != n {
        return Err(Error::NodeCountMismatch(init.n(), n));
    }
    if n == 1 {
        return Ok(Algorithm1Result {
            schedule: Schedule::new(ScheduleMode::Multiport),
            gather_node: 0,
            phase_sizes: Vec::new(),
            phase_flows: Vec::new(),
            phase_retries: Vec::new(),
            rounds_used: 0,
        });
    }

    // one source per token
    let mut token_sources = Vec::with_capacity(k);
    for t in 0..k {
        let holder = (0..n).find(|&v| init.node(v).contains(t));
        token_sources.push(holder.ok_or(Error::MissingTokenSource(t))?);
    }

    let mut stream = rng.stream("alg1-gather", &[]);
    use rand::Rng;
    let gather_node = stream.random_range(0..n);
    let mut schedule = gather_schedule(
        graphs,
        0,
        &token_sources,
        gather_node,
        ScheduleMode::Multiport,
    )?;
    let mut base = n + k;

    let mut holds_all = vec![false; n];
    holds_all[gather_node] = true;

    let mut phase_sizes = Vec::new();
    let mut phase_flows = Vec::new();
    let mut phase_retries = Vec::new();

    for i in 0..phase_count(n) {
        let size = (1usize << i).min(n);
        let mut phase_stream = rng.stream("alg1-phase", &[i as u64]);
        let mut sinks: Vec<usize> = sample(&mut phase_stream, n, size).into_vec();
        sinks.sort_unstable();
        let sources: Vec<usize> = (0..n).filter(|&v| holds_all[v]).collect();
        let need = (size * k) as i64;

        let mut retries = 0usize;
        let flow_value = loop {
            let window = phase_window(n, k, c1) << retries;
            let mut evo = build_evolution(graphs, base, window, k, ScheduleMode::Multiport)?;
            let super_source = evo.net.add_vertex();
            let super_sink = evo.net.add_vertex();
            for &v in &sources {
                evo.net.add_edge(super_source, evo.vertex(v, 0), need);
            }
            for &v in &sinks {
                evo.net
                    .add_edge(evo.vertex(v, evo.top_level()), super_sink, k as i64);
            }
            let evo_arc_count = evo.arc_kind.len();
            let result = evo.net.max_flow(super_source, super_sink);
            base += window;
            if result.value < need {
                retries += 1;
                if retries > MAX_RETRIES {
                    return Err(Error::PhaseFlowDeficit {
                        phase: i,
                        retries: retries - 1,
                        got: result.value,
                        want: need,
                    });
                }
                continue;
            }

            // group paths by sink; each sink's k paths get tokens 0..k
            let mut per_sink: std::collections::BTreeMap<usize, Vec<Vec<usize>>> =
                std::collections::BTreeMap::new();
            for path in &result.paths {
                let arcs: Vec<usize> = path
                    .iter()
                    .copied()
                    .filter(|&a| a / 2 < evo_arc_count)
                    .collect();
                let last = *arcs.last().expect("paths traverse the evolution graph");
                let sink = evo.arc_nodes[last / 2].1;
                per_sink.entry(sink).or_default().push(arcs);
            }
            let mut sources_dist = TokenDistribution::empty(n, k);
            let full = TokenSet::full(k);
            for &v in &sources {
                for t in full.iter() {
                    sources_dist.grant(v, t);
                }
            }
            let mut labeled = Vec::new();
            for (_, mut paths) in per_sink {
                paths.sort();
                debug_assert_eq!(paths.len(), k);
                for (token, arcs) in paths.into_iter().enumerate() {
                    labeled.push(LabeledPath { arcs, token });
                }
            }
            let part = paths_to_schedule(&evo, &labeled, &sources_dist)?;
            schedule.transfers.extend(part.transfers);
            break result.value;
        };

        for &v in &sinks {
            holds_all[v] = true;
        }
        phase_sizes.push(size);
        phase_flows.push(flow_value);
        phase_retries.push(retries);
    }

    schedule.sort();
    Ok(Algorithm1Result {
        schedule,
        gather_node,
        phase_sizes,
        phase_flows,
        phase_retries,
        rounds_used: base,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{oblivious_sequence, GraphFamily};
    use crate::dist::{init_distribution, InitSpec};
    use crate::graph::RoundGraph;
    use crate::schedule::{validate_schedule, GoalSpec};

    #[test]
    fn single_node_trivial() {
        let seq = GraphSequence::new(1, vec![RoundGraph::new(1, []).unwrap()]).unwrap();
        let init =
            init_distribution(&InitSpec::AllAtOne { node: 0 }, 1, 3, &RunRng::new(0)).unwrap();
        let result = algorithm1(&seq, &init, &RunRng::new(0), DEFAULT_PHASE_CONSTANT).unwrap();
        assert!(result.schedule.transfers.is_empty());
        let verdict =
            validate_schedule(&result.schedule, &seq, &init, &GoalSpec::AllNodesAllTokens).unwrap();
        assert!(verdict.is_ok());
    }

    #[test]
    fn clique_instances_validate() {
        for seed in 0..3u64 {
            let n = 8;
            let k = 4;
            let rng = RunRng::new(seed);
            let rounds = round_budget(n, k, DEFAULT_PHASE_CONSTANT);
            let seq = oblivious_sequence(&GraphFamily::StaticClique, n, rounds, &rng).unwrap();
            let init = init_distribution(
                &InitSpec::Singleton {
                    assignment: (0..k).collect(),
                },
                n,
                k,
                &rng,
            )
            .unwrap();
            let result = algorithm1(&seq, &init, &rng, DEFAULT_PHASE_CONSTANT).unwrap();
            assert!(result.phase_retries.iter().all(|&r| r == 0));
            let verdict =
                validate_schedule(&result.schedule, &seq, &init, &GoalSpec::AllNodesAllTokens)
                    .unwrap();
            assert!(verdict.is_ok(), "seed {seed}: {verdict:?}");
            assert!(result.schedule.length() <= rounds);
        }
    }

    #[test]
    fn missing_source_is_reported() {
        let seq = GraphSequence::new(2, vec![RoundGraph::new(2, [(0, 1)]).unwrap()]).unwrap();
        let init = TokenDistribution::empty(2, 1);
        assert!(matches!(
            algorithm1(&seq, &init, &RunRng::new(0), DEFAULT_PHASE_CONSTANT),
            Err(Error::MissingTokenSource(0))
        ));
    }
}
