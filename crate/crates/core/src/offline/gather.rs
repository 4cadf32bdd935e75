//! Turning flow paths into schedules, and the (n+k)-round gather.

use crate::dist::TokenDistribution;
use crate::error::{Error, Result};
use crate::graph::GraphSequence;
use crate::schedule::{Schedule, ScheduleMode, Transfer};

use super::evolution::{build_evolution, ArcKind, EvolutionGraph};

/// A source-to-sink path through the evolution graph carrying one token.
#[derive(Debug, Clone)]
pub struct LabeledPath {
    /// Forward arc ids within the evolution graph, in walk order.
    pub arcs: Vec<usize>,
    pub token: usize,
}

/// Reads a schedule off labeled paths: every transmit or broadcast arc on a
/// token's path becomes one transfer in its window round.
///
/// Unit arcs may carry at most one path, and each path must originate at a
/// node holding its token under `sources`.
pub fn paths_to_schedule(
    evo: &EvolutionGraph,
    paths: &[LabeledPath],
    sources: &TokenDistribution,
) -> Result<Schedule> {
    let mut used = vec![false; evo.arc_kind.len()];
    let mut schedule = Schedule::new(evo.mode);
    for path in paths {
        if let Some(&first) = path.arcs.first() {
            let origin = evo.arc_nodes[first / 2].0;
            if !sources.node(origin).contains(path.token) {
                return Err(Error::PathOriginLacksToken {
                    node: origin,
                    token: path.token,
                });
            }
        }
        for &arc in &path.arcs {
            let idx = arc / 2;
            let kind = evo.arc_kind[idx];
            if kind != ArcKind::Buffer {
                if used[idx] {
                    return Err(Error::PathsNotDisjoint);
                }
                used[idx] = true;
            }
            if matches!(kind, ArcKind::Transmit | ArcKind::Broadcast) {
                let (from, to) = evo.arc_nodes[idx];
                schedule.transfers.push(Transfer {
                    round: evo.offset + evo.arc_round[idx],
                    from,
                    to,
                    token: path.token,
                });
            }
        }
    }
    schedule.sort();
    Ok(schedule)
}

/// Moves every token to `target` within the `n + k` rounds starting after
/// `offset`, in either capacity regime.
///
/// A fused super-source feeds each source node one capacity unit per token
/// it hosts; connectivity of every round guarantees a flow of value `k`, so
/// a deficit signals a malformed input sequence.
pub fn gather_schedule(
    graphs: &GraphSequence,
    offset: usize,
    token_sources: &[usize],
    target: usize,
    mode: ScheduleMode,
) -> Result<Schedule> {
    let n = graphs.n();
    let k = token_sources.len();
    if target >= n {
        return Err(Error::NodeOutOfRange(target, n));
    }
    for &v in token_sources {
        if v >= n {
            return Err(Error::NodeOutOfRange(v, n));
        }
    }
    let l = n + k;
    let mut evo = build_evolution(graphs, offset, l, k, mode)?;

    let super_source = evo.net.add_vertex();
    let mut multiplicity = vec![0i64; n];
    for &v in token_sources {
        multiplicity[v] += 1;
    }
    for v in 0..n {
        if multiplicity[v] > 0 {
            evo.net
                .add_edge(super_source, evo.vertex(v, 0), multiplicity[v]);
        }
    }
    let sink = evo.vertex(target, evo.top_level());

    let evo_arc_count = evo.arc_kind.len();
    let result = evo.net.max_flow(super_source, sink);
    if result.value < k as i64 {
        return Err(Error::FlowDeficit {
            got: result.value,
            want: k as i64,
        });
    }

    // hand each origin its own tokens, in id order
    let mut pools: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (t, &v) in token_sources.iter().enumerate().rev() {
        pools[v].push(t);
    }
    let mut labeled = Vec::with_capacity(result.paths.len());
    for path in &result.paths {
        let arcs: Vec<usize> = path
            .iter()
            .copied()
            .filter(|&a| a / 2 < evo_arc_count)
            .collect();
        let origin = evo.arc_nodes[arcs[0] / 2].0;
        let token = pools[origin]
            .pop()
            .expect("path count per origin matches its token count");
        labeled.push(LabeledPath { arcs, token });
    }

    let mut sources = TokenDistribution::empty(n, k);
    for (t, &v) in token_sources.iter().enumerate() {
        sources.grant(v, t);
    }
    paths_to_schedule(&evo, &labeled, &sources)
}
