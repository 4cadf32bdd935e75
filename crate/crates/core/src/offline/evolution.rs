//! Time-expanded evolution graphs.
//!
//! Multiport: `l + 1` levels of node copies. Buffer arcs carry holdings from
//! level `i-1` to level `i` with effectively unbounded capacity; each graph
//! edge of round `i` becomes two unit-capacity transmit arcs, one per
//! direction.
//!
//! Broadcast: `2l + 1` levels. Level `2i-1` is the moment of round `i`'s
//! broadcast: a unit selection arc from `v_{2(i-1)}` to `v_{2i-1}` forces a
//! node to commit to a single token per round, and unit broadcast arcs
//! `u_{2i-1} -> v_{2i}` deliver it across round-`i` edges. Buffer arcs skip
//! straight from `v_{2(i-1)}` to `v_{2i}`.

use crate::error::{Error, Result};
use crate::graph::GraphSequence;
use crate::schedule::ScheduleMode;

use super::flow::FlowNetwork;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArcKind {
    Buffer,
    Transmit,
    Broadcast,
    Selection,
}

#[derive(Debug, Clone)]
pub struct EvolutionGraph {
    pub mode: ScheduleMode,
    pub n: usize,
    /// Rounds covered (graphs `offset+1 ..= offset+rounds` of the sequence).
    pub rounds: usize,
    /// First covered round minus one; transfers read off the arcs land in
    /// rounds `offset + arc_round`.
    pub offset: usize,
    pub levels: usize,
    pub net: FlowNetwork,
    /// Per forward arc: kind, 1-based round within the window, endpoints
    /// (from-node, to-node).
    pub arc_kind: Vec<ArcKind>,
    pub arc_round: Vec<usize>,
    pub arc_nodes: Vec<(usize, usize)>,
}

impl EvolutionGraph {
    pub fn vertex(&self, node: usize, level: usize) -> usize {
        level * self.n + node
    }

    /// The level whose copies represent final holdings.
    pub fn top_level(&self) -> usize {
        self.levels - 1
    }

    /// Capacity stand-in for unbounded buffer arcs; exceeds any feasible
    /// flow so the arithmetic stays integral.
    pub fn surrogate_infinity(n: usize, k: usize) -> i64 {
        (n as i64) * (k as i64) + 1
    }

    fn push_arc(
        &mut self,
        from: usize,
        to: usize,
        cap: i64,
        kind: ArcKind,
        round: usize,
        nodes: (usize, usize),
    ) {
        // buffers are free to traverse, so path search counts transmissions
        let len = if kind == ArcKind::Buffer { 0 } else { 1 };
        let id = self.net.add_edge_len(from, to, cap, len);
        debug_assert_eq!(id / 2, self.arc_kind.len());
        self.arc_kind.push(kind);
        self.arc_round.push(round);
        self.arc_nodes.push(nodes);
    }
}

/// Builds the evolution graph over rounds `offset+1 ..= offset+l` of the
/// sequence, for `k`-token instances (`k` only sizes the buffer surrogate).
pub fn build_evolution(
    graphs: &GraphSequence,
    offset: usize,
    l: usize,
    k: usize,
    mode: ScheduleMode,
) -> Result<EvolutionGraph> {
    if offset + l > graphs.len() {
        return Err(Error::RoundsExhausted(offset + l, graphs.len()));
    }
    let n = graphs.n();
    let levels = match mode {
        ScheduleMode::Multiport => l + 1,
        ScheduleMode::Broadcast => 2 * l + 1,
    };
    let inf = EvolutionGraph::surrogate_infinity(n, k);
    let mut evo = EvolutionGraph {
        mode,
        n,
        rounds: l,
        offset,
        levels,
        net: FlowNetwork::new(levels * n),
        arc_kind: Vec::new(),
        arc_round: Vec::new(),
        arc_nodes: Vec::new(),
    };

    // transmit-like arcs go in before buffers so path search sends tokens
    // at the earliest usable round
    match mode {
        ScheduleMode::Multiport => {
            for i in 1..=l {
                for &(u, v) in graphs.round(offset + i).edges() {
                    evo.push_arc(
                        evo.vertex(u, i - 1),
                        evo.vertex(v, i),
                        1,
                        ArcKind::Transmit,
                        i,
                        (u, v),
                    );
                    evo.push_arc(
                        evo.vertex(v, i - 1),
                        evo.vertex(u, i),
                        1,
                        ArcKind::Transmit,
                        i,
                        (v, u),
                    );
                }
                for v in 0..n {
                    evo.push_arc(
                        evo.vertex(v, i - 1),
                        evo.vertex(v, i),
                        inf,
                        ArcKind::Buffer,
                        i,
                        (v, v),
                    );
                }
            }
        }
        ScheduleMode::Broadcast => {
            for i in 1..=l {
                for v in 0..n {
                    evo.push_arc(
                        evo.vertex(v, 2 * (i - 1)),
                        evo.vertex(v, 2 * i - 1),
                        1,
                        ArcKind::Selection,
                        i,
                        (v, v),
                    );
                }
                for &(u, v) in graphs.round(offset + i).edges() {
                    evo.push_arc(
                        evo.vertex(u, 2 * i - 1),
                        evo.vertex(v, 2 * i),
                        1,
                        ArcKind::Broadcast,
                        i,
                        (u, v),
                    );
                    evo.push_arc(
                        evo.vertex(v, 2 * i - 1),
                        evo.vertex(u, 2 * i),
                        1,
                        ArcKind::Broadcast,
                        i,
                        (v, u),
                    );
                }
                for v in 0..n {
                    evo.push_arc(
                        evo.vertex(v, 2 * (i - 1)),
                        evo.vertex(v, 2 * i),
                        inf,
                        ArcKind::Buffer,
                        i,
                        (v, v),
                    );
                }
            }
        }
    }
    Ok(evo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{oblivious_sequence, GraphFamily};
    use crate::graph::RoundGraph;
    use crate::rng::RunRng;

    fn two_node_one_round() -> GraphSequence {
        GraphSequence::new(2, vec![RoundGraph::new(2, [(0, 1)]).unwrap()]).unwrap()
    }

    #[test]
    fn multiport_two_node_instance() {
        let evo = build_evolution(&two_node_one_round(), 0, 1, 1, ScheduleMode::Multiport).unwrap();
        assert_eq!(evo.levels, 2);
        assert_eq!(evo.net.vertex_count(), 4);
        let buffers = evo
            .arc_kind
            .iter()
            .filter(|&&k| k == ArcKind::Buffer)
            .count();
        let transmits = evo
            .arc_kind
            .iter()
            .filter(|&&k| k == ArcKind::Transmit)
            .count();
        assert_eq!(buffers, 2);
        assert_eq!(transmits, 2);
    }

    #[test]
    fn broadcast_two_node_instance() {
        let evo = build_evolution(&two_node_one_round(), 0, 1, 1, ScheduleMode::Broadcast).unwrap();
        assert_eq!(evo.levels, 3);
        assert_eq!(evo.net.vertex_count(), 6);
        let count = |kind| evo.arc_kind.iter().filter(|&&k| k == kind).count();
        assert_eq!(count(ArcKind::Buffer), 2);
        assert_eq!(count(ArcKind::Selection), 2);
        assert_eq!(count(ArcKind::Broadcast), 2);
    }

    #[test]
    fn arc_counts_follow_formulas() {
        let rng = RunRng::new(4);
        let seq = oblivious_sequence(&GraphFamily::RandomConnected(0.3), 9, 7, &rng).unwrap();
        let edge_total: usize = seq.rounds().iter().map(|g| g.edge_count()).sum();

        let evo = build_evolution(&seq, 0, 7, 3, ScheduleMode::Multiport).unwrap();
        let buffers = evo
            .arc_kind
            .iter()
            .filter(|&&k| k == ArcKind::Buffer)
            .count();
        let transmits = evo
            .arc_kind
            .iter()
            .filter(|&&k| k == ArcKind::Transmit)
            .count();
        assert_eq!(buffers, 9 * 7);
        assert_eq!(transmits, 2 * edge_total);

        let evo = build_evolution(&seq, 0, 7, 3, ScheduleMode::Broadcast).unwrap();
        let count = |kind| evo.arc_kind.iter().filter(|&&k| k == kind).count();
        assert_eq!(count(ArcKind::Buffer), 9 * 7);
        assert_eq!(count(ArcKind::Selection), 9 * 7);
        assert_eq!(count(ArcKind::Broadcast), 2 * edge_total);
        assert_eq!(evo.net.vertex_count(), (2 * 7 + 1) * 9);
    }

    #[test]
    fn window_must_fit_sequence() {
        let seq = two_node_one_round();
        assert!(build_evolution(&seq, 0, 2, 1, ScheduleMode::Multiport).is_err());
        assert!(build_evolution(&seq, 1, 1, 1, ScheduleMode::Multiport).is_err());
    }
}
