//! Token-forwarding protocols and the instrumentation quantities used to
//! audit their runs (groups, inter-group edges, round colors).

use std::collections::HashMap;

use rand::Rng;

use crate::adversary::BroadcastChoice;
use crate::dist::TokenDistribution;
use crate::error::{Error, Result};
use crate::graph::RoundGraph;
use crate::rng::RunRng;
use crate::schedule::Transfer;
use crate::token::TokenSet;

/// The transfers produced by a protocol for one round.
pub type RoundExchange = Vec<Transfer>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BroadcastPolicy {
    UniformRandomHeld,
    RoundRobinHeld,
    MinIdHeld,
    /// Sequential flooding: rounds are cut into length-`n` windows, window
    /// `j` is dedicated to token `j mod k`, and exactly the nodes holding
    /// the window's token broadcast it. Completes against any connected
    /// adversary in at most `n * k` rounds because every round some edge
    /// crosses the holder boundary.
    PhasedFlood,
}

/// Picks each node's broadcast token for the given round. Random picks are
/// keyed per `(round, node)`; round-robin walks the held set by round index.
pub fn choose_broadcasts(
    policy: BroadcastPolicy,
    dist: &TokenDistribution,
    rng: &RunRng,
    round: u64,
) -> BroadcastChoice {
    let choices = dist
        .holdings()
        .iter()
        .enumerate()
        .map(|(v, held)| {
            let count = held.len();
            if count == 0 {
                return None;
            }
            match policy {
                BroadcastPolicy::UniformRandomHeld => {
                    let mut stream = rng.stream("bcast-choice", &[round, v as u64]);
                    held.nth(stream.random_range(0..count))
                }
                BroadcastPolicy::RoundRobinHeld => held.nth((round as usize - 1) % count),
                BroadcastPolicy::MinIdHeld => held.min(),
                BroadcastPolicy::PhasedFlood => {
                    let window = (round as usize - 1) / dist.n();
                    let token = window % dist.k();
                    held.contains(token).then_some(token)
                }
            }
        })
        .collect();
    BroadcastChoice::new(choices)
}

fn edge_stream(
    rng: &RunRng,
    label: &str,
    round: u64,
    u: usize,
    v: usize,
) -> rand_chacha::ChaCha8Rng {
    rng.stream(label, &[round, u.min(v) as u64, u.max(v) as u64])
}

/// Independently per edge, samples one token uniformly from the symmetric
/// difference of the endpoint holdings and directs it from its holder.
/// Edges with equal holdings carry nothing.
pub fn symdiff_exchanges(
    dist: &TokenDistribution,
    graph: &RoundGraph,
    rng: &RunRng,
    round: u64,
) -> Result<RoundExchange> {
    if graph.n() != dist.n() {
        return Err(Error::NodeCountMismatch(graph.n(), dist.n()));
    }
    let mut out = Vec::new();
    for &(u, v) in graph.edges() {
        let sym = dist.node(u).symmetric_difference(dist.node(v));
        let size = sym.len();
        if size == 0 {
            continue;
        }
        let mut stream = edge_stream(rng, "symdiff", round, u, v);
        let token = sym.nth(stream.random_range(0..size)).unwrap();
        let (from, to) = if dist.node(u).contains(token) {
            (u, v)
        } else {
            (v, u)
        };
        out.push(Transfer {
            round: round as usize,
            from,
            to,
            token,
        });
    }
    Ok(out)
}

/// Per oriented edge `u -> v`, samples uniformly from `holdings(u) \
/// holdings(v)`. Orientations pointing from a subset toward its superset are
/// illegal because no token could move.
pub fn symdiff_oriented_exchanges(
    dist: &TokenDistribution,
    graph: &RoundGraph,
    orientation: &[(usize, usize)],
    rng: &RunRng,
    round: u64,
) -> Result<RoundExchange> {
    if graph.n() != dist.n() {
        return Err(Error::NodeCountMismatch(graph.n(), dist.n()));
    }
    let mut out = Vec::new();
    for &(u, v) in orientation {
        if !graph.has_edge(u, v) {
            return Err(Error::TransferNonEdge(Transfer {
                round: round as usize,
                from: u,
                to: v,
                token: 0,
            }));
        }
        let diff = dist.node(u).difference(dist.node(v));
        let size = diff.len();
        if size == 0 {
            return Err(Error::IllegalOrientation(u, v));
        }
        let mut stream = edge_stream(rng, "symdiff-oriented", round, u, v);
        let token = diff.nth(stream.random_range(0..size)).unwrap();
        out.push(Transfer {
            round: round as usize,
            from: u,
            to: v,
            token,
        });
    }
    Ok(out)
}

/// Orients every inter-group edge (uniformly among legal directions) and
/// samples conditioned on the orientation. Intra-group edges carry nothing.
pub fn symdiff_oriented_round(
    dist: &TokenDistribution,
    graph: &RoundGraph,
    rng: &RunRng,
    round: u64,
) -> Result<RoundExchange> {
    let partition = groups(dist);
    let mut orientation = Vec::new();
    for &(u, v) in graph.edges() {
        if partition.group_of(u) == partition.group_of(v) {
            continue;
        }
        let u_minus_v = !dist.node(u).is_subset(dist.node(v));
        let v_minus_u = !dist.node(v).is_subset(dist.node(u));
        let pair = match (u_minus_v, v_minus_u) {
            (true, false) => (u, v),
            (false, true) => (v, u),
            (true, true) => {
                let mut stream = edge_stream(rng, "orientation", round, u, v);
                if stream.random_bool(0.5) {
                    (u, v)
                } else {
                    (v, u)
                }
            }
            // distinct groups have distinct holdings, so one side differs
            (false, false) => unreachable!("distinct groups cannot be mutual subsets"),
        };
        orientation.push(pair);
    }
    symdiff_oriented_exchanges(dist, graph, &orientation, rng, round)
}

/// Deterministic variant: the minimum-id element of the symmetric
/// difference, sent from its holder.
pub fn det_symdiff_exchanges(dist: &TokenDistribution, graph: &RoundGraph) -> RoundExchange {
    let mut out = Vec::new();
    for &(u, v) in graph.edges() {
        let sym = dist.node(u).symmetric_difference(dist.node(v));
        if let Some(token) = sym.min() {
            let (from, to) = if dist.node(u).contains(token) {
                (u, v)
            } else {
                (v, u)
            };
            out.push(Transfer {
                round: 0,
                from,
                to,
                token,
            });
        }
    }
    out
}

/// Partition of the nodes into maximal same-holdings classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupPartition {
    groups: Vec<Vec<usize>>,
    node_group: Vec<usize>,
}

impl GroupPartition {
    pub fn count(&self) -> usize {
        self.groups.len()
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn group_of(&self, v: usize) -> usize {
        self.node_group[v]
    }
}

/// Groups nodes by exact holdings equality. Group order follows the
/// smallest member id, so the partition is deterministic.
pub fn groups(dist: &TokenDistribution) -> GroupPartition {
    let mut by_set: HashMap<&TokenSet, Vec<usize>> = HashMap::new();
    for (v, held) in dist.holdings().iter().enumerate() {
        by_set.entry(held).or_default().push(v);
    }
    let mut groups: Vec<Vec<usize>> = by_set.into_values().collect();
    groups.sort_by_key(|g| g[0]);
    let mut node_group = vec![0usize; dist.n()];
    for (idx, g) in groups.iter().enumerate() {
        for &v in g {
            node_group[v] = idx;
        }
    }
    GroupPartition { groups, node_group }
}

/// Edges of the round graph whose endpoints lie in different groups.
pub fn inter_group_edges(dist: &TokenDistribution, graph: &RoundGraph) -> Vec<(usize, usize)> {
    let partition = groups(dist);
    graph
        .edges()
        .iter()
        .copied()
        .filter(|&(u, v)| partition.group_of(u) != partition.group_of(v))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoundColor {
    Red,
    Green,
    Blue,
    Black,
}

impl RoundColor {
    pub fn as_str(&self) -> &'static str {
        match self {
            RoundColor::Red => "red",
            RoundColor::Green => "green",
            RoundColor::Blue => "blue",
            RoundColor::Black => "black",
        }
    }
}

/// Colors a round from the holdings before and after it.
///
/// Red: some node missing fewer than `log2 n` tokens made progress.
/// Green: some node gained at least `fraction` of its missing tokens.
/// Blue: any progress at all. Black: none.
pub fn classify_round(
    before: &TokenDistribution,
    after: &TokenDistribution,
    fraction: f64,
) -> RoundColor {
    assert!(
        fraction > 0.0 && fraction < 1.0,
        "fraction must be in (0,1)"
    );
    let n = before.n();
    let log_n = (n as f64).log2();
    let mut any_progress = false;
    let mut green = false;
    for v in 0..n {
        let missing_before = before.node(v).missing();
        let progress = after.node(v).len() - before.node(v).len();
        if progress == 0 {
            continue;
        }
        any_progress = true;
        if (missing_before as f64) < log_n {
            return RoundColor::Red;
        }
        if progress as f64 >= fraction * missing_before as f64 {
            green = true;
        }
    }
    if green {
        RoundColor::Green
    } else if any_progress {
        RoundColor::Blue
    } else {
        RoundColor::Black
    }
}
