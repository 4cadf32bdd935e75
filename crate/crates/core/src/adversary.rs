//! Adversary strategies that produce each round's communication graph.
//!
//! The strongly adaptive adversary sees every node's broadcast choice, keeps
//! all free edges (edges that cannot carry a useful exchange) and connects
//! the free-edge components by a line, so that useful exchanges are confined
//! to the line. The rotating-line adversary serves the deterministic
//! symmetric-difference protocol its worst case. Oblivious families supply
//! fixed or random connected sequences for offline experiments.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::dist::TokenDistribution;
use crate::error::{Error, Result};
use crate::graph::{GraphSequence, RoundGraph};
use crate::rng::RunRng;

/// Per-node broadcast selection for one round. `None` means the node stays
/// silent (it holds nothing to send, or the policy declined).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BroadcastChoice {
    choices: Vec<Option<usize>>,
}

impl BroadcastChoice {
    pub fn new(choices: Vec<Option<usize>>) -> Self {
        BroadcastChoice { choices }
    }

    pub fn n(&self) -> usize {
        self.choices.len()
    }

    pub fn get(&self, v: usize) -> Option<usize> {
        self.choices[v]
    }

    pub fn iter(&self) -> impl Iterator<Item = Option<usize>> + '_ {
        self.choices.iter().copied()
    }

    /// Checks the contract that every chosen token is held by its chooser.
    pub fn validate(&self, dist: &TokenDistribution) -> Result<()> {
        for (v, c) in self.choices.iter().enumerate() {
            if let Some(t) = c {
                if !dist.node(v).contains(*t) {
                    return Err(Error::ChoiceNotHeld(v, *t));
                }
            }
        }
        Ok(())
    }
}

/// A node sequence paired with a token sequence; validity against a
/// distribution means every cross pair has at least one side missing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HalfEmptyConfig {
    pub nodes: Vec<usize>,
    pub tokens: Vec<usize>,
}

impl HalfEmptyConfig {
    pub fn size(&self) -> usize {
        self.nodes.len()
    }
}

/// Outcome of one strongly adaptive round: the graph, the free-edge
/// components, one representative per component and the non-free edge count.
#[derive(Debug, Clone)]
pub struct AdversaryRoundReport {
    pub graph: RoundGraph,
    pub components: Vec<Vec<usize>>,
    pub representatives: Vec<usize>,
    pub non_free_edge_count: usize,
}

/// A directed exchange `x -> y` is useless when `x` is silent or `y`
/// already holds what `x` broadcasts; an edge is free when both directions
/// are useless. Callers must uphold the choice-held contract.
pub fn is_free_edge(
    u: usize,
    v: usize,
    dist: &TokenDistribution,
    choices: &BroadcastChoice,
) -> bool {
    debug_assert_ne!(u, v);
    let useless = |from: usize, to: usize| match choices.get(from) {
        None => true,
        Some(t) => dist.node(to).contains(t),
    };
    useless(u, v) && useless(v, u)
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            self.parent[x] = self.find(self.parent[x]);
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

/// Builds the round graph of the strongly adaptive adversary: all free
/// edges, plus a line over one representative per free-edge component.
/// Representatives and the line order are drawn from `rng` keyed by `round`.
pub fn strongly_adaptive_graph(
    dist: &TokenDistribution,
    choices: &BroadcastChoice,
    rng: &RunRng,
    round: u64,
) -> Result<AdversaryRoundReport> {
    let n = dist.n();
    choices.validate(dist)?;

    let mut uf = UnionFind::new(n);
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if is_free_edge(u, v, dist, choices) {
                edges.push((u, v));
                uf.union(u, v);
            }
        }
    }

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n];
    for v in 0..n {
        let root = uf.find(v);
        members[root].push(v);
    }
    let mut components: Vec<Vec<usize>> = members.into_iter().filter(|m| !m.is_empty()).collect();
    components.sort_by_key(|m| m[0]);

    let mut stream = rng.stream("strong-adversary", &[round]);
    let representatives: Vec<usize> = components
        .iter()
        .map(|m| m[stream.random_range(0..m.len())])
        .collect();

    let mut order: Vec<usize> = (0..components.len()).collect();
    order.shuffle(&mut stream);
    for w in order.windows(2) {
        edges.push((representatives[w[0]], representatives[w[1]]));
    }

    let non_free_edge_count = components.len() - 1;
    let graph = RoundGraph::new(n, edges)?;
    Ok(AdversaryRoundReport {
        graph,
        components,
        representatives,
        non_free_edge_count,
    })
}

/// Extracts the constructive witness from a round report: representatives
/// paired with their broadcast tokens. Components whose representative is
/// silent are dropped; the count of dropped components is returned alongside.
pub fn half_empty_witness(
    report: &AdversaryRoundReport,
    choices: &BroadcastChoice,
) -> (HalfEmptyConfig, usize) {
    let mut nodes = Vec::new();
    let mut tokens = Vec::new();
    let mut dropped = 0usize;
    for &rep in &report.representatives {
        match choices.get(rep) {
            Some(t) => {
                nodes.push(rep);
                tokens.push(t);
            }
            None => dropped += 1,
        }
    }
    // two representatives choosing the same held token would share a free
    // edge and hence a component
    let mut sorted = tokens.clone();
    sorted.sort_unstable();
    sorted.dedup();
    assert_eq!(
        sorted.len(),
        tokens.len(),
        "witness tokens must be pairwise distinct"
    );
    (HalfEmptyConfig { nodes, tokens }, dropped)
}

/// True iff for all `i != j`, node `v_i` lacks `t_j` or node `v_j` lacks
/// `t_i` under `dist`.
pub fn verify_half_empty(config: &HalfEmptyConfig, dist: &TokenDistribution) -> bool {
    let m = config.size();
    for i in 0..m {
        for j in i + 1..m {
            let vi_holds_tj = dist.node(config.nodes[i]).contains(config.tokens[j]);
            let vj_holds_ti = dist.node(config.nodes[j]).contains(config.tokens[i]);
            if vi_holds_tj && vj_holds_ti {
                return false;
            }
        }
    }
    true
}

/// The line used against the deterministic symmetric-difference rule: the
/// head stays fixed and the tail rotates one position per round, so the
/// freshly served node is cycled to the far end.
pub fn rotating_line_graph(round: usize, n: usize) -> RoundGraph {
    assert!(n >= 2, "rotating line needs at least two nodes");
    assert!(round >= 1, "rounds are 1-based");
    let tail = n - 1;
    let shift = (round - 1) % tail;
    // order: head 0, then nodes 1..n rotated left by `shift`
    let mut order = Vec::with_capacity(n);
    order.push(0);
    for i in 0..tail {
        order.push(1 + (shift + i) % tail);
    }
    RoundGraph::new(n, order.windows(2).map(|w| (w[0], w[1]))).expect("line is connected")
}

/// Oblivious graph-sequence families.
#[derive(Debug, Clone)]
pub enum GraphFamily {
    StaticPath,
    StaticStar,
    StaticClique,
    /// Random spanning tree plus each remaining pair with probability `p`.
    RandomConnected(f64),
    RandomSpanningTree,
    File(std::path::PathBuf),
}

fn random_tree_edges(n: usize, stream: &mut impl Rng) -> Vec<(usize, usize)> {
    // random attachment over a shuffled node order
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(stream);
    (1..n)
        .map(|i| (order[stream.random_range(0..i)], order[i]))
        .collect()
}

/// Generates `length` rounds from a family spec. Random families derive a
/// stream per round so sequences are stable under prefix extension.
pub fn oblivious_sequence(
    family: &GraphFamily,
    n: usize,
    length: usize,
    rng: &RunRng,
) -> Result<GraphSequence> {
    match family {
        GraphFamily::StaticPath => {
            GraphSequence::new(n, (0..length).map(|_| RoundGraph::path(n)).collect())
        }
        GraphFamily::StaticStar => {
            GraphSequence::new(n, (0..length).map(|_| RoundGraph::star(n)).collect())
        }
        GraphFamily::StaticClique => {
            GraphSequence::new(n, (0..length).map(|_| RoundGraph::clique(n)).collect())
        }
        GraphFamily::RandomConnected(p) => {
            if !(0.0..=1.0).contains(p) {
                return Err(Error::BadProbability(*p, "[0, 1]"));
            }
            let mut rounds = Vec::with_capacity(length);
            for r in 0..length {
                let mut stream = rng.stream("oblivious-random", &[r as u64]);
                let mut edges = random_tree_edges(n, &mut stream);
                if *p > 0.0 {
                    for u in 0..n {
                        for v in u + 1..n {
                            if stream.random_bool(*p) {
                                edges.push((u, v));
                            }
                        }
                    }
                }
                rounds.push(RoundGraph::new(n, edges)?);
            }
            GraphSequence::new(n, rounds)
        }
        GraphFamily::RandomSpanningTree => {
            let mut rounds = Vec::with_capacity(length);
            for r in 0..length {
                let mut stream = rng.stream("oblivious-tree", &[r as u64]);
                rounds.push(RoundGraph::new(n, random_tree_edges(n, &mut stream))?);
            }
            GraphSequence::new(n, rounds)
        }
        GraphFamily::File(path) => {
            let file = std::fs::File::open(path)?;
            let seq =
                GraphSequence::read_from(std::io::BufReader::new(file), &path.to_string_lossy())?;
            if seq.n() != n {
                return Err(Error::NodeCountMismatch(seq.n(), n));
            }
            if seq.len() < length {
                return Err(Error::RoundsExhausted(length, seq.len()));
            }
            GraphSequence::new(n, seq.rounds()[..length].to_vec())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{init_distribution, InitSpec};

    fn dist_of(holdings: Vec<Vec<usize>>, k: usize) -> TokenDistribution {
        let n = holdings.len();
        init_distribution(&InitSpec::Explicit { holdings }, n, k, &RunRng::new(0)).unwrap()
    }

    #[test]
    fn free_edge_cases() {
        // both already hold the other's broadcast
        let d = dist_of(vec![vec![0, 1], vec![0, 1]], 2);
        let c = BroadcastChoice::new(vec![Some(0), Some(1)]);
        assert!(is_free_edge(0, 1, &d, &c));

        // both directions useful
        let d = dist_of(vec![vec![0], vec![1]], 2);
        let c = BroadcastChoice::new(vec![Some(0), Some(1)]);
        assert!(!is_free_edge(0, 1, &d, &c));

        // silent direction is useless, other direction lands on a holder
        let d = dist_of(vec![vec![0], vec![0]], 1);
        let c = BroadcastChoice::new(vec![Some(0), None]);
        assert!(is_free_edge(0, 1, &d, &c));
    }

    #[test]
    fn all_free_yields_complete_graph() {
        let n = 5;
        let d = init_distribution(&InitSpec::WellMixed { p: 1.0 }, n, 3, &RunRng::new(1)).unwrap();
        let c = BroadcastChoice::new(vec![Some(0); n]);
        let report = strongly_adaptive_graph(&d, &c, &RunRng::new(1), 1).unwrap();
        assert_eq!(report.components.len(), 1);
        assert_eq!(report.non_free_edge_count, 0);
        assert_eq!(report.graph.edge_count(), n * (n - 1) / 2);
        let (witness, dropped) = half_empty_witness(&report, &c);
        assert_eq!(witness.size(), 1);
        assert_eq!(dropped, 0);
        assert!(verify_half_empty(&witness, &d));
    }

    #[test]
    fn no_free_edges_yields_line() {
        // singleton holdings, everyone broadcasts their own token
        let n = 6;
        let d = dist_of((0..n).map(|v| vec![v]).collect(), n);
        let c = BroadcastChoice::new((0..n).map(Some).collect());
        let report = strongly_adaptive_graph(&d, &c, &RunRng::new(2), 1).unwrap();
        assert_eq!(report.components.len(), n);
        assert_eq!(report.non_free_edge_count, n - 1);
        assert_eq!(report.graph.edge_count(), n - 1);
        let (witness, dropped) = half_empty_witness(&report, &c);
        assert_eq!(dropped, 0);
        assert_eq!(witness.size(), n);
        assert!(verify_half_empty(&witness, &d));
    }

    #[test]
    fn witness_rejects_mutual_holders() {
        let d = dist_of(vec![vec![0, 1], vec![0, 1]], 2);
        let config = HalfEmptyConfig {
            nodes: vec![0, 1],
            tokens: vec![0, 1],
        };
        assert!(!verify_half_empty(&config, &d));
        let single = HalfEmptyConfig {
            nodes: vec![0],
            tokens: vec![0],
        };
        assert!(verify_half_empty(&single, &d));
    }

    #[test]
    fn invalid_choice_is_detected() {
        let d = dist_of(vec![vec![0], vec![]], 2);
        let c = BroadcastChoice::new(vec![Some(1), None]);
        assert!(matches!(
            strongly_adaptive_graph(&d, &c, &RunRng::new(0), 1),
            Err(Error::ChoiceNotHeld(0, 1))
        ));
    }

    #[test]
    fn rotating_line_matches_stated_rounds() {
        // round 1: 0-1-2-3, round 2: 0-2-3-1
        let g1 = rotating_line_graph(1, 4);
        assert_eq!(g1.edges(), &[(0, 1), (1, 2), (2, 3)]);
        let g2 = rotating_line_graph(2, 4);
        assert_eq!(g2.edges(), &[(0, 2), (1, 3), (2, 3)]);
        // every round is a Hamiltonian path
        for r in 1..20 {
            let g = rotating_line_graph(r, 7);
            assert_eq!(g.edge_count(), 6);
            assert!(g.neighbors(0).len() <= 2);
        }
    }

    #[test]
    fn families_produce_connected_rounds() {
        let rng = RunRng::new(9);
        let seq = oblivious_sequence(&GraphFamily::StaticPath, 5, 3, &rng).unwrap();
        assert_eq!(seq.len(), 3);
        assert_eq!(seq.round(1).edges(), &[(0, 1), (1, 2), (2, 3), (3, 4)]);

        // p = 0 leaves exactly a spanning tree
        let seq = oblivious_sequence(&GraphFamily::RandomConnected(0.0), 6, 4, &rng).unwrap();
        for g in seq.rounds() {
            assert_eq!(g.edge_count(), 5);
        }

        let seq = oblivious_sequence(&GraphFamily::RandomConnected(0.2), 32, 100, &rng).unwrap();
        assert_eq!(seq.len(), 100);
        // RoundGraph construction enforces connectivity for every round
    }

    #[test]
    fn bad_edge_probability_rejected() {
        let rng = RunRng::new(0);
        assert!(oblivious_sequence(&GraphFamily::RandomConnected(1.5), 4, 1, &rng).is_err());
    }
}
