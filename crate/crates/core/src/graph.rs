//! Round graphs and graph sequences.
//!
//! The adversary contract requires every round's communication graph to be
//! connected, so connectivity is checked at construction time and a
//! `RoundGraph` value is always valid.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// One round's communication network: an undirected connected graph without
/// self-loops or duplicate edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
    // one bitmask row per node for O(1) membership tests
    bits: Vec<u64>,
    row: usize,
}

impl RoundGraph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut norm: Vec<(usize, usize)> = Vec::new();
        for (u, v) in edges {
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if u >= n {
                return Err(Error::NodeOutOfRange(u, n));
            }
            if v >= n {
                return Err(Error::NodeOutOfRange(v, n));
            }
            norm.push((u.min(v), u.max(v)));
        }
        norm.sort_unstable();
        norm.dedup();

        let row = n.div_ceil(64);
        let mut adjacency = vec![Vec::new(); n];
        let mut bits = vec![0u64; n * row];
        for &(u, v) in &norm {
            adjacency[u].push(v);
            adjacency[v].push(u);
            bits[u * row + v / 64] |= 1 << (v % 64);
            bits[v * row + u / 64] |= 1 << (u % 64);
        }

        let g = RoundGraph {
            n,
            edges: norm,
            adjacency,
            bits,
            row,
        };
        if !g.is_connected() {
            return Err(Error::Disconnected(n));
        }
        Ok(g)
    }

    fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == self.n
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.bits[u * self.row + v / 64] >> (v % 64) & 1 == 1
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn path(n: usize) -> Self {
        RoundGraph::new(n, (1..n).map(|v| (v - 1, v))).expect("path is connected")
    }

    pub fn star(n: usize) -> Self {
        RoundGraph::new(n, (1..n).map(|v| (0, v))).expect("star is connected")
    }

    pub fn clique(n: usize) -> Self {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        RoundGraph::new(n, edges).expect("clique is connected")
    }
}

/// The dynamic network: one connected graph per round, shared node count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphSequence {
    n: usize,
    rounds: Vec<RoundGraph>,
}

impl GraphSequence {
    pub fn new(n: usize, rounds: Vec<RoundGraph>) -> Result<Self> {
        for g in &rounds {
            if g.n() != n {
                return Err(Error::NodeCountMismatch(g.n(), n));
            }
        }
        Ok(GraphSequence { n, rounds })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    /// The graph of 1-based round `r`.
    pub fn round(&self, r: usize) -> &RoundGraph {
        &self.rounds[r - 1]
    }

    pub fn rounds(&self) -> &[RoundGraph] {
        &self.rounds
    }

    pub fn push(&mut self, g: RoundGraph) -> Result<()> {
        if g.n() != self.n {
            return Err(Error::NodeCountMismatch(g.n(), self.n));
        }
        self.rounds.push(g);
        Ok(())
    }

    /// Text format: `n L` header, then per round `round r m` and `m` edge
    /// lines `u v`. Disconnected rounds are rejected by construction.
    pub fn write_to<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "{} {}", self.n, self.rounds.len())?;
        for (i, g) in self.rounds.iter().enumerate() {
            writeln!(out, "round {} {}", i + 1, g.edge_count())?;
            for &(u, v) in g.edges() {
                writeln!(out, "{u} {v}")?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(input: R, file: &str) -> Result<Self> {
        let parse = |line: usize, msg: &str| Error::Parse {
            file: file.to_string(),
            line,
            msg: msg.to_string(),
        };
        let mut lineno = 0usize;
        let mut lines = input.lines();
        let mut next_line = |lineno: &mut usize| -> Result<String> {
            *lineno += 1;
            lines
                .next()
                .ok_or_else(|| Error::Parse {
                    file: file.to_string(),
                    line: *lineno,
                    msg: "unexpected end of file".to_string(),
                })?
                .map_err(Error::Io)
        };

        let header = next_line(&mut lineno)?;
        let mut it = header.split_whitespace();
        let n: usize = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse(lineno, "expected `n L`"))?;
        let count: usize = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse(lineno, "expected `n L`"))?;

        let mut rounds = Vec::with_capacity(count);
        for r in 1..=count {
            let head = next_line(&mut lineno)?;
            let mut it = head.split_whitespace();
            if it.next() != Some("round") {
                return Err(parse(lineno, "expected `round r m`"));
            }
            let got_r: usize = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse(lineno, "bad round index"))?;
            if got_r != r {
                return Err(parse(lineno, "round indices must be consecutive from 1"));
            }
            let m: usize = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse(lineno, "bad edge count"))?;
            let mut edges = Vec::with_capacity(m);
            for _ in 0..m {
                let line = next_line(&mut lineno)?;
                let mut it = line.split_whitespace();
                let u: usize = it
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| parse(lineno, "expected `u v`"))?;
                let v: usize = it
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| parse(lineno, "expected `u v`"))?;
                edges.push((u, v));
            }
            rounds.push(RoundGraph::new(n, edges)?);
        }
        GraphSequence::new(n, rounds)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_self_loop_and_disconnection() {
        assert!(matches!(
            RoundGraph::new(3, [(0, 0)]),
            Err(Error::SelfLoop(0))
        ));
        assert!(matches!(
            RoundGraph::new(4, [(0, 1), (2, 3)]),
            Err(Error::Disconnected(4))
        ));
    }

    #[test]
    fn dedups_edges() {
        let g = RoundGraph::new(3, [(0, 1), (1, 0), (1, 2)]).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert!(g.has_edge(1, 0));
        assert!(!g.has_edge(0, 2));
    }

    #[test]
    fn single_node_is_connected() {
        let g = RoundGraph::new(1, []).unwrap();
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn sequence_file_round_trip() {
        let seq = GraphSequence::new(
            4,
            vec![
                RoundGraph::path(4),
                RoundGraph::star(4),
                RoundGraph::clique(4),
            ],
        )
        .unwrap();
        let mut buf = Vec::new();
        seq.write_to(&mut buf).unwrap();
        let back = GraphSequence::read_from(&buf[..], "mem").unwrap();
        assert_eq!(seq, back);
    }

    #[test]
    fn file_with_disconnected_round_rejected() {
        let text = "4 1\nround 1 2\n0 1\n2 3\n";
        assert!(GraphSequence::read_from(text.as_bytes(), "mem").is_err());
    }
}
