//! Per-node token holdings and initial distributions.

use std::io::{BufRead, Write};

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::RunRng;
use crate::token::TokenSet;

/// Global simulation state: one `TokenSet` of width `k` per node.
///
/// Under the engine holdings only ever grow; tokens are never deleted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenDistribution {
    n: usize,
    k: usize,
    holdings: Vec<TokenSet>,
}

/// How the initial holdings are drawn.
#[derive(Debug, Clone)]
pub enum InitSpec {
    /// Every (node, token) pair held independently with probability `p`.
    WellMixed { p: f64 },
    /// Token `t` starts at node `assignment[t]` and nowhere else.
    Singleton { assignment: Vec<usize> },
    /// One node starts with every token; the rest start empty.
    AllAtOne { node: usize },
    /// Full holdings given verbatim.
    Explicit { holdings: Vec<Vec<usize>> },
}

impl TokenDistribution {
    pub fn empty(n: usize, k: usize) -> Self {
        TokenDistribution {
            n,
            k,
            holdings: vec![TokenSet::new(k); n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn node(&self, v: usize) -> &TokenSet {
        &self.holdings[v]
    }

    /// Adds a token; returns true when the node lacked it.
    pub fn grant(&mut self, v: usize, t: usize) -> bool {
        self.holdings[v].insert(t)
    }

    pub fn holdings(&self) -> &[TokenSet] {
        &self.holdings
    }

    pub fn is_complete(&self) -> bool {
        self.holdings.iter().all(|h| h.len() == self.k)
    }

    /// Total number of (node, token) pairs still missing.
    pub fn missing_total(&self) -> u64 {
        self.holdings.iter().map(|h| h.missing() as u64).sum()
    }

    pub fn write_to<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "{} {}", self.n, self.k)?;
        for h in &self.holdings {
            let ids: Vec<String> = h.iter().map(|t| t.to_string()).collect();
            writeln!(out, "{}", ids.join(" "))?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(input: R, file: &str) -> Result<Self> {
        let parse = |line: usize, msg: &str| Error::Parse {
            file: file.to_string(),
            line,
            msg: msg.to_string(),
        };
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| parse(1, "missing header"))?
            .map_err(Error::Io)?;
        let mut it = header.split_whitespace();
        let n: usize = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse(1, "expected `n k`"))?;
        let k: usize = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse(1, "expected `n k`"))?;
        let mut dist = TokenDistribution::empty(n, k);
        for v in 0..n {
            let line = lines
                .next()
                .ok_or_else(|| parse(v + 2, "missing holdings line"))?
                .map_err(Error::Io)?;
            for tok in line.split_whitespace() {
                let t: usize = tok.parse().map_err(|_| parse(v + 2, "bad token id"))?;
                if t >= k {
                    return Err(Error::TokenOutOfRange(t, k));
                }
                dist.grant(v, t);
            }
        }
        Ok(dist)
    }
}

/// Builds the initial distribution for a run.
///
/// Well-mixed draws are keyed per node so the layout is independent of
/// evaluation order.
pub fn init_distribution(
    spec: &InitSpec,
    n: usize,
    k: usize,
    rng: &RunRng,
) -> Result<TokenDistribution> {
    let mut dist = TokenDistribution::empty(n, k);
    match spec {
        InitSpec::WellMixed { p } => {
            if !(*p > 0.0 && *p <= 1.0) {
                return Err(Error::BadProbability(*p, "(0, 1]"));
            }
            for v in 0..n {
                let mut stream = rng.stream("init-well-mixed", &[v as u64]);
                for t in 0..k {
                    if stream.random_bool(*p) {
                        dist.grant(v, t);
                    }
                }
            }
        }
        InitSpec::Singleton { assignment } => {
            if assignment.len() != k {
                return Err(Error::TokenOutOfRange(assignment.len(), k));
            }
            for (t, &v) in assignment.iter().enumerate() {
                if v >= n {
                    return Err(Error::NodeOutOfRange(v, n));
                }
                dist.grant(v, t);
            }
        }
        InitSpec::AllAtOne { node } => {
            if *node >= n {
                return Err(Error::NodeOutOfRange(*node, n));
            }
            for t in 0..k {
                dist.grant(*node, t);
            }
        }
        InitSpec::Explicit { holdings } => {
            if holdings.len() != n {
                return Err(Error::NodeOutOfRange(holdings.len(), n));
            }
            for (v, tokens) in holdings.iter().enumerate() {
                for &t in tokens {
                    if t >= k {
                        return Err(Error::TokenOutOfRange(t, k));
                    }
                    dist.grant(v, t);
                }
            }
        }
    }
    Ok(dist)
}
