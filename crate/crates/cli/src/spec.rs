//! Spec strings accepted on the command line.

use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use kgossip::adversary::GraphFamily;
use kgossip::dist::InitSpec;
use kgossip::engine::{AdversarySpec, ProtocolSpec};
use kgossip::protocol::BroadcastPolicy;
use kgossip::TokenDistribution;

pub fn parse_adversary(s: &str) -> Result<AdversarySpec> {
    Ok(match s {
        "strong" => AdversarySpec::Strong,
        "rotating" => AdversarySpec::RotatingLine,
        other => AdversarySpec::Oblivious(parse_family(other)?),
    })
}

pub fn parse_family(s: &str) -> Result<GraphFamily> {
    Ok(match s {
        "static-path" => GraphFamily::StaticPath,
        "static-star" => GraphFamily::StaticStar,
        "static-clique" => GraphFamily::StaticClique,
        "tree" => GraphFamily::RandomSpanningTree,
        other => {
            if let Some(p) = other.strip_prefix("random:") {
                GraphFamily::RandomConnected(
                    p.parse::<f64>()
                        .with_context(|| format!("bad edge probability in `{other}`"))?,
                )
            } else if let Some(path) = other.strip_prefix("file:") {
                GraphFamily::File(PathBuf::from(path))
            } else {
                bail!("unknown graph family `{other}`");
            }
        }
    })
}

pub fn parse_protocol(s: &str) -> Result<ProtocolSpec> {
    Ok(match s {
        "symdiff" => ProtocolSpec::SymDiff,
        "symdiff-oriented" => ProtocolSpec::SymDiffOriented,
        "det-symdiff" => ProtocolSpec::DetSymDiff,
        "bcast:random" => ProtocolSpec::Broadcast(BroadcastPolicy::UniformRandomHeld),
        "bcast:round-robin" => ProtocolSpec::Broadcast(BroadcastPolicy::RoundRobinHeld),
        "bcast:min-id" => ProtocolSpec::Broadcast(BroadcastPolicy::MinIdHeld),
        "bcast:flood" => ProtocolSpec::Broadcast(BroadcastPolicy::PhasedFlood),
        other => bail!("unknown protocol `{other}`"),
    })
}

/// Either an inline init spec or a distribution file.
pub enum InitSource {
    Spec(InitSpec),
    File(PathBuf),
}

/// `well-mixed:<p>`, `singleton` (token i at node i mod n), `all-at-one:<v>`
/// or `file:<path>`.
pub fn parse_init(s: &str) -> Result<InitSource> {
    if let Some(p) = s.strip_prefix("well-mixed:") {
        let p: f64 = p
            .parse()
            .with_context(|| format!("bad probability in `{s}`"))?;
        return Ok(InitSource::Spec(InitSpec::WellMixed { p }));
    }
    if s == "singleton" {
        // placeholder assignment; resolved once n and k are known
        return Ok(InitSource::Spec(InitSpec::Singleton {
            assignment: Vec::new(),
        }));
    }
    if let Some(v) = s.strip_prefix("all-at-one:") {
        let node: usize = v.parse().with_context(|| format!("bad node id in `{s}`"))?;
        return Ok(InitSource::Spec(InitSpec::AllAtOne { node }));
    }
    if let Some(path) = s.strip_prefix("file:") {
        return Ok(InitSource::File(PathBuf::from(path)));
    }
    Err(anyhow!("unknown init spec `{s}`"))
}

pub fn resolve_init(
    source: &InitSource,
    n: usize,
    k: usize,
    rng: &kgossip::RunRng,
) -> Result<TokenDistribution> {
    match source {
        InitSource::Spec(InitSpec::Singleton { assignment }) if assignment.is_empty() => {
            let assignment: Vec<usize> = (0..k).map(|t| t % n).collect();
            Ok(kgossip::init_distribution(
                &InitSpec::Singleton { assignment },
                n,
                k,
                rng,
            )?)
        }
        InitSource::Spec(spec) => Ok(kgossip::init_distribution(spec, n, k, rng)?),
        InitSource::File(path) => {
            let file = std::fs::File::open(path)
                .with_context(|| format!("cannot open {}", path.display()))?;
            let dist = TokenDistribution::read_from(
                std::io::BufReader::new(file),
                &path.to_string_lossy(),
            )?;
            if dist.n() != n || dist.k() != k {
                bail!(
                    "distribution file is {}x{}, expected {}x{}",
                    dist.n(),
                    dist.k(),
                    n,
                    k
                );
            }
            Ok(dist)
        }
    }
}

pub fn parse_token_list(s: &str) -> Result<Vec<usize>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .with_context(|| format!("bad token id `{part}`"))
        })
        .collect()
}
