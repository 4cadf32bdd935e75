//! Schedules: per-round directed token transfers, and the validator that
//! replays them against a graph sequence.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use crate::dist::TokenDistribution;
use crate::error::{Error, Result};
use crate::graph::GraphSequence;

/// One directed token movement in a specific round (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transfer {
    pub round: usize,
    pub from: usize,
    pub to: usize,
    pub token: usize,
}

/// Capacity regime of a schedule.
///
/// Multiport lets a node send one token per incident edge per direction.
/// Broadcast forces a node to send a single token value per round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleMode {
    Multiport,
    Broadcast,
}

impl ScheduleMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScheduleMode::Multiport => "multiport",
            ScheduleMode::Broadcast => "broadcast",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "multiport" => Some(ScheduleMode::Multiport),
            "broadcast" => Some(ScheduleMode::Broadcast),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub mode: ScheduleMode,
    pub transfers: Vec<Transfer>,
}

impl Schedule {
    pub fn new(mode: ScheduleMode) -> Self {
        Schedule {
            mode,
            transfers: Vec::new(),
        }
    }

    /// Largest round index carrying a transfer; 0 for an empty schedule.
    pub fn length(&self) -> usize {
        self.transfers.iter().map(|t| t.round).max().unwrap_or(0)
    }

    pub fn sort(&mut self) {
        self.transfers.sort_unstable();
    }

    pub fn write_to<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "mode {}", self.mode.as_str())?;
        for t in &self.transfers {
            writeln!(out, "{} {} {} {}", t.round, t.from, t.to, t.token)?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(input: R, file: &str) -> Result<Self> {
        let parse = |line: usize, msg: &str| Error::Parse {
            file: file.to_string(),
            line,
            msg: msg.to_string(),
        };
        let mut lines = input.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| parse(1, "missing mode header"))?;
        let header = header.map_err(Error::Io)?;
        let mode = header
            .strip_prefix("mode ")
            .and_then(ScheduleMode::parse)
            .ok_or_else(|| parse(1, "expected `mode multiport|broadcast`"))?;
        let mut schedule = Schedule::new(mode);
        for (idx, line) in lines {
            let line = line.map_err(Error::Io)?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<usize> = line
                .split_whitespace()
                .map(|s| s.parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| parse(idx + 1, "expected `r u v t`"))?;
            if fields.len() != 4 {
                return Err(parse(idx + 1, "expected `r u v t`"));
            }
            schedule.transfers.push(Transfer {
                round: fields[0],
                from: fields[1],
                to: fields[2],
                token: fields[3],
            });
        }
        Ok(schedule)
    }
}

/// What a schedule must have achieved once replayed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GoalSpec {
    AllNodesAllTokens,
    /// Every listed sink holds all tokens.
    Sinks(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    /// Transfer uses an edge absent from its round's graph.
    NonEdge,
    /// Sender does not hold the token at the start of the round.
    SenderLacksToken,
    /// More than one token crosses an edge direction in a round.
    MultiportCapacity,
    /// A node sends two distinct token values in one round.
    BroadcastCapacity,
    /// Exact duplicate of an earlier transfer in the same round.
    Duplicate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Ok,
    /// First violating transfer in (round, from, to, token) order.
    Violation {
        kind: ViolationKind,
        transfer: Transfer,
    },
    /// Replay was feasible but the goal is unmet.
    GoalNotMet {
        node: usize,
        token: usize,
    },
}

impl Verdict {
    pub fn is_ok(&self) -> bool {
        matches!(self, Verdict::Ok)
    }
}

/// Replays `schedule` against `graphs` from `init` and checks feasibility
/// and the goal. Violations are returned as a verdict, not an error; only a
/// schedule longer than the sequence is a hard error.
pub fn validate_schedule(
    schedule: &Schedule,
    graphs: &GraphSequence,
    init: &TokenDistribution,
    goal: &GoalSpec,
) -> Result<Verdict> {
    if schedule.length() > graphs.len() {
        return Err(Error::ScheduleTooLong(schedule.length(), graphs.len()));
    }

    let mut ordered: Vec<Transfer> = schedule.transfers.clone();
    ordered.sort_unstable();

    let mut dist = init.clone();
    let mut i = 0;
    while i < ordered.len() {
        let round = ordered[i].round;
        let mut j = i;
        while j < ordered.len() && ordered[j].round == round {
            j += 1;
        }
        let graph = graphs.round(round);

        let mut seen: HashSet<(usize, usize, usize)> = HashSet::new();
        let mut direction_used: HashSet<(usize, usize)> = HashSet::new();
        let mut broadcast_choice: Vec<Option<usize>> = vec![None; init.n()];

        for t in &ordered[i..j] {
            if t.from >= init.n() || t.to >= init.n() {
                return Err(Error::NodeOutOfRange(t.from.max(t.to), init.n()));
            }
            if t.token >= init.k() {
                return Err(Error::TokenOutOfRange(t.token, init.k()));
            }
            if !graph.has_edge(t.from, t.to) {
                return Ok(Verdict::Violation {
                    kind: ViolationKind::NonEdge,
                    transfer: *t,
                });
            }
            if !dist.node(t.from).contains(t.token) {
                return Ok(Verdict::Violation {
                    kind: ViolationKind::SenderLacksToken,
                    transfer: *t,
                });
            }
            if !seen.insert((t.from, t.to, t.token)) {
                return Ok(Verdict::Violation {
                    kind: ViolationKind::Duplicate,
                    transfer: *t,
                });
            }
            match schedule.mode {
                ScheduleMode::Multiport => {
                    if !direction_used.insert((t.from, t.to)) {
                        return Ok(Verdict::Violation {
                            kind: ViolationKind::MultiportCapacity,
                            transfer: *t,
                        });
                    }
                }
                ScheduleMode::Broadcast => match broadcast_choice[t.from] {
                    Some(tok) if tok != t.token => {
                        return Ok(Verdict::Violation {
                            kind: ViolationKind::BroadcastCapacity,
                            transfer: *t,
                        });
                    }
                    _ => broadcast_choice[t.from] = Some(t.token),
                },
            }
        }
        // receivers update only after the whole round is checked
        for t in &ordered[i..j] {
            dist.grant(t.to, t.token);
        }
        i = j;
    }

    let sinks: Vec<usize> = match goal {
        GoalSpec::AllNodesAllTokens => (0..init.n()).collect(),
        GoalSpec::Sinks(s) => s.clone(),
    };
    for &v in &sinks {
        if dist.node(v).len() != init.k() {
            let token = dist
                .node(v)
                .iter()
                .chain(std::iter::once(usize::MAX))
                .enumerate()
                .find(|(idx, t)| idx != t)
                .map(|(idx, _)| idx)
                .unwrap_or(0);
            return Ok(Verdict::GoalNotMet { node: v, token });
        }
    }
    Ok(Verdict::Ok)
}
