use thiserror::Error;

/// Errors shared by the simulation engine, adversaries, protocols and the
/// offline schedulers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("node id {0} out of range (n = {1})")]
    NodeOutOfRange(usize, usize),
    #[error("token id {0} out of range (k = {1})")]
    TokenOutOfRange(usize, usize),
    #[error("probability {0} outside the allowed range {1}")]
    BadProbability(f64, &'static str),
    #[error("graph has a self-loop at node {0}")]
    SelfLoop(usize),
    #[error("graph on {0} nodes is not connected")]
    Disconnected(usize),
    #[error("graph node count {0} does not match distribution node count {1}")]
    NodeCountMismatch(usize, usize),
    #[error("transfer {0:?} uses an edge absent from the round graph")]
    TransferNonEdge(crate::schedule::Transfer),
    #[error("sender of transfer {0:?} does not hold the token at the start of the round")]
    SenderLacksToken(crate::schedule::Transfer),
    #[error("duplicate transfer {0:?}")]
    DuplicateTransfer(crate::schedule::Transfer),
    #[error("node {0} chose token {1} it does not hold")]
    ChoiceNotHeld(usize, usize),
    #[error(
        "orientation directs {0} -> {1} but the sender's holdings are a subset of the receiver's"
    )]
    IllegalOrientation(usize, usize),
    #[error("adversary '{adversary}' cannot drive protocol '{protocol}': {reason}")]
    ModelOrderMismatch {
        adversary: String,
        protocol: String,
        reason: &'static str,
    },
    #[error("schedule length {0} exceeds the {1} available rounds")]
    ScheduleTooLong(usize, usize),
    #[error("requested {0} rounds but the sequence provides {1}")]
    RoundsExhausted(usize, usize),
    #[error("max flow {got} is below the required {want}")]
    FlowDeficit { got: i64, want: i64 },
    #[error("phase {phase} flow deficit after {retries} retries (got {got}, want {want})")]
    PhaseFlowDeficit {
        phase: usize,
        retries: usize,
        got: i64,
        want: i64,
    },
    #[error("token {0} has no source node")]
    MissingTokenSource(usize),
    #[error("input graph is not a tree ({nodes} nodes, {edges} edges)")]
    NotATree { nodes: usize, edges: usize },
    #[error("size parameter {0} invalid for a {1}-node tree")]
    BadSizeParameter(usize, usize),
    #[error("failure probability sum at the root is {0} >= 1; the instance cannot be certified")]
    RootProbabilityTooLarge(String),
    #[error("flow paths are not edge-disjoint on unit-capacity arcs")]
    PathsNotDisjoint,
    #[error("path origin {node} lacks token {token}")]
    PathOriginLacksToken { node: usize, token: usize },
    #[error("parse error in {file}:{line}: {msg}")]
    Parse {
        file: String,
        line: usize,
        msg: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
