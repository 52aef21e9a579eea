use thiserror::Error;

/// Everything that can go wrong while building chains, evaluating forms or
/// checking curvature criteria.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("invalid mapping representation: {0}")]
    InvalidMapping(String),

    #[error("state space too large: {size} states exceeds the cap of {cap} (set CURVLAB_STATE_CAP to override)")]
    TooLarge { size: usize, cap: usize },

    #[error("mapping representation is not commutative: move {delta} and move {eta} disagree at state {x}")]
    NotCommutative { x: usize, delta: usize, eta: usize },

    #[error("move {0} is not its own inverse")]
    NotInvolutive(usize),

    #[error("bad split: {0}")]
    BadSplit(String),

    #[error("generator set is not conjugacy invariant: conjugating generator {generator} by group element {conjugator} leaves the set")]
    NotConjugacyInvariant { generator: usize, conjugator: usize },

    #[error("R is not admissible: clause ({clause}) fails at x={x}, delta={delta}, eta={eta}")]
    InadmissibleR {
        clause: &'static str,
        x: usize,
        delta: usize,
        eta: usize,
    },

    #[error("hypothesis failed: {0}")]
    HypothesisFailed(String),

    #[error("q* is undefined for eta in {{delta, delta^-1}} (delta={delta}, eta={eta})")]
    UndefinedQStar { delta: usize, eta: usize },

    #[error("no root: epsilon({beta_hi}) = {value} < 1 at the search cap")]
    NoRoot { beta_hi: f64, value: f64 },

    #[error("allowed set is not decreasing: {0}")]
    NotDecreasing(String),

    #[error("bad parameters: {0}")]
    BadParams(String),

    #[error("compute budget exceeded: {0}")]
    Budget(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
