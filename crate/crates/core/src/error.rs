use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrices must be square and of equal size (got {w_rows}x{w_cols} and {r_rows}x{r_cols})")]
    DimensionMismatch {
        w_rows: usize,
        w_cols: usize,
        r_rows: usize,
        r_cols: usize,
    },

    #[error("a graph needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),

    #[error("row {row} of the transition matrix sums to {sum}")]
    NotStochastic { row: usize, sum: f64 },

    #[error("transition entry ({i},{j}) = {value} is outside [0,1]")]
    NegativeEntry { i: usize, j: usize, value: f64 },

    #[error("resistance on edge ({i},{j}) is {value}, must be finite and > 0")]
    ZeroOrNegativeResistanceOnEdge { i: usize, j: usize, value: f64 },

    #[error("transition graph is not strongly connected (node {unreached} unreachable)")]
    NotIrreducible { unreached: usize },

    #[error("adjacency is disconnected (node {unreached} unreachable from node 0)")]
    Disconnected { unreached: usize },

    #[error("adjacency is not a symmetric zero-diagonal 0/1 matrix at ({i},{j})")]
    NotSymmetric { i: usize, j: usize },

    #[error("node {node} out of range for a graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("source and target must be distinct (both {0})")]
    SameEndpoints(usize),

    #[error("inverse temperature must be finite and >= 0, got {0}")]
    InvalidBeta(f64),

    #[error("invalid cost exponent p = {p}: {reason}")]
    InvalidExponent { p: f64, reason: &'static str },

    #[error("({i},{j}) is not an edge of the graph")]
    NotAnEdge { i: usize, j: usize },

    #[error("target unreachable at beta = {beta}: {reason}")]
    TargetUnreachableAtBeta { beta: f64, reason: String },

    #[error("beta = {beta} exceeds the safe exponent range (limit beta < {limit})")]
    UnderflowGuardTripped { beta: f64, limit: f64 },

    #[error("fixed point did not converge in {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("flow is positive on ({i},{j}) where the transition matrix is zero")]
    SupportViolation { i: usize, j: usize },

    #[error("flows have different endpoints or values")]
    IncompatibleEndpoints,

    #[error("mixture weight {0} outside [0,1]")]
    InvalidMixture(f64),

    #[error("solve for pair (s={s}, t={t}) failed: {source}")]
    Pair {
        s: usize,
        t: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("finite-difference step must be finite and > 0, got {0}")]
    InvalidStep(f64),

    #[error("invalid beta grid: {0}")]
    InvalidGrid(String),

    #[error("observed energy {observed} outside attainable range [{lo}, {hi}]")]
    TargetOutsideRange { observed: f64, lo: f64, hi: f64 },

    #[error("no temperature in the bracket reproduces the observed energy {observed}")]
    NonBracketed { observed: f64 },

    #[error("observed time {observed} outside the curve range [{min}, {max}]")]
    OutsideCurveRange { observed: f64, min: f64, max: f64 },

    #[error("all {n_walks} simulated walks were killed before reaching the target")]
    AllWalksKilled { n_walks: usize },

    #[error("electric network is singular or resistances are not symmetric")]
    SingularNetwork,

    #[error("target {t} unreachable from {s}")]
    TargetUnreachable { s: usize, t: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable machine-readable code, used by the CLI's `ERROR <CODE>: ...` lines.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "DIMENSION_MISMATCH",
            Error::TooFewNodes(_) => "TOO_FEW_NODES",
            Error::NotStochastic { .. } => "NOT_STOCHASTIC",
            Error::NegativeEntry { .. } => "NEGATIVE_ENTRY",
            Error::ZeroOrNegativeResistanceOnEdge { .. } => "BAD_RESISTANCE",
            Error::NotIrreducible { .. } => "NOT_IRREDUCIBLE",
            Error::Disconnected { .. } => "DISCONNECTED",
            Error::NotSymmetric { .. } => "NOT_SYMMETRIC",
            Error::NodeOutOfRange { .. } => "NODE_OUT_OF_RANGE",
            Error::SameEndpoints(_) => "SAME_ENDPOINTS",
            Error::InvalidBeta(_) => "INVALID_BETA",
            Error::InvalidExponent { .. } => "INVALID_EXPONENT",
            Error::NotAnEdge { .. } => "NOT_AN_EDGE",
            Error::TargetUnreachableAtBeta { .. } => "TARGET_UNREACHABLE_AT_BETA",
            Error::UnderflowGuardTripped { .. } => "UNDERFLOW_GUARD",
            Error::NoConvergence { .. } => "NO_CONVERGENCE",
            Error::SupportViolation { .. } => "SUPPORT_VIOLATION",
            Error::IncompatibleEndpoints => "INCOMPATIBLE_ENDPOINTS",
            Error::InvalidMixture(_) => "INVALID_MIXTURE",
            Error::Pair { source, .. } => source.code(),
            Error::InvalidStep(_) => "INVALID_STEP",
            Error::InvalidGrid(_) => "INVALID_GRID",
            Error::TargetOutsideRange { .. } => "TARGET_OUTSIDE_RANGE",
            Error::NonBracketed { .. } => "NON_BRACKETED",
            Error::OutsideCurveRange { .. } => "OUTSIDE_CURVE_RANGE",
            Error::AllWalksKilled { .. } => "ALL_WALKS_KILLED",
            Error::SingularNetwork => "SINGULAR_NETWORK",
            Error::TargetUnreachable { .. } => "TARGET_UNREACHABLE",
            Error::Parse(_) => "PARSE",
            Error::Io(_) => "IO",
            Error::Json(_) => "JSON",
            Error::Csv(_) => "CSV",
        }
    }
}
