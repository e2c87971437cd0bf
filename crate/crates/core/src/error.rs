use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// A single violated metric axiom.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricViolation {
    NonSquare {
        row: usize,
        len: usize,
        expected: usize,
    },
    NonFinite {
        i: usize,
        j: usize,
    },
    NegativeEntry {
        i: usize,
        j: usize,
        value: f64,
    },
    AsymmetricPair {
        i: usize,
        j: usize,
    },
    NonzeroDiagonal {
        i: usize,
    },
    /// `d(i,j) > d(i,m) + d(m,j)` by `slack` beyond tolerance.
    TriangleViolation {
        i: usize,
        m: usize,
        j: usize,
        slack: f64,
    },
}

impl fmt::Display for MetricViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NonSquare { row, len, expected } => {
                write!(f, "row {row} has {len} entries, expected {expected}")
            }
            Self::NonFinite { i, j } => write!(f, "entry ({i},{j}) is not finite"),
            Self::NegativeEntry { i, j, value } => {
                write!(f, "entry ({i},{j}) = {value} is negative")
            }
            Self::AsymmetricPair { i, j } => write!(f, "d({i},{j}) != d({j},{i})"),
            Self::NonzeroDiagonal { i } => write!(f, "d({i},{i}) != 0"),
            Self::TriangleViolation { i, m, j, slack } => {
                write!(f, "d({i},{j}) exceeds d({i},{m}) + d({m},{j}) by {slack:e}")
            }
        }
    }
}

fn join_violations(v: &[MetricViolation]) -> String {
    let shown: Vec<String> = v.iter().take(8).map(ToString::to_string).collect();
    let mut s = shown.join("; ");
    if v.len() > 8 {
        s.push_str(&format!("; ... ({} total)", v.len()));
    }
    s
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid metric: {}", join_violations(.0))]
    InvalidMetric(Vec<MetricViolation>),

    #[error("dimension mismatch: expected {expected}, found {found} ({what})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("input tree contains a cycle through node {0}")]
    CyclicInput(usize),

    #[error("input tree is disconnected: node {0} is unreachable from the root")]
    DisconnectedInput(usize),

    #[error("negative edge cost {cost} on edge into node {node}")]
    NegativeEdgeCost { node: usize, cost: f64 },

    #[error("node {0} has {1} children, expected 0 or 2")]
    NotBinary(usize, usize),

    #[error("metric is not a tree: {0}")]
    NotATree(String),

    #[error("placements have different sizes: {0} vs {1}")]
    SizeMismatch(usize, usize),

    #[error("fleet size mismatch: instance k = {expected}, placement k = {found}")]
    KMismatch { expected: usize, found: usize },

    #[error("allowable set is empty")]
    EmptyAllowableSet,

    #[error("instance too large for exhaustive evaluation: {0}")]
    TooLarge(String),

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("{0} is not divisible by {1}")]
    NotDivisible(usize, usize),

    #[error("bad dimensions: {0}")]
    BadDimensions(String),

    #[error("infeasible: {0}")]
    Infeasible(String),
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
