use thiserror::Error;

/// Coarse class of a failure, used for exit codes and machine-readable reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Usage,
    Domain,
    NotFound,
}

impl Category {
    pub fn exit_code(self) -> i32 {
        match self {
            Category::Usage => 2,
            Category::Domain => 3,
            Category::NotFound => 4,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OslError {
    #[error("invalid indices ({i}, {j}) for dimension {n}")]
    InvalidIndices { i: usize, j: usize, n: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("zero vector cannot be normalized")]
    ZeroVector,
    #[error("zero column {0}")]
    ZeroColumn(usize),
    #[error("matrix is not strictly positive")]
    NotPrimitive,
    #[error("power iteration did not converge within {iterations} iterations")]
    Precision { iterations: usize },
    #[error("input is not strictly positive")]
    NonPositive,
    #[error("input is not weakly decreasing")]
    NotOrdered,
    #[error("input outside the domain: {0}")]
    OutOfDomain(String),
    #[error("expansion degenerated at step {step}")]
    Degenerate { step: usize },
    #[error("no permutation pair relates the expansions at step {step}")]
    IdentityViolation { step: usize },
    #[error("positivity onset not found within {cap} steps{}", if *.degenerate { " (expansion degenerated)" } else { "" })]
    OnsetNotFound { cap: usize, degenerate: bool },
    #[error("sampling failed after {cap} steps; best cone diameter {best}")]
    SamplingFailed { cap: usize, best: String },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid turn: {0}")]
    InvalidTurn(String),
    #[error("edge {0} is a loop")]
    LoopEdge(usize),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("graph is not trivalent")]
    NotTrivalent,
    #[error("graph has a separating edge")]
    SeparatingEdge,
    #[error("loop decomposition failed: {0}")]
    DecompositionFailed(String),
    #[error("fold amount {amount} exceeds the bound {bound} for turn {turn}")]
    BoundViolated { turn: usize, amount: String, bound: String },
    #[error("folding drops rank; the composite is not a homotopy equivalence")]
    NotAPath,
    #[error("parameters leave the open simplex: expression for edge {edge} is {value}")]
    SimplexExit { edge: usize, value: String },
    #[error("tie between lengths where a proper full fold is required: {0}")]
    NotProper(String),
    #[error("orientation is not transitive")]
    NonTransitive,
    #[error("fold sequence stalled: {0}")]
    FoldStalled(String),
    #[error("point outside the allowable neighborhood at fold {fold}")]
    OutsideNeighborhood { fold: usize },
    #[error("retarget failed at ray step {step}: {reason}")]
    RetargetFailure { step: usize, reason: String },
    #[error("witness loop crosses an illegal turn at fold {fold}")]
    NonGeodesic { fold: usize },
    #[error("not found within budget {budget}; best distance {best}")]
    NotFound { budget: usize, best: String },
    #[error("points lie in different simplices")]
    DifferentSimplices,
    #[error("automorphism could not be inverted")]
    NotInvertible,
    #[error("time {0} outside the ray extent")]
    TimeOutOfRange(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("usage: {0}")]
    Usage(String),
}

impl OslError {
    pub fn category(&self) -> Category {
        use OslError::*;
        match self {
            Parse(_) | Io(_) | Usage(_) => Category::Usage,
            NotFound { .. } | OnsetNotFound { .. } | SamplingFailed { .. } => Category::NotFound,
            _ => Category::Domain,
        }
    }

    /// Short stable identifier for reports.
    pub fn kind(&self) -> &'static str {
        use OslError::*;
        match self {
            InvalidIndices { .. } => "invalid-indices",
            DimensionMismatch { .. } => "dimension-mismatch",
            ZeroVector => "zero-vector",
            ZeroColumn(_) => "zero-column",
            NotPrimitive => "not-primitive",
            Precision { .. } => "precision",
            NonPositive => "non-positive",
            NotOrdered => "not-ordered",
            OutOfDomain(_) => "out-of-domain",
            Degenerate { .. } => "degenerate",
            IdentityViolation { .. } => "identity-violation",
            OnsetNotFound { .. } => "onset-not-found",
            SamplingFailed { .. } => "sampling-failed",
            InvalidGraph(_) => "invalid-graph",
            InvalidTurn(_) => "invalid-turn",
            LoopEdge(_) => "loop-edge",
            Disconnected => "disconnected",
            NotTrivalent => "not-trivalent",
            SeparatingEdge => "separating-edge",
            DecompositionFailed(_) => "decomposition-failed",
            BoundViolated { .. } => "bound-violated",
            NotAPath => "not-a-path",
            SimplexExit { .. } => "simplex-exit",
            NotProper(_) => "not-proper",
            NonTransitive => "non-transitive",
            FoldStalled(_) => "fold-stalled",
            OutsideNeighborhood { .. } => "outside-neighborhood",
            RetargetFailure { .. } => "retarget-failure",
            NonGeodesic { .. } => "non-geodesic",
            NotFound { .. } => "not-found",
            DifferentSimplices => "different-simplices",
            NotInvertible => "not-invertible",
            TimeOutOfRange(_) => "time-out-of-range",
            Parse(_) => "parse",
            Io(_) => "io",
            Usage(_) => "usage",
        }
    }
}

pub type Result<T> = std::result::Result<T, OslError>;
