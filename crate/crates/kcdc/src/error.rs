use thiserror::Error;

/// Errors surfaced by the KCDC library.
#[derive(Debug, Error)]
pub enum KcdcError {
    #[error("dimension mismatch: left has {left} components, right has {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("RBF bandwidth is a median multiple and has not been resolved against a sample")]
    UnresolvedBandwidth,

    #[error("invalid kernel specification: {0}")]
    InvalidKernel(String),

    #[error("cannot parse kernel spec `{input}`: {reason}")]
    KernelParse { input: String, reason: String },

    #[error("cannot parse hyperconfig `{input}`: {reason}")]
    ConfigParse { input: String, reason: String },

    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error(
        "regularized Gram matrix is not positive definite even with jitter {jitter:e}; \
         increase lambda"
    )]
    NotPositiveDefinite { jitter: f64 },

    #[error("regularized Gram matrix is singular; increase lambda")]
    SingularMatrix,

    #[error("linear solve residual {residual:e} exceeds tolerance {tolerance:e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },

    #[error("scoring failed for config {index} ({config}): {source}")]
    ConfigFailed {
        index: usize,
        config: String,
        source: Box<KcdcError>,
    },

    #[error("empty decision list")]
    EmptyDecisions,

    #[error("empty config list")]
    EmptyConfigs,

    #[error("empty training corpus")]
    EmptyCorpus,

    #[error("training corpus entry `{0}` has no ground-truth direction")]
    UnlabeledPair(String),

    #[error("optimizer did not converge within {iterations} iterations (gradient norm {grad:e})")]
    NoConvergence { iterations: usize, grad: f64 },

    #[error("synthetic formula produced no finite value after {attempts} redraws")]
    NonFiniteSample { attempts: usize },

    #[error("{path}:{line}: malformed numeric row: {reason}")]
    MalformedRow {
        path: String,
        line: usize,
        reason: String,
    },

    #[error("{path}: {reason}")]
    MalformedMeta { path: String, reason: String },

    #[error(
        "pair {pair_id}: column range exceeds file with {columns} columns \
         (cause {cause_first}..={cause_last}, effect {effect_first}..={effect_last})"
    )]
    ColumnRangeOutOfBounds {
        pair_id: u32,
        columns: usize,
        cause_first: usize,
        cause_last: usize,
        effect_first: usize,
        effect_last: usize,
    },

    #[error("total weight is zero")]
    ZeroTotalWeight,

    #[error("series of length {len} cannot be lagged by {lag}")]
    LagTooLarge { len: usize, lag: usize },

    #[error("model file format error: {0}")]
    ModelFormat(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl KcdcError {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        KcdcError::Io {
            path: path.into(),
            source,
        }
    }
}
