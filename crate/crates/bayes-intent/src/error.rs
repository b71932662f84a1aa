use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate vector: norm below threshold")]
    DegenerateVector,

    #[error("degenerate hand: the three hand points are collinear or coincident")]
    DegenerateHand,

    #[error("non-monotone time: current timestamp {cur} is not after previous {prev}")]
    NonMonotoneTime { prev: f64, cur: f64 },

    #[error("invalid hand thresholds: gamma_h ({gamma_h}) must be below gamma_v ({gamma_v})")]
    InvalidThresholds { gamma_h: f64, gamma_v: f64 },

    #[error("scene has no objects")]
    EmptyScene,

    #[error("no trajectories to learn from")]
    EmptyDataset,

    #[error("no trajectories to evaluate")]
    EmptyEvalSet,

    #[error("trajectories disagree on object count: expected {expected}, got {got}")]
    InconsistentSceneSize { expected: usize, got: usize },

    #[error("object count mismatch between table and scene: table {cpt}, scene {scene}")]
    CptMismatch { cpt: usize, scene: usize },

    #[error("evidence has zero total likelihood under the current prior")]
    ZeroEvidence,

    #[error("degenerate obstacle: wrist and target coincide")]
    DegenerateObstacle,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("schema violation at line {line}: {msg}")]
    SchemaViolation { line: usize, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
