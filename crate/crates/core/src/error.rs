use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate simplex: {0}")]
    Degenerate(String),

    #[error("invalid simplex: {0}")]
    InvalidSimplex(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature rule of degree {available} cannot integrate degree {needed} exactly")]
    QuadratureTooWeak { needed: u32, available: u32 },

    #[error("field provides derivatives up to order {available}, order {requested} requested")]
    DerivativeOrder { requested: u32, available: u32 },

    #[error("rank-deficient normal system (rank {rank} of {size})")]
    RankDeficient { rank: usize, size: usize },

    #[error("seminorm {0:e} vanishes, ratio undefined")]
    VanishingSeminorm(f64),

    #[error("malformed mesh file at line {line}: {message}")]
    MalformedMesh { line: usize, message: String },

    #[error("duplicate cell {0}")]
    DuplicateCell(usize),

    #[error("vertex index {index} out of range (mesh has {count} vertices)")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("empty mesh")]
    EmptyMesh,

    #[error("nonconforming mesh: {0}")]
    Nonconforming(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
