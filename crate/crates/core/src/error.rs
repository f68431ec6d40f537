use std::path::PathBuf;

/// Everything that can go wrong while loading data, validating queries, or
/// running the algorithms.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("relation `{relation}`: row {row} has {found} values but the schema has {expected}")]
    Arity {
        relation: String,
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("relation `{relation}`: {order:?} is not a permutation of the schema")]
    BadOrder { relation: String, order: Vec<String> },
    #[error("binding is not a prefix of the index order")]
    UnsupportedOrder,
    #[error("position {index} is out of range ({len} distinct values)")]
    OutOfRange { index: usize, len: usize },
    #[error("no rows match the binding")]
    Empty,
    #[error("{}: {message}", path.display())]
    Load { path: PathBuf, message: String },
    #[error("query references unknown relation `{0}`")]
    UnboundRelation(String),
    #[error("edge {edge} ({relation}) lists {found} attributes but the relation has arity {expected}")]
    EdgeArity {
        edge: usize,
        relation: String,
        expected: usize,
        found: usize,
    },
    #[error("attribute `{0}` does not appear in any edge")]
    Uncovered(String),
    #[error("invalid query: {0}")]
    Query(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid decomposition: {0}")]
    InvalidGhd(String),
    #[error("weight overflow while counting join results")]
    Overflow,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
