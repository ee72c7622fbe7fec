use thiserror::Error;

/// Library-wide error type. Variants carry enough context to reconstruct
/// what was rejected; none of them is ever used for a value that merely
/// evaluates to zero (degree mismatches in integrals, for instance, are
/// ordinary zero results, not errors).
#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate generator name {name:?}")]
    DuplicateGenerator { name: String },

    #[error("degree mismatch: {context}")]
    DegreeMismatch { context: String },

    #[error("rewriting is not confluent or not terminating: {context}")]
    NonConfluent { context: String },

    #[error("classes belong to different ambient spaces")]
    AmbientMismatch,

    #[error("shape mismatch: {context}")]
    ShapeMismatch { context: String },

    #[error("operation requires an honest bundle, got virtual rank {rank}")]
    VirtualRank { rank: i64 },

    #[error("operation requires a rank-1 bundle, got rank {rank}")]
    NotALine { rank: i64 },

    #[error("symmetric power out of supported range: {context}")]
    RankTooLarge { context: String },

    #[error("virtual input not supported: {context}")]
    VirtualInput { context: String },

    #[error("class has wrong degree: {context}")]
    WrongDegree { context: String },

    #[error("multiplicity must be odd, got m = {m}")]
    EvenM { m: i64 },

    #[error("|m| must be at least 3 for the obstruction cross-check, got m = {m}")]
    RankBound { m: i64 },

    #[error("bad multiplicity: {context}")]
    BadMultiplicity { context: String },

    #[error("value out of range: {context}")]
    RangeError { context: String },

    #[error("interpolation grid insufficient: {context}")]
    InterpolationRankDeficient { context: String },

    #[error("parse error at position {position}: {message}")]
    ParseError { position: usize, message: String },

    #[error("unknown name {name:?}")]
    UnknownName { name: String },

    #[error("invalid input: {context}")]
    InvalidInput { context: String },
}

impl Error {
    pub fn invalid(context: impl Into<String>) -> Self {
        Error::InvalidInput {
            context: context.into(),
        }
    }
}
