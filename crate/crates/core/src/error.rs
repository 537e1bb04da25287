use thiserror::Error;

use crate::model::EntityId;
use crate::similarity::Weights;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("schema error at {location}: {message}")]
    Schema { location: String, message: String },

    #[error("limit exceeded: {0}")]
    Limit(String),

    #[error("unknown functionality `{0}`")]
    UnknownFunctionality(String),

    #[error("unknown entity {0}")]
    UnknownEntity(EntityId),

    #[error("invalid decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("entities not assigned to any cluster: {}", join_ids(.0))]
    UnassignedEntity(Vec<EntityId>),

    #[error("weights {0} do not sum to 100")]
    WeightSum(Weights),

    #[error("weights {weights} are not non-negative multiples of {step}")]
    WeightGrid { weights: Weights, step: u32 },

    #[error("step {0} must be positive and divide 100")]
    InvalidStep(u32),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("cannot cut {entities} entities into {requested} clusters")]
    ClusterCount { requested: usize, entities: usize },

    #[error("decompositions cover different entity universes")]
    UniverseMismatch,

    #[error("decompositions share no entities")]
    EmptyIntersection,

    #[error("universe of {size} entities exceeds the limit of {limit}")]
    UniverseTooLarge { size: usize, limit: usize },

    #[error("a universe with fewer than two entities has no MoJo range")]
    SingletonUniverse,

    #[error("design matrix is rank deficient: {0}")]
    RankDeficient(String),

    #[error("need at least {needed} records, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("sweep cell weights {weights}, N={n_clusters}: {source}")]
    SweepCell {
        weights: Weights,
        n_clusters: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "PARSE",
            Error::Schema { .. } => "SCHEMA",
            Error::Limit(_) => "LIMIT",
            Error::UnknownFunctionality(_) => "UNKNOWN_FUNCTIONALITY",
            Error::UnknownEntity(_) => "UNKNOWN_ENTITY",
            Error::InvalidDecomposition(_) => "INVALID_DECOMPOSITION",
            Error::UnassignedEntity(_) => "UNASSIGNED_ENTITY",
            Error::WeightSum(_) => "WEIGHT_SUM",
            Error::WeightGrid { .. } => "WEIGHT_GRID",
            Error::InvalidStep(_) => "INVALID_STEP",
            Error::DimensionMismatch(_) => "DIMENSION_MISMATCH",
            Error::ClusterCount { .. } => "CLUSTER_COUNT",
            Error::UniverseMismatch => "UNIVERSE_MISMATCH",
            Error::EmptyIntersection => "EMPTY_INTERSECTION",
            Error::UniverseTooLarge { .. } => "UNIVERSE_TOO_LARGE",
            Error::SingletonUniverse => "SINGLETON_UNIVERSE",
            Error::RankDeficient(_) => "RANK_DEFICIENT",
            Error::InsufficientData { .. } => "INSUFFICIENT_DATA",
            Error::InvalidParams(_) => "INVALID_PARAMS",
            Error::Precondition(_) => "PRECONDITION",
            Error::SweepCell { source, .. } => source.code(),
            Error::Io(_) => "IO",
        }
    }
}

fn join_ids(ids: &[EntityId]) -> String {
    ids.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(", ")
}
