//! Candidate microservice decompositions from monolith access traces.
//!
//! The pipeline reads functionality traces ([`trace_file`]), scores entity
//! pairs ([`similarity`]), clusters them into a dendrogram ([`clustering`]),
//! cuts it into decompositions and evaluates those with the redesign
//! complexity metric ([`metrics`]) and MoJoFM ([`mojo`]). [`analysis`] sweeps
//! the weight grid and regresses complexity on the parameters.
//!
//! Numeric code is generic over [`Scalar`] (counting measures, exact with
//! [`num_rational::Rational64`]) or [`Real`] (clustering and regression).

pub mod analysis;
pub mod clustering;
pub mod decomposition;
pub mod error;
pub mod metrics;
pub mod model;
pub mod mojo;
pub mod scalar;
pub mod similarity;
pub mod trace_file;
pub mod validate;
pub mod workload;

pub use clustering::{agglomerate, similarity_to_distance, DistanceMode, Linkage};
pub use decomposition::Decomposition;
pub use error::{Error, Result};
pub use metrics::{ComplexityConfig, ComplexityEngine, TraceAggregation};
pub use model::{Access, EntityId, Functionality, Mode, Monolith, Trace};
pub use mojo::{mojofm, AlignStrategy, MojoResult};
pub use scalar::{Real, Scalar};
pub use similarity::{SimilarityMeasures, Weights};

pub use num_rational::Rational64;

pub type SimilarityMatrix64 = similarity::SimilarityMatrix<f64>;
pub type SimilarityMeasures64 = similarity::SimilarityMeasures<f64>;
pub type DistanceMatrix64 = clustering::DistanceMatrix<f64>;
pub type Dendrogram64 = clustering::Dendrogram<f64>;
pub type ComplexityReport64 = metrics::ComplexityReport<f64>;
pub type ExactComplexityReport = metrics::ComplexityReport<Rational64>;
pub type SweepRecord64 = analysis::SweepRecord<f64>;
pub type RegressionReport64 = analysis::RegressionReport<f64>;
