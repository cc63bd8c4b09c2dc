//! Recursive Laakso-expander metric graphs and numerical checks of their
//! embedding geometry.
//!
//! The main objects are the ⊘-powers `G̃^⊘k` of a layered, tailed
//! vertex-transitive base graph (see [`layered`] and [`composition`]), their
//! doubling constants ([`doubling`]) and their least Euclidean distortion
//! ([`embedding`]).
//!
//! Graph constructions are generic over a [`Length`] type and are normally run
//! with the exact [`Rational`]; numerical analysis is generic over a [`Real`]
//! (`f32` or `f64`).

pub mod base_graphs;
pub mod composition;
pub mod doubling;
pub mod embedding;
pub mod error;
pub mod format;
pub mod layered;
pub mod linalg;
pub mod metric_graph;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{Length, Real};

pub use base_graphs::{GroupAction, SpectralReport};
pub use composition::{oslash, power};
pub use doubling::DoublingReport;
pub use embedding::{EmbeddingReport, PointConfig, SdpBracket, StretchWitness};
pub use layered::{EdgeClass, LayeredGraph};
pub use metric_graph::{apsp, DistanceMatrix, MetricGraph, STGraph};

/// Exact edge lengths.
pub type Rational = num_rational::Ratio<i128>;

/// Metric graph with exact lengths.
pub type RationalGraph = MetricGraph<Rational>;
/// s-t graph with exact lengths.
pub type RationalStGraph = STGraph<Rational>;
/// Layered graph with exact lengths.
pub type RationalLayered = LayeredGraph<Rational>;
/// Exact shortest-path metric.
pub type ExactMetric = DistanceMatrix<Rational>;
/// Double precision metric.
pub type Metric64 = DistanceMatrix<f64>;
/// Double precision point configuration.
pub type Points64 = PointConfig<f64>;
/// Single precision point configuration.
pub type Points32 = PointConfig<f32>;
