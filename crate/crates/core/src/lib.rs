//! Causal discovery for multivariate time series: a PC-stable skeleton search
//! whose independence oracle is the PMIME causal-strength ratio, plus
//! benchmark generators, a pairwise Granger baseline and an F1 harness.

pub mod cli;
pub mod error;
pub mod eval;
pub mod granger;
pub mod knn;
pub mod model;
pub mod pc;
pub mod pmime;
pub mod simulate;
pub mod special;

pub use error::{Error, Result};
pub use model::{
    DiscoveryParams, Edge, EmbeddingVector, LaggedComponent, Mark, Role, SummaryCausalGraph,
    TimeSeriesPanel,
};
