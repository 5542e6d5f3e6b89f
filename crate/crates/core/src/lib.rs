//! Online multilingual news stream clustering: per-language story clusters
//! built in a single pass, linked across languages by crosslingual
//! embedding similarity.

pub mod clusterer;
pub mod error;
pub mod evaluation;
pub mod featurizer;
pub mod io;
pub mod learning;
pub mod model;
pub mod similarity;
pub mod synthetic;

pub use clusterer::{ClustererConfig, ContestScoring, GUpdate, MergePolicy, Models, OnlineClusterer};
pub use error::{Error, Result};
pub use model::{ClusterRef, ClusteringState, DocRepresentation, Document, Language};
pub use similarity::{CrossMode, CrossSimilarityModel, SimilarityModel};
