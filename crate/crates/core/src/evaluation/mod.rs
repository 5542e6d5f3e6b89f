//! Pairwise clustering metrics and a CluStream-style baseline.

mod clustream;
mod metrics;

pub use clustream::{clustream_baseline, CluStreamConfig};
pub use metrics::*;

use std::collections::HashMap;

use crate::error::Result;
use crate::model::{ClusteringState, Document};

/// Monolingual metrics per language plus crosslingual metrics for a
/// finished clustering of `docs`.
pub fn evaluate_state(state: &ClusteringState, docs: &[Document]) -> Result<MetricsReport> {
    let predicted = docs
        .iter()
        .filter_map(|d| state.assignment(&d.id).map(|r| (d.id.clone(), r.clone())))
        .collect();
    let gold: HashMap<String, Document> = docs.iter().map(|d| (d.id.clone(), d.clone())).collect();
    evaluate_assignments(&predicted, &gold, Some(&predicted_cross_links(state)))
}
