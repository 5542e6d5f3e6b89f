//! Serializable view of a clustering state and per-document output records.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{ClusteringState, Language};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub language: Language,
    pub id: u64,
    pub size: usize,
    pub members: Vec<String>,
    pub ts_oldest: f64,
    pub ts_newest: f64,
    pub ts_average: f64,
    pub crosslingual: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSummary {
    pub id: u64,
    pub members: BTreeMap<Language, u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub format_version: u32,
    pub documents: usize,
    pub monolingual: Vec<ClusterSummary>,
    pub crosslingual: Vec<CrossSummary>,
}

pub fn snapshot(state: &ClusteringState) -> Snapshot {
    Snapshot {
        format_version: super::models::FORMAT_VERSION,
        documents: state.document_count(),
        monolingual: state
            .all_clusters()
            .map(|c| ClusterSummary {
                language: c.language.clone(),
                id: c.id,
                size: c.count(),
                members: c.member_ids().to_vec(),
                ts_oldest: c.ts_oldest(),
                ts_newest: c.ts_newest(),
                ts_average: c.ts_average(),
                crosslingual: state.home_of(&c.reference()),
            })
            .collect(),
        crosslingual: state
            .crosslingual_clusters()
            .map(|a| CrossSummary {
                id: a.id,
                members: a.members.clone(),
            })
            .collect(),
    }
}

/// One line of the assignments file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub id: String,
    pub language: Language,
    pub mono_cluster: u64,
    /// Crosslingual cluster at the end of the stream.
    pub cross_cluster: u64,
    /// Crosslingual cluster right after this document was ingested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cross_cluster_at_ingest: Option<u64>,
}

/// Summary line printed after clustering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterCounts {
    pub documents: usize,
    pub monolingual: BTreeMap<Language, usize>,
    pub crosslingual: usize,
}

pub fn counts(state: &ClusteringState) -> ClusterCounts {
    ClusterCounts {
        documents: state.document_count(),
        monolingual: state
            .languages()
            .map(|l| (l.clone(), state.clusters(l).len()))
            .collect(),
        crosslingual: state.crosslingual_count(),
    }
}
