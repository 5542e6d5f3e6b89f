use std::collections::{BTreeMap, HashMap};
use std::fmt::Debug;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ClusterRef, ClusteringState, Document, Language};

/// Pair counts and the derived precision, recall and F1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairwiseMetrics {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl PairwiseMetrics {
    /// P = tp/(tp+fp) and R = tp/(tp+fn), each 1.0 on an empty denominator;
    /// F1 is 0 when P + R = 0.
    pub fn from_counts(tp: u64, fp: u64, fn_: u64) -> Self {
        let ratio = |num: u64, den: u64| if den == 0 { 1.0 } else { num as f64 / den as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        PairwiseMetrics {
            tp,
            fp,
            fn_,
            precision,
            recall,
            f1,
        }
    }
}

fn pairs(n: u64) -> u64 {
    n * n.saturating_sub(1) / 2
}

/// Pairwise clustering metrics between two labelings of the same ids, via a
/// contingency table: tp = sum over cells of C(n_ij, 2), tp + fp = sum over
/// predicted clusters of C(a_i, 2), tp + fn = sum over gold clusters of
/// C(b_j, 2).
pub fn pairwise_metrics<K, A, B>(predicted: &HashMap<K, A>, gold: &HashMap<K, B>) -> Result<PairwiseMetrics>
where
    K: Eq + Hash + Debug,
    A: Eq + Hash,
    B: Eq + Hash,
{
    if predicted.len() != gold.len() {
        return Err(Error::IdMismatch(format!(
            "{} predicted ids vs {} gold ids",
            predicted.len(),
            gold.len()
        )));
    }
    let mut cells: HashMap<(&A, &B), u64> = HashMap::new();
    let mut rows: HashMap<&A, u64> = HashMap::new();
    let mut cols: HashMap<&B, u64> = HashMap::new();
    for (id, p) in predicted {
        let g = gold
            .get(id)
            .ok_or_else(|| Error::IdMismatch(format!("{id:?} missing from gold")))?;
        *cells.entry((p, g)).or_insert(0) += 1;
        *rows.entry(p).or_insert(0) += 1;
        *cols.entry(g).or_insert(0) += 1;
    }
    let tp: u64 = cells.values().map(|&n| pairs(n)).sum();
    let pred_pairs: u64 = rows.values().map(|&n| pairs(n)).sum();
    let gold_pairs: u64 = cols.values().map(|&n| pairs(n)).sum();
    Ok(PairwiseMetrics::from_counts(tp, pred_pairs - tp, gold_pairs - tp))
}

/// Crosslingual metrics: elements are monolingual clusters, `predicted`
/// maps each to its crosslingual cluster and `gold` to its gold crosslingual
/// label.
pub fn crosslingual_metrics<A, B>(
    predicted_links: &HashMap<ClusterRef, A>,
    gold_links: &HashMap<ClusterRef, B>,
) -> Result<PairwiseMetrics>
where
    A: Eq + Hash,
    B: Eq + Hash,
{
    pairwise_metrics(predicted_links, gold_links)
}

fn majority<'a, I: IntoIterator<Item = &'a str>>(labels: I) -> Option<&'a str> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for l in labels {
        *counts.entry(l).or_insert(0) += 1;
    }
    // highest count, ties toward the lexicographically smallest label
    counts
        .into_iter()
        .fold(None, |best: Option<(&str, usize)>, (l, c)| match best {
            Some((_, bc)) if bc >= c => best,
            _ => Some((l, c)),
        })
        .map(|(l, _)| l)
}

/// Gold crosslingual label of every gold monolingual cluster (majority over
/// its documents).
fn resolve_gold_cross(gold: &HashMap<String, Document>) -> HashMap<(Language, String), String> {
    let mut votes: HashMap<(&Language, &str), Vec<&str>> = HashMap::new();
    for d in gold.values() {
        if let (Some(m), Some(c)) = (&d.gold_mono_label, &d.gold_cross_label) {
            votes.entry((&d.language, m.as_str())).or_default().push(c.as_str());
        }
    }
    votes
        .into_iter()
        .filter_map(|((l, m), v)| majority(v).map(|c| ((l.clone(), m.to_string()), c.to_string())))
        .collect()
}

fn cluster_gold_label<'a, I>(
    r: &ClusterRef,
    member_ids: I,
    gold: &HashMap<String, Document>,
    resolved: &HashMap<(Language, String), String>,
) -> String
where
    I: IntoIterator<Item = &'a str>,
{
    let labels = member_ids
        .into_iter()
        .filter_map(|id| gold.get(id).and_then(|d| d.gold_mono_label.as_deref()));
    majority(labels)
        .and_then(|m| resolved.get(&(r.language.clone(), m.to_string())))
        .map(|s| format!("gold:{s}"))
        .unwrap_or_else(|| format!("unmatched:{r}"))
}

/// Gold labels of the crosslingual evaluation: each predicted monolingual
/// cluster is mapped to the gold monolingual cluster most of its documents
/// carry, then to that gold cluster's (majority) crosslingual label.
/// Clusters with no labelled documents become singletons.
pub fn gold_cross_links(state: &ClusteringState, gold: &HashMap<String, Document>) -> HashMap<ClusterRef, String> {
    let resolved = resolve_gold_cross(gold);
    state
        .all_clusters()
        .map(|c| {
            let r = c.reference();
            let label = cluster_gold_label(&r, c.member_ids().iter().map(String::as_str), gold, &resolved);
            (r, label)
        })
        .collect()
}

/// Predicted crosslingual grouping of every monolingual cluster in `state`.
pub fn predicted_cross_links(state: &ClusteringState) -> HashMap<ClusterRef, u64> {
    state
        .all_clusters()
        .filter_map(|c| state.home_of(&c.reference()).map(|h| (c.reference(), h)))
        .collect()
}

/// Monolingual and crosslingual metrics for a finished clustering run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub per_language: BTreeMap<Language, PairwiseMetrics>,
    pub crosslingual: Option<PairwiseMetrics>,
}

impl MetricsReport {
    /// Fixed-width text table: one row per language, then crosslingual.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<14} {:>7} {:>7} {:>7} {:>10} {:>10} {:>10}\n",
            "language", "F1", "P", "R", "tp", "fp", "fn"
        ));
        let row = |name: &str, m: &PairwiseMetrics| {
            format!(
                "{:<14} {:>7.1} {:>7.1} {:>7.1} {:>10} {:>10} {:>10}\n",
                name,
                100.0 * m.f1,
                100.0 * m.precision,
                100.0 * m.recall,
                m.tp,
                m.fp,
                m.fn_
            )
        };
        for (l, m) in &self.per_language {
            out.push_str(&row(l.as_str(), m));
        }
        if let Some(m) = &self.crosslingual {
            out.push_str(&row("crosslingual", m));
        }
        out
    }
}

/// Builds the report from per-document predicted monolingual clusters and
/// gold documents. `cross_links`, when given, maps predicted monolingual
/// clusters to crosslingual clusters and enables the crosslingual row.
pub fn evaluate_assignments(
    predicted: &HashMap<String, ClusterRef>,
    gold: &HashMap<String, Document>,
    cross_links: Option<&HashMap<ClusterRef, u64>>,
) -> Result<MetricsReport> {
    let mut per_lang_pred: BTreeMap<Language, HashMap<&str, u64>> = BTreeMap::new();
    let mut per_lang_gold: BTreeMap<Language, HashMap<&str, &str>> = BTreeMap::new();
    for (id, r) in predicted {
        let d = gold
            .get(id)
            .ok_or_else(|| Error::IdMismatch(format!("{id:?} has no gold record")))?;
        let label = d.gold_mono_label.as_deref().ok_or_else(|| Error::Unlabeled {
            doc_id: id.clone(),
            kind: "monolingual",
        })?;
        per_lang_pred.entry(r.language.clone()).or_default().insert(id, r.id);
        per_lang_gold.entry(r.language.clone()).or_default().insert(id, label);
    }
    if predicted.len() != gold.len() {
        return Err(Error::IdMismatch(format!(
            "{} assignments vs {} gold documents",
            predicted.len(),
            gold.len()
        )));
    }
    let mut per_language = BTreeMap::new();
    for (lang, p) in &per_lang_pred {
        per_language.insert(lang.clone(), pairwise_metrics(p, &per_lang_gold[lang])?);
    }

    let crosslingual = match cross_links {
        None => None,
        Some(links) => {
            // group documents per predicted monolingual cluster, majority-map to gold
            let mut members: BTreeMap<&ClusterRef, Vec<&str>> = BTreeMap::new();
            for (id, r) in predicted {
                members.entry(r).or_default().push(id);
            }
            let resolved = resolve_gold_cross(gold);
            let mut pred_links = HashMap::new();
            let mut gold_links = HashMap::new();
            for (r, ids) in members {
                let cross = *links
                    .get(r)
                    .ok_or_else(|| Error::IdMismatch(format!("cluster {r} has no crosslingual link")))?;
                pred_links.insert(r.clone(), cross);
                gold_links.insert(r.clone(), cluster_gold_label(r, ids, gold, &resolved));
            }
            Some(crosslingual_metrics(&pred_links, &gold_links)?)
        }
    };
    Ok(MetricsReport {
        per_language,
        crosslingual,
    })
}
