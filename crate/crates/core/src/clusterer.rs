//! Single-pass stream clustering: assign each document to a monolingual
//! cluster (or open a new one), then place the touched cluster in the
//! crosslingual space, either immutably or by domino-toppling.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learning::MergeModel;
use crate::model::{ClusterRef, ClusteringState, DocRepresentation, Document, Language, MonolingualCluster};
use crate::similarity::{
    gamma1_pair, gamma1_to_crosslingual, gamma1_to_members, mono_features, CrossMode, CrossSimilarityModel,
    MonoFeatures, SimilarityModel, MONO_FEATURES,
};

/// Similarity models used while clustering: one monolingual model per
/// language (with a fallback) and a single crosslingual model.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Models {
    #[serde(default)]
    pub mono: BTreeMap<Language, SimilarityModel>,
    #[serde(default)]
    pub mono_default: SimilarityModel,
    #[serde(default)]
    pub cross: CrossSimilarityModel,
}

impl Models {
    pub fn mono_for(&self, language: &Language) -> &SimilarityModel {
        self.mono.get(language).unwrap_or(&self.mono_default)
    }

    pub fn validate(&self) -> Result<()> {
        self.mono_default.validate()?;
        for m in self.mono.values() {
            m.validate()?;
        }
        self.cross.validate()
    }
}

/// How the join-vs-new decision is made for an incoming document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MergePolicy {
    /// Join the best cluster iff its score is strictly above the threshold.
    Threshold {
        tau: f64,
        #[serde(default)]
        per_language: BTreeMap<Language, f64>,
    },
    /// Join iff a linear classifier over per-feature maxima scores above 0.
    Classifier {
        #[serde(default)]
        default: Option<MergeModel>,
        #[serde(default)]
        per_language: BTreeMap<Language, MergeModel>,
    },
}

impl MergePolicy {
    pub fn threshold(tau: f64) -> Self {
        MergePolicy::Threshold {
            tau,
            per_language: BTreeMap::new(),
        }
    }

    pub fn classifier(model: MergeModel) -> Self {
        MergePolicy::Classifier {
            default: Some(model),
            per_language: BTreeMap::new(),
        }
    }
}

/// Crosslingual update strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GUpdate {
    /// A monolingual cluster keeps its first crosslingual home.
    Immutable,
    /// Re-place the touched cluster on every update, displacing weaker
    /// incumbents in a chain.
    Domino,
}

/// How an incumbent and a challenger of the same language are compared for
/// a crosslingual slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContestScoring {
    /// Both contestants are scored against the crosslingual cluster minus the
    /// incumbent. With nothing left, they are scored against each other.
    Residual,
    /// Both contestants are scored against the full crosslingual cluster,
    /// incumbent included.
    Naive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClustererConfig {
    pub merge_policy: MergePolicy,
    pub cross_mode: CrossMode,
    pub g_update: GUpdate,
    pub topple_budget: usize,
    pub contest: ContestScoring,
    /// Minimum crosslingual score (exclusive) for a crosslingual cluster to
    /// be considered at all. `None` considers every cluster.
    pub cross_tau: Option<f64>,
    /// Score only clusters that share a sparse term with the document.
    /// Exact when timestamp weights are zero, a prefilter otherwise.
    pub use_term_index: bool,
}

impl Default for ClustererConfig {
    fn default() -> Self {
        ClustererConfig {
            merge_policy: MergePolicy::threshold(0.0),
            cross_mode: CrossMode::Sum,
            g_update: GUpdate::Domino,
            topple_budget: 1000,
            contest: ContestScoring::Residual,
            cross_tau: None,
            use_term_index: false,
        }
    }
}

impl ClustererConfig {
    pub fn validate(&self) -> Result<()> {
        if self.topple_budget < 1 {
            return Err(Error::config("topple_budget must be at least 1"));
        }
        if let MergePolicy::Threshold { tau, per_language } = &self.merge_policy {
            if tau.is_nan() || per_language.values().any(|t| t.is_nan()) {
                return Err(Error::config("tau must not be NaN"));
            }
        }
        Ok(())
    }
}

/// One crosslingual displacement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topple {
    pub displaced: ClusterRef,
    pub by: ClusterRef,
    pub from: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MergeDecision {
    Joined,
    Created,
}

/// Audit record for one ingested document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTrace {
    pub doc_id: String,
    pub language: Language,
    /// Up to five `(cluster id, score)` pairs, best first.
    pub top_candidates: Vec<(u64, f64)>,
    pub decision: MergeDecision,
    pub mono_cluster: u64,
    pub cross_cluster: u64,
    pub topples: Vec<Topple>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub budget_exhausted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestOutcome {
    pub mono: ClusterRef,
    pub cross: u64,
    pub trace: DecisionTrace,
}

/// Result of scoring the document against the clusters of its language.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateScores {
    /// `(cluster id, score)` in ascending id order.
    pub scores: Vec<(u64, f64)>,
    /// Per-feature maximum over every scored cluster (zeros when empty).
    pub feature_maxima: MonoFeatures,
}

impl CandidateScores {
    /// Highest score, ties toward the lowest id.
    pub fn best(&self) -> Option<(u64, f64)> {
        let mut best: Option<(u64, f64)> = None;
        for &(id, s) in &self.scores {
            match best {
                Some((_, b)) if !(s > b) => {}
                _ => best = Some((id, s)),
            }
        }
        best
    }

    pub fn top(&self, k: usize) -> Vec<(u64, f64)> {
        let mut v = self.scores.clone();
        v.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        v.truncate(k);
        v
    }
}

/// Scores `rep` against clusters of `language` in ascending id order.
pub fn score_candidates(
    state: &ClusteringState,
    rep: &DocRepresentation,
    language: &Language,
    model: &SimilarityModel,
    use_index: bool,
) -> CandidateScores {
    let clusters = state.clusters(language);
    let shortlist: Vec<&MonolingualCluster> = match (use_index, state.term_index(language)) {
        (true, Some(index)) => index
            .candidates(rep)
            .into_iter()
            .map(|id| &clusters[(id - 1) as usize])
            .collect(),
        _ => clusters.iter().collect(),
    };
    let mut maxima = [0.0; MONO_FEATURES];
    let mut scores = Vec::with_capacity(shortlist.len());
    for (n, c) in shortlist.into_iter().enumerate() {
        let f = mono_features(rep, c, model.mu, model.sigma);
        for (m, v) in maxima.iter_mut().zip(&f) {
            if n == 0 || *v > *m {
                *m = *v;
            }
        }
        scores.push((c.id, model.score(&f)));
    }
    CandidateScores {
        scores,
        feature_maxima: maxima,
    }
}

/// Best monolingual cluster for the document: argmax of the document-cluster
/// similarity, ties toward the lowest cluster id. `None` when the language
/// has no clusters yet.
pub fn best_monolingual(
    state: &ClusteringState,
    rep: &DocRepresentation,
    language: &Language,
    model: &SimilarityModel,
) -> Option<(u64, f64)> {
    score_candidates(state, rep, language, model, false).best()
}

/// Join (`true`) or open a new cluster (`false`).
pub fn merge_decision(
    best_score: f64,
    feature_maxima: &MonoFeatures,
    language: &Language,
    policy: &MergePolicy,
) -> Result<bool> {
    match policy {
        MergePolicy::Threshold { tau, per_language } => {
            let tau = per_language.get(language).unwrap_or(tau);
            Ok(best_score > *tau)
        }
        MergePolicy::Classifier { default, per_language } => {
            let model = per_language
                .get(language)
                .or(default.as_ref())
                .ok_or_else(|| Error::config(format!("no merge model for language {language}")))?;
            Ok(model.decision_value(feature_maxima) > 0.0)
        }
    }
}

/// Adds one document to the state and updates the crosslingual grouping of
/// the cluster it lands in.
pub fn ingest(
    state: &mut ClusteringState,
    doc: &Document,
    rep: &DocRepresentation,
    models: &Models,
    config: &ClustererConfig,
) -> Result<IngestOutcome> {
    doc.validate()?;
    if state.contains_document(&doc.id) {
        return Err(Error::DuplicateDocument(doc.id.clone()));
    }
    let model = models.mono_for(&doc.language);
    let scores = score_candidates(state, rep, &doc.language, model, config.use_term_index);
    let join = match scores.best() {
        Some((id, s)) => merge_decision(s, &scores.feature_maxima, &doc.language, &config.merge_policy)?.then_some(id),
        None => None,
    };
    let (mono, decision) = match join {
        Some(id) => {
            let r = ClusterRef {
                language: doc.language.clone(),
                id,
            };
            state.add_to_cluster(&r, doc, rep);
            (r, MergeDecision::Joined)
        }
        None => (state.create_cluster(doc, rep), MergeDecision::Created),
    };
    let g = update_g(state, &mono, &models.cross, config);
    Ok(IngestOutcome {
        trace: DecisionTrace {
            doc_id: doc.id.clone(),
            language: doc.language.clone(),
            top_candidates: scores.top(5),
            decision,
            mono_cluster: mono.id,
            cross_cluster: g.cross,
            topples: g.topples,
            budget_exhausted: g.budget_exhausted,
        },
        mono,
        cross: g.cross,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GUpdateOutcome {
    pub cross: u64,
    pub topples: Vec<Topple>,
    pub budget_exhausted: bool,
}

/// Places `touched` in the crosslingual space according to `config.g_update`.
pub fn update_g(
    state: &mut ClusteringState,
    touched: &ClusterRef,
    model: &CrossSimilarityModel,
    config: &ClustererConfig,
) -> GUpdateOutcome {
    match config.g_update {
        GUpdate::Immutable => {
            let cross = match state.home_of(touched) {
                Some(home) => home,
                None => place_immutable(state, touched, model, config),
            };
            GUpdateOutcome {
                cross,
                topples: Vec::new(),
                budget_exhausted: false,
            }
        }
        GUpdate::Domino => {
            let vacated = state.detach(touched);
            domino_topple(state, touched, vacated, model, config)
        }
    }
}

fn eligible(score: f64, config: &ClustererConfig) -> bool {
    !score.is_nan() && config.cross_tau.is_none_or(|t| score > t)
}

/// Crosslingual candidates for `c`, best first (ties toward the lowest id).
fn ranked_crosslingual(
    state: &ClusteringState,
    c: &ClusterRef,
    model: &CrossSimilarityModel,
    config: &ClustererConfig,
) -> Vec<(u64, f64)> {
    let cluster = state.cluster(c).expect("touched cluster exists");
    let mut ranked: Vec<(u64, f64)> = state
        .crosslingual_clusters()
        .filter_map(|a| gamma1_to_crosslingual(state, cluster, a, model, &config.cross_mode).map(|s| (a.id, s)))
        .filter(|(_, s)| eligible(*s, config))
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked
}

fn place_immutable(
    state: &mut ClusteringState,
    c: &ClusterRef,
    model: &CrossSimilarityModel,
    config: &ClustererConfig,
) -> u64 {
    let target = ranked_crosslingual(state, c, model, config)
        .into_iter()
        .find(|(id, _)| {
            !state
                .crosslingual(*id)
                .expect("ranked id is live")
                .members
                .contains_key(&c.language)
        });
    match target {
        Some((id, _)) => {
            state.attach(c, id);
            id
        }
        None => state.found(c, None),
    }
}

/// True if `challenger` should take `incumbent`'s slot in crosslingual
/// cluster `slot`. Strict inequality; ties keep the incumbent.
fn challenger_wins(
    state: &ClusteringState,
    challenger: &ClusterRef,
    incumbent: &ClusterRef,
    slot: u64,
    model: &CrossSimilarityModel,
    config: &ClustererConfig,
) -> bool {
    let c = state.cluster(challenger).expect("challenger exists");
    let y = state.cluster(incumbent).expect("incumbent exists");
    let a = state.crosslingual(slot).expect("slot is live");
    match config.contest {
        ContestScoring::Naive => {
            let sc = gamma1_to_crosslingual(state, c, a, model, &config.cross_mode);
            let sy = gamma1_to_crosslingual(state, y, a, model, &config.cross_mode);
            matches!((sc, sy), (Some(sc), Some(sy)) if sc > sy)
        }
        ContestScoring::Residual => {
            let residual: Vec<&MonolingualCluster> = a
                .member_refs()
                .filter(|r| r != incumbent)
                .filter_map(|r| state.cluster(&r))
                .collect();
            let sc = gamma1_to_members(c, &residual, model, &config.cross_mode);
            let sy = gamma1_to_members(y, &residual, model, &config.cross_mode);
            match (sc, sy) {
                (Some(sc), Some(sy)) => sc > sy,
                (None, None) => gamma1_pair(c, y, model) > gamma1_pair(y, c, model),
                _ => false,
            }
        }
    }
}

/// Places a homeless monolingual cluster `c` by domino-toppling.
///
/// Candidates are visited by descending similarity. The first one without a
/// member of `c`'s language takes `c`. Otherwise, if `c` beats the incumbent
/// of its language, the two swap and the incumbent is re-placed the same way.
/// A cluster nobody accepts founds a new crosslingual cluster; `vacated`
/// names an id `c` may recycle. After `topple_budget` displacements the
/// currently displaced cluster founds a new crosslingual cluster.
pub fn domino_topple(
    state: &mut ClusteringState,
    c: &ClusterRef,
    vacated: Option<u64>,
    model: &CrossSimilarityModel,
    config: &ClustererConfig,
) -> GUpdateOutcome {
    debug_assert!(state.home_of(c).is_none(), "cluster must be detached first");
    let mut topples = Vec::new();
    let mut budget_exhausted = false;
    let mut pending = c.clone();
    'outer: loop {
        let ranked = ranked_crosslingual(state, &pending, model, config);
        for (slot, _) in ranked {
            let incumbent = state
                .crosslingual(slot)
                .expect("ranked id is live")
                .members
                .get(&pending.language)
                .map(|id| ClusterRef {
                    language: pending.language.clone(),
                    id: *id,
                });
            match incumbent {
                None => {
                    state.attach(&pending, slot);
                    break 'outer;
                }
                Some(y) => {
                    if challenger_wins(state, &pending, &y, slot, model, config) {
                        state.detach(&y);
                        state.attach(&pending, slot);
                        topples.push(Topple {
                            displaced: y.clone(),
                            by: pending.clone(),
                            from: slot,
                        });
                        if topples.len() >= config.topple_budget {
                            log::warn!("topple budget exhausted; {y} founds a new crosslingual cluster");
                            budget_exhausted = true;
                            state.found(&y, None);
                            break 'outer;
                        }
                        pending = y;
                        continue 'outer;
                    }
                }
            }
        }
        let reuse = if &pending == c { vacated } else { None };
        state.found(&pending, reuse);
        break;
    }
    GUpdateOutcome {
        cross: state.home_of(c).expect("placed"),
        topples,
        budget_exhausted,
    }
}

/// Convenience driver owning the state, models and configuration.
#[derive(Debug, Clone)]
pub struct OnlineClusterer {
    state: ClusteringState,
    models: Models,
    config: ClustererConfig,
}

impl OnlineClusterer {
    pub fn new(models: Models, config: ClustererConfig) -> Result<Self> {
        models.validate()?;
        config.validate()?;
        Ok(OnlineClusterer {
            state: ClusteringState::new(),
            models,
            config,
        })
    }

    pub fn with_state(mut self, state: ClusteringState) -> Self {
        self.state = state;
        self
    }

    pub fn ingest(&mut self, doc: &Document, rep: &DocRepresentation) -> Result<IngestOutcome> {
        ingest(&mut self.state, doc, rep, &self.models, &self.config)
    }

    pub fn state(&self) -> &ClusteringState {
        &self.state
    }

    pub fn into_state(self) -> ClusteringState {
        self.state
    }

    pub fn config(&self) -> &ClustererConfig {
        &self.config
    }

    pub fn models(&self) -> &Models {
        &self.models
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DenseVector, FeatureClass, SparseVector, TermId};

    fn lang(s: &str) -> Language {
        Language::new(s).unwrap()
    }

    fn rep(words: &[&str], ts: f64, dense: Vec<f64>) -> DocRepresentation {
        let mut rep = DocRepresentation::empty(ts, dense.len());
        rep.mono[0] =
            SparseVector::from_weights(words.iter().map(|w| (TermId::new(FeatureClass::Token, w), 1.0))).normalized();
        rep.cross[0] = DenseVector(dense).normalized();
        rep
    }

    fn doc(id: &str, l: &str, ts: f64) -> Document {
        Document::new(id, lang(l), "", "x", ts)
    }

    fn text_only() -> Models {
        Models {
            mono_default: SimilarityModel {
                q1: [0.0; 3],
                ..Default::default()
            },
            cross: CrossSimilarityModel {
                q1: [0.0; 3],
                ..Default::default()
            },
            ..Default::default()
        }
    }

    #[test]
    fn first_document_creates_both_clusters() {
        let mut st = ClusteringState::new();
        let out = ingest(&mut st, &doc("d1", "en", 0.0), &rep(&["a"], 0.0, vec![1.0]), &text_only(), &ClustererConfig::default()).unwrap();
        assert_eq!(out.mono.id, 1);
        assert_eq!(out.cross, 1);
        assert_eq!(out.trace.decision, MergeDecision::Created);
        st.check_invariants().unwrap();
    }

    #[test]
    fn near_duplicate_joins() {
        let mut st = ClusteringState::new();
        let cfg = ClustererConfig {
            merge_policy: MergePolicy::threshold(0.5),
            ..Default::default()
        };
        ingest(&mut st, &doc("d1", "en", 0.0), &rep(&["a", "b"], 0.0, vec![1.0]), &text_only(), &cfg).unwrap();
        let out = ingest(&mut st, &doc("d2", "en", 1.0), &rep(&["a", "b"], 1.0, vec![1.0]), &text_only(), &cfg).unwrap();
        assert_eq!(out.trace.decision, MergeDecision::Joined);
        assert_eq!(out.mono.id, 1);
        assert_eq!(st.clusters(&lang("en"))[0].count(), 2);
    }

    #[test]
    fn duplicate_id_rejected() {
        let mut st = ClusteringState::new();
        let cfg = ClustererConfig::default();
        ingest(&mut st, &doc("d1", "en", 0.0), &rep(&["a"], 0.0, vec![]), &text_only(), &cfg).unwrap();
        let err = ingest(&mut st, &doc("d1", "en", 0.0), &rep(&["a"], 0.0, vec![]), &text_only(), &cfg);
        assert!(matches!(err, Err(Error::DuplicateDocument(_))));
    }

    #[test]
    fn threshold_is_strict() {
        let en = lang("en");
        let p = MergePolicy::threshold(0.7);
        assert!(!merge_decision(0.7, &[0.0; 12], &en, &p).unwrap());
        assert!(merge_decision(0.7000001, &[0.0; 12], &en, &p).unwrap());
        let mut per = BTreeMap::new();
        per.insert(en.clone(), 0.9);
        let p = MergePolicy::Threshold { tau: 0.1, per_language: per };
        assert!(!merge_decision(0.8, &[0.0; 12], &en, &p).unwrap());
        assert!(merge_decision(0.8, &[0.0; 12], &lang("de"), &p).unwrap());
    }

    #[test]
    fn classifier_with_negative_bias_creates() {
        let p = MergePolicy::classifier(MergeModel {
            weights: [1.0; 12],
            bias: -0.5,
            degenerate: false,
        });
        assert!(!merge_decision(100.0, &[0.0; 12], &lang("en"), &p).unwrap());
        let missing = MergePolicy::Classifier { default: None, per_language: BTreeMap::new() };
        assert!(merge_decision(1.0, &[0.0; 12], &lang("en"), &missing).is_err());
    }

    #[test]
    fn best_monolingual_cases() {
        let mut st = ClusteringState::new();
        let m = SimilarityModel { q1: [0.0; 3], ..Default::default() };
        assert_eq!(best_monolingual(&st, &rep(&["a"], 0.0, vec![]), &lang("en"), &m), None);
        st.create_cluster(&doc("1", "en", 0.0), &rep(&["a", "b"], 0.0, vec![]));
        st.create_cluster(&doc("2", "en", 0.0), &rep(&["c", "d"], 0.0, vec![]));
        st.create_cluster(&doc("3", "en", 0.0), &rep(&["a", "e"], 0.0, vec![]));
        let (id, _) = best_monolingual(&st, &rep(&["c", "d"], 0.0, vec![]), &lang("en"), &m).unwrap();
        assert_eq!(id, 2);
        // {a} is equally similar to clusters 1 and 3
        let (id, s) = best_monolingual(&st, &rep(&["a"], 0.0, vec![]), &lang("en"), &m).unwrap();
        assert_eq!(id, 1);
        assert!((s - 1.0 / 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn term_index_matches_full_scan_without_time_weights() {
        let mut st = ClusteringState::new();
        let m = SimilarityModel { q1: [0.0; 3], ..Default::default() };
        for (i, w) in [["a", "b"], ["c", "d"], ["e", "f"], ["a", "f"]].iter().enumerate() {
            st.create_cluster(&doc(&i.to_string(), "en", 0.0), &rep(w, 0.0, vec![]));
        }
        let q = rep(&["f", "z"], 0.0, vec![]);
        let full = score_candidates(&st, &q, &lang("en"), &m, false);
        let idx = score_candidates(&st, &q, &lang("en"), &m, true);
        assert_eq!(full.best(), idx.best());
        assert_eq!(idx.scores.iter().map(|s| s.0).collect::<Vec<_>>(), vec![3, 4]);
    }

    // Builds a state whose clusters each hold one document with the given
    // language, dense vector and timestamp.
    fn seeded(specs: &[(&str, Vec<f64>, f64)]) -> (ClusteringState, Vec<ClusterRef>) {
        let mut st = ClusteringState::new();
        let refs = specs
            .iter()
            .enumerate()
            .map(|(i, (l, v, ts))| st.create_cluster(&doc(&format!("d{i}"), l, *ts), &rep(&["w"], *ts, v.clone())))
            .collect();
        (st, refs)
    }

    #[test]
    fn domino_empty_space_founds_first() {
        let (mut st, refs) = seeded(&[("en", vec![1.0, 0.0], 0.0)]);
        let out = domino_topple(&mut st, &refs[0], None, &CrossSimilarityModel::default(), &ClustererConfig::default());
        assert_eq!(out.cross, 1);
        assert!(out.topples.is_empty());
        assert_eq!(st.crosslingual(1).unwrap().members.len(), 1);
    }

    #[test]
    fn domino_single_displacement() {
        // a1 = {y:en, z:de}; challenger c:en is closer to z than y is
        let (mut st, refs) = seeded(&[
            ("en", vec![0.0, 1.0], 0.0), // y
            ("de", vec![1.0, 0.0], 0.0), // z
            ("en", vec![0.9, 0.1], 0.0), // c
        ]);
        let (y, z, c) = (&refs[0], &refs[1], &refs[2]);
        let a1 = st.found(y, None);
        st.attach(z, a1);
        let cfg = ClustererConfig::default();
        let out = domino_topple(&mut st, c, None, &text_only().cross, &cfg);
        assert_eq!(out.cross, a1);
        assert_eq!(out.topples.len(), 1);
        assert_eq!(&out.topples[0].displaced, y);
        assert_eq!(st.home_of(y), Some(2));
        assert_eq!(st.home_of(z), Some(a1));
        st.check_invariants().unwrap();
    }

    #[test]
    fn singleton_incumbent_is_never_displaced_under_symmetric_scores() {
        let (mut st, refs) = seeded(&[("en", vec![1.0, 0.0], 0.0), ("en", vec![1.0, 0.0], 5.0)]);
        st.found(&refs[0], None);
        let out = domino_topple(&mut st, &refs[1], None, &CrossSimilarityModel::default(), &ClustererConfig::default());
        assert_eq!(out.cross, 2);
        assert!(out.topples.is_empty());
    }

    #[test]
    fn budget_exhaustion_founds_displaced() {
        let (mut st, refs) = seeded(&[
            ("en", vec![0.0, 1.0], 0.0),
            ("de", vec![1.0, 0.0], 0.0),
            ("en", vec![0.9, 0.1], 0.0),
        ]);
        let a1 = st.found(&refs[0], None);
        st.attach(&refs[1], a1);
        let cfg = ClustererConfig { topple_budget: 1, ..Default::default() };
        let out = domino_topple(&mut st, &refs[2], None, &text_only().cross, &cfg);
        assert!(out.budget_exhausted);
        assert_eq!(st.home_of(&refs[0]), Some(2));
        st.check_invariants().unwrap();
    }

    #[test]
    fn immutable_mode_keeps_home() {
        let (mut st, refs) = seeded(&[
            ("de", vec![0.0, 1.0], 0.0),
            ("en", vec![1.0, 0.0], 0.0),
            ("de", vec![1.0, 0.0], 0.0),
        ]);
        let cfg = ClustererConfig { g_update: GUpdate::Immutable, ..Default::default() };
        let m = text_only().cross;
        assert_eq!(update_g(&mut st, &refs[0], &m, &cfg).cross, 1);
        // en joins the only candidate lacking english
        assert_eq!(update_g(&mut st, &refs[1], &m, &cfg).cross, 1);
        // de slot taken everywhere -> new cluster, no displacement
        let out = update_g(&mut st, &refs[2], &m, &cfg);
        assert_eq!(out.cross, 2);
        assert!(out.topples.is_empty());
        // re-running on an already homed cluster keeps it
        assert_eq!(update_g(&mut st, &refs[0], &m, &cfg).cross, 1);
        st.check_invariants().unwrap();
    }

    #[test]
    fn cross_tau_filters_weak_candidates() {
        let (mut st, refs) = seeded(&[("en", vec![1.0, 0.0], 0.0), ("de", vec![0.0, 1.0], 0.0)]);
        let cfg = ClustererConfig { cross_tau: Some(0.5), ..Default::default() };
        let m = text_only().cross;
        update_g(&mut st, &refs[0], &m, &cfg);
        let out = update_g(&mut st, &refs[1], &m, &cfg);
        assert_eq!(out.cross, 2);
    }
}
