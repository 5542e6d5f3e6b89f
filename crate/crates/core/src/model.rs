//! Domain types shared by every stage: documents, subvector representations,
//! monolingual clusters with incremental centroids, crosslingual clusters and
//! the clustering state that ties them together.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of sparse (monolingual) subvectors per document.
pub const NUM_SPARSE: usize = 9;
/// Number of dense (crosslingual) subvectors per document.
pub const NUM_DENSE: usize = 3;
/// Total subvector count; sparse indices come first, then dense.
pub const NUM_SUBVECTORS: usize = NUM_SPARSE + NUM_DENSE;

/// Language code, normalized to lower case so comparisons are
/// case-insensitive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Language(String);

impl Language {
    pub fn new(code: &str) -> Result<Self> {
        let code = code.trim();
        if code.is_empty() {
            return Err(Error::config("empty language code"));
        }
        Ok(Language(code.to_lowercase()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Language {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        Language::new(&value)
    }
}

impl From<Language> for String {
    fn from(value: Language) -> Self {
        value.0
    }
}

impl std::str::FromStr for Language {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Language::new(s)
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One stream item. `timestamp` is in hours since the Unix epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub language: Language,
    pub title: String,
    pub body: String,
    pub timestamp: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_mono_label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_cross_label: Option<String>,
}

impl Document {
    pub fn new(id: &str, language: Language, title: &str, body: &str, timestamp: f64) -> Self {
        Document {
            id: id.to_string(),
            language,
            title: title.to_string(),
            body: body.to_string(),
            timestamp,
            gold_mono_label: None,
            gold_cross_label: None,
        }
    }

    pub fn with_gold(mut self, mono: &str, cross: Option<&str>) -> Self {
        self.gold_mono_label = Some(mono.to_string());
        self.gold_cross_label = cross.map(str::to_string);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |reason: &str| Error::InvalidDocument {
            id: self.id.clone(),
            reason: reason.to_string(),
        };
        if self.id.is_empty() {
            return Err(invalid("empty id"));
        }
        if !self.timestamp.is_finite() {
            return Err(invalid("timestamp is not finite"));
        }
        if self.title.trim().is_empty() && self.body.trim().is_empty() {
            return Err(invalid("title and body are both empty"));
        }
        Ok(())
    }
}

/// Feature class of a sparse subvector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureClass {
    Token,
    Lemma,
    Entity,
}

impl FeatureClass {
    pub const ALL: [FeatureClass; 3] = [FeatureClass::Token, FeatureClass::Lemma, FeatureClass::Entity];

    pub fn name(self) -> &'static str {
        match self {
            FeatureClass::Token => "token",
            FeatureClass::Lemma => "lemma",
            FeatureClass::Entity => "entity",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "token" => Some(FeatureClass::Token),
            "lemma" => Some(FeatureClass::Lemma),
            "entity" => Some(FeatureClass::Entity),
            _ => None,
        }
    }

    fn tag(self) -> u8 {
        match self {
            FeatureClass::Token => b't',
            FeatureClass::Lemma => b'l',
            FeatureClass::Entity => b'e',
        }
    }
}

/// Document section a subvector is computed over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Section {
    Both,
    Title,
    Body,
}

impl Section {
    pub const ALL: [Section; 3] = [Section::Both, Section::Title, Section::Body];

    fn offset(self) -> usize {
        match self {
            Section::Both => 0,
            Section::Title => 1,
            Section::Body => 2,
        }
    }
}

/// Position of a sparse subvector in the fixed layout.
///
/// Layout is class-major: `[token/both, token/title, token/body,
/// lemma/both, .., entity/body]`. Index 0 (tokens over title + body) is the
/// single feature used when generating ranking data.
pub fn sparse_index(class: FeatureClass, section: Section) -> usize {
    let class_offset = match class {
        FeatureClass::Token => 0,
        FeatureClass::Lemma => 3,
        FeatureClass::Entity => 6,
    };
    class_offset + section.offset()
}

/// Position of a dense subvector, counted within the dense block.
pub fn dense_index(section: Section) -> usize {
    section.offset()
}

/// Namespaced term identifier: a 64-bit FNV-1a hash of feature class and
/// term text, so token "paris" and entity "paris" are distinct dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TermId(pub u64);

impl TermId {
    pub fn new(class: FeatureClass, term: &str) -> Self {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut h = OFFSET;
        for b in [class.tag(), 0u8].iter().chain(term.as_bytes()) {
            h ^= u64::from(*b);
            h = h.wrapping_mul(PRIME);
        }
        TermId(h)
    }
}

/// Sparse non-negative vector, stored sorted by term id with no zero entries.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    entries: Vec<(TermId, f64)>,
}

impl SparseVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a vector from possibly repeated `(term, weight)` pairs; repeated
    /// terms are summed and zero results dropped.
    pub fn from_weights<I: IntoIterator<Item = (TermId, f64)>>(weights: I) -> Self {
        let mut entries: Vec<(TermId, f64)> = weights.into_iter().collect();
        entries.sort_by_key(|(t, _)| *t);
        let mut merged: Vec<(TermId, f64)> = Vec::with_capacity(entries.len());
        for (t, w) in entries {
            match merged.last_mut() {
                Some((last, acc)) if *last == t => *acc += w,
                _ => merged.push((t, w)),
            }
        }
        merged.retain(|(_, w)| *w != 0.0);
        SparseVector { entries: merged }
    }

    pub fn iter(&self) -> impl Iterator<Item = (TermId, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, term: TermId) -> f64 {
        self.entries
            .binary_search_by_key(&term, |(t, _)| *t)
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|(_, w)| w * w).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < self.entries.len() && j < other.entries.len() {
            let (a, wa) = self.entries[i];
            let (b, wb) = other.entries[j];
            match a.cmp(&b) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += wa * wb;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    pub fn scaled(&self, factor: f64) -> SparseVector {
        SparseVector::from_weights(self.entries.iter().map(|&(t, w)| (t, w * factor)))
    }

    /// L2-normalized copy; the zero vector stays zero.
    pub fn normalized(&self) -> SparseVector {
        let n = self.norm();
        if n == 0.0 {
            self.clone()
        } else {
            SparseVector {
                entries: self.entries.iter().map(|&(t, w)| (t, w / n)).collect(),
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = TermId> + '_ {
        self.entries.iter().map(|(t, _)| *t)
    }
}

/// Fixed-length dense vector (crosslingual embedding space).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DenseVector(pub Vec<f64>);

impl DenseVector {
    pub fn zeros(dim: usize) -> Self {
        DenseVector(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &DenseVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|v| *v == 0.0)
    }

    pub fn add_scaled(&mut self, other: &DenseVector, factor: f64) {
        if self.0.len() < other.0.len() {
            self.0.resize(other.0.len(), 0.0);
        }
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += factor * b;
        }
    }

    pub fn normalized(&self) -> DenseVector {
        let n = self.norm();
        if n == 0.0 {
            self.clone()
        } else {
            DenseVector(self.0.iter().map(|v| v / n).collect())
        }
    }

    pub fn scaled(&self, factor: f64) -> DenseVector {
        DenseVector(self.0.iter().map(|v| v * factor).collect())
    }
}

/// Featurized document: nine sparse subvectors (see [`sparse_index`]),
/// three dense subvectors (see [`dense_index`]) and the timestamp in hours.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocRepresentation {
    pub mono: [SparseVector; NUM_SPARSE],
    pub cross: [DenseVector; NUM_DENSE],
    pub timestamp: f64,
}

impl DocRepresentation {
    pub fn empty(timestamp: f64, dim: usize) -> Self {
        DocRepresentation {
            mono: Default::default(),
            cross: std::array::from_fn(|_| DenseVector::zeros(dim)),
            timestamp,
        }
    }
}

/// Running sum of sparse subvectors, with its squared norm kept up to date
/// so cosine against the centroid costs O(doc nonzeros).
#[derive(Debug, Clone, Default)]
pub struct SparseSum {
    weights: HashMap<TermId, f64>,
    sq_norm: f64,
}

impl SparseSum {
    pub fn add(&mut self, v: &SparseVector) {
        for (t, w) in v.iter() {
            let slot = self.weights.entry(t).or_insert(0.0);
            let old = *slot;
            *slot += w;
            self.sq_norm += *slot * *slot - old * old;
        }
        if self.sq_norm < 0.0 {
            self.sq_norm = 0.0;
        }
    }

    pub fn get(&self, term: TermId) -> f64 {
        self.weights.get(&term).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.sq_norm.sqrt()
    }

    pub fn dot(&self, v: &SparseVector) -> f64 {
        v.iter().map(|(t, w)| w * self.get(t)).sum()
    }

    /// Dot product of two sums, iterating the smaller one.
    pub fn dot_sum(&self, other: &SparseSum) -> f64 {
        let (small, large) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        small.weights.iter().map(|(t, w)| w * large.get(*t)).sum()
    }

    /// Merges another running sum into this one.
    pub fn absorb(&mut self, other: &SparseSum) {
        for (t, w) in &other.weights {
            let slot = self.weights.entry(*t).or_insert(0.0);
            let old = *slot;
            *slot += w;
            self.sq_norm += *slot * *slot - old * old;
        }
        if self.sq_norm < 0.0 {
            self.sq_norm = 0.0;
        }
    }

    /// Keeps only the `k` heaviest terms (ties broken by term id). Lossy.
    pub fn prune(&mut self, k: usize) {
        if self.weights.len() <= k {
            return;
        }
        let mut all: Vec<(TermId, f64)> = self.weights.drain().collect();
        all.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        all.truncate(k);
        self.sq_norm = all.iter().map(|(_, w)| w * w).sum();
        self.weights = all.into_iter().collect();
    }

    /// Entries sorted by term id.
    pub fn to_vector(&self) -> SparseVector {
        SparseVector::from_weights(self.weights.iter().map(|(t, w)| (*t, *w)))
    }
}

/// Centroid of one subvector slot.
#[derive(Debug, Clone, PartialEq)]
pub enum Centroid {
    Sparse(SparseVector),
    Dense(DenseVector),
}

/// Reference to a monolingual cluster: ids are namespaced per language.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ClusterRef {
    pub language: Language,
    pub id: u64,
}

impl fmt::Display for ClusterRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.language, self.id)
    }
}

/// Monolingual cluster holding running sums rather than means.
#[derive(Debug, Clone)]
pub struct MonolingualCluster {
    pub id: u64,
    pub language: Language,
    member_ids: Vec<String>,
    mono_sums: [SparseSum; NUM_SPARSE],
    cross_sums: [DenseVector; NUM_DENSE],
    ts_newest: f64,
    ts_oldest: f64,
    ts_sum: f64,
}

impl MonolingualCluster {
    fn new(id: u64, language: Language, doc_id: &str, rep: &DocRepresentation) -> Self {
        let mut cluster = MonolingualCluster {
            id,
            language,
            member_ids: Vec::new(),
            mono_sums: Default::default(),
            cross_sums: std::array::from_fn(|i| DenseVector::zeros(rep.cross[i].dim())),
            ts_newest: rep.timestamp,
            ts_oldest: rep.timestamp,
            ts_sum: 0.0,
        };
        cluster.absorb(doc_id, rep);
        cluster
    }

    fn absorb(&mut self, doc_id: &str, rep: &DocRepresentation) {
        self.member_ids.push(doc_id.to_string());
        for (sum, v) in self.mono_sums.iter_mut().zip(&rep.mono) {
            sum.add(v);
        }
        for (sum, v) in self.cross_sums.iter_mut().zip(&rep.cross) {
            sum.add_scaled(v, 1.0);
        }
        self.ts_newest = self.ts_newest.max(rep.timestamp);
        self.ts_oldest = self.ts_oldest.min(rep.timestamp);
        self.ts_sum += rep.timestamp;
    }

    fn prune(&mut self, k: usize) {
        for sum in &mut self.mono_sums {
            // amortized: only prune when well past the cap
            if sum.len() > 2 * k {
                sum.prune(k);
            }
        }
    }

    pub fn reference(&self) -> ClusterRef {
        ClusterRef {
            language: self.language.clone(),
            id: self.id,
        }
    }

    pub fn count(&self) -> usize {
        self.member_ids.len()
    }

    pub fn member_ids(&self) -> &[String] {
        &self.member_ids
    }

    pub fn mono_sum(&self, index: usize) -> &SparseSum {
        &self.mono_sums[index]
    }

    pub fn cross_sum(&self, index: usize) -> &DenseVector {
        &self.cross_sums[index]
    }

    pub fn ts_newest(&self) -> f64 {
        self.ts_newest
    }

    pub fn ts_oldest(&self) -> f64 {
        self.ts_oldest
    }

    pub fn ts_average(&self) -> f64 {
        self.ts_sum / self.count() as f64
    }

    /// Mean of member subvectors at `index` (sparse indices 0..9, dense 9..12).
    pub fn centroid(&self, index: usize) -> Result<Centroid> {
        let n = self.count() as f64;
        if index < NUM_SPARSE {
            Ok(Centroid::Sparse(self.mono_sums[index].to_vector().scaled(1.0 / n)))
        } else if index < NUM_SUBVECTORS {
            Ok(Centroid::Dense(self.cross_sums[index - NUM_SPARSE].scaled(1.0 / n)))
        } else {
            Err(Error::SubvectorOutOfRange(index))
        }
    }
}

/// Crosslingual cluster: at most one monolingual cluster per language.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrosslingualCluster {
    pub id: u64,
    pub members: BTreeMap<Language, u64>,
}

impl CrosslingualCluster {
    pub fn member_refs(&self) -> impl Iterator<Item = ClusterRef> + '_ {
        self.members.iter().map(|(l, id)| ClusterRef {
            language: l.clone(),
            id: *id,
        })
    }
}

/// Inverted index from sparse term to the clusters whose sums contain it.
#[derive(Debug, Clone, Default)]
pub struct TermIndex {
    postings: HashMap<TermId, Vec<u64>>,
}

impl TermIndex {
    fn add(&mut self, cluster_id: u64, rep: &DocRepresentation) {
        for v in &rep.mono {
            for t in v.terms() {
                let list = self.postings.entry(t).or_default();
                if !list.contains(&cluster_id) {
                    list.push(cluster_id);
                }
            }
        }
    }

    /// Sorted ids of clusters sharing at least one term with `rep`.
    pub fn candidates(&self, rep: &DocRepresentation) -> Vec<u64> {
        let mut out = BTreeSet::new();
        for v in &rep.mono {
            for t in v.terms() {
                if let Some(list) = self.postings.get(&t) {
                    out.extend(list.iter().copied());
                }
            }
        }
        out.into_iter().collect()
    }
}

#[derive(Debug, Clone, Default)]
struct LanguageSpace {
    clusters: Vec<MonolingualCluster>,
    index: TermIndex,
}

/// Complete clustering state: per-language monolingual clusters, the
/// crosslingual grouping, and the document assignment map.
///
/// Single writer; mutation goes through the online clusterer.
#[derive(Debug, Clone, Default)]
pub struct ClusteringState {
    spaces: BTreeMap<Language, LanguageSpace>,
    cross: BTreeMap<u64, CrosslingualCluster>,
    home: HashMap<ClusterRef, u64>,
    assignments: HashMap<String, ClusterRef>,
    next_cross_id: u64,
    prune_top_k: Option<usize>,
}

impl ClusteringState {
    pub fn new() -> Self {
        ClusteringState {
            next_cross_id: 1,
            ..Default::default()
        }
    }

    /// Enables lossy top-k pruning of every sparse centroid sum.
    pub fn with_pruning(mut self, top_k: Option<usize>) -> Self {
        self.prune_top_k = top_k;
        self
    }

    pub fn languages(&self) -> impl Iterator<Item = &Language> {
        self.spaces.keys()
    }

    pub fn clusters(&self, language: &Language) -> &[MonolingualCluster] {
        self.spaces
            .get(language)
            .map(|s| s.clusters.as_slice())
            .unwrap_or(&[])
    }

    pub fn all_clusters(&self) -> impl Iterator<Item = &MonolingualCluster> {
        self.spaces.values().flat_map(|s| s.clusters.iter())
    }

    pub fn cluster(&self, r: &ClusterRef) -> Option<&MonolingualCluster> {
        let space = self.spaces.get(&r.language)?;
        let idx = usize::try_from(r.id.checked_sub(1)?).ok()?;
        space.clusters.get(idx)
    }

    pub fn term_index(&self, language: &Language) -> Option<&TermIndex> {
        self.spaces.get(language).map(|s| &s.index)
    }

    pub fn crosslingual(&self, id: u64) -> Option<&CrosslingualCluster> {
        self.cross.get(&id)
    }

    pub fn crosslingual_clusters(&self) -> impl Iterator<Item = &CrosslingualCluster> {
        self.cross.values()
    }

    pub fn crosslingual_count(&self) -> usize {
        self.cross.len()
    }

    pub fn home_of(&self, r: &ClusterRef) -> Option<u64> {
        self.home.get(r).copied()
    }

    pub fn assignment(&self, doc_id: &str) -> Option<&ClusterRef> {
        self.assignments.get(doc_id)
    }

    pub fn contains_document(&self, doc_id: &str) -> bool {
        self.assignments.contains_key(doc_id)
    }

    pub fn document_count(&self) -> usize {
        self.assignments.len()
    }

    pub(crate) fn create_cluster(&mut self, doc: &Document, rep: &DocRepresentation) -> ClusterRef {
        let space = self.spaces.entry(doc.language.clone()).or_default();
        let id = space.clusters.len() as u64 + 1;
        space
            .clusters
            .push(MonolingualCluster::new(id, doc.language.clone(), &doc.id, rep));
        space.index.add(id, rep);
        let r = ClusterRef {
            language: doc.language.clone(),
            id,
        };
        self.assignments.insert(doc.id.clone(), r.clone());
        r
    }

    pub(crate) fn add_to_cluster(&mut self, r: &ClusterRef, doc: &Document, rep: &DocRepresentation) {
        let prune = self.prune_top_k;
        let space = self
            .spaces
            .get_mut(&r.language)
            .expect("cluster language exists");
        let cluster = &mut space.clusters[(r.id - 1) as usize];
        cluster.absorb(&doc.id, rep);
        if let Some(k) = prune {
            cluster.prune(k);
        }
        space.index.add(r.id, rep);
        self.assignments.insert(doc.id.clone(), r.clone());
    }

    /// Removes `r` from its crosslingual cluster. Empty crosslingual clusters
    /// are dropped. Returns the id `r` was detached from.
    pub(crate) fn detach(&mut self, r: &ClusterRef) -> Option<u64> {
        let cross_id = self.home.remove(r)?;
        let cluster = self.cross.get_mut(&cross_id).expect("home points to live cluster");
        cluster.members.remove(&r.language);
        if cluster.members.is_empty() {
            self.cross.remove(&cross_id);
        }
        Some(cross_id)
    }

    /// Places `r` (currently homeless) in an existing crosslingual cluster
    /// whose slot for `r.language` must be free.
    pub(crate) fn attach(&mut self, r: &ClusterRef, cross_id: u64) {
        let cluster = self.cross.get_mut(&cross_id).expect("attach to live cluster");
        let prev = cluster.members.insert(r.language.clone(), r.id);
        debug_assert!(prev.is_none(), "language slot already taken");
        self.home.insert(r.clone(), cross_id);
    }

    /// Founds a crosslingual cluster holding only `r`. `reuse` may name a
    /// vacated id to recycle; otherwise a fresh id is allocated.
    pub(crate) fn found(&mut self, r: &ClusterRef, reuse: Option<u64>) -> u64 {
        let id = match reuse {
            Some(id) if !self.cross.contains_key(&id) => id,
            _ => {
                let id = self.next_cross_id;
                self.next_cross_id += 1;
                id
            }
        };
        let mut members = BTreeMap::new();
        members.insert(r.language.clone(), r.id);
        self.cross.insert(id, CrosslingualCluster { id, members });
        self.home.insert(r.clone(), id);
        id
    }

    /// Final crosslingual cluster of a document, if assigned.
    pub fn crosslingual_of_document(&self, doc_id: &str) -> Option<u64> {
        self.assignment(doc_id).and_then(|r| self.home_of(r))
    }

    /// Checks the structural invariants; returns a description of the first
    /// violation found.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let mut seen = HashSet::new();
        for (id, a) in &self.cross {
            if a.members.is_empty() {
                return Err(format!("crosslingual cluster {id} is empty"));
            }
            if a.id != *id {
                return Err(format!("crosslingual cluster {id} carries id {}", a.id));
            }
            for r in a.member_refs() {
                if self.cluster(&r).is_none() {
                    return Err(format!("crosslingual cluster {id} references missing {r}"));
                }
                if !seen.insert(r.clone()) {
                    return Err(format!("{r} belongs to two crosslingual clusters"));
                }
                if self.home.get(&r) != Some(id) {
                    return Err(format!("home map disagrees for {r}"));
                }
            }
        }
        for c in self.all_clusters() {
            if !seen.contains(&c.reference()) {
                return Err(format!("{} has no crosslingual home", c.reference()));
            }
            if c.count() == 0 {
                return Err(format!("{} is empty", c.reference()));
            }
            let avg = c.ts_average();
            if !(c.ts_oldest <= avg + 1e-9 && avg <= c.ts_newest + 1e-9) {
                return Err(format!("{} timestamp aggregates out of order", c.reference()));
            }
        }
        if self.home.len() != seen.len() {
            return Err("home map has stale entries".into());
        }
        let members: usize = self.all_clusters().map(|c| c.count()).sum();
        if members != self.assignments.len() {
            return Err("assignment map and cluster membership disagree".into());
        }
        Ok(())
    }
}
