//! Threshold tuning on a labeled development stream.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::ranking::gold_mono;
use crate::clusterer::{merge_decision, score_candidates, MergePolicy, Models};
use crate::error::{Error, Result};
use crate::evaluation::pairwise_metrics;
use crate::model::{ClusterRef, ClusteringState, DocRepresentation, Document};

/// Search settings: a halving search over `[lo, hi]` seeded from
/// `coarse_points` evenly spaced values, then a local grid of
/// `2 * grid_radius + 1` points spaced `grid_step` around the best value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauSearch {
    pub lo: f64,
    pub hi: f64,
    pub coarse_points: usize,
    pub grid_step: f64,
    pub grid_radius: usize,
}

impl Default for TauSearch {
    fn default() -> Self {
        TauSearch {
            lo: 0.0,
            hi: 12.0,
            coarse_points: 13,
            grid_step: 0.05,
            grid_radius: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauResult {
    pub tau: f64,
    pub f1: f64,
    /// Every `(tau, f1)` evaluated, in ascending `tau`.
    pub evaluations: Vec<(f64, f64)>,
}

/// Monolingual clustering only (no crosslingual grouping). Returns document
/// id to cluster.
pub fn cluster_monolingual(
    stream: &[(Document, DocRepresentation)],
    models: &Models,
    policy: &MergePolicy,
) -> Result<HashMap<String, ClusterRef>> {
    let mut state = ClusteringState::new();
    for (doc, rep) in stream {
        doc.validate()?;
        if state.contains_document(&doc.id) {
            return Err(Error::DuplicateDocument(doc.id.clone()));
        }
        let scores = score_candidates(&state, rep, &doc.language, models.mono_for(&doc.language), false);
        let join = match scores.best() {
            Some((id, s)) => merge_decision(s, &scores.feature_maxima, &doc.language, policy)?.then_some(id),
            None => None,
        };
        match join {
            Some(id) => state.add_to_cluster(
                &ClusterRef {
                    language: doc.language.clone(),
                    id,
                },
                doc,
                rep,
            ),
            None => {
                state.create_cluster(doc, rep);
            }
        }
    }
    Ok(stream
        .iter()
        .map(|(d, _)| (d.id.clone(), state.assignment(&d.id).expect("every doc assigned").clone()))
        .collect())
}

/// Picks the threshold maximizing monolingual pairwise F1 on `dev`. Among
/// tied thresholds the middle of the tied run is preferred; the result is
/// reproducible for fixed inputs.
pub fn tune_tau(dev: &[(Document, DocRepresentation)], models: &Models, search: &TauSearch) -> Result<TauResult> {
    if !(search.lo.is_finite() && search.hi.is_finite() && search.lo < search.hi)
        || !(search.grid_step.is_finite() && search.grid_step > 0.0)
        || search.coarse_points < 2
    {
        return Err(Error::config("empty tau search grid"));
    }
    let gold: HashMap<String, (String, String)> = dev
        .iter()
        .map(|(d, _)| Ok((d.id.clone(), (d.language.to_string(), gold_mono(d)?.to_string()))))
        .collect::<Result<_>>()?;

    let mut cache: BTreeMap<u64, f64> = BTreeMap::new();
    let eval = |cache: &mut BTreeMap<u64, f64>, tau: f64| -> Result<f64> {
        // 0.0 and -0.0 share one entry
        let key = (tau + 0.0).to_bits();
        if let Some(f) = cache.get(&key) {
            return Ok(*f);
        }
        let pred = cluster_monolingual(dev, models, &MergePolicy::threshold(tau))?;
        let f1 = pairwise_metrics(&pred, &gold)?.f1;
        cache.insert(key, f1);
        Ok(f1)
    };
    let better = |a: (f64, f64), b: (f64, f64)| a.1 > b.1 || (a.1 == b.1 && a.0 < b.0);

    let span = search.hi - search.lo;
    let mut best = (search.lo, eval(&mut cache, search.lo)?);
    for i in 1..search.coarse_points {
        let t = search.lo + span * i as f64 / (search.coarse_points - 1) as f64;
        let cand = (t, eval(&mut cache, t)?);
        if better(cand, best) {
            best = cand;
        }
    }
    let mut half = span / (search.coarse_points - 1) as f64;
    while half > search.grid_step {
        half /= 2.0;
        for t in [best.0 - half, best.0 + half] {
            if (search.lo..=search.hi).contains(&t) {
                let cand = (t, eval(&mut cache, t)?);
                if better(cand, best) {
                    best = cand;
                }
            }
        }
    }
    let center = best.0;
    for k in -(search.grid_radius as i64)..=search.grid_radius as i64 {
        let t = center + k as f64 * search.grid_step;
        let cand = (t, eval(&mut cache, t)?);
        if better(cand, best) {
            best = cand;
        }
    }

    // Prefer the middle of the run of evaluated points that tie with the
    // best, when the midpoint scores the same.
    let mut sorted: Vec<(f64, f64)> = cache.iter().map(|(k, f)| (f64::from_bits(*k), *f)).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let at = sorted.iter().position(|p| p.0 == best.0).expect("best was evaluated");
    let mut last = at;
    while last + 1 < sorted.len() && sorted[last + 1].1 == best.1 {
        last += 1;
    }
    if last > at {
        let mid = 0.5 * (sorted[at].0 + sorted[last].0);
        if eval(&mut cache, mid)? == best.1 {
            best.0 = mid;
        }
    }

    let mut evaluations: Vec<(f64, f64)> = cache.into_iter().map(|(k, f)| (f64::from_bits(k), f)).collect();
    evaluations.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(TauResult {
        tau: best.0,
        f1: best.1,
        evaluations,
    })
}
