//! Online micro-clustering baseline in the style of CluStream: each
//! micro-cluster keeps a linear sum, the sum of squared norms, a count and
//! timestamp moments. Documents join the nearest micro-cluster when they fall
//! inside its maximal boundary; otherwise they open a new one, and at
//! capacity the oldest stale micro-cluster is retired or the two closest are
//! merged.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DocRepresentation, Document, SparseSum, NUM_SPARSE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CluStreamConfig {
    /// Maximum number of live micro-clusters.
    pub max_clusters: usize,
    /// Multiple of the RMS radius that bounds a micro-cluster.
    pub boundary_factor: f64,
    /// Micro-clusters whose relevance stamp is older than this many hours
    /// may be retired instead of merged. `None` always merges.
    pub horizon_hours: Option<f64>,
    /// Sparse subvector used as the document vector.
    pub subvector: usize,
}

impl Default for CluStreamConfig {
    fn default() -> Self {
        CluStreamConfig {
            max_clusters: 100,
            boundary_factor: 2.0,
            horizon_hours: None,
            subvector: 0,
        }
    }
}

impl CluStreamConfig {
    /// Capacity set to twice the expected number of clusters.
    pub fn for_expected_clusters(expected: usize) -> Self {
        CluStreamConfig {
            max_clusters: (2 * expected).max(1),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone)]
struct Micro {
    linear: SparseSum,
    squares: f64,
    n: f64,
    t_sum: f64,
    t_sq_sum: f64,
    label: usize,
}

impl Micro {
    fn dist2_to_point(&self, x: &crate::model::SparseVector) -> f64 {
        let xx: f64 = x.norm().powi(2);
        let d = xx - 2.0 * self.linear.dot(x) / self.n + self.linear.norm().powi(2) / (self.n * self.n);
        d.max(0.0)
    }

    fn dist2_to(&self, other: &Micro) -> f64 {
        let a = self.linear.norm().powi(2) / (self.n * self.n);
        let b = other.linear.norm().powi(2) / (other.n * other.n);
        let ab = self.linear.dot_sum(&other.linear) / (self.n * other.n);
        (a + b - 2.0 * ab).max(0.0)
    }

    fn rms_radius(&self) -> f64 {
        let c = self.linear.norm().powi(2) / (self.n * self.n);
        (self.squares / self.n - c).max(0.0).sqrt()
    }

    fn relevance(&self) -> f64 {
        let mean = self.t_sum / self.n;
        let var = (self.t_sq_sum / self.n - mean * mean).max(0.0);
        mean + var.sqrt()
    }

    fn absorb(&mut self, other: &Micro) {
        self.linear.absorb(&other.linear);
        self.squares += other.squares;
        self.n += other.n;
        self.t_sum += other.t_sum;
        self.t_sq_sum += other.t_sq_sum;
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Clusters a monolingual stream and returns document id -> cluster label.
pub fn clustream_baseline(
    stream: &[(Document, DocRepresentation)],
    config: &CluStreamConfig,
) -> Result<HashMap<String, usize>> {
    if config.max_clusters == 0 {
        return Err(Error::config("max_clusters must be positive"));
    }
    if config.subvector >= NUM_SPARSE {
        return Err(Error::SubvectorOutOfRange(config.subvector));
    }
    let mut micros: Vec<Micro> = Vec::new();
    let mut parent: Vec<usize> = Vec::new();
    let mut doc_label: Vec<(String, usize)> = Vec::with_capacity(stream.len());

    for (doc, rep) in stream {
        let x = &rep.mono[config.subvector];
        let t = rep.timestamp;
        let nearest = micros
            .iter()
            .enumerate()
            .map(|(i, m)| (i, m.dist2_to_point(x)))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));

        let joined = nearest.and_then(|(i, d2)| {
            let m = &micros[i];
            let boundary = if m.n > 1.0 {
                config.boundary_factor * m.rms_radius()
            } else {
                // singleton: distance to the closest other micro-cluster
                micros
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, o)| m.dist2_to(o).sqrt())
                    .min_by(f64::total_cmp)
                    .unwrap_or(0.0)
            };
            // strict, so a singleton never absorbs a point exactly as far as
            // its nearest neighbour; coincident points always join
            let d = d2.sqrt();
            (d < boundary || d <= 1e-9).then_some(i)
        });

        let i = match joined {
            Some(i) => i,
            None => {
                let label = parent.len();
                parent.push(label);
                micros.push(Micro {
                    linear: SparseSum::default(),
                    squares: 0.0,
                    n: 0.0,
                    t_sum: 0.0,
                    t_sq_sum: 0.0,
                    label,
                });
                micros.len() - 1
            }
        };
        let m = &mut micros[i];
        m.linear.add(x);
        m.squares += x.norm().powi(2);
        m.n += 1.0;
        m.t_sum += t;
        m.t_sq_sum += t * t;
        doc_label.push((doc.id.clone(), m.label));

        if micros.len() > config.max_clusters {
            let stale = config.horizon_hours.and_then(|h| {
                micros
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(j, m)| (j, m.relevance()))
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .filter(|(_, r)| *r < t - h)
            });
            match stale {
                Some((j, _)) => {
                    micros.remove(j);
                }
                None => {
                    let mut best: Option<(usize, usize, f64)> = None;
                    for a in 0..micros.len() {
                        for b in (a + 1)..micros.len() {
                            let d = micros[a].dist2_to(&micros[b]);
                            if best.is_none_or(|(_, _, bd)| d < bd) {
                                best = Some((a, b, d));
                            }
                        }
                    }
                    let (a, b, _) = best.expect("at least two micro-clusters");
                    let absorbed = micros.remove(b);
                    let (ra, rb) = (find(&mut parent, micros[a].label), find(&mut parent, absorbed.label));
                    parent[rb] = ra;
                    micros[a].absorb(&absorbed);
                }
            }
        }
    }
    Ok(doc_label
        .into_iter()
        .map(|(id, l)| (id, find(&mut parent, l)))
        .collect())
}
