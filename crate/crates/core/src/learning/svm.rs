//! Linear SVM solvers by dual coordinate descent (Hsieh et al., 2008).
//! Both are deterministic: the coordinate order is drawn from a seeded
//! ChaCha generator.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::similarity::dot;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub max_epochs: usize,
    /// Stop once the projected-gradient spread falls below this value.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_epochs: 1000,
            tolerance: 1e-4,
            seed: 0,
        }
    }
}

/// Minimizes `0.5 |w|^2 + sum_k u_k max(0, 1 - w . x_k)` (L1 hinge, no
/// bias). `upper[k]` is the per-instance cost `u_k`.
pub fn hinge_l1(xs: &[Vec<f64>], upper: &[f64], dim: usize, opts: &SolverOptions) -> Vec<f64> {
    let mut w = vec![0.0; dim];
    let mut alpha = vec![0.0; xs.len()];
    let qdiag: Vec<f64> = xs.iter().map(|x| dot(x, x)).collect();
    let mut order: Vec<usize> = (0..xs.len()).filter(|&k| qdiag[k] > 0.0).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.max_epochs {
        order.shuffle(&mut rng);
        let (mut pg_max, mut pg_min) = (f64::NEG_INFINITY, f64::INFINITY);
        for &k in &order {
            let g = dot(&w, &xs[k]) - 1.0;
            let pg = if alpha[k] == 0.0 {
                g.min(0.0)
            } else if alpha[k] == upper[k] {
                g.max(0.0)
            } else {
                g
            };
            pg_max = pg_max.max(pg);
            pg_min = pg_min.min(pg);
            if pg != 0.0 {
                let old = alpha[k];
                alpha[k] = (old - g / qdiag[k]).clamp(0.0, upper[k]);
                let step = alpha[k] - old;
                for (wi, xi) in w.iter_mut().zip(&xs[k]) {
                    *wi += step * xi;
                }
            }
        }
        if order.is_empty() || pg_max - pg_min < opts.tolerance {
            break;
        }
    }
    w
}

/// Minimizes `0.5 |w|^2 + sum_k c_k max(0, 1 - y_k w . x_k)^2` (squared
/// hinge). Labels are +1 or -1. Append a constant feature to learn a bias.
pub fn hinge_l2(xs: &[Vec<f64>], ys: &[f64], costs: &[f64], dim: usize, opts: &SolverOptions) -> Vec<f64> {
    let mut w = vec![0.0; dim];
    let mut alpha = vec![0.0; xs.len()];
    let diag: Vec<f64> = costs.iter().map(|c| 0.5 / c).collect();
    let qdiag: Vec<f64> = xs.iter().zip(&diag).map(|(x, d)| dot(x, x) + d).collect();
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.max_epochs {
        order.shuffle(&mut rng);
        let (mut pg_max, mut pg_min) = (f64::NEG_INFINITY, f64::INFINITY);
        for &k in &order {
            let g = ys[k] * dot(&w, &xs[k]) - 1.0 + diag[k] * alpha[k];
            let pg = if alpha[k] == 0.0 { g.min(0.0) } else { g };
            pg_max = pg_max.max(pg);
            pg_min = pg_min.min(pg);
            if pg != 0.0 {
                let old = alpha[k];
                alpha[k] = (old - g / qdiag[k]).max(0.0);
                let step = (alpha[k] - old) * ys[k];
                for (wi, xi) in w.iter_mut().zip(&xs[k]) {
                    *wi += step * xi;
                }
            }
        }
        if order.is_empty() || pg_max - pg_min < opts.tolerance {
            break;
        }
    }
    w
}
