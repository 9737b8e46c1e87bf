use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::digamma;

use crate::error::{Error, Result};

/// Relative size of the tie-breaking jitter added to each standardised
/// marginal.
const JITTER: f64 = 1e-10;

pub fn nats_to_bits(nats: f64) -> f64 {
    nats / std::f64::consts::LN_2
}

/// Kraskov-Stoegbauer-Grassberger estimate (algorithm 1, max-norm) of the
/// mutual information between two scalar series, in nats. Uses jitter seed 0.
pub fn knn_mutual_information(x: &[f64], y: &[f64], k: usize) -> Result<f64> {
    knn_mutual_information_seeded(x, y, k, 0)
}

/// As [`knn_mutual_information`] with an explicit seed for the tie-breaking
/// jitter. Both marginals are standardised and receive the same jitter
/// sequence, so swapping the arguments gives a bit-identical result.
pub fn knn_mutual_information_seeded(x: &[f64], y: &[f64], k: usize, seed: u64) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if k == 0 || n <= k {
        return Err(Error::TooFewSamples { n, k });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::DegenerateInput("non-finite sample".into()));
    }
    let (Some(xs), Some(ys)) = (standardise(x, seed), standardise(y, seed)) else {
        return Ok(0.0);
    };

    let eps = kth_neighbour_distances(&xs, &ys, k);
    let nx = marginal_counts(&xs, &eps);
    let ny = marginal_counts(&ys, &eps);
    let mut acc = 0.0;
    for i in 0..n {
        acc += digamma(nx[i] as f64 + 1.0) + digamma(ny[i] as f64 + 1.0);
    }
    Ok(digamma(k as f64) + digamma(n as f64) - acc / n as f64)
}

/// Zero-mean, unit-variance copy plus jitter. `None` for a constant input.
fn standardise(v: &[f64], seed: u64) -> Option<Vec<f64>> {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
    if !(var > 0.0) {
        return None;
    }
    let sd = var.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Some(
        v.iter()
            .map(|a| (a - mean) / sd + JITTER * (rng.random::<f64>() - 0.5))
            .collect(),
    )
}

/// Max-norm distance from each point to its k-th nearest neighbour in the
/// joint space, found by scanning outward along the x-sorted order.
fn kth_neighbour_distances(x: &[f64], y: &[f64], k: usize) -> Vec<f64> {
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let sx: Vec<f64> = order.iter().map(|&i| x[i]).collect();
    let sy: Vec<f64> = order.iter().map(|&i| y[i]).collect();

    let mut eps = vec![0.0; n];
    let mut best = vec![f64::INFINITY; k];
    for p in 0..n {
        best.fill(f64::INFINITY);
        let consider = |q: usize, best: &mut [f64]| -> bool {
            let dx = (sx[q] - sx[p]).abs();
            if dx >= best[k - 1] {
                return false;
            }
            let d = dx.max((sy[q] - sy[p]).abs());
            if d < best[k - 1] {
                let mut i = k - 1;
                while i > 0 && best[i - 1] > d {
                    best[i] = best[i - 1];
                    i -= 1;
                }
                best[i] = d;
            }
            true
        };
        for q in p + 1..n {
            if !consider(q, &mut best) {
                break;
            }
        }
        for q in (0..p).rev() {
            if !consider(q, &mut best) {
                break;
            }
        }
        eps[order[p]] = best[k - 1];
    }
    eps
}

/// Number of other points strictly within `eps[i]` of point `i` along one
/// marginal.
fn marginal_counts(v: &[f64], eps: &[f64]) -> Vec<usize> {
    let mut sorted = v.to_vec();
    sorted.sort_by(f64::total_cmp);
    v.iter()
        .zip(eps)
        .map(|(&c, &e)| {
            if e <= 0.0 {
                return 0;
            }
            // Both predicates are monotone along the sorted order and use the
            // same rounded differences as the neighbour search.
            let lo = sorted.partition_point(|&s| s < c && c - s >= e);
            let hi = sorted.partition_point(|&s| s <= c || s - c < e);
            // the point itself lies inside its own window whenever e > 0
            hi.saturating_sub(lo).saturating_sub(1)
        })
        .collect()
}
