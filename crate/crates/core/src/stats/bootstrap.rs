use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::exec::Exec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub coverage: f64,
    pub seed: u64,
    pub exec: Exec,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            replicates: 5000,
            coverage: 0.95,
            seed: 0,
            exec: Exec::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    /// Every replicate produced the same value; the interval has zero width.
    pub degenerate: bool,
}

/// BCa interval for a scalar statistic of several groups, resampling with
/// replacement within each group.
pub fn bca_bootstrap<T, F>(groups: &[Vec<T>], statistic: F, cfg: &BootstrapConfig) -> Result<Interval>
where
    T: Clone + Sync,
    F: Fn(&[Vec<T>]) -> f64 + Sync,
{
    Ok(bca_bootstrap_multi(groups, |g| vec![statistic(g)], cfg)?[0])
}

/// BCa intervals for several statistics computed from the same replicates.
/// `statistic` must return a vector of the same length on every call.
///
/// Replicate `b` draws from ChaCha stream `b` of `cfg.seed`, so the result does
/// not depend on the execution policy. The acceleration comes from a
/// leave-one-out jackknife over every element of every group.
pub fn bca_bootstrap_multi<T, F>(groups: &[Vec<T>], statistic: F, cfg: &BootstrapConfig) -> Result<Vec<Interval>>
where
    T: Clone + Sync,
    F: Fn(&[Vec<T>]) -> Vec<f64> + Sync,
{
    if cfg.replicates < 1000 {
        return Err(Error::InvalidArgument(format!(
            "at least 1000 bootstrap replicates are required, got {}",
            cfg.replicates
        )));
    }
    if !(cfg.coverage > 0.0 && cfg.coverage < 1.0) {
        return Err(Error::InvalidArgument(format!("coverage {} outside (0, 1)", cfg.coverage)));
    }
    if groups.is_empty() || groups.iter().any(|g| g.is_empty()) {
        return Err(Error::InvalidArgument("bootstrap needs non-empty groups".into()));
    }

    let observed = statistic(groups);
    let n_stats = observed.len();

    let replicates: Vec<Vec<f64>> = cfg.exec.map(cfg.replicates, |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(b as u64);
        let sample: Vec<Vec<T>> = groups
            .iter()
            .map(|g| (0..g.len()).map(|_| g[rng.random_range(0..g.len())].clone()).collect())
            .collect();
        statistic(&sample)
    });

    let slots: Vec<(usize, usize)> = groups
        .iter()
        .enumerate()
        .flat_map(|(gi, g)| (0..g.len()).map(move |i| (gi, i)))
        .collect();
    let jackknife: Vec<Vec<f64>> = cfg.exec.map(slots.len(), |s| {
        let (gi, i) = slots[s];
        let mut held: Vec<Vec<T>> = groups.to_vec();
        held[gi].remove(i);
        if held[gi].is_empty() {
            // a singleton group cannot be left out; it contributes nothing
            observed.clone()
        } else {
            statistic(&held)
        }
    });

    let normal = Normal::standard();
    let alpha = (1.0 - cfg.coverage) / 2.0;
    let (z_lo, z_hi) = (normal.inverse_cdf(alpha), normal.inverse_cdf(1.0 - alpha));

    let mut out = Vec::with_capacity(n_stats);
    for s in 0..n_stats {
        let theta = observed[s];
        let mut reps: Vec<f64> = replicates.iter().map(|r| r[s]).collect();
        if reps.iter().any(|v| !v.is_finite()) {
            return Err(Error::DegenerateInput("bootstrap statistic is not finite".into()));
        }
        reps.sort_by(f64::total_cmp);
        if reps[0] == reps[reps.len() - 1] {
            out.push(Interval {
                lo: reps[0],
                hi: reps[0],
                degenerate: true,
            });
            continue;
        }
        let b = reps.len() as f64;
        let below = reps.partition_point(|&v| v < theta) as f64;
        let ties = reps.partition_point(|&v| v <= theta) as f64 - below;
        let frac = ((below + 0.5 * ties) / b).clamp(0.5 / b, 1.0 - 0.5 / b);
        let z0 = normal.inverse_cdf(frac);

        let jk: Vec<f64> = jackknife.iter().map(|r| r[s]).collect();
        let mean = jk.iter().sum::<f64>() / jk.len() as f64;
        let (mut num, mut den) = (0.0, 0.0);
        for v in &jk {
            let d = mean - v;
            num += d * d * d;
            den += d * d;
        }
        let accel = if den > 0.0 { num / (6.0 * den.powf(1.5)) } else { 0.0 };

        let adjust = |z: f64| {
            let w = z0 + z;
            let q = 1.0 - accel * w;
            if q <= 0.0 {
                if w > 0.0 { 1.0 } else { 0.0 }
            } else {
                normal.cdf(z0 + w / q)
            }
        };
        out.push(Interval {
            lo: quantile(&reps, adjust(z_lo)),
            hi: quantile(&reps, adjust(z_hi)),
            degenerate: false,
        });
    }
    Ok(out)
}

/// Linearly interpolated quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    if i + 1 >= sorted.len() {
        return sorted[sorted.len() - 1];
    }
    sorted[i] + (pos - i as f64) * (sorted[i + 1] - sorted[i])
}
