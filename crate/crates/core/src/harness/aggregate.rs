use serde::{Deserialize, Serialize};

use super::{performance, BenchRow, DatasetResult};
use crate::error::{Error, Result};
use crate::stats::{bca_bootstrap_multi, fit_logistic_from, BootstrapConfig, Interval, MappingFit};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AggregateConfig {
    pub bootstrap: BootstrapConfig,
    /// Refit the logistic mapping on every bootstrap replicate. When off,
    /// replicates reuse each dataset's original fit.
    pub refit: bool,
}

impl Default for AggregateConfig {
    fn default() -> Self {
        Self {
            bootstrap: BootstrapConfig::default(),
            refit: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Means {
    pub tau: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub metric: String,
    pub n_datasets: usize,
    pub mean_tau: f64,
    pub mean_rho: f64,
    pub ci_tau: Interval,
    pub ci_rho: Interval,
    /// Means over datasets the metric was developed on, if any.
    pub seen: Option<Means>,
    pub unseen: Option<Means>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_dataset: Vec<DatasetResult>,
    pub summaries: Vec<MetricSummary>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bench: Vec<BenchRow>,
}

/// Summarises per-dataset results for each metric (in order of first
/// appearance). Datasets are processed sorted by name, so the summary does
/// not depend on the order of `results`.
pub fn aggregate(results: &[DatasetResult], cfg: &AggregateConfig) -> Result<EvalReport> {
    let mut metrics: Vec<&str> = Vec::new();
    for r in results {
        if !metrics.contains(&r.metric.as_str()) {
            metrics.push(&r.metric);
        }
    }
    let summaries = metrics
        .into_iter()
        .map(|m| {
            let mut sets: Vec<&DatasetResult> = results.iter().filter(|r| r.metric == m).collect();
            sets.sort_by(|a, b| a.dataset.cmp(&b.dataset));
            if let Some(w) = sets.windows(2).find(|w| w[0].dataset == w[1].dataset) {
                return Err(Error::InvalidArgument(format!(
                    "dataset `{}` appears twice for metric `{m}`",
                    w[0].dataset
                )));
            }
            summarise(m, &sets, cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport {
        per_dataset: results.to_vec(),
        summaries,
        bench: Vec::new(),
    })
}

fn means<'a>(sets: impl Iterator<Item = &'a &'a DatasetResult>) -> Option<Means> {
    let (mut n, mut tau, mut rho) = (0usize, 0.0, 0.0);
    for r in sets {
        n += 1;
        tau += r.tau;
        rho += r.rho;
    }
    (n > 0).then(|| Means {
        tau: tau / n as f64,
        rho: rho / n as f64,
    })
}

fn summarise(metric: &str, sets: &[&DatasetResult], cfg: &AggregateConfig) -> Result<MetricSummary> {
    let all = means(sets.iter()).expect("at least one dataset per metric");
    let groups: Vec<Vec<(f64, f64)>> = sets
        .iter()
        .map(|r| r.scatter.iter().map(|s| (s.d, s.p)).collect())
        .collect();
    let fits: Vec<MappingFit> = sets.iter().map(|r| r.fit).collect();
    let stat = |gs: &[Vec<(f64, f64)>]| {
        let (mut tau, mut rho) = (0.0, 0.0);
        for (g, base) in gs.iter().zip(&fits) {
            let (t, r) = replicate_performance(g, base, cfg.refit);
            tau += t;
            rho += r;
        }
        let n = gs.len() as f64;
        vec![tau / n, rho / n]
    };
    let ci = bca_bootstrap_multi(&groups, stat, &cfg.bootstrap)?;
    Ok(MetricSummary {
        metric: metric.to_owned(),
        n_datasets: sets.len(),
        mean_tau: all.tau,
        mean_rho: all.rho,
        ci_tau: ci[0],
        ci_rho: ci[1],
        seen: means(sets.iter().filter(|r| r.seen)),
        unseen: means(sets.iter().filter(|r| !r.seen)),
    })
}

/// Clamped (tau, rho) of a resampled dataset.
fn replicate_performance(points: &[(f64, f64)], base: &MappingFit, refit: bool) -> (f64, f64) {
    let d: Vec<f64> = points.iter().map(|x| x.0).collect();
    let p: Vec<f64> = points.iter().map(|x| x.1).collect();
    let fit = if refit {
        fit_logistic_from(&d, &p, base).unwrap_or(*base)
    } else {
        *base
    };
    let (t, r) = performance(&d, &p, &fit).unwrap_or((0.0, 0.0));
    (t.max(0.0), r.max(0.0))
}
