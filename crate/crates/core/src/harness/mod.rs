//! Listening-test evaluation: score every condition of a dataset, map scores
//! to intelligibility, and summarise performance across datasets.

mod aggregate;
mod bench;
mod demo;
mod report;

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::metrics::{Metric, MetricConfig};
use crate::signal::{align, concat_condition, resample, AudioSignal, Condition, DatasetManifest};
use crate::stats::{fit_logistic, kendall_tau, pearson, FitStatus, MappingFit};

pub use aggregate::{aggregate, AggregateConfig, EvalReport, Means, MetricSummary};
pub use bench::{benchmark, BenchRow};
pub use demo::{write_demo_dataset, DemoDataset};
pub use report::{normalise_scores, write_report, ReportFiles};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalOptions {
    pub metrics: MetricConfig,
    /// Forces alignment on or off for every dataset; `None` follows each
    /// manifest's own flag.
    pub align: Option<bool>,
    /// Largest shift searched when aligning, in seconds.
    pub max_lag_seconds: f64,
    pub exec: Exec,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            metrics: MetricConfig::default(),
            align: None,
            max_lag_seconds: 1.0,
            exec: Exec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionDiagnostics {
    pub frames_used: usize,
    pub wall_time: f64,
    /// Samples the degraded stimulus was shifted by, when aligned.
    pub lag: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub condition_id: String,
    pub d: f64,
    pub p: f64,
    #[serde(default)]
    pub tags: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetResult {
    pub dataset: String,
    pub metric: String,
    /// Kendall's tau between raw scores and intelligibility, floored at 0.
    pub tau: f64,
    /// Correlation between mapped scores and intelligibility, floored at 0.
    pub rho: f64,
    pub raw_tau: f64,
    pub raw_rho: f64,
    pub fit: MappingFit,
    pub scatter: Vec<ScatterPoint>,
    pub seen: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<ConditionDiagnostics>,
}

impl DatasetResult {
    /// Builds the result from already-computed scores.
    pub fn from_scores(dataset: &str, metric: &str, seen: bool, scatter: Vec<ScatterPoint>) -> Result<Self> {
        if scatter.len() < 3 {
            return Err(Error::TooFewSamples { n: scatter.len(), k: 2 });
        }
        let d: Vec<f64> = scatter.iter().map(|s| s.d).collect();
        let p: Vec<f64> = scatter.iter().map(|s| s.p).collect();
        let fit = fit_logistic(&d, &p)?;
        let (raw_tau, raw_rho) = performance(&d, &p, &fit)?;
        Ok(Self {
            dataset: dataset.to_owned(),
            metric: metric.to_owned(),
            tau: raw_tau.max(0.0),
            rho: raw_rho.max(0.0),
            raw_tau,
            raw_rho,
            fit,
            scatter,
            seen,
            diagnostics: Vec::new(),
        })
    }

    pub fn degenerate(&self) -> bool {
        self.fit.status == FitStatus::ConstantInput
    }
}

/// Unclamped (tau, rho) for fixed mapping parameters.
pub(crate) fn performance(d: &[f64], p: &[f64], fit: &MappingFit) -> Result<(f64, f64)> {
    if fit.status == FitStatus::ConstantInput {
        return Ok((0.0, 0.0));
    }
    let tau = kendall_tau(d, p)?;
    let mapped: Vec<f64> = d.iter().map(|&v| fit.eval(v)).collect();
    Ok((tau, pearson(&mapped, p)?))
}

/// Brings a stimulus pair to `rate` and equal length: either by aligning the
/// degraded signal to the clean one (searching up to `max_lag_seconds`),
/// returning the lag in samples, or by truncating both to the shorter.
pub fn prepare_pair(
    clean: AudioSignal,
    degraded: AudioSignal,
    rate: u32,
    max_lag_seconds: Option<f64>,
) -> Result<(AudioSignal, AudioSignal, Option<i64>)> {
    let clean = resample(&clean, rate)?;
    let degraded = resample(&degraded, rate)?;
    match max_lag_seconds {
        Some(secs) => {
            let max_lag = (secs * rate as f64).round() as usize;
            let (deg, lag) = align(&clean, &degraded, max_lag)?;
            Ok((clean, deg, Some(lag)))
        }
        None => {
            let n = clean.len().min(degraded.len());
            Ok((clean.with_len(n), degraded.with_len(n), None))
        }
    }
}

/// Scores one condition on its concatenated stimuli.
pub fn evaluate_condition(
    metric: Metric,
    cond: &Condition,
    align_stimuli: bool,
    opts: &EvalOptions,
) -> Result<(f64, ConditionDiagnostics)> {
    let run = || -> Result<_> {
        let rate = opts.metrics.sample_rate(metric);
        let clean = concat_condition(&cond.clean_files, rate)?;
        let degraded = concat_condition(&cond.degraded_files, rate)?;
        let max_lag = align_stimuli.then_some(opts.max_lag_seconds);
        let (clean, degraded, lag) = prepare_pair(clean, degraded, rate, max_lag)?;
        let score = metric.compute(&clean, &degraded, &opts.metrics)?;
        Ok((
            score.value,
            ConditionDiagnostics {
                frames_used: score.frames_used,
                wall_time: score.wall_time,
                lag,
            },
        ))
    };
    run().map_err(|e| e.in_condition(&cond.id))
}

pub fn evaluate_dataset(metric: Metric, manifest: &DatasetManifest, opts: &EvalOptions) -> Result<DatasetResult> {
    let n = manifest.conditions.len();
    if n < 3 {
        return Err(Error::TooFewSamples { n, k: 2 });
    }
    let align_stimuli = opts.align.unwrap_or(manifest.align);
    let scored = opts
        .exec
        .map(n, |i| evaluate_condition(metric, &manifest.conditions[i], align_stimuli, opts));
    let completed = scored.iter().filter(|r| r.is_ok()).count();
    let mut scatter = Vec::with_capacity(n);
    let mut diagnostics = Vec::with_capacity(n);
    for (cond, r) in manifest.conditions.iter().zip(scored) {
        let (d, diag) = r.map_err(|e| Error::Dataset {
            name: manifest.name.clone(),
            completed,
            total: n,
            source: Box::new(e),
        })?;
        scatter.push(ScatterPoint {
            condition_id: cond.id.clone(),
            d,
            p: cond.intelligibility,
            tags: cond.tags.clone(),
        });
        diagnostics.push(diag);
    }
    let mut result = DatasetResult::from_scores(&manifest.name, metric.name(), manifest.seen_by(metric.name()), scatter)?;
    result.diagnostics = diagnostics;
    Ok(result)
}

#[derive(Debug, Deserialize)]
struct ScoreRow {
    condition_id: String,
    d: f64,
}

/// Pairs externally computed scores (CSV with `condition_id,d`) with a
/// manifest's intelligibility values, so metrics implemented elsewhere go
/// through the same evaluation.
pub fn import_scores(manifest: &DatasetManifest, metric: &str, csv_path: impl AsRef<Path>) -> Result<DatasetResult> {
    let path = csv_path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::from(e).at_path(path))?;
    let mut scores = std::collections::HashMap::new();
    for row in reader.deserialize() {
        let row: ScoreRow = row.map_err(|e| Error::from(e).at_path(path))?;
        if scores.insert(row.condition_id.clone(), row.d).is_some() {
            return Err(Error::DuplicateConditionId(row.condition_id).at_path(path));
        }
    }
    let scatter = manifest
        .conditions
        .iter()
        .map(|c| {
            let d = scores.remove(&c.id).ok_or_else(|| {
                Error::Schema {
                    path: c.id.clone(),
                    message: "no score for condition".into(),
                }
                .at_path(path)
            })?;
            Ok(ScatterPoint {
                condition_id: c.id.clone(),
                d,
                p: c.intelligibility,
                tags: c.tags.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(extra) = scores.keys().min() {
        return Err(Error::Schema {
            path: extra.clone(),
            message: "score for a condition not in the manifest".into(),
        }
        .at_path(path));
    }
    DatasetResult::from_scores(&manifest.name, metric, manifest.seen_by(metric), scatter)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::write_wav;
    use crate::stats::logistic;
    use crate::synth::{mix_at_snr, speech_like, speech_shaped_noise};
    use std::collections::BTreeMap;
    use std::path::PathBuf;

    fn points(d: &[f64], p: &[f64]) -> Vec<ScatterPoint> {
        d.iter()
            .zip(p)
            .enumerate()
            .map(|(i, (&d, &p))| ScatterPoint {
                condition_id: format!("c{i}"),
                d,
                p,
                tags: BTreeSet::new(),
            })
            .collect()
    }

    #[test]
    fn exact_logistic_relation() {
        let d: Vec<f64> = (0..12).map(|i| 1.0 + 0.75 * i as f64).collect();
        let p: Vec<f64> = d.iter().map(|&v| 100.0 / (1.0 + (-2.0 * (v - 5.0)).exp())).collect();
        let r = DatasetResult::from_scores("syn", "x", false, points(&d, &p)).unwrap();
        assert!((r.rho - 1.0).abs() < 1e-6, "{}", r.rho);
        assert_eq!(r.tau, 1.0);
        assert!((r.fit.a + 2.0).abs() < 1e-3 && (r.fit.b - 5.0).abs() < 1e-3, "{:?}", r.fit);
    }

    #[test]
    fn anti_monotone_is_clamped() {
        let d: Vec<f64> = (0..10).map(f64::from).collect();
        let p: Vec<f64> = d.iter().map(|v| 90.0 - 8.0 * v).collect();
        let r = DatasetResult::from_scores("rev", "x", false, points(&d, &p)).unwrap();
        assert_eq!(r.raw_tau, -1.0);
        assert_eq!(r.tau, 0.0);
        assert_eq!(r.rho, 0.0);
        assert!(r.raw_rho <= 0.0);
    }

    #[test]
    fn constant_scores_are_degenerate() {
        let p = [10.0, 40.0, 70.0, 95.0];
        let r = DatasetResult::from_scores("flat", "x", false, points(&[0.3; 4], &p)).unwrap();
        assert!(r.degenerate());
        assert_eq!((r.tau, r.rho), (0.0, 0.0));
    }

    #[test]
    fn tau_unchanged_by_fitted_mapping() {
        let d = [0.1, 0.35, 0.2, 0.5, 0.62, 0.7, 0.55, 0.9];
        let p = [12.0, 30.0, 25.0, 48.0, 70.0, 66.0, 60.0, 93.0];
        let r = DatasetResult::from_scores("s", "x", false, points(&d, &p)).unwrap();
        assert!(r.fit.a != 0.0);
        let mapped: Vec<f64> = d.iter().map(|&v| r.fit.eval(v)).collect();
        assert_eq!(kendall_tau(&mapped, &p).unwrap(), r.raw_tau);
    }

    #[test]
    fn needs_three_conditions() {
        let r = DatasetResult::from_scores("s", "x", false, points(&[1.0, 2.0], &[10.0, 20.0]));
        assert!(matches!(r, Err(Error::TooFewSamples { n: 2, .. })));
    }

    fn tone(seconds: f64, seed: u64) -> AudioSignal {
        speech_like(seconds, 10_000, seed).unwrap()
    }

    fn condition(dir: &Path, id: &str, pairs: &[(&AudioSignal, &AudioSignal)], p: f64) -> Condition {
        let mut clean_files = Vec::new();
        let mut degraded_files = Vec::new();
        for (i, (c, d)) in pairs.iter().enumerate() {
            let (cp, dp) = (dir.join(format!("{id}_c{i}.wav")), dir.join(format!("{id}_d{i}.wav")));
            write_wav(&cp, c).unwrap();
            write_wav(&dp, d).unwrap();
            clean_files.push(cp);
            degraded_files.push(dp);
        }
        Condition {
            id: id.into(),
            intelligibility: p,
            clean_files,
            degraded_files,
            tags: BTreeSet::new(),
        }
    }

    #[test]
    fn identical_condition_hits_ceiling() {
        let dir = tempfile::tempdir().unwrap();
        let x = tone(3.0, 1);
        let cond = condition(dir.path(), "same", &[(&x, &x)], 100.0);
        let (d, diag) = evaluate_condition(Metric::Stoi, &cond, false, &EvalOptions::default()).unwrap();
        assert!((d - 1.0).abs() < 1e-9, "{d}");
        assert!(diag.frames_used > 0);
        assert_eq!(diag.lag, None);
    }

    #[test]
    fn concatenation_differs_from_mean_of_files() {
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (tone(4.0, 2), tone(2.0, 3));
        let noise_a = speech_shaped_noise(&a, 4).unwrap();
        let noise_b = speech_shaped_noise(&b, 5).unwrap();
        let (da, db) = (mix_at_snr(&a, &noise_a, 10.0).unwrap(), mix_at_snr(&b, &noise_b, -8.0).unwrap());
        let opts = EvalOptions::default();
        let joint = condition(dir.path(), "joint", &[(&a, &da), (&b, &db)], 50.0);
        let only_a = condition(dir.path(), "a", &[(&a, &da)], 50.0);
        let only_b = condition(dir.path(), "b", &[(&b, &db)], 50.0);
        let score = |c: &Condition| evaluate_condition(Metric::Stoi, c, false, &opts).unwrap().0;
        let (j, sa, sb) = (score(&joint), score(&only_a), score(&only_b));
        assert!(sa > sb);
        assert!(((sa + sb) / 2.0 - j).abs() > 1e-3, "joint {j} vs mean {}", (sa + sb) / 2.0);
    }

    #[test]
    fn unreadable_file_names_condition() {
        let cond = Condition {
            id: "missing_cond".into(),
            intelligibility: 10.0,
            clean_files: vec![PathBuf::from("/nonexistent/a.wav")],
            degraded_files: vec![PathBuf::from("/nonexistent/b.wav")],
            tags: BTreeSet::new(),
        };
        let err = evaluate_condition(Metric::Stoi, &cond, false, &EvalOptions::default()).unwrap_err();
        assert!(err.to_string().contains("missing_cond"), "{err}");
        assert!(err.is_input_error());
    }

    #[test]
    fn alignment_recovers_delay() {
        let dir = tempfile::tempdir().unwrap();
        let x = tone(3.0, 6);
        let mut delayed = vec![0.0; 250];
        delayed.extend_from_slice(x.samples());
        let y = AudioSignal::new(delayed, x.sample_rate()).unwrap();
        let cond = condition(dir.path(), "late", &[(&x, &y)], 90.0);
        let opts = EvalOptions::default();
        let (d_aligned, diag) = evaluate_condition(Metric::Stoi, &cond, true, &opts).unwrap();
        assert_eq!(diag.lag, Some(-250));
        assert!((d_aligned - 1.0).abs() < 1e-6, "{d_aligned}");
        let (d_raw, _) = evaluate_condition(Metric::Stoi, &cond, false, &opts).unwrap();
        assert!(d_raw < d_aligned);
    }

    fn sweep_manifest(dir: &Path, snrs: &[f64]) -> DatasetManifest {
        let x = tone(3.0, 7);
        let conditions = snrs
            .iter()
            .enumerate()
            .map(|(i, &snr)| {
                let noise = speech_shaped_noise(&x, 100 + i as u64).unwrap();
                let y = mix_at_snr(&x, &noise, snr).unwrap();
                condition(dir, &format!("snr{i}"), &[(&x, &y)], logistic(-0.3, -4.0, snr))
            })
            .collect();
        DatasetManifest {
            name: "sweep".into(),
            seen_by: BTreeMap::from([("stoi".into(), true)]),
            align: false,
            conditions,
        }
    }

    #[test]
    fn dataset_from_files() {
        let dir = tempfile::tempdir().unwrap();
        let m = sweep_manifest(dir.path(), &[-15.0, -8.0, -2.0, 5.0]);
        let r = evaluate_dataset(Metric::Stoi, &m, &EvalOptions::default()).unwrap();
        assert_eq!(r.scatter.len(), 4);
        assert_eq!(r.diagnostics.len(), 4);
        assert!(r.seen);
        assert_eq!(r.tau, 1.0);
        assert!(r.rho > 0.9);
        assert!((0.0..=1.0).contains(&r.rho));

        let seq = EvalOptions {
            exec: Exec::Sequential,
            ..EvalOptions::default()
        };
        let r2 = evaluate_dataset(Metric::Stoi, &m, &seq).unwrap();
        assert_eq!(r.scatter, r2.scatter);
        assert_eq!(r.fit, r2.fit);

        let mut removed = m.clone();
        let held = removed.conditions.remove(1);
        assert_eq!(evaluate_dataset(Metric::Stoi, &removed, &seq).unwrap().scatter.len(), 3);
        removed.conditions.insert(1, held);
        let r3 = evaluate_dataset(Metric::Stoi, &removed, &seq).unwrap();
        assert_eq!(r3.scatter, r2.scatter);
        assert_eq!((r3.tau, r3.rho, r3.fit), (r2.tau, r2.rho, r2.fit));
    }

    #[test]
    fn failing_condition_aborts_dataset() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = sweep_manifest(dir.path(), &[-10.0, 0.0, 10.0]);
        m.conditions[2].degraded_files[0] = dir.path().join("gone.wav");
        let err = evaluate_dataset(Metric::Stoi, &m, &EvalOptions::default()).unwrap_err();
        match &err {
            Error::Dataset { completed, total, .. } => assert_eq!((*completed, *total), (2, 3)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(err.to_string().contains("snr2"));
    }

    #[test]
    fn too_few_conditions() {
        let dir = tempfile::tempdir().unwrap();
        let m = sweep_manifest(dir.path(), &[0.0, 5.0]);
        assert!(evaluate_dataset(Metric::Stoi, &m, &EvalOptions::default()).is_err());
    }

    #[test]
    fn imported_scores() {
        let dir = tempfile::tempdir().unwrap();
        let m = sweep_manifest(dir.path(), &[-10.0, -5.0, 0.0, 5.0]);
        let csv_path = dir.path().join("haspi.csv");
        std::fs::write(&csv_path, "condition_id,d\nsnr3,0.9\nsnr0,0.1\nsnr1,0.3\nsnr2,0.6\n").unwrap();
        let r = import_scores(&m, "haspi", &csv_path).unwrap();
        let ds: Vec<f64> = r.scatter.iter().map(|s| s.d).collect();
        assert_eq!(ds, [0.1, 0.3, 0.6, 0.9]);
        assert_eq!(r.tau, 1.0);
        assert!(!r.seen);

        std::fs::write(&csv_path, "condition_id,d\nsnr3,0.9\nsnr0,0.1\n").unwrap();
        assert!(import_scores(&m, "haspi", &csv_path).is_err());
    }
}
