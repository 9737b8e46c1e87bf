use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use super::{evaluate_condition, EvalOptions};
use crate::error::{Error, Result};
use crate::metrics::Metric;
use crate::signal::{write_wav, Condition, DatasetManifest};
use crate::stats::logistic;
use crate::synth::{mix_at_snr, speech_like, speech_shaped_noise};

pub const DEMO_SNRS: [f64; 8] = [-15.0, -10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0];

#[derive(Debug, Clone)]
pub struct DemoDataset {
    pub manifest: PathBuf,
    /// Same stimuli with intelligibility reversed (`100 - p`).
    pub reversed: PathBuf,
    /// siib-gauss score of each condition, in order.
    pub scores: Vec<f64>,
    pub intelligibility: Vec<f64>,
}

/// Writes a fully synthetic dataset: a speech-like tone stimulus mixed with
/// speech-shaped noise at eight SNRs. Intelligibility is generated from each
/// condition's siib-gauss score through a logistic mapping spanning roughly
/// 5% to 95%.
pub fn write_demo_dataset(dir: impl AsRef<Path>, seconds: f64, seed: u64, opts: &EvalOptions) -> Result<DemoDataset> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::from(e).at_path(dir))?;
    let clean = speech_like(seconds, 16_000, seed)?;
    write_wav(dir.join("clean.wav"), &clean)?;

    let mut conditions = Vec::with_capacity(DEMO_SNRS.len());
    for (i, &snr) in DEMO_SNRS.iter().enumerate() {
        let noise = speech_shaped_noise(&clean, seed.wrapping_add(1 + i as u64))?;
        let name = format!("ssn_{snr:+.0}dB.wav");
        write_wav(dir.join(&name), &mix_at_snr(&clean, &noise, snr)?)?;
        conditions.push(Condition {
            id: format!("ssn_{snr:+.0}dB"),
            intelligibility: 0.0,
            clean_files: vec![PathBuf::from("clean.wav")],
            degraded_files: vec![PathBuf::from(name)],
            tags: BTreeSet::from(["ssn".to_string()]),
        });
    }

    let scores = conditions
        .iter()
        .map(|c| {
            let mut resolved = c.clone();
            resolved.clean_files = vec![dir.join(&c.clean_files[0])];
            resolved.degraded_files = vec![dir.join(&c.degraded_files[0])];
            Ok(evaluate_condition(Metric::SiibGauss, &resolved, false, opts)?.0)
        })
        .collect::<Result<Vec<f64>>>()?;
    let lo = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (a, b) = (-6.0 / (hi - lo), 0.5 * (lo + hi));
    let intelligibility: Vec<f64> = scores.iter().map(|&d| logistic(a, b, d)).collect();

    let mut manifest = DatasetManifest {
        name: "synthetic-ssn".into(),
        seen_by: BTreeMap::new(),
        align: false,
        conditions,
    };
    for (c, &p) in manifest.conditions.iter_mut().zip(&intelligibility) {
        c.intelligibility = p;
    }
    let path = dir.join("demo.json");
    fs::write(&path, manifest.to_json()).map_err(|e| Error::from(e).at_path(&path))?;

    manifest.name = "synthetic-ssn-reversed".into();
    for c in &mut manifest.conditions {
        c.intelligibility = 100.0 - c.intelligibility;
    }
    let reversed = dir.join("demo_reversed.json");
    fs::write(&reversed, manifest.to_json()).map_err(|e| Error::from(e).at_path(&reversed))?;

    Ok(DemoDataset {
        manifest: path,
        reversed,
        scores,
        intelligibility,
    })
}
