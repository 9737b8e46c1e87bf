use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::pipeline::{envelopes, log_pair};
use super::{Diagnostics, Metric, MetricScore};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::frontend::{FeatureMatrix, FrontendConfig};
use crate::signal::AudioSignal;
use crate::stats::{klt_apply, klt_fit, knn_mutual_information_seeded, pearson};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StoiVariant {
    Classic,
    Extended,
    Klt,
    KltGamma,
    Miknn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StoiConfig {
    /// Used by [`StoiConfig::compute`]; the named metric functions ignore it.
    pub variant: StoiVariant,
    /// Frames per short-time segment.
    pub segment_frames: usize,
    /// Lower bound on the per-frame signal-to-distortion ratio (classic only).
    pub sdr_clip_db: f64,
    pub frontend: FrontendConfig,
    /// Neighbour count for the MIKNN estimator.
    pub knn_k: usize,
    /// Log-envelope dither relative to the envelope maximum (KLT variants).
    pub log_dither: f64,
    pub seed: u64,
    pub exec: Exec,
}

impl Default for StoiConfig {
    fn default() -> Self {
        Self {
            variant: StoiVariant::Classic,
            segment_frames: 30,
            sdr_clip_db: -15.0,
            frontend: FrontendConfig::third_octave(),
            knn_k: 4,
            log_dither: 1e-6,
            seed: 0,
            exec: Exec::default(),
        }
    }
}

impl StoiConfig {
    /// KLT variant on the gammatone front-end with forward masking.
    pub fn klt_gamma() -> Self {
        Self {
            variant: StoiVariant::KltGamma,
            frontend: FrontendConfig::gammatone(),
            ..Self::default()
        }
    }

    pub fn compute(&self, clean: &AudioSignal, degraded: &AudioSignal) -> Result<MetricScore> {
        Ok(run(clean, degraded, self, self.variant)?.0)
    }
}

pub fn stoi(clean: &AudioSignal, degraded: &AudioSignal, cfg: &StoiConfig) -> Result<MetricScore> {
    Ok(run(clean, degraded, cfg, StoiVariant::Classic)?.0)
}

pub fn estoi(clean: &AudioSignal, degraded: &AudioSignal, cfg: &StoiConfig) -> Result<MetricScore> {
    Ok(run(clean, degraded, cfg, StoiVariant::Extended)?.0)
}

pub fn miknn(clean: &AudioSignal, degraded: &AudioSignal, cfg: &StoiConfig) -> Result<MetricScore> {
    Ok(run(clean, degraded, cfg, StoiVariant::Miknn)?.0)
}

pub fn stoi_klt(clean: &AudioSignal, degraded: &AudioSignal, cfg: &StoiConfig) -> Result<MetricScore> {
    Ok(run(clean, degraded, cfg, StoiVariant::Klt)?.0)
}

/// Same computation as [`stoi_klt`]; `cfg` is expected to carry a gammatone
/// front-end such as [`StoiConfig::klt_gamma`].
pub fn stoi_klt_gamma(clean: &AudioSignal, degraded: &AudioSignal, cfg: &StoiConfig) -> Result<MetricScore> {
    Ok(run(clean, degraded, cfg, StoiVariant::KltGamma)?.0)
}

pub(super) fn run(
    clean: &AudioSignal,
    degraded: &AudioSignal,
    cfg: &StoiConfig,
    variant: StoiVariant,
) -> Result<(MetricScore, Diagnostics)> {
    let start = Instant::now();
    if cfg.segment_frames < 2 {
        return Err(Error::InvalidArgument("segment_frames must be at least 2".into()));
    }
    let (c, d) = envelopes(clean, degraded, &cfg.frontend)?;
    let mut diag = Diagnostics {
        n_channels: c.n_channels(),
        frame_rate: c.frame_rate(),
        frames_used: c.n_frames(),
        ..Diagnostics::default()
    };
    let value = match variant {
        StoiVariant::Classic => segment_mean(&c, &d, cfg.segment_frames, |x, y| clipped_correlation(x, y, cfg.sdr_clip_db))?,
        StoiVariant::Extended => extended(&c, &d, cfg.segment_frames)?,
        StoiVariant::Klt | StoiVariant::KltGamma => {
            let (lc, ld) = log_pair(&c, &d, cfg.log_dither, cfg.seed)?;
            let basis = klt_fit(&lc)?;
            let (ec, ed) = (klt_apply(&basis, &lc)?, klt_apply(&basis, &ld)?);
            segment_mean(&ec, &ed, cfg.segment_frames, |x, y| pearson(x, y).unwrap_or(0.0))?
        }
        StoiVariant::Miknn => {
            let mi = cfg
                .exec
                .try_map(c.n_channels(), |j| knn_mutual_information_seeded(c.row(j), d.row(j), cfg.knn_k, cfg.seed))?;
            let clamped: Vec<f64> = mi.iter().map(|v| v.max(0.0)).collect();
            let mean = clamped.iter().sum::<f64>() / clamped.len() as f64;
            diag.channel_information = Some(clamped);
            mean
        }
    };
    let metric = match variant {
        StoiVariant::Classic => Metric::Stoi,
        StoiVariant::Extended => Metric::Estoi,
        StoiVariant::Klt => Metric::StoiKlt,
        StoiVariant::KltGamma => Metric::StoiKltGamma,
        StoiVariant::Miknn => Metric::Miknn,
    };
    let score = MetricScore {
        value,
        unit: metric.unit(),
        metric_name: metric.name().to_owned(),
        frames_used: diag.frames_used,
        wall_time: start.elapsed().as_secs_f64(),
    };
    Ok((score, diag))
}

fn check_segments(frames: usize, n: usize) -> Result<usize> {
    if frames < n {
        return Err(Error::SignalTooShort {
            needed: n,
            got: frames,
            unit: "frames",
        });
    }
    Ok(frames - n + 1)
}

/// Mean of `score` over every channel of every sliding segment.
fn segment_mean(c: &FeatureMatrix, d: &FeatureMatrix, n: usize, score: impl Fn(&[f64], &[f64]) -> f64) -> Result<f64> {
    let segments = check_segments(c.n_frames(), n)?;
    let mut total = 0.0;
    for j in 0..c.n_channels() {
        let (x, y) = (c.row(j), d.row(j));
        for m in 0..segments {
            total += score(&x[m..m + n], &y[m..m + n]);
        }
    }
    Ok(total / (segments * c.n_channels()) as f64)
}

/// Scales `y` to the energy of `x`, caps it at `x (1 + 10^(-clip/20))`, and
/// correlates the result with `x`.
fn clipped_correlation(x: &[f64], y: &[f64], sdr_clip_db: f64) -> f64 {
    let ex: f64 = x.iter().map(|v| v * v).sum();
    let ey: f64 = y.iter().map(|v| v * v).sum();
    if ey == 0.0 {
        return 0.0;
    }
    let alpha = (ex / ey).sqrt();
    let cap = 1.0 + 10f64.powf(-sdr_clip_db / 20.0);
    let clipped: Vec<f64> = x.iter().zip(y).map(|(a, b)| (alpha * b).min(a * cap)).collect();
    pearson(x, &clipped).unwrap_or(0.0)
}

/// Row- then column-normalised segment correlation.
fn extended(c: &FeatureMatrix, d: &FeatureMatrix, n: usize) -> Result<f64> {
    let segments = check_segments(c.n_frames(), n)?;
    let j = c.n_channels();
    let mut total = 0.0;
    let mut xs = vec![0.0; j * n];
    let mut ys = vec![0.0; j * n];
    for m in 0..segments {
        for b in 0..j {
            xs[b * n..(b + 1) * n].copy_from_slice(&c.row(b)[m..m + n]);
            ys[b * n..(b + 1) * n].copy_from_slice(&d.row(b)[m..m + n]);
        }
        normalise_segment(&mut xs, j, n);
        normalise_segment(&mut ys, j, n);
        total += xs.iter().zip(&ys).map(|(a, b)| a * b).sum::<f64>() / n as f64;
    }
    Ok(total / segments as f64)
}

/// Zero-mean, unit-norm rows (bands) and then columns (frames) of a
/// band-major `j x n` block. All-constant vectors become zero.
fn normalise_segment(v: &mut [f64], j: usize, n: usize) {
    for b in 0..j {
        normalise_strided(v, b * n, 1, n);
    }
    for t in 0..n {
        normalise_strided(v, t, n, j);
    }
}

fn normalise_strided(v: &mut [f64], start: usize, stride: usize, len: usize) {
    let idx = |i: usize| start + i * stride;
    let mean = (0..len).map(|i| v[idx(i)]).sum::<f64>() / len as f64;
    let mut norm = 0.0f64;
    for i in 0..len {
        v[idx(i)] -= mean;
        norm += v[idx(i)] * v[idx(i)];
    }
    let scale = if norm > 0.0 { 1.0 / norm.sqrt() } else { 0.0 };
    for i in 0..len {
        v[idx(i)] *= scale;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::ChannelAxis;
    use crate::synth::{speech_like, speech_shaped_noise, white_noise};

    fn fm(rows: Vec<Vec<f64>>) -> FeatureMatrix {
        FeatureMatrix::from_rows(rows, 78.125, ChannelAxis::Eigen).unwrap()
    }

    fn pseudo_rows(j: usize, t: usize, seed: u64) -> Vec<Vec<f64>> {
        (0..j)
            .map(|b| (0..t).map(|i| 1.5 + ((i as f64 + 1.3) * (b as f64 + seed as f64 + 0.7)).sin()).collect())
            .collect()
    }

    #[test]
    fn extended_removes_affine_envelope_maps() {
        let c = fm(pseudo_rows(4, 40, 1));
        let d = fm(pseudo_rows(4, 40, 1).into_iter().map(|r| r.iter().map(|v| 2.5 * v + 0.7).collect()).collect());
        assert!((extended(&c, &d, 30).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn clipping_caps_loud_degraded_frames() {
        let x = [1.0, 1.0, 1.0, 0.0];
        let y = [0.0, 0.0, 0.0, 10.0];
        // y is scaled to the energy of x and then capped at x (1 + 10^0.75)
        let r = clipped_correlation(&x, &y, -15.0);
        let alpha = (3.0f64 / 100.0).sqrt();
        let capped = [0.0, 0.0, 0.0, (alpha * 10.0f64).min(0.0)];
        assert!((r - pearson(&x, &capped).unwrap()).abs() < 1e-15);
        assert_eq!(clipped_correlation(&x, &[0.0; 4], -15.0), 0.0);
    }

    #[test]
    fn segment_count_and_short_input() {
        let c = fm(pseudo_rows(2, 31, 0));
        assert!((segment_mean(&c, &c, 30, |_, _| 1.0).unwrap() - 1.0).abs() < 1e-15);
        let short = fm(pseudo_rows(2, 29, 0));
        assert!(matches!(segment_mean(&short, &short, 30, |_, _| 1.0), Err(Error::SignalTooShort { .. })));
    }

    #[test]
    fn self_identity_and_scaling() {
        let x = speech_like(3.0, 16_000, 12).unwrap();
        let cfg = StoiConfig::default();
        for f in [stoi, estoi, stoi_klt] {
            assert!((f(&x, &x, &cfg).unwrap().value - 1.0).abs() < 1e-9);
            assert!((f(&x, &x.scaled(0.3), &cfg).unwrap().value - 1.0).abs() < 1e-9);
        }
        let g = StoiConfig::klt_gamma();
        assert!((stoi_klt_gamma(&x, &x, &g).unwrap().value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn klt_gamma_uses_the_auditory_front_end() {
        let x = speech_like(3.0, 16_000, 2).unwrap();
        let (_, diag) = run(&x, &x, &StoiConfig::klt_gamma(), StoiVariant::KltGamma).unwrap();
        assert_eq!(diag.n_channels, 32);
        assert_eq!(diag.frame_rate, 62.5);
    }

    #[test]
    fn independent_noise_scores_low() {
        // stationary clean carrier: with a modulated carrier the clipping
        // alone correlates the noise envelope with the clean one
        let x = speech_shaped_noise(&speech_like(10.0, 16_000, 4).unwrap(), 1).unwrap();
        let n = white_noise(x.len(), 16_000, 5).unwrap();
        let cfg = StoiConfig::default();
        assert!(stoi(&x, &n, &cfg).unwrap().value < 0.25);
        assert!(estoi(&x, &n, &cfg).unwrap().value.abs() < 0.1);
        assert!(stoi_klt(&x, &n, &cfg).unwrap().value.abs() < 0.1);
        assert!(miknn(&x, &n, &cfg).unwrap().value < 0.1);
    }

    #[test]
    fn length_mismatch_is_reported() {
        let x = speech_like(1.0, 16_000, 1).unwrap();
        let y = x.clone().with_len(15_000);
        assert!(matches!(stoi(&x, &y, &StoiConfig::default()), Err(Error::LengthMismatch(..))));
    }
}
