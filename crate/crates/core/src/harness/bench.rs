use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{Metric, MetricConfig};
use crate::synth::{mix_at_snr, speech_like, speech_shaped_noise};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub metric: String,
    /// Median wall time over the timed repeats.
    pub seconds: f64,
    pub seconds_per_20s: f64,
    /// `seconds / seconds(siib-gauss)`, when siib-gauss was benchmarked.
    pub ratio_to_siib_gauss: Option<f64>,
    pub repeats: usize,
}

/// Times each metric on a seeded speech-like stimulus in speech-shaped noise
/// at 0 dB SNR. Every metric gets one untimed warm-up run.
pub fn benchmark(
    metrics: &[Metric],
    stimulus_seconds: f64,
    repeats: usize,
    cfg: &MetricConfig,
    seed: u64,
) -> Result<Vec<BenchRow>> {
    if !(stimulus_seconds.is_finite() && stimulus_seconds > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "stimulus length must be positive, got {stimulus_seconds} s"
        )));
    }
    if repeats < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 repeats, got {repeats}")));
    }
    let clean = speech_like(stimulus_seconds, 16_000, seed)?;
    let noise = speech_shaped_noise(&clean, seed.wrapping_add(1))?;
    let degraded = mix_at_snr(&clean, &noise, 0.0)?;

    let mut rows = Vec::with_capacity(metrics.len());
    for &m in metrics {
        m.compute(&clean, &degraded, cfg)?;
        let mut times = (0..repeats)
            .map(|_| Ok(m.compute(&clean, &degraded, cfg)?.wall_time))
            .collect::<Result<Vec<f64>>>()?;
        times.sort_by(f64::total_cmp);
        let seconds = median(&times);
        rows.push(BenchRow {
            metric: m.name().to_owned(),
            seconds,
            seconds_per_20s: seconds * 20.0 / stimulus_seconds,
            ratio_to_siib_gauss: None,
            repeats,
        });
    }
    if let Some(base) = rows.iter().find(|r| r.metric == Metric::SiibGauss.name()).map(|r| r.seconds) {
        for r in &mut rows {
            r.ratio_to_siib_gauss = Some(r.seconds / base);
        }
    }
    Ok(rows)
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}
