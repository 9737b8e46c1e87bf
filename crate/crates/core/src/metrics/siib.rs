use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::pipeline::{envelopes, log_pair};
use super::{Diagnostics, Metric, MetricScore};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::frontend::{stack_frames_sliding, FeatureMatrix, FrontendConfig};
use crate::signal::AudioSignal;
use crate::stats::{klt_apply, klt_fit, knn_mutual_information_seeded, pearson, KltBasis};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SiibVariant {
    Knn,
    Gauss,
    NoKlt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SiibConfig {
    /// Consecutive log-spectra stacked into one feature vector.
    #[serde(alias = "K")]
    pub stack: usize,
    /// Production-noise correlation coefficient.
    pub r: f64,
    /// Used by [`SiibConfig::compute`]; the named metric functions ignore it.
    pub variant: SiibVariant,
    pub frontend: FrontendConfig,
    pub knn_k: usize,
    pub seed: u64,
    pub exec: Exec,
}

impl Default for SiibConfig {
    fn default() -> Self {
        Self {
            stack: 15,
            r: 0.75,
            variant: SiibVariant::Knn,
            frontend: FrontendConfig::gammatone(),
            knn_k: 4,
            seed: 0,
            exec: Exec::default(),
        }
    }
}

impl SiibConfig {
    /// Per-channel capacity of the production-noise channel, in bits.
    pub fn capacity(&self) -> f64 {
        -0.5 * (1.0 - self.r * self.r).log2()
    }

    pub fn compute(&self, clean: &AudioSignal, degraded: &AudioSignal) -> Result<MetricScore> {
        Ok(run(clean, degraded, self, self.variant)?.0)
    }

    fn validate(&self) -> Result<()> {
        if !(self.r > 0.0 && self.r < 1.0) {
            return Err(Error::InvalidArgument(format!("r = {} outside (0, 1)", self.r)));
        }
        if self.stack == 0 {
            return Err(Error::InvalidArgument("stack depth must be at least 1".into()));
        }
        Ok(())
    }
}

pub fn siib(clean: &AudioSignal, degraded: &AudioSignal, cfg: &SiibConfig) -> Result<MetricScore> {
    Ok(run(clean, degraded, cfg, SiibVariant::Knn)?.0)
}

pub fn siib_no_klt(clean: &AudioSignal, degraded: &AudioSignal, cfg: &SiibConfig) -> Result<MetricScore> {
    Ok(run(clean, degraded, cfg, SiibVariant::NoKlt)?.0)
}

pub fn siib_gauss(clean: &AudioSignal, degraded: &AudioSignal, cfg: &SiibConfig) -> Result<MetricScore> {
    Ok(run(clean, degraded, cfg, SiibVariant::Gauss)?.0)
}

/// Information rate of parallel Gaussian channels with correlations `rho`
/// behind production noise `r`: `-(F / 2K) sum log2(1 - r^2 rho^2)`.
pub fn gaussian_rate(rho: &[f64], r: f64, frame_rate: f64, stack: usize) -> f64 {
    let sum: f64 = rho.iter().map(|p| (1.0 - r * r * p * p).log2()).sum();
    -frame_rate / (2.0 * stack as f64) * sum
}

/// Eigenvalues below this fraction of the largest are treated as zero.
const RANK_TOLERANCE: f64 = 1e-12;

/// Passes an estimated channel information `nats` (clamped at 0) through
/// production noise `r`: the information is converted to the correlation of
/// an equivalent Gaussian channel, `rho^2 = 1 - exp(-2 I)`, which is then
/// attenuated by `r`. The result lies in `[0, capacity)` and equals the
/// Gaussian rate for Gaussian channels.
pub fn production_limited(nats: f64, r: f64) -> f64 {
    let rho2 = -(-2.0 * nats.max(0.0)).exp_m1();
    -0.5 * (1.0 - r * r * rho2).log2()
}

/// Log-compressed auditory features of both signals after silence removal,
/// stacked over `cfg.stack` consecutive frames (one column per frame
/// position). These are the vectors the KLT decorrelates.
pub fn stacked_features(
    clean: &AudioSignal,
    degraded: &AudioSignal,
    cfg: &SiibConfig,
) -> Result<(FeatureMatrix, FeatureMatrix)> {
    cfg.validate()?;
    let (c, d) = envelopes(clean, degraded, &cfg.frontend)?;
    let frames = c.n_frames();
    if frames < 2 * cfg.stack {
        return Err(Error::SignalTooShort {
            needed: 2 * cfg.stack,
            got: frames,
            unit: "frames",
        });
    }
    let (c, d) = log_pair(&c, &d, 0.0, cfg.seed)?;
    Ok((stack_frames_sliding(&c, cfg.stack)?, stack_frames_sliding(&d, cfg.stack)?))
}

pub(super) fn run(
    clean: &AudioSignal,
    degraded: &AudioSignal,
    cfg: &SiibConfig,
    variant: SiibVariant,
) -> Result<(MetricScore, Diagnostics)> {
    let start = Instant::now();
    let (sc, sd) = stacked_features(clean, degraded, cfg)?;
    let frames = sc.n_frames() + cfg.stack - 1;
    let basis = match variant {
        SiibVariant::NoKlt => {
            let n = sc.n_frames() as f64;
            KltBasis::identity(sc.rows().map(|r| r.iter().sum::<f64>() / n).collect())
        }
        _ => klt_fit(&sc)?,
    };
    let (ec, ed) = (klt_apply(&basis, &sc)?, klt_apply(&basis, &sd)?);

    // nominal frame rate of the front-end (independent of silence removal)
    let f = cfg.frontend.frame_rate();
    let k = cfg.stack as f64;
    let mut diag = Diagnostics {
        n_channels: cfg.frontend.n_channels,
        frame_rate: f,
        frames_used: frames,
        ..Diagnostics::default()
    };
    let dims = ec.n_channels();
    // Eigen-directions outside the numerical rank of the clean covariance
    // (fewer frames than dimensions) carry no clean variance.
    let tol = RANK_TOLERANCE * basis.eigvals.first().copied().unwrap_or(0.0);
    let active = |j: usize| variant == SiibVariant::NoKlt || basis.eigvals[j] > tol;
    let value = match variant {
        SiibVariant::Gauss => {
            let rho = cfg
                .exec
                .try_map(dims, |j| if active(j) { pearson(ec.row(j), ed.row(j)) } else { Ok(0.0) })?;
            let value = gaussian_rate(&rho, cfg.r, f, cfg.stack);
            let sq: f64 = rho.iter().map(|p| p * p).sum();
            diag.linearised = Some(f / (2.0 * k * std::f64::consts::LN_2) * cfg.r * cfg.r * sq);
            diag.eigen_correlations = Some(rho);
            value
        }
        SiibVariant::Knn | SiibVariant::NoKlt => {
            let info = cfg.exec.try_map(dims, |j| {
                if !active(j) {
                    return Ok(0.0);
                }
                let nats = knn_mutual_information_seeded(ec.row(j), ed.row(j), cfg.knn_k, cfg.seed)?;
                Ok::<_, Error>(production_limited(nats, cfg.r))
            })?;
            let value = f / k * info.iter().sum::<f64>();
            diag.channel_information = Some(info);
            value
        }
    };
    let metric = match variant {
        SiibVariant::Knn => Metric::Siib,
        SiibVariant::Gauss => Metric::SiibGauss,
        SiibVariant::NoKlt => Metric::SiibNoKlt,
    };
    let score = MetricScore {
        value,
        unit: metric.unit(),
        metric_name: metric.name().to_owned(),
        frames_used: frames,
        wall_time: start.elapsed().as_secs_f64(),
    };
    Ok((score, diag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{mix_at_snr, speech_like, white_noise};

    #[test]
    fn gaussian_rate_examples() {
        assert_eq!(gaussian_rate(&[0.0; 10], 0.75, 62.5, 15), 0.0);
        let v = gaussian_rate(&[1.0], 0.75, 80.0, 15);
        assert!((v - 80.0 / 30.0 * -(0.4375f64).log2()).abs() < 1e-12);
        assert!((v - 3.180).abs() < 1e-3);
    }

    #[test]
    fn production_noise_mapping() {
        let r = 0.75;
        assert_eq!(production_limited(-0.3, r), 0.0);
        assert_eq!(production_limited(0.0, r), 0.0);
        // Gaussian channel with correlation 0.6 carries -ln(1 - 0.36) / 2 nats
        let nats = -0.5 * (1.0f64 - 0.36).ln();
        assert!((production_limited(nats, r) - gaussian_rate(&[0.6], r, 1.0, 1)).abs() < 1e-12);
        let cap = SiibConfig::default().capacity();
        assert!((production_limited(40.0, r) - cap).abs() < 1e-12);
        assert!(production_limited(3.0, r) < production_limited(3.1, r));
    }

    #[test]
    fn capacity_closed_form() {
        let c = SiibConfig::default().capacity();
        assert!((c - 0.5 * 1.1926).abs() < 1e-4);
    }

    #[test]
    fn self_identity_saturates() {
        let x = speech_like(20.0, 16_000, 8).unwrap();
        let cfg = SiibConfig::default();
        let ceiling = 62.5 / 15.0 * 480.0 * cfg.capacity();
        assert!((ceiling - 1192.6).abs() < 0.1);
        for f in [siib, siib_no_klt, siib_gauss] {
            let v = f(&x, &x, &cfg).unwrap().value;
            assert!((v - ceiling).abs() < 1e-3 * ceiling, "{v}");
        }
    }

    #[test]
    fn short_stimulus_ceiling_is_rank_limited() {
        // T frames give T - K + 1 stacked vectors whose centred covariance
        // has rank T - K, below the 480 dimensions here.
        let x = speech_like(5.0, 16_000, 8).unwrap();
        let cfg = SiibConfig::default();
        for f in [siib, siib_gauss] {
            let s = f(&x, &x, &cfg).unwrap();
            let rank = (s.frames_used - cfg.stack) as f64;
            assert!(rank < 480.0);
            let ceiling = 62.5 / 15.0 * rank * cfg.capacity();
            assert!((s.value - ceiling).abs() < 1e-3 * ceiling, "{} vs {ceiling}", s.value);
        }
    }

    #[test]
    fn rank_deficient_scores_are_scale_invariant() {
        let x = speech_like(5.0, 16_000, 4).unwrap();
        let y = mix_at_snr(&x, &white_noise(x.len(), 16_000, 2).unwrap(), 5.0).unwrap();
        let cfg = SiibConfig::default();
        for f in [siib, siib_gauss] {
            let base = f(&x, &y, &cfg).unwrap().value;
            let scaled = f(&x.scaled(0.01), &y.scaled(30.0), &cfg).unwrap().value;
            assert!((scaled - base).abs() < 1e-9 * base, "{base} vs {scaled}");
        }
    }

    #[test]
    fn frames_used_agree_across_variants() {
        let x = speech_like(6.0, 16_000, 3).unwrap();
        let y = mix_at_snr(&x, &white_noise(x.len(), 16_000, 1).unwrap(), 0.0).unwrap();
        let cfg = SiibConfig::default();
        let a = siib(&x, &y, &cfg).unwrap();
        let b = siib_no_klt(&x, &y, &cfg).unwrap();
        let c = siib_gauss(&x, &y, &cfg).unwrap();
        assert_eq!(a.frames_used, b.frames_used);
        assert_eq!(a.frames_used, c.frames_used);
        assert!(c.value >= 0.0);
    }

    #[test]
    fn too_short_for_two_stacks() {
        let x = speech_like(0.3, 16_000, 3).unwrap();
        assert!(matches!(siib(&x, &x, &SiibConfig::default()), Err(Error::SignalTooShort { .. })));
    }
}
