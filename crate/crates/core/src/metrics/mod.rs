//! The intelligibility metrics. Each one maps a clean and a degraded signal
//! of equal length to a scalar score.

mod pipeline;
mod siib;
mod stoi;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::signal::AudioSignal;

pub use siib::{
    gaussian_rate, production_limited, siib, siib_gauss, siib_no_klt, stacked_features, SiibConfig, SiibVariant,
};
pub use stoi::{estoi, miknn, stoi, stoi_klt, stoi_klt_gamma, StoiConfig, StoiVariant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "stoi")]
    Stoi,
    #[serde(rename = "estoi")]
    Estoi,
    #[serde(rename = "miknn")]
    Miknn,
    #[serde(rename = "siib")]
    Siib,
    #[serde(rename = "siib-noklt")]
    SiibNoKlt,
    #[serde(rename = "siib-gauss")]
    SiibGauss,
    #[serde(rename = "stoi-klt")]
    StoiKlt,
    #[serde(rename = "stoi-klt-gamma")]
    StoiKltGamma,
}

impl Metric {
    pub const ALL: [Metric; 8] = [
        Metric::Stoi,
        Metric::Estoi,
        Metric::Miknn,
        Metric::Siib,
        Metric::SiibNoKlt,
        Metric::SiibGauss,
        Metric::StoiKlt,
        Metric::StoiKltGamma,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Stoi => "stoi",
            Metric::Estoi => "estoi",
            Metric::Miknn => "miknn",
            Metric::Siib => "siib",
            Metric::SiibNoKlt => "siib-noklt",
            Metric::SiibGauss => "siib-gauss",
            Metric::StoiKlt => "stoi-klt",
            Metric::StoiKltGamma => "stoi-klt-gamma",
        }
    }

    pub fn unit(self) -> Unit {
        match self {
            Metric::Siib | Metric::SiibNoKlt | Metric::SiibGauss => Unit::BitsPerSecond,
            _ => Unit::Dimensionless,
        }
    }

    /// Parses a comma-separated list; `all` expands to every metric.
    pub fn parse_list(s: &str) -> Result<Vec<Metric>> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            if part.eq_ignore_ascii_case("all") {
                out.extend(Metric::ALL);
            } else {
                out.push(part.parse()?);
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        out.retain(|m| seen.insert(*m));
        if out.is_empty() {
            return Err(Error::InvalidArgument("no metrics given".into()));
        }
        Ok(out)
    }

    pub fn compute(self, clean: &AudioSignal, degraded: &AudioSignal, cfg: &MetricConfig) -> Result<MetricScore> {
        Ok(self.compute_with_diagnostics(clean, degraded, cfg)?.0)
    }

    pub fn compute_with_diagnostics(
        self,
        clean: &AudioSignal,
        degraded: &AudioSignal,
        cfg: &MetricConfig,
    ) -> Result<(MetricScore, Diagnostics)> {
        match self {
            Metric::Stoi => stoi::run(clean, degraded, &cfg.stoi, StoiVariant::Classic),
            Metric::Estoi => stoi::run(clean, degraded, &cfg.stoi, StoiVariant::Extended),
            Metric::Miknn => stoi::run(clean, degraded, &cfg.stoi, StoiVariant::Miknn),
            Metric::StoiKlt => stoi::run(clean, degraded, &cfg.stoi, StoiVariant::Klt),
            Metric::StoiKltGamma => stoi::run(clean, degraded, &cfg.stoi_gamma, StoiVariant::KltGamma),
            Metric::Siib => siib::run(clean, degraded, &cfg.siib, SiibVariant::Knn),
            Metric::SiibNoKlt => siib::run(clean, degraded, &cfg.siib, SiibVariant::NoKlt),
            Metric::SiibGauss => siib::run(clean, degraded, &cfg.siib, SiibVariant::Gauss),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == norm)
            .ok_or_else(|| {
                let names: Vec<_> = Metric::ALL.iter().map(|m| m.name()).collect();
                Error::InvalidArgument(format!("unknown metric `{s}` (expected one of {})", names.join(", ")))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    Dimensionless,
    BitsPerSecond,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricScore {
    pub value: f64,
    pub unit: Unit,
    pub metric_name: String,
    pub frames_used: usize,
    /// Seconds.
    pub wall_time: f64,
}

/// Intermediate quantities exposed for inspection and testing.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Channels of the auditory representation (before stacking).
    pub n_channels: usize,
    pub frame_rate: f64,
    pub frames_used: usize,
    /// Per-channel information: bits after production noise for SIIB, clamped
    /// nats for MIKNN.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub channel_information: Option<Vec<f64>>,
    /// Clean/degraded eigenchannel correlations (Gaussian SIIB).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigen_correlations: Option<Vec<f64>>,
    /// Small-correlation linearisation of the Gaussian rate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub linearised: Option<f64>,
}

/// Settings for every metric; [`Metric::compute`] picks the relevant part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricConfig {
    pub stoi: StoiConfig,
    pub stoi_gamma: StoiConfig,
    pub siib: SiibConfig,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            stoi: StoiConfig::default(),
            stoi_gamma: StoiConfig::klt_gamma(),
            siib: SiibConfig::default(),
        }
    }
}

impl MetricConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.stoi.seed = seed;
        self.stoi_gamma.seed = seed;
        self.siib.seed = seed;
        self
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.stoi.exec = exec;
        self.stoi_gamma.exec = exec;
        self.siib.exec = exec;
        self
    }

    /// Rate the metric's front-end runs at; inputs are resampled to it.
    pub fn sample_rate(&self, metric: Metric) -> u32 {
        match metric {
            Metric::Stoi | Metric::Estoi | Metric::Miknn | Metric::StoiKlt => self.stoi.frontend.sample_rate,
            Metric::StoiKltGamma => self.stoi_gamma.frontend.sample_rate,
            Metric::Siib | Metric::SiibNoKlt | Metric::SiibGauss => self.siib.frontend.sample_rate,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for m in Metric::ALL {
            assert_eq!(m.name().parse::<Metric>().unwrap(), m);
            let json = serde_json::to_string(&m).unwrap();
            assert_eq!(json, format!("\"{}\"", m.name()));
        }
        assert_eq!("SIIB_GAUSS".parse::<Metric>().unwrap(), Metric::SiibGauss);
        assert!("haspi".parse::<Metric>().is_err());
    }

    #[test]
    fn all_expands_to_eight() {
        assert_eq!(Metric::parse_list("all").unwrap().len(), 8);
        assert_eq!(Metric::parse_list("stoi, siib,stoi").unwrap(), [Metric::Stoi, Metric::Siib]);
        assert!(Metric::parse_list(" , ").is_err());
    }
}
