//! Waveform handling: WAV ingestion, resampling, condition concatenation,
//! cross-correlation alignment and dataset manifests.

mod align;
mod manifest;
mod resample;
mod wav;

use std::path::Path;

pub use align::{align, cross_correlation_lag};
pub use manifest::{load_manifest, Condition, DatasetManifest};
pub use resample::resample;
pub use wav::{read_wav, read_wav_channel, write_wav};

use crate::error::{Error, Result};

/// Mono waveform with its sample rate. Samples are nominally in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct AudioSignal {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl AudioSignal {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidArgument("sample rate must be positive".into()));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidArgument("signal contains non-finite samples".into()));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn zeros(len: usize, sample_rate: u32) -> Self {
        Self {
            samples: vec![0.0; len],
            sample_rate: sample_rate.max(1),
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn scaled(&self, gain: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|s| s * gain).collect(),
            sample_rate: self.sample_rate,
        }
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s * s).sum()
    }

    /// Truncates or zero-pads to exactly `len` samples.
    pub fn with_len(mut self, len: usize) -> Self {
        self.samples.resize(len, 0.0);
        self
    }
}

/// Reads every file, resamples it to `target_rate` and concatenates the
/// results in list order.
pub fn concat_condition<P: AsRef<Path>>(files: &[P], target_rate: u32) -> Result<AudioSignal> {
    if files.is_empty() {
        return Err(Error::InvalidArgument("no files to concatenate".into()));
    }
    let mut samples = Vec::new();
    for path in files {
        let path = path.as_ref();
        let sig = read_wav(path)
            .and_then(|s| resample(&s, target_rate))
            .map_err(|e| e.at_path(path))?;
        samples.extend_from_slice(sig.samples());
    }
    AudioSignal::new(samples, target_rate)
}
