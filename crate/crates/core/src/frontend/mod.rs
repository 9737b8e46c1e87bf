//! Auditory front-ends turning waveforms into channel x frame feature
//! matrices, plus the envelope-domain post-processing stages (silence
//! removal, forward masking, log compression, frame stacking).

mod gammatone;
mod matrix;
mod postprocess;
mod silence;
mod third_octave;

pub use gammatone::{erb_center_frequencies, erb_rate, gammatone_envelopes};
pub use matrix::{ChannelAxis, FeatureMatrix};
pub use postprocess::{forward_masking, log_compress, stack_frames, stack_frames_sliding, unstack_frames};
pub use silence::{remove_silent_blocks, remove_silent_frames, silence_mask};
pub use third_octave::{stft_band_energies, third_octave_bands};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrontendKind {
    ThirdOctave,
    Gammatone,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FrontendConfig {
    pub kind: FrontendKind,
    pub sample_rate: u32,
    pub n_channels: usize,
    pub f_min: f64,
    pub f_max: f64,
    pub frame_len: usize,
    pub frame_hop: usize,
    /// FFT size for the third-octave analysis (zero padding beyond `frame_len`).
    pub fft_len: usize,
    pub dyn_range_db: f64,
    pub forward_masking: bool,
    pub masking_decay_db: f64,
    pub log_compression: bool,
}

impl Default for FrontendConfig {
    fn default() -> Self {
        Self::third_octave()
    }
}

impl FrontendConfig {
    /// 15 one-third-octave bands from 150 Hz at 10 kHz, 256-sample Hann
    /// frames with 50 % overlap.
    pub fn third_octave() -> Self {
        Self {
            kind: FrontendKind::ThirdOctave,
            sample_rate: 10_000,
            n_channels: 15,
            f_min: 150.0,
            f_max: 5_000.0,
            frame_len: 256,
            frame_hop: 128,
            fft_len: 512,
            dyn_range_db: 40.0,
            forward_masking: false,
            masking_decay_db: 6.0,
            log_compression: false,
        }
    }

    /// 32 ERB-spaced gammatone channels over 100-7500 Hz at 16 kHz, one
    /// frame per 16 ms.
    pub fn gammatone() -> Self {
        Self {
            kind: FrontendKind::Gammatone,
            sample_rate: 16_000,
            n_channels: 32,
            f_min: 100.0,
            f_max: 7_500.0,
            frame_len: 256,
            frame_hop: 256,
            fft_len: 256,
            dyn_range_db: 40.0,
            forward_masking: true,
            masking_decay_db: 6.0,
            log_compression: true,
        }
    }

    pub fn frame_rate(&self) -> f64 {
        self.sample_rate as f64 / self.frame_hop as f64
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.sample_rate == 0 || self.n_channels == 0 || self.frame_len == 0 || self.frame_hop == 0 {
            return bad("sample rate, channel count and framing must be positive".into());
        }
        if !(self.f_min > 0.0 && self.f_min < self.f_max && self.f_max <= self.sample_rate as f64 / 2.0) {
            return bad(format!(
                "need 0 < f_min < f_max <= fs/2, got {} / {} at {} Hz",
                self.f_min, self.f_max, self.sample_rate
            ));
        }
        if self.frame_hop > self.frame_len {
            return bad("frame_hop must not exceed frame_len".into());
        }
        match self.kind {
            FrontendKind::ThirdOctave => {
                if self.fft_len < self.frame_len {
                    return bad("fft_len must be at least frame_len".into());
                }
                let top = self.f_min * 2f64.powf((self.n_channels as f64 - 0.5) / 3.0);
                if top > self.sample_rate as f64 / 2.0 {
                    return bad(format!("top third-octave band edge {top:.0} Hz exceeds Nyquist"));
                }
            }
            FrontendKind::Gammatone => {
                if !self.frame_len.is_multiple_of(self.frame_hop) {
                    return bad("gammatone frame_len must be a multiple of frame_hop".into());
                }
            }
        }
        if self.dyn_range_db <= 0.0 {
            return bad("dyn_range_db must be positive".into());
        }
        Ok(())
    }

    /// Runs the configured analysis (band energies or gammatone envelopes).
    pub fn analyse(&self, signal: &crate::signal::AudioSignal) -> Result<FeatureMatrix> {
        match self.kind {
            FrontendKind::ThirdOctave => stft_band_energies(signal, self),
            FrontendKind::Gammatone => gammatone_envelopes(signal, self),
        }
    }
}
