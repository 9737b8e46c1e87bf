//! Fourth-order gammatone filterbank (all-pole approximation), implemented by
//! complex demodulation: the input is shifted down by each centre frequency
//! and passed through four cascaded one-pole low-pass sections, whose output
//! magnitude is the analytic envelope of the band-pass response.

use std::f64::consts::PI;

use super::{ChannelAxis, FeatureMatrix, FrontendConfig, FrontendKind};
use crate::error::{Error, Result};
use crate::signal::AudioSignal;

const ORDER: usize = 4;
/// Glasberg & Moore ERB-rate constants.
const EAR_Q: f64 = 9.264_491_981_582_191;
const MIN_BW: f64 = 24.7;
/// Bandwidth scaling of the fourth-order gammatone relative to the ERB.
const BW_FACTOR: f64 = 1.019;

/// ERB-rate (number of ERBs below `f`).
pub fn erb_rate(f: f64) -> f64 {
    EAR_Q * (1.0 + f / (EAR_Q * MIN_BW)).ln()
}

fn erb_rate_inv(e: f64) -> f64 {
    ((e / EAR_Q).exp() - 1.0) * EAR_Q * MIN_BW
}

fn erb_bandwidth(f: f64) -> f64 {
    MIN_BW + f / EAR_Q
}

/// `n` centre frequencies equally spaced on the ERB-rate scale from `f_min`
/// to `f_max` inclusive.
pub fn erb_center_frequencies(f_min: f64, f_max: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![f_min];
    }
    let (lo, hi) = (erb_rate(f_min), erb_rate(f_max));
    (0..n)
        .map(|j| erb_rate_inv(lo + (hi - lo) * j as f64 / (n - 1) as f64))
        .collect()
}

/// Gammatone envelopes: RMS of the analytic filter output over frames of
/// `frame_len` samples taken every `frame_hop` samples. The frame average is
/// the envelope low-pass (first null at the frame rate).
pub fn gammatone_envelopes(signal: &AudioSignal, cfg: &FrontendConfig) -> Result<FeatureMatrix> {
    if cfg.kind != FrontendKind::Gammatone {
        return Err(Error::InvalidArgument("gammatone_envelopes needs a gammatone config".into()));
    }
    cfg.validate()?;
    if signal.sample_rate() != cfg.sample_rate {
        return Err(Error::InvalidArgument(format!(
            "signal at {} Hz, front-end expects {} Hz",
            signal.sample_rate(),
            cfg.sample_rate
        )));
    }
    let x = signal.samples();
    if x.len() < cfg.frame_len {
        return Err(Error::SignalTooShort {
            needed: cfg.frame_len,
            got: x.len(),
            unit: "samples",
        });
    }
    let fs = cfg.sample_rate as f64;
    let freqs = erb_center_frequencies(cfg.f_min, cfg.f_max, cfg.n_channels);
    let block_power = filter_block_power(x, fs, &freqs, cfg.frame_hop);

    let blocks_per_frame = cfg.frame_len / cfg.frame_hop;
    let n_blocks = x.len() / cfg.frame_hop;
    let n_frames = (x.len() - cfg.frame_len) / cfg.frame_hop + 1;
    let norm = 1.0 / cfg.frame_len as f64;
    let mut values = Vec::with_capacity(cfg.n_channels * n_frames);
    for row in block_power.chunks_exact(n_blocks) {
        for t in 0..n_frames {
            let acc: f64 = row[t..t + blocks_per_frame].iter().sum();
            values.push((acc * norm).sqrt());
        }
    }
    FeatureMatrix::new(values, cfg.n_channels, cfg.frame_rate(), ChannelAxis::Frequency(freqs))
}

/// Summed squared analytic envelope per channel over consecutive blocks of
/// `block` samples (trailing partial block dropped). Channel-major output.
///
/// All channels advance in lockstep over the samples so the inner loop runs
/// over contiguous per-channel state.
fn filter_block_power(x: &[f64], fs: f64, freqs: &[f64], block: usize) -> Vec<f64> {
    let nch = freqs.len();
    let mut pole = vec![0.0; nch];
    let mut gain = vec![0.0; nch];
    let mut rot_re = vec![0.0; nch];
    let mut rot_im = vec![0.0; nch];
    for (c, &fc) in freqs.iter().enumerate() {
        let a = (-2.0 * PI * BW_FACTOR * erb_bandwidth(fc) / fs).exp();
        pole[c] = a;
        gain[c] = 1.0 - a;
        let w = 2.0 * PI * fc / fs;
        rot_re[c] = w.cos();
        rot_im[c] = -w.sin();
    }
    let mut ph_re = vec![1.0; nch];
    let mut ph_im = vec![0.0; nch];
    let mut st_re = vec![[0.0f64; ORDER]; nch];
    let mut st_im = vec![[0.0f64; ORDER]; nch];
    let mut acc = vec![0.0; nch];

    let n_blocks = x.len() / block;
    let mut out = vec![0.0; nch * n_blocks];
    for b in 0..n_blocks {
        for &s in &x[b * block..(b + 1) * block] {
            for c in 0..nch {
                let (a, g) = (pole[c], gain[c]);
                let mut re = s * ph_re[c];
                let mut im = s * ph_im[c];
                let sr = &mut st_re[c];
                let si = &mut st_im[c];
                for k in 0..ORDER {
                    sr[k] = a * sr[k] + g * re;
                    si[k] = a * si[k] + g * im;
                    re = sr[k];
                    im = si[k];
                }
                acc[c] += re * re + im * im;
                let pr = ph_re[c] * rot_re[c] - ph_im[c] * rot_im[c];
                ph_im[c] = ph_re[c] * rot_im[c] + ph_im[c] * rot_re[c];
                ph_re[c] = pr;
            }
        }
        for c in 0..nch {
            // analytic envelope = 2 |baseband|
            out[c * n_blocks + b] = 4.0 * acc[c];
            acc[c] = 0.0;
            let m = (ph_re[c] * ph_re[c] + ph_im[c] * ph_im[c]).sqrt();
            ph_re[c] /= m;
            ph_im[c] /= m;
        }
    }
    out
}
