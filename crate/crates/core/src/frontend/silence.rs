use super::third_octave::hann;
use super::FeatureMatrix;
use crate::error::{Error, Result};
use crate::signal::AudioSignal;

/// Indices of frames whose energy is within `dyn_range_db` of the loudest.
pub fn silence_mask(energies: &[f64], dyn_range_db: f64) -> Result<Vec<usize>> {
    let max = energies.iter().copied().fold(0.0, f64::max);
    if !(max > 0.0) {
        return Err(Error::AllSilent);
    }
    let threshold = max * 10f64.powf(-dyn_range_db / 10.0);
    Ok(energies
        .iter()
        .enumerate()
        .filter(|(_, &e)| e >= threshold)
        .map(|(i, _)| i)
        .collect())
}

/// Drops frames whose clean energy (sum of squared channel values) lies more
/// than `dyn_range_db` below the loudest clean frame, from both matrices.
/// Returns the surviving frame indices alongside.
pub fn remove_silent_frames(
    clean: &FeatureMatrix,
    degraded: &FeatureMatrix,
    dyn_range_db: f64,
) -> Result<(FeatureMatrix, FeatureMatrix, Vec<usize>)> {
    if clean.n_frames() != degraded.n_frames() || clean.n_channels() != degraded.n_channels() {
        return Err(Error::LengthMismatch(clean.n_frames(), degraded.n_frames()));
    }
    let energies: Vec<f64> = (0..clean.n_frames())
        .map(|t| clean.rows().map(|r| r[t] * r[t]).sum())
        .collect();
    let keep = silence_mask(&energies, dyn_range_db)?;
    Ok((clean.select_frames(&keep), degraded.select_frames(&keep), keep))
}

/// Waveform-domain silence removal: Hann-windowed blocks of `frame_len`
/// samples every `hop` samples are kept or dropped by clean block energy,
/// and the kept blocks of both signals are overlap-added back together.
pub fn remove_silent_blocks(
    clean: &AudioSignal,
    degraded: &AudioSignal,
    frame_len: usize,
    hop: usize,
    dyn_range_db: f64,
) -> Result<(AudioSignal, AudioSignal, Vec<usize>)> {
    if clean.len() != degraded.len() {
        return Err(Error::LengthMismatch(clean.len(), degraded.len()));
    }
    if clean.len() < frame_len {
        return Err(Error::SignalTooShort {
            needed: frame_len,
            got: clean.len(),
            unit: "samples",
        });
    }
    let w = hann(frame_len);
    let n_frames = (clean.len() - frame_len) / hop + 1;
    let x = clean.samples();
    let energies: Vec<f64> = (0..n_frames)
        .map(|t| {
            x[t * hop..t * hop + frame_len]
                .iter()
                .zip(&w)
                .map(|(s, wn)| (s * wn) * (s * wn))
                .sum()
        })
        .collect();
    let keep = silence_mask(&energies, dyn_range_db)?;
    let out_len = (keep.len() - 1) * hop + frame_len;
    let rebuild = |sig: &[f64]| {
        let mut out = vec![0.0; out_len];
        for (i, &t) in keep.iter().enumerate() {
            for (n, wn) in w.iter().enumerate() {
                out[i * hop + n] += sig[t * hop + n] * wn;
            }
        }
        out
    };
    let rate = clean.sample_rate();
    Ok((
        AudioSignal::new(rebuild(x), rate)?,
        AudioSignal::new(rebuild(degraded.samples()), rate)?,
        keep,
    ))
}
