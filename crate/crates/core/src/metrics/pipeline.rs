use crate::error::{Error, Result};
use crate::frontend::{
    forward_masking, gammatone_envelopes, log_compress, remove_silent_blocks, remove_silent_frames,
    stft_band_energies, FeatureMatrix, FrontendConfig, FrontendKind,
};
use crate::signal::{resample, AudioSignal};

/// Log floor relative to each matrix's maximum.
const LOG_FLOOR: f64 = 1e-12;

/// Resamples both signals to `rate` and checks that they line up.
pub(super) fn resample_pair(clean: &AudioSignal, degraded: &AudioSignal, rate: u32) -> Result<(AudioSignal, AudioSignal)> {
    if clean.sample_rate() == degraded.sample_rate() && clean.len() != degraded.len() {
        return Err(Error::LengthMismatch(clean.len(), degraded.len()));
    }
    let c = resample(clean, rate)?;
    let d = resample(degraded, rate)?;
    if c.len() != d.len() {
        return Err(Error::LengthMismatch(c.len(), d.len()));
    }
    Ok((c, d))
}

/// Envelopes of both signals with silent frames (judged on the clean
/// signal) removed, and forward masking if configured.
pub(super) fn envelopes(clean: &AudioSignal, degraded: &AudioSignal, fe: &FrontendConfig) -> Result<(FeatureMatrix, FeatureMatrix)> {
    fe.validate()?;
    let (c, d) = resample_pair(clean, degraded, fe.sample_rate)?;
    let (c, d) = match fe.kind {
        FrontendKind::ThirdOctave => {
            let (c, d, _) = remove_silent_blocks(&c, &d, fe.frame_len, fe.frame_hop, fe.dyn_range_db)?;
            (stft_band_energies(&c, fe)?, stft_band_energies(&d, fe)?)
        }
        FrontendKind::Gammatone => {
            let ce = gammatone_envelopes(&c, fe)?;
            let de = gammatone_envelopes(&d, fe)?;
            let (ce, de, _) = remove_silent_frames(&ce, &de, fe.dyn_range_db)?;
            (ce, de)
        }
    };
    if fe.forward_masking {
        Ok((forward_masking(&c, fe.masking_decay_db), forward_masking(&d, fe.masking_decay_db)))
    } else {
        Ok((c, d))
    }
}

/// Natural log with a floor (and optional dither) proportional to the
/// matrix maximum. Both matrices draw the same dither sequence.
pub(super) fn log_pair(
    clean: &FeatureMatrix,
    degraded: &FeatureMatrix,
    relative_dither: f64,
    seed: u64,
) -> Result<(FeatureMatrix, FeatureMatrix)> {
    let clean_max = clean.max_value();
    if !(clean_max > 0.0) {
        return Err(Error::AllSilent);
    }
    let one = |m: &FeatureMatrix| {
        // an all-zero degraded signal borrows the clean scale
        let max = Some(m.max_value()).filter(|v| *v > 0.0).unwrap_or(clean_max);
        log_compress(m, LOG_FLOOR * max, relative_dither * max, seed)
    };
    Ok((one(clean)?, one(degraded)?))
}
