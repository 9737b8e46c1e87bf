use std::f64::consts::PI;

use rustfft::{num_complex::Complex, FftPlanner};

use super::{ChannelAxis, FeatureMatrix, FrontendConfig, FrontendKind};
use crate::error::{Error, Result};
use crate::signal::AudioSignal;

/// Centre frequencies and FFT-bin ranges `[lo, hi)` of the one-third-octave
/// bands `f_min * 2^(k/3)`. Bin edges snap to the bin nearest each band edge,
/// so adjacent bands tile the spectrum without overlap.
pub fn third_octave_bands(sample_rate: u32, fft_len: usize, f_min: f64, n_bands: usize) -> Vec<(f64, usize, usize)> {
    let n_bins = fft_len / 2 + 1;
    let bin_hz = sample_rate as f64 / fft_len as f64;
    let nearest = |f: f64| ((f / bin_hz).round() as usize).min(n_bins - 1);
    (0..n_bands)
        .map(|k| {
            let centre = f_min * 2f64.powf(k as f64 / 3.0);
            let lo = nearest(centre * 2f64.powf(-1.0 / 6.0));
            let hi = nearest(centre * 2f64.powf(1.0 / 6.0));
            (centre, lo, hi)
        })
        .collect()
}

/// Hann window without the zero end points.
pub(crate) fn hann(len: usize) -> Vec<f64> {
    (0..len)
        .map(|n| 0.5 - 0.5 * (2.0 * PI * (n + 1) as f64 / (len + 1) as f64).cos())
        .collect()
}

/// Short-time one-third-octave band envelopes: square root of the summed
/// power of the FFT bins in each band, per Hann-windowed frame.
pub fn stft_band_energies(signal: &AudioSignal, cfg: &FrontendConfig) -> Result<FeatureMatrix> {
    if cfg.kind != FrontendKind::ThirdOctave {
        return Err(Error::InvalidArgument("stft_band_energies needs a third-octave config".into()));
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
    let n_frames = (x.len() - cfg.frame_len) / cfg.frame_hop + 1;
    let bands = third_octave_bands(cfg.sample_rate, cfg.fft_len, cfg.f_min, cfg.n_channels);
    let window = hann(cfg.frame_len);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(cfg.fft_len);

    let mut values = vec![0.0; cfg.n_channels * n_frames];
    let mut buf = vec![Complex::default(); cfg.fft_len];
    let mut scratch = vec![Complex::default(); fft.get_inplace_scratch_len()];
    for t in 0..n_frames {
        let start = t * cfg.frame_hop;
        buf.fill(Complex::default());
        for (b, (s, w)) in buf.iter_mut().zip(x[start..start + cfg.frame_len].iter().zip(&window)) {
            b.re = s * w;
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for (j, &(_, lo, hi)) in bands.iter().enumerate() {
            let power: f64 = buf[lo..hi].iter().map(|c| c.norm_sqr()).sum();
            values[j * n_frames + t] = power.sqrt();
        }
    }
    let freqs = bands.iter().map(|b| b.0).collect();
    FeatureMatrix::new(values, cfg.n_channels, cfg.frame_rate(), ChannelAxis::Frequency(freqs))
}
