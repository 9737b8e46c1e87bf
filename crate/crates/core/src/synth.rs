//! Seeded synthetic stimuli: a speech-like harmonic signal, noise with the
//! same long-term spectrum, and SNR mixing.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{num_complex::Complex, FftPlanner};

use crate::error::{Error, Result};
use crate::signal::AudioSignal;

/// Spectral envelope gain of a vowel-like sound at `f` Hz.
fn formant_gain(f: f64, formants: &[(f64, f64)]) -> f64 {
    let tilt = 1.0 / (1.0 + f / 500.0);
    let peaks: f64 = formants
        .iter()
        .map(|&(fc, bw)| {
            let u = (f - fc) / bw;
            (-0.5 * u * u).exp()
        })
        .sum();
    tilt * (0.05 + peaks)
}

/// Sequence of voiced syllables with pauses and occasional fricative bursts.
/// Each syllable has its own pitch, formants, level and a raised-cosine
/// envelope, giving speech-like temporal modulation and a speech-like
/// long-term spectrum.
pub fn speech_like(seconds: f64, sample_rate: u32, seed: u64) -> Result<AudioSignal> {
    if !(seconds > 0.0) {
        return Err(Error::InvalidArgument("stimulus duration must be positive".into()));
    }
    let fs = sample_rate as f64;
    let len = (seconds * fs).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![0.0; len];
    let top = (0.45 * fs).min(5500.0);

    let mut pos = (rng.random_range(0.02..0.08) * fs) as usize;
    while pos < len {
        let dur = (rng.random_range(0.12..0.32) * fs) as usize;
        let end = (pos + dur).min(len);
        let n = end - pos;
        let f0 = rng.random_range(95.0..230.0);
        let formants = [
            (rng.random_range(300.0..850.0), 90.0),
            (rng.random_range(900.0..2300.0), 140.0),
            (rng.random_range(2400.0..3400.0), 220.0),
        ];
        let level = 10f64.powf(rng.random_range(-10.0..3.0) / 20.0);
        let env = |i: usize| {
            let t = i as f64 / n as f64;
            let attack = (t / 0.2).min(1.0);
            let release = ((1.0 - t) / 0.3).min(1.0);
            (0.5 - 0.5 * (PI * attack).cos()) * (0.5 - 0.5 * (PI * release).cos())
        };

        let mut h = 1;
        while h as f64 * f0 < top {
            let f = h as f64 * f0;
            let g = level * formant_gain(f, &formants);
            let w = 2.0 * PI * f / fs;
            let (step_re, step_im) = (w.cos(), w.sin());
            let phase: f64 = rng.random_range(0.0..2.0 * PI);
            let (mut re, mut im) = (phase.cos(), phase.sin());
            for (i, o) in out[pos..end].iter_mut().enumerate() {
                *o += g * env(i) * im;
                let r = re * step_re - im * step_im;
                im = re * step_im + im * step_re;
                re = r;
            }
            h += 1;
        }

        if rng.random_bool(0.35) {
            // short high-frequency noise burst (first-difference of white noise)
            let burst = ((rng.random_range(0.04..0.1) * fs) as usize).min(len - pos.min(len));
            let g = 0.15 * level;
            let mut prev = 0.0;
            for i in 0..burst {
                let v: f64 = StandardNormal.sample(&mut rng);
                let t = i as f64 / burst as f64;
                out[pos + i] += g * (v - prev) * (PI * t).sin();
                prev = v;
            }
        }

        let pause = (rng.random_range(0.03..0.18) * fs) as usize;
        pos = end + pause;
    }

    let peak = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        for v in &mut out {
            *v *= 0.5 / peak;
        }
    }
    AudioSignal::new(out, sample_rate)
}

/// Stationary noise with the magnitude spectrum of `template`: the
/// template's DFT with uniformly random phases.
pub fn speech_shaped_noise(template: &AudioSignal, seed: u64) -> Result<AudioSignal> {
    let n = template.len();
    if n == 0 {
        return Err(Error::EmptyAudio);
    }
    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<Complex<f64>> = template.samples().iter().map(|&s| Complex::new(s, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    buf[0] = Complex::new(0.0, 0.0);
    for k in 1..=(n - 1) / 2 {
        let phase: f64 = rng.random_range(0.0..2.0 * PI);
        let c = Complex::from_polar(buf[k].norm(), phase);
        buf[k] = c;
        buf[n - k] = c.conj();
    }
    if n.is_multiple_of(2) {
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        buf[n / 2] = Complex::new(sign * buf[n / 2].norm(), 0.0);
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    AudioSignal::new(buf.iter().map(|c| c.re * scale).collect(), template.sample_rate())
}

/// White Gaussian noise with unit variance.
pub fn white_noise(len: usize, sample_rate: u32, seed: u64) -> Result<AudioSignal> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    AudioSignal::new((0..len).map(|_| StandardNormal.sample(&mut rng)).collect(), sample_rate)
}

/// `clean + g * noise` with `g` chosen so the energy ratio is `snr_db`.
pub fn mix_at_snr(clean: &AudioSignal, noise: &AudioSignal, snr_db: f64) -> Result<AudioSignal> {
    if clean.len() != noise.len() {
        return Err(Error::LengthMismatch(clean.len(), noise.len()));
    }
    if clean.sample_rate() != noise.sample_rate() {
        return Err(Error::InvalidArgument("clean and noise sample rates differ".into()));
    }
    let (ec, en) = (clean.energy(), noise.energy());
    if en == 0.0 {
        return Err(Error::DegenerateInput("noise is silent".into()));
    }
    let g = (ec / en / 10f64.powf(snr_db / 10.0)).sqrt();
    AudioSignal::new(
        clean.samples().iter().zip(noise.samples()).map(|(c, n)| c + g * n).collect(),
        clean.sample_rate(),
    )
}
