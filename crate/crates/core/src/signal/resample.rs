use super::AudioSignal;
use crate::error::{Error, Result};

/// Zero crossings of the sinc kernel on each side of the centre tap.
const KERNEL_ZEROS: f64 = 16.0;
/// Passband edge as a fraction of the lower Nyquist frequency.
const CUTOFF: f64 = 0.95;
const KAISER_BETA: f64 = 8.6;
/// Upper bound on the number of precomputed polyphase coefficients.
const MAX_TABLE: usize = 1 << 22;

/// Band-limited rational resampling with a Kaiser-windowed sinc kernel.
///
/// The output has `round(len * target / source)` samples. Equal rates return
/// the input unchanged.
pub fn resample(signal: &AudioSignal, target_rate: u32) -> Result<AudioSignal> {
    if target_rate == 0 {
        return Err(Error::InvalidArgument("target rate must be positive".into()));
    }
    let source_rate = signal.sample_rate();
    if source_rate == target_rate {
        return Ok(signal.clone());
    }
    let g = gcd(source_rate as u64, target_rate as u64);
    let up = target_rate as u64 / g;
    let down = source_rate as u64 / g;
    let out_len = ((signal.len() as u128 * up as u128 + down as u128 / 2) / down as u128) as usize;

    let kernel = Kernel::new(up, down);
    let input = signal.samples();
    let mut out = Vec::with_capacity(out_len);
    let table = kernel.table();
    for m in 0..out_len as u64 {
        let pos = m * down;
        let base = (pos / up) as i64;
        let phase = (pos % up) as usize;
        let first = base - kernel.half as i64 + 1;
        let mut acc = 0.0;
        match &table {
            Some(t) => {
                let row = &t[phase * kernel.taps()..(phase + 1) * kernel.taps()];
                for (i, &c) in row.iter().enumerate() {
                    let idx = first + i as i64;
                    if idx >= 0 && (idx as usize) < input.len() {
                        acc += c * input[idx as usize];
                    }
                }
            }
            None => {
                let row = kernel.phase_coefficients(phase);
                for (i, c) in row.into_iter().enumerate() {
                    let idx = first + i as i64;
                    if idx >= 0 && (idx as usize) < input.len() {
                        acc += c * input[idx as usize];
                    }
                }
            }
        }
        out.push(acc);
    }
    AudioSignal::new(out, target_rate)
}

struct Kernel {
    up: u64,
    /// Normalised cutoff in cycles per input sample (times two).
    cutoff: f64,
    /// Taps on each side of the output instant.
    half: usize,
}

impl Kernel {
    fn new(up: u64, down: u64) -> Self {
        let cutoff = CUTOFF * (up as f64 / down as f64).min(1.0);
        let half = (KERNEL_ZEROS / cutoff).ceil() as usize;
        Self { up, cutoff, half }
    }

    fn taps(&self) -> usize {
        2 * self.half
    }

    fn table(&self) -> Option<Vec<f64>> {
        let size = self.up as usize * self.taps();
        (size <= MAX_TABLE).then(|| (0..self.up as usize).flat_map(|p| self.phase_coefficients(p)).collect())
    }

    /// Coefficients for input samples `base - half + 1 ..= base + half`,
    /// normalised to unit DC gain.
    fn phase_coefficients(&self, phase: usize) -> Vec<f64> {
        let frac = phase as f64 / self.up as f64;
        let mut c: Vec<f64> = (0..self.taps())
            .map(|i| {
                // distance from the output instant to tap i, in input samples
                let tau = frac + self.half as f64 - 1.0 - i as f64;
                let x = tau / (self.half as f64);
                if x.abs() >= 1.0 {
                    return 0.0;
                }
                self.cutoff * sinc(self.cutoff * tau) * kaiser(x)
            })
            .collect();
        let sum: f64 = c.iter().sum();
        c.iter_mut().for_each(|v| *v /= sum);
        c
    }
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

fn kaiser(x: f64) -> f64 {
    bessel_i0(KAISER_BETA * (1.0 - x * x).sqrt()) / bessel_i0(KAISER_BETA)
}

fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let q = x * x / 4.0;
    for k in 1..64 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}
