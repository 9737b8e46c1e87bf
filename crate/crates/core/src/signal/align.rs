use rustfft::{num_complex::Complex, FftPlanner};

use super::AudioSignal;
use crate::error::{Error, Result};

/// Finds the integer lag in `[-max_lag, max_lag]` maximising
/// `sum_n clean[n] * degraded[n - lag]`.
///
/// Near-ties (within 1e-12 of the peak) resolve toward the smallest `|lag|`,
/// negative first. All-zero input yields lag 0.
pub fn cross_correlation_lag(clean: &[f64], degraded: &[f64], max_lag: usize) -> i64 {
    if clean.is_empty() || degraded.is_empty() {
        return 0;
    }
    let size = (clean.len() + degraded.len()).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);

    let mut a: Vec<Complex<f64>> = clean.iter().map(|&v| Complex::new(v, 0.0)).collect();
    a.resize(size, Complex::default());
    let mut b: Vec<Complex<f64>> = degraded.iter().map(|&v| Complex::new(v, 0.0)).collect();
    b.resize(size, Complex::default());
    fwd.process(&mut a);
    fwd.process(&mut b);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y.conj();
    }
    inv.process(&mut a);
    // a[k] = sum_m clean[m + k] * degraded[m], negative k wrapped to size + k.

    let max_pos = max_lag.min(clean.len() - 1) as i64;
    let max_neg = max_lag.min(degraded.len() - 1) as i64;
    let at = |lag: i64| {
        let idx = if lag >= 0 { lag as usize } else { (size as i64 + lag) as usize };
        a[idx].re
    };
    let peak = (-max_neg..=max_pos).map(|l| at(l).abs()).fold(0.0, f64::max);
    if peak == 0.0 {
        return 0;
    }
    let tol = 1e-12 * peak;
    let mut best_lag = 0i64;
    let mut best = at(0);
    for m in 1..=max_neg.max(max_pos) {
        for lag in [-m, m] {
            if (lag < 0 && -lag > max_neg) || (lag > 0 && lag > max_pos) {
                continue;
            }
            let v = at(lag);
            if v > best + tol {
                best = v;
                best_lag = lag;
            }
        }
    }
    best_lag
}

/// Shifts `degraded` by the cross-correlation lag against `clean` and trims or
/// zero-pads it to `clean`'s length: `out[n] = degraded[n - lag]`.
pub fn align(clean: &AudioSignal, degraded: &AudioSignal, max_lag: usize) -> Result<(AudioSignal, i64)> {
    if clean.sample_rate() != degraded.sample_rate() {
        return Err(Error::InvalidArgument(format!(
            "cannot align signals at {} Hz and {} Hz",
            clean.sample_rate(),
            degraded.sample_rate()
        )));
    }
    let lag = cross_correlation_lag(clean.samples(), degraded.samples(), max_lag);
    let deg = degraded.samples();
    let out = (0..clean.len() as i64)
        .map(|n| {
            let src = n - lag;
            if src >= 0 && (src as usize) < deg.len() {
                deg[src as usize]
            } else {
                0.0
            }
        })
        .collect();
    Ok((AudioSignal::new(out, clean.sample_rate())?, lag))
}
