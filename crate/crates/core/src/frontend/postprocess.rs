use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ChannelAxis, FeatureMatrix};
use crate::error::{Error, Result};

/// Exponentially decaying peak-hold per channel: each value casts a floor on
/// the following frames that falls by `decay_db_per_frame` per frame.
pub fn forward_masking(env: &FeatureMatrix, decay_db_per_frame: f64) -> FeatureMatrix {
    let decay = 10f64.powf(-decay_db_per_frame / 20.0);
    let mut values = Vec::with_capacity(env.values().len());
    for row in env.rows() {
        let mut masker = 0.0f64;
        for &v in row {
            masker = v.max(masker * decay);
            values.push(masker);
        }
    }
    FeatureMatrix::from_parts_unchecked(values, env.n_channels(), env.frame_rate(), env.axis().clone())
}

/// `ln(env + u + floor)` with `u ~ U[0, dither)`. Channel `j` draws from
/// stream `j` of a ChaCha generator keyed by `seed`, so the output is fixed
/// for a given seed and shape.
pub fn log_compress(env: &FeatureMatrix, floor: f64, dither: f64, seed: u64) -> Result<FeatureMatrix> {
    if !(floor > 0.0 || dither > 0.0) || floor < 0.0 || dither < 0.0 {
        return Err(Error::InvalidArgument(
            "log compression needs a positive floor or dither".into(),
        ));
    }
    let mut values = Vec::with_capacity(env.values().len());
    for (j, row) in env.rows().enumerate() {
        if dither > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(j as u64);
            values.extend(row.iter().map(|&v| (v + dither * rng.random::<f64>() + floor).ln()));
        } else {
            values.extend(row.iter().map(|&v| (v + floor).ln()));
        }
    }
    FeatureMatrix::new(values, env.n_channels(), env.frame_rate(), env.axis().clone())
}

/// Concatenates non-overlapping groups of `depth` consecutive frames into
/// columns of dimension `J * depth` (frame-major: row `k * J + j` holds
/// channel `j` of frame `k` in the group). Trailing frames that do not fill a
/// group are dropped.
pub fn stack_frames(feat: &FeatureMatrix, depth: usize) -> Result<FeatureMatrix> {
    stack_with_hop(feat, depth, depth)
}

/// Like [`stack_frames`] but with a group starting at every frame, giving
/// `T - depth + 1` overlapping stacked columns.
pub fn stack_frames_sliding(feat: &FeatureMatrix, depth: usize) -> Result<FeatureMatrix> {
    stack_with_hop(feat, depth, 1)
}

fn stack_with_hop(feat: &FeatureMatrix, depth: usize, hop: usize) -> Result<FeatureMatrix> {
    if depth == 0 {
        return Err(Error::InvalidArgument("stack depth must be at least 1".into()));
    }
    let (j, t) = (feat.n_channels(), feat.n_frames());
    if t < depth {
        return Err(Error::SignalTooShort {
            needed: depth,
            got: t,
            unit: "frames",
        });
    }
    let cols = (t - depth) / hop + 1;
    let mut values = Vec::with_capacity(j * depth * cols);
    for k in 0..depth {
        for row in feat.rows() {
            values.extend((0..cols).map(|c| row[c * hop + k]));
        }
    }
    let freqs = match feat.axis() {
        ChannelAxis::Frequency(f) => f.clone(),
        _ => Vec::new(),
    };
    Ok(FeatureMatrix::from_parts_unchecked(
        values,
        j * depth,
        feat.frame_rate(),
        ChannelAxis::Stacked { freqs, depth },
    ))
}

/// Inverse of [`stack_frames`]: recovers the first `floor(T / depth) * depth`
/// frames of the original matrix.
pub fn unstack_frames(stacked: &FeatureMatrix, n_channels: usize) -> Result<FeatureMatrix> {
    if n_channels == 0 || !stacked.n_channels().is_multiple_of(n_channels) {
        return Err(Error::DimensionMismatch {
            expected: n_channels,
            got: stacked.n_channels(),
        });
    }
    let depth = stacked.n_channels() / n_channels;
    let cols = stacked.n_frames();
    let mut rows = vec![Vec::with_capacity(cols * depth); n_channels];
    for c in 0..cols {
        for k in 0..depth {
            for (j, row) in rows.iter_mut().enumerate() {
                row.push(stacked.get(k * n_channels + j, c));
            }
        }
    }
    let axis = match stacked.axis() {
        ChannelAxis::Stacked { freqs, .. } if freqs.len() == n_channels => ChannelAxis::Frequency(freqs.clone()),
        _ => ChannelAxis::Eigen,
    };
    FeatureMatrix::from_rows(rows, stacked.frame_rate(), axis)
}
