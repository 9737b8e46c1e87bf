use std::io::{Read, Write};

use crate::error::{Error, Result};

/// What the rows of a [`FeatureMatrix`] represent.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelAxis {
    /// Centre frequency (Hz) of each channel, strictly increasing.
    Frequency(Vec<f64>),
    /// `depth` consecutive frames of the given channels, frame-major.
    Stacked { freqs: Vec<f64>, depth: usize },
    /// Decorrelated (eigen) channels.
    Eigen,
}

/// Channels x frames matrix of envelope or log-envelope values, stored
/// channel-major so each channel's time series is a contiguous slice.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    values: Vec<f64>,
    n_channels: usize,
    n_frames: usize,
    frame_rate: f64,
    axis: ChannelAxis,
}

impl FeatureMatrix {
    pub fn new(values: Vec<f64>, n_channels: usize, frame_rate: f64, axis: ChannelAxis) -> Result<Self> {
        if n_channels == 0 {
            return Err(Error::InvalidArgument("feature matrix needs at least one channel".into()));
        }
        if !values.len().is_multiple_of(n_channels) {
            return Err(Error::DimensionMismatch {
                expected: n_channels,
                got: values.len(),
            });
        }
        if !(frame_rate > 0.0) {
            return Err(Error::InvalidArgument("frame rate must be positive".into()));
        }
        if let ChannelAxis::Frequency(f) = &axis {
            if f.len() != n_channels || f.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidArgument(
                    "channel frequencies must be strictly increasing, one per channel".into(),
                ));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::DegenerateInput("feature matrix contains non-finite values".into()));
        }
        Ok(Self {
            n_frames: values.len() / n_channels,
            values,
            n_channels,
            frame_rate,
            axis,
        })
    }

    /// Builds a matrix from per-channel rows of equal length.
    pub fn from_rows(rows: Vec<Vec<f64>>, frame_rate: f64, axis: ChannelAxis) -> Result<Self> {
        let n_channels = rows.len();
        let n_frames = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_frames) {
            return Err(Error::InvalidArgument("ragged feature rows".into()));
        }
        Self::new(rows.concat(), n_channels, frame_rate, axis)
    }

    pub(crate) fn from_parts_unchecked(
        values: Vec<f64>,
        n_channels: usize,
        frame_rate: f64,
        axis: ChannelAxis,
    ) -> Self {
        debug_assert_eq!(values.len() % n_channels, 0);
        Self {
            n_frames: values.len() / n_channels,
            values,
            n_channels,
            frame_rate,
            axis,
        }
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    pub fn frame_rate(&self) -> f64 {
        self.frame_rate
    }

    pub fn axis(&self) -> &ChannelAxis {
        &self.axis
    }

    pub fn channel_freqs(&self) -> Option<&[f64]> {
        match &self.axis {
            ChannelAxis::Frequency(f) => Some(f),
            _ => None,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.values[j * self.n_frames..(j + 1) * self.n_frames]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.n_channels).map(move |j| self.row(j))
    }

    pub fn get(&self, j: usize, t: usize) -> f64 {
        self.values[j * self.n_frames + t]
    }

    pub fn frame(&self, t: usize) -> Vec<f64> {
        (0..self.n_channels).map(|j| self.get(j, t)).collect()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: self.values.iter().map(|&v| f(v)).collect(),
            ..self.clone()
        }
    }

    pub fn with_axis(mut self, axis: ChannelAxis) -> Self {
        self.axis = axis;
        self
    }

    /// Keeps only the listed frames, in the given order.
    pub fn select_frames(&self, frames: &[usize]) -> Self {
        let mut values = Vec::with_capacity(frames.len() * self.n_channels);
        for row in self.rows() {
            values.extend(frames.iter().map(|&t| row[t]));
        }
        Self::from_parts_unchecked(values, self.n_channels, self.frame_rate, self.axis.clone())
    }

    pub fn truncate_frames(&self, n: usize) -> Self {
        let n = n.min(self.n_frames);
        let values = self.rows().flat_map(|r| r[..n].iter().copied()).collect();
        Self::from_parts_unchecked(values, self.n_channels, self.frame_rate, self.axis.clone())
    }

    /// CSV dump: header row of centre frequencies (or channel indices), then
    /// one row per frame.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let header: Vec<String> = match self.channel_freqs() {
            Some(f) => f.iter().map(|v| format!("{v}")).collect(),
            None => (0..self.n_channels).map(|j| format!("ch{j}")).collect(),
        };
        w.write_record(&header)?;
        for t in 0..self.n_frames {
            w.write_record(self.frame(t).iter().map(|v| format!("{v:e}")))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a dump written by [`write_csv`](Self::write_csv) whose header
    /// holds centre frequencies.
    pub fn read_csv<R: Read>(input: R, frame_rate: f64) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let freqs: Vec<f64> = r
            .headers()?
            .iter()
            .map(|h| h.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| Error::Schema {
                path: "header".into(),
                message: e.to_string(),
            })?;
        let j = freqs.len();
        let mut rows = vec![Vec::new(); j];
        for (t, rec) in r.records().enumerate() {
            let rec = rec?;
            if rec.len() != j {
                return Err(Error::DimensionMismatch { expected: j, got: rec.len() });
            }
            for (c, field) in rec.iter().enumerate() {
                rows[c].push(field.trim().parse::<f64>().map_err(|e| Error::Schema {
                    path: format!("row {t}, column {c}"),
                    message: e.to_string(),
                })?);
            }
        }
        Self::from_rows(rows, frame_rate, ChannelAxis::Frequency(freqs))
    }
}
