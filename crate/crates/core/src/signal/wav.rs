use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::AudioSignal;
use crate::error::{Error, Result};

/// Reads channel 0 of a PCM (8/16/24/32-bit integer) or 32-bit float WAV file.
pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioSignal> {
    read_wav_channel(path, 0)
}

pub fn read_wav_channel(path: impl AsRef<Path>, channel: usize) -> Result<AudioSignal> {
    // Opening failures are genuine I/O errors; anything hound fails to read
    // from an opened file means the file itself is malformed or truncated.
    let file = std::io::BufReader::new(std::fs::File::open(path.as_ref())?);
    let reader = WavReader::new(file).map_err(map_read)?;
    let spec = reader.spec();
    let n_channels = spec.channels as usize;
    if channel >= n_channels {
        return Err(Error::InvalidArgument(format!(
            "channel {channel} requested from a {n_channels}-channel file"
        )));
    }
    let samples: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .skip(channel)
            .step_by(n_channels)
            .map(|s| s.map(f64::from))
            .collect::<Result<_, _>>()
            .map_err(map_read)?,
        (SampleFormat::Int, bits @ (8 | 16 | 24 | 32)) => {
            let scale = 1.0 / (1u64 << (bits - 1)) as f64;
            reader
                .into_samples::<i32>()
                .skip(channel)
                .step_by(n_channels)
                .map(|s| s.map(|v| v as f64 * scale))
                .collect::<Result<_, _>>()
                .map_err(map_read)?
        }
        (fmt, bits) => {
            return Err(Error::UnsupportedFormat(format!("{fmt:?} with {bits} bits per sample")))
        }
    };
    if samples.is_empty() {
        return Err(Error::EmptyAudio);
    }
    if spec.sample_rate == 0 {
        return Err(Error::CorruptHeader("sample rate is zero".into()));
    }
    AudioSignal::new(samples, spec.sample_rate)
}

/// Writes a mono 16-bit PCM file, clipping to [-1, 1].
pub fn write_wav(path: impl AsRef<Path>, signal: &AudioSignal) -> Result<()> {
    let spec = WavSpec {
        channels: 1,
        sample_rate: signal.sample_rate(),
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut writer = WavWriter::create(path.as_ref(), spec).map_err(map_hound)?;
    for &s in signal.samples() {
        let v = (s.clamp(-1.0, 1.0) * 32767.0).round() as i16;
        writer.write_sample(v).map_err(map_hound)?;
    }
    writer.finalize().map_err(map_hound)
}

fn map_read(err: hound::Error) -> Error {
    match err {
        hound::Error::IoError(e) => Error::CorruptHeader(e.to_string()),
        other => map_hound(other),
    }
}

fn map_hound(err: hound::Error) -> Error {
    match err {
        hound::Error::IoError(e) => Error::Io(e),
        hound::Error::FormatError(msg) => Error::CorruptHeader(msg.to_string()),
        hound::Error::Unsupported => Error::UnsupportedFormat("codec not supported".into()),
        other => Error::CorruptHeader(other.to_string()),
    }
}
