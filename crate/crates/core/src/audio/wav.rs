use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::{AudioClip, AudioError};

/// Reads a PCM WAV file and downmixes it to mono by channel mean.
///
/// Integer PCM is scaled by `2^(bits-1)`; float PCM is taken as is. The clip
/// id is the file stem.
pub fn load_audio(path: impl AsRef<Path>) -> Result<AudioClip, AudioError> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let reader = WavReader::open(path).map_err(|e| classify(&display, e))?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    if channels == 0 {
        return Err(AudioError::UnsupportedCodec {
            path: display,
            reason: "zero channels".into(),
        });
    }

    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<Result<_, _>>()
            .map_err(|e| classify(&display, e))?,
        (SampleFormat::Int, bits @ 8..=32) => {
            let scale = 1.0 / (1u64 << (bits - 1)) as f64;
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| v as f64 * scale))
                .collect::<Result<_, _>>()
                .map_err(|e| classify(&display, e))?
        }
        (fmt, bits) => {
            return Err(AudioError::UnsupportedCodec {
                path: display,
                reason: format!("{fmt:?} PCM with {bits} bits per sample"),
            })
        }
    };

    if interleaved.len() < channels {
        return Err(AudioError::EmptyStream { path: display });
    }
    let mono: Vec<f64> = interleaved
        .chunks_exact(channels)
        .map(|frame| frame.iter().sum::<f64>() / channels as f64)
        .collect();

    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    AudioClip::new(id, spec.sample_rate, mono)
}

fn classify(path: &str, err: hound::Error) -> AudioError {
    match err {
        hound::Error::IoError(e) => AudioError::Unreadable {
            path: path.to_string(),
            reason: e.to_string(),
        },
        other => AudioError::UnsupportedCodec {
            path: path.to_string(),
            reason: other.to_string(),
        },
    }
}

/// Writes a mono 32-bit float WAV.
pub fn write_wav(path: impl AsRef<Path>, clip: &AudioClip) -> Result<(), AudioError> {
    let path = path.as_ref();
    let err = |e: hound::Error| AudioError::Write {
        path: path.display().to_string(),
        reason: e.to_string(),
    };
    let spec = WavSpec {
        channels: 1,
        sample_rate: clip.sample_rate(),
        bits_per_sample: 32,
        sample_format: SampleFormat::Float,
    };
    let mut writer = WavWriter::create(path, spec).map_err(err)?;
    for &s in clip.samples() {
        writer.write_sample(s as f32).map_err(err)?;
    }
    writer.finalize().map_err(err)
}
