//! Signal frontend shared by every other module: WAV I/O, resampling,
//! spectral analysis, MFCC extraction and R128 loudness.

mod excerpt;
mod loudness;
mod mfcc;
mod resample;
mod stft;
mod wav;

use sha2::{Digest, Sha256};
use thiserror::Error;

pub use excerpt::{crop_excerpt, excerpt_len};
pub use loudness::{integrated_loudness, match_loudness, Loudness, LoudnessMatch};
pub use mfcc::{mfcc, mfcc_with, FeatureSequence, MelFilterbank, MfccConfig};
pub use resample::{resample, resample_by_ratio};
pub use stft::{stft_magnitude, MagnitudeSpectrogram, Stft, FRAME_HOP, WINDOW_LEN};
pub(crate) use stft::hann;
pub use wav::{load_audio, write_wav};

/// Analysis rate of the whole toolkit.
pub const ANALYSIS_RATE: u32 = 22_050;

#[derive(Debug, Error)]
pub enum AudioError {
    #[error("cannot read {path}: {reason}")]
    Unreadable { path: String, reason: String },
    #[error("unsupported audio encoding in {path}: {reason}")]
    UnsupportedCodec { path: String, reason: String },
    #[error("{path} contains no samples")]
    EmptyStream { path: String },
    #[error("cannot write {path}: {reason}")]
    Write { path: String, reason: String },
    #[error("invalid clip: {0}")]
    InvalidClip(String),
    #[error("clip too short: need {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("expected sample rate {expected} Hz, got {got} Hz")]
    SampleRate { expected: u32, got: u32 },
    #[error("loudness undefined: {0} is digital silence")]
    Silent(&'static str),
}

/// Mono PCM excerpt at a known sample rate.
///
/// Samples are nominally in [-1, 1]. Gain stages such as loudness matching
/// may push them beyond full scale; only finiteness is enforced.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    id: String,
    sample_rate: u32,
    samples: Vec<f64>,
}

impl AudioClip {
    pub fn new(
        id: impl Into<String>,
        sample_rate: u32,
        samples: Vec<f64>,
    ) -> Result<Self, AudioError> {
        if sample_rate == 0 {
            return Err(AudioError::InvalidClip("sample rate must be positive".into()));
        }
        if samples.is_empty() {
            return Err(AudioError::InvalidClip("no samples".into()));
        }
        if let Some(pos) = samples.iter().position(|s| !s.is_finite()) {
            return Err(AudioError::InvalidClip(format!(
                "non-finite sample at index {pos}"
            )));
        }
        Ok(Self {
            id: id.into(),
            sample_rate,
            samples,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// New clip with the same id and rate but different samples.
    pub fn with_samples(&self, samples: Vec<f64>) -> Result<Self, AudioError> {
        Self::new(self.id.clone(), self.sample_rate, samples)
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn scaled(&self, gain: f64) -> Self {
        Self {
            id: self.id.clone(),
            sample_rate: self.sample_rate,
            samples: self.samples.iter().map(|s| s * gain).collect(),
        }
    }

    pub fn power(&self) -> f64 {
        self.samples.iter().map(|s| s * s).sum::<f64>() / self.samples.len() as f64
    }

    pub fn rms(&self) -> f64 {
        self.power().sqrt()
    }

    pub(crate) fn require_rate(&self, rate: u32) -> Result<(), AudioError> {
        if self.sample_rate != rate {
            return Err(AudioError::SampleRate {
                expected: rate,
                got: self.sample_rate,
            });
        }
        Ok(())
    }

    /// SHA-256 over the sample rate and the exact sample bits.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.sample_rate.to_le_bytes());
        for s in &self.samples {
            h.update(s.to_le_bytes());
        }
        hex::encode(h.finalize())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid_clips() {
        assert!(AudioClip::new("a", 0, vec![0.0]).is_err());
        assert!(AudioClip::new("a", 8000, vec![]).is_err());
        assert!(AudioClip::new("a", 8000, vec![0.0, f64::NAN]).is_err());
        assert!(AudioClip::new("a", 8000, vec![0.0, 0.5]).is_ok());
    }

    #[test]
    fn content_hash_tracks_samples() {
        let a = AudioClip::new("a", 8000, vec![0.1, 0.2]).unwrap();
        let b = a.clone().with_id("b");
        assert_eq!(a.content_hash(), b.content_hash());
        assert_ne!(a.content_hash(), a.scaled(0.5).content_hash());
    }
}
