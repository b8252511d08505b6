use std::f64::consts::PI;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::stft::{stft_magnitude, FRAME_HOP};
use super::{AudioClip, AudioError, ANALYSIS_RATE};

/// MFCC frontend parameters. Defaults: 40 HTK-mel bands over 0-11025 Hz,
/// `10 log10(max(power, 1e-10))`, orthonormal DCT-II, coefficients 0..24 with
/// coefficient 0 dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MfccConfig {
    pub n_mels: usize,
    pub fmin: f64,
    pub fmax: f64,
    pub n_coeffs: usize,
    pub log_floor: f64,
    pub drop_c0: bool,
}

impl Default for MfccConfig {
    fn default() -> Self {
        Self {
            n_mels: 40,
            fmin: 0.0,
            fmax: 11_025.0,
            n_coeffs: 25,
            log_floor: 1e-10,
            drop_c0: true,
        }
    }
}

impl MfccConfig {
    pub fn dims(&self) -> usize {
        if self.drop_c0 {
            self.n_coeffs - 1
        } else {
            self.n_coeffs
        }
    }
}

/// Time-ordered cepstral frames, `[frames x dims]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSequence {
    frames: Array2<f64>,
}

impl FeatureSequence {
    pub fn new(frames: Array2<f64>) -> Result<Self, AudioError> {
        if frames.nrows() == 0 || frames.ncols() == 0 {
            return Err(AudioError::InvalidClip("feature sequence is empty".into()));
        }
        if frames.iter().any(|v| !v.is_finite()) {
            return Err(AudioError::InvalidClip("non-finite feature value".into()));
        }
        Ok(Self {
            frames: frames.as_standard_layout().into_owned(),
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, AudioError> {
        let dims = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dims) {
            return Err(AudioError::InvalidClip("ragged feature rows".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let frames = Array2::from_shape_vec((rows.len(), dims), flat)
            .map_err(|e| AudioError::InvalidClip(e.to_string()))?;
        Self::new(frames)
    }

    pub fn frames(&self) -> &Array2<f64> {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.nrows() == 0
    }

    pub fn dims(&self) -> usize {
        self.frames.ncols()
    }

    pub fn frame(&self, i: usize) -> &[f64] {
        let d = self.dims();
        &self.as_flat()[i * d..(i + 1) * d]
    }

    /// Row-major backing storage.
    pub fn as_flat(&self) -> &[f64] {
        self.frames
            .as_slice()
            .expect("feature frames are kept in standard layout")
    }
}

/// Triangular mel filterbank on the HTK mel scale.
#[derive(Debug, Clone)]
pub struct MelFilterbank {
    weights: Array2<f64>,
}

fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

impl MelFilterbank {
    pub fn new(n_mels: usize, n_fft: usize, sample_rate: u32, fmin: f64, fmax: f64) -> Self {
        let bins = n_fft / 2 + 1;
        let (mel_lo, mel_hi) = (hz_to_mel(fmin), hz_to_mel(fmax));
        let edges: Vec<f64> = (0..n_mels + 2)
            .map(|i| mel_to_hz(mel_lo + (mel_hi - mel_lo) * i as f64 / (n_mels + 1) as f64))
            .collect();
        let mut weights = Array2::zeros((n_mels, bins));
        for m in 0..n_mels {
            let (lo, centre, hi) = (edges[m], edges[m + 1], edges[m + 2]);
            for k in 0..bins {
                let f = k as f64 * sample_rate as f64 / n_fft as f64;
                let w = if f > lo && f <= centre {
                    (f - lo) / (centre - lo)
                } else if f > centre && f < hi {
                    (hi - f) / (hi - centre)
                } else {
                    0.0
                };
                weights[[m, k]] = w;
            }
        }
        Self { weights }
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub fn apply(&self, power: &Array2<f64>) -> Array2<f64> {
        power.dot(&self.weights.t())
    }
}

/// Orthonormal DCT-II basis, `[n_coeffs x n_inputs]`.
fn dct_basis(n_coeffs: usize, n_inputs: usize) -> Array2<f64> {
    let n = n_inputs as f64;
    Array2::from_shape_fn((n_coeffs, n_inputs), |(k, i)| {
        let scale = if k == 0 { (1.0 / n).sqrt() } else { (2.0 / n).sqrt() };
        scale * (PI * k as f64 * (2.0 * i as f64 + 1.0) / (2.0 * n)).cos()
    })
}

pub fn mfcc(clip: &AudioClip) -> Result<FeatureSequence, AudioError> {
    mfcc_with(clip, &MfccConfig::default())
}

pub fn mfcc_with(clip: &AudioClip, config: &MfccConfig) -> Result<FeatureSequence, AudioError> {
    if config.n_coeffs == 0 || config.n_coeffs > config.n_mels || config.dims() == 0 {
        return Err(AudioError::InvalidClip(format!(
            "cannot keep {} coefficients from {} mel bands",
            config.n_coeffs, config.n_mels
        )));
    }
    let spec = stft_magnitude(clip)?;
    let power = spec.values().mapv(|m| m * m);
    let bank = MelFilterbank::new(
        config.n_mels,
        spec.window(),
        ANALYSIS_RATE,
        config.fmin,
        config.fmax,
    );
    let log_mel = bank
        .apply(&power)
        .mapv(|p| 10.0 * p.max(config.log_floor).log10());
    let ceps = log_mel.dot(&dct_basis(config.n_coeffs, config.n_mels).t());
    let start = usize::from(config.drop_c0);
    let kept = ceps.slice(ndarray::s![.., start..]).to_owned();
    debug_assert_eq!(spec.hop(), FRAME_HOP);
    FeatureSequence::new(kept)
}
