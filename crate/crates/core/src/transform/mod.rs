//! Graded audio transformations: pink and environmental noise, tempo and
//! pitch shifts, lossy compression. Every output is loudness-matched to its
//! input.

mod codec;
mod grid;
mod noise;
mod spec;
mod vocoder;

use thiserror::Error;

pub use codec::{align, codec_roundtrip, surrogate_codec, surrogate_cutoff, CodecCommand, CodecOutcome};
pub use grid::{check_range, default_grid, smallest_magnitudes, MagnitudeGrid};
pub use noise::{generate_pink_noise, mix_at_snr, tile};
pub use spec::{excerpt_file_name, parse_excerpt_file_name, Category, TransformSpec};
pub use vocoder::{pitch_shift, pitch_shift_with, tempo_shift, tempo_shift_with, time_stretch};

use crate::audio::{match_loudness, AudioClip, AudioError};
use crate::seed::derive_seed;

#[derive(Debug, Error)]
pub enum TransformError {
    #[error(transparent)]
    Audio(#[from] AudioError),
    #[error("{category} magnitude {magnitude} is outside its operating range")]
    OutOfRange { category: Category, magnitude: f64 },
    #[error("invalid transform: {0}")]
    InvalidSpec(String),
    #[error("environmental noise requested but no noise clip is registered")]
    MissingNoise,
    #[error("codec unavailable (skipped): {0}")]
    CodecUnavailable(String),
    #[error("codec exited with status {status:?}: {stderr}")]
    CodecFailed { status: Option<i32>, stderr: String },
    #[error("SNR undefined: {0} is silent")]
    Silent(&'static str),
    #[error("i/o: {0}")]
    Io(String),
}

impl TransformError {
    /// Missing external tooling, reported as SKIPPED rather than failure.
    pub fn is_skip(&self) -> bool {
        matches!(self, TransformError::CodecUnavailable(_))
    }
}

#[derive(Debug, Clone, Default)]
pub enum CodecMode {
    #[default]
    Surrogate,
    External(CodecCommand),
}

/// Everything a transformation needs besides the clip and the spec.
#[derive(Debug, Clone, Default)]
pub struct TransformContext {
    /// Environmental noise source, at the analysis rate.
    pub environmental_noise: Option<AudioClip>,
    pub codec: CodecMode,
    /// Root seed for noise realisations.
    pub seed: u64,
    pub phase_locking: bool,
}

#[derive(Debug, Clone)]
pub struct TransformOutput {
    pub clip: AudioClip,
    /// Loudness-matching gain.
    pub gain: f64,
    /// Loudness matching pushed samples past full scale.
    pub clipped: bool,
    /// Codec alignment correlation was below threshold.
    pub suspect: bool,
}

/// Applies `spec` to `clip` and loudness-matches the result against `clip`.
/// `OG` returns the clip untouched. Noise realisations are seeded from the
/// context seed and the clip id, so every magnitude of one clip sees the
/// same noise.
pub fn apply_transform(
    clip: &AudioClip,
    spec: &TransformSpec,
    ctx: &TransformContext,
) -> Result<TransformOutput, TransformError> {
    let Some(magnitude) = spec.magnitude() else {
        return Ok(TransformOutput {
            clip: clip.clone(),
            gain: 1.0,
            clipped: false,
            suspect: false,
        });
    };
    check_range(spec.category(), magnitude)?;

    let mut suspect = false;
    let transformed = match spec.category() {
        Category::PN => {
            let seed = derive_seed(ctx.seed, &["PN", clip.id()]);
            let len = clip.len().max(noise::MIN_NOISE_LEN);
            let noise = generate_pink_noise(len, clip.sample_rate(), seed)?;
            mix_at_snr(clip, &noise, magnitude)?
        }
        Category::EN => {
            let bank = ctx
                .environmental_noise
                .as_ref()
                .ok_or(TransformError::MissingNoise)?;
            let seed = derive_seed(ctx.seed, &["EN", clip.id()]);
            let offset = (seed % bank.len() as u64) as usize;
            let noise = bank.with_samples(tile(bank.samples(), offset, clip.len()))?;
            mix_at_snr(clip, &noise, magnitude)?
        }
        Category::TS => tempo_shift_with(clip, magnitude, ctx.phase_locking)?,
        Category::PS => pitch_shift_with(clip, magnitude, ctx.phase_locking)?,
        Category::MP => match &ctx.codec {
            CodecMode::Surrogate => surrogate_codec(clip, magnitude)?,
            CodecMode::External(cmd) => {
                let out = codec_roundtrip(clip, magnitude, cmd)?;
                suspect = out.suspect;
                out.clip
            }
        },
        Category::OG => unreachable!("OG has no magnitude"),
    };

    let matched = match_loudness(&transformed, clip)?;
    Ok(TransformOutput {
        clip: matched.clip,
        gain: matched.gain,
        clipped: matched.clipped,
        suspect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::integrated_loudness;
    use crate::testutil::{sine, white_noise};

    fn test_clip() -> AudioClip {
        let a = sine("c", 22050, 33536, 330.0, 0.3);
        let n = white_noise("c", 33536, 0.05, 4);
        let mix = a.samples().iter().zip(n.samples()).map(|(x, y)| x + y).collect();
        a.with_samples(mix).unwrap()
    }

    fn ctx() -> TransformContext {
        TransformContext {
            environmental_noise: Some(white_noise("bar", 50_000, 0.2, 99)),
            seed: 5,
            ..TransformContext::default()
        }
    }

    #[test]
    fn original_is_bitwise_identity() {
        let clip = test_clip();
        let out = apply_transform(&clip, &TransformSpec::original(), &ctx()).unwrap();
        assert_eq!(out.clip, clip);
    }

    #[test]
    fn loudness_is_matched_for_every_category() {
        let clip = test_clip();
        let target = integrated_loudness(&clip).unwrap().0;
        for cat in Category::TRANSFORMS {
            for m in default_grid(cat).unwrap().magnitudes() {
                let spec = TransformSpec::new(cat, *m).unwrap();
                let out = apply_transform(&clip, &spec, &ctx()).unwrap();
                assert_eq!(out.clip.sample_rate(), clip.sample_rate());
                let l = integrated_loudness(&out.clip).unwrap().0;
                assert!((l - target).abs() <= 0.1, "{spec}: {l} vs {target}");
            }
        }
    }

    #[test]
    fn quieter_noise_changes_less() {
        let clip = test_clip();
        let diff = |snr: f64| {
            let spec = TransformSpec::new(Category::PN, snr).unwrap();
            let out = apply_transform(&clip, &spec, &ctx()).unwrap();
            out.clip
                .samples()
                .iter()
                .zip(clip.samples())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
        };
        assert!(diff(30.0) < diff(0.0));
    }

    #[test]
    fn deterministic() {
        let clip = test_clip();
        for spec in [
            TransformSpec::new(Category::PN, 6.0).unwrap(),
            TransformSpec::new(Category::EN, 6.0).unwrap(),
            TransformSpec::new(Category::PS, 200.0).unwrap(),
        ] {
            let a = apply_transform(&clip, &spec, &ctx()).unwrap();
            let b = apply_transform(&clip, &spec, &ctx()).unwrap();
            assert_eq!(a.clip, b.clip);
        }
    }

    #[test]
    fn environmental_noise_must_be_registered() {
        let clip = test_clip();
        let spec = TransformSpec::new(Category::EN, 10.0).unwrap();
        let err = apply_transform(&clip, &spec, &TransformContext::default()).unwrap_err();
        assert!(matches!(err, TransformError::MissingNoise));
    }
}
