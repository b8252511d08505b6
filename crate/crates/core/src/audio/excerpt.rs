use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::stft::{FRAME_HOP, WINDOW_LEN};
use super::{AudioClip, AudioError};

/// Samples needed for `frames` analysis frames: `(frames - 1) * 256 + 1024`.
pub fn excerpt_len(frames: usize) -> usize {
    frames.saturating_sub(1) * FRAME_HOP + WINDOW_LEN
}

/// Cuts an excerpt spanning exactly `frames` STFT frames at a start offset
/// drawn uniformly from the valid range.
pub fn crop_excerpt(clip: &AudioClip, frames: usize, seed: u64) -> Result<AudioClip, AudioError> {
    if frames == 0 {
        return Err(AudioError::InvalidClip("excerpt needs at least one frame".into()));
    }
    let len = excerpt_len(frames);
    if clip.len() < len {
        return Err(AudioError::TooShort {
            needed: len,
            got: clip.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = rng.random_range(0..=clip.len() - len);
    clip.with_samples(clip.samples()[start..start + len].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::white_noise;

    #[test]
    fn default_length() {
        assert_eq!(excerpt_len(128), 33_536);
        let clip = white_noise("n", 50_000, 0.1, 1);
        let ex = crop_excerpt(&clip, 128, 7).unwrap();
        assert_eq!(ex.len(), 33_536);
        assert!((ex.duration_secs() - 1.52).abs() < 0.01);
    }

    #[test]
    fn deterministic_per_seed() {
        let clip = white_noise("n", 50_000, 0.1, 1);
        assert_eq!(
            crop_excerpt(&clip, 128, 42).unwrap(),
            crop_excerpt(&clip, 128, 42).unwrap()
        );
    }

    #[test]
    fn seeds_spread_offsets() {
        let clip = white_noise("n", 30 * 22050, 0.1, 1);
        let mut seen = std::collections::HashSet::new();
        for seed in 0..106u64 {
            let ex = crop_excerpt(&clip, 128, seed).unwrap();
            let start = clip
                .samples()
                .windows(8)
                .position(|w| w == &ex.samples()[..8])
                .unwrap();
            seen.insert(start);
        }
        assert!(seen.len() >= 2);
    }

    #[test]
    fn too_short() {
        let clip = white_noise("n", 33_535, 0.1, 1);
        assert!(matches!(
            crop_excerpt(&clip, 128, 0),
            Err(AudioError::TooShort { needed: 33_536, .. })
        ));
        let exact = white_noise("n", 33_536, 0.1, 1);
        assert_eq!(crop_excerpt(&exact, 128, 0).unwrap(), exact);
    }
}
