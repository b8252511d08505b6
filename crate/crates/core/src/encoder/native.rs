use ndarray::{Array2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{Embedding, EncoderError};
use crate::audio::{mfcc, stft_magnitude, AudioClip};

pub const MFCC_STATS_DIM: usize = 144;
pub const TOY_DIM: usize = 32;

/// Central difference along time with edge replication.
pub fn delta_frames(x: &Array2<f64>) -> Array2<f64> {
    let t = x.nrows();
    let mut d = Array2::zeros(x.raw_dim());
    for i in 0..t {
        let prev = x.row(i.saturating_sub(1));
        let next = x.row((i + 1).min(t - 1));
        d.row_mut(i).assign(&((&next - &prev) / 2.0));
    }
    d
}

/// MFCC statistics baseline: mean and population standard deviation over
/// time of the 24 coefficients and their first and second derivatives,
/// ordered `[mean c, mean d, mean dd, std c, std d, std dd]`.
pub fn mfcc_stats_encode(clip: &AudioClip) -> Result<Embedding, EncoderError> {
    let c = mfcc(clip)?.frames().clone();
    if c.nrows() < 3 {
        return Err(EncoderError::TooShort {
            needed: 3,
            got: c.nrows(),
        });
    }
    let d = delta_frames(&c);
    let dd = delta_frames(&d);
    let streams = [&c, &d, &dd];
    let mut values = Vec::with_capacity(6 * c.ncols());
    for s in streams {
        values.extend(s.mean_axis(Axis(0)).expect("at least one frame"));
    }
    for s in streams {
        values.extend(s.std_axis(Axis(0), 0.0));
    }
    Embedding::new("mfcc_stats", values)
}

/// Deterministic 32-dim test encoder: the mean magnitude spectrum projected
/// by a seeded Gaussian matrix scaled by `1/sqrt(513)`.
pub fn toy_encode(clip: &AudioClip, seed: u64) -> Result<Embedding, EncoderError> {
    let spec = stft_magnitude(clip)?;
    let mean = spec.mean_spectrum();
    let bins = mean.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / (bins as f64).sqrt();
    let values = (0..TOY_DIM)
        .map(|_| {
            mean.iter()
                .map(|m| {
                    let w: f64 = StandardNormal.sample(&mut rng);
                    w * scale * m
                })
                .sum()
        })
        .collect();
    Embedding::new("toy", values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{sine, white_noise};

    fn norm(e: &Embedding) -> f64 {
        e.values().iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    #[test]
    fn stats_layout_on_silence() {
        let clip = AudioClip::new("z", 22050, vec![0.0; 33536]).unwrap();
        let e = mfcc_stats_encode(&clip).unwrap();
        assert_eq!(e.dim(), MFCC_STATS_DIM);
        // all frames identical: derivatives and spreads vanish
        assert!(e.values()[24..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn stats_need_three_frames() {
        let clip = white_noise("n", 1024 + 256, 0.1, 1);
        assert!(matches!(mfcc_stats_encode(&clip), Err(EncoderError::TooShort { .. })));
    }

    #[test]
    fn time_reversal_negates_mean_delta() {
        let chirp: Vec<f64> = (0..33536)
            .map(|n| {
                let t = n as f64 / 22050.0;
                0.3 * (2.0 * std::f64::consts::PI * (200.0 * t + 400.0 * t * t)).sin()
                    * (1.0 + 0.5 * (3.0 * t).sin())
            })
            .collect();
        let fwd = AudioClip::new("c", 22050, chirp.clone()).unwrap();
        let rev = AudioClip::new("c", 22050, chirp.into_iter().rev().collect()).unwrap();
        let (a, b) = (mfcc_stats_encode(&fwd).unwrap(), mfcc_stats_encode(&rev).unwrap());
        let (a, b) = (a.values(), b.values());
        // reversed frames differ slightly: the periodic Hann is not symmetric
        let scale = a[..24].iter().map(|v| v.abs()).fold(0.0, f64::max);
        for k in 0..24 {
            assert!((a[k] - b[k]).abs() < 1e-2 * scale, "mean c{k}: {} vs {}", a[k], b[k]);
            assert!((a[24 + k] + b[24 + k]).abs() < 1e-2 * scale, "mean d{k}");
        }
    }

    #[test]
    fn delta_anti_symmetric_under_reversal() {
        let x = Array2::from_shape_fn((50, 3), |(i, j)| ((i * 7 + j * 13) % 17) as f64 * 0.3 - (i as f64).sin());
        let mut r = x.clone();
        r.invert_axis(Axis(0));
        let mut back = delta_frames(&r);
        back.invert_axis(Axis(0));
        assert_eq!(back, -delta_frames(&x));
    }

    #[test]
    fn delta_hand_values() {
        let x = Array2::from_shape_vec((4, 1), vec![0.0, 1.0, 4.0, 9.0]).unwrap();
        let d = delta_frames(&x);
        assert_eq!(d.column(0).to_vec(), vec![0.5, 2.0, 4.0, 2.5]);
    }

    #[test]
    fn toy_is_seeded_and_homogeneous() {
        let clip = sine("s", 22050, 8192, 660.0, 0.4);
        let a = toy_encode(&clip, 7).unwrap();
        assert_eq!(a.dim(), TOY_DIM);
        assert_eq!(a, toy_encode(&clip, 7).unwrap());
        assert_ne!(a, toy_encode(&clip, 8).unwrap());
        let ratio = norm(&toy_encode(&clip.scaled(2.0), 7).unwrap()) / norm(&a);
        assert!((1.0..=2.0 + 1e-12).contains(&ratio), "{ratio}");
    }
}
