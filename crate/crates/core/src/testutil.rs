//! Signal fixtures and spectral-peak oracle for unit tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{num_complex::Complex64, FftPlanner};

use crate::audio::AudioClip;

pub fn sine(id: &str, rate: u32, len: usize, freq: f64, amp: f64) -> AudioClip {
    let w = 2.0 * std::f64::consts::PI * freq / rate as f64;
    AudioClip::new(id, rate, (0..len).map(|n| amp * (w * n as f64).sin()).collect()).unwrap()
}

pub fn white_noise(id: &str, len: usize, amp: f64, seed: u64) -> AudioClip {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    AudioClip::new(
        id,
        22050,
        (0..len).map(|_| amp * rng.random_range(-1.0..1.0)).collect(),
    )
    .unwrap()
}

/// Frequency of the largest Hann-windowed periodogram bin after 4x zero
/// padding, refined by parabolic interpolation.
pub fn peak_frequency(samples: &[f64], rate: u32) -> f64 {
    let n = samples.len();
    let size = n.next_power_of_two() * 4;
    let mut buf: Vec<Complex64> = (0..size)
        .map(|i| {
            if i < n {
                let w = 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos();
                Complex64::new(samples[i] * w, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    FftPlanner::new().plan_fft_forward(size).process(&mut buf);
    let mags: Vec<f64> = buf[..size / 2].iter().map(|c| c.norm()).collect();
    let k = (1..mags.len() - 1)
        .max_by(|&a, &b| mags[a].total_cmp(&mags[b]))
        .unwrap();
    let (a, b, c) = (mags[k - 1].ln(), mags[k].ln(), mags[k + 1].ln());
    let shift = 0.5 * (a - c) / (a - 2.0 * b + c);
    (k as f64 + shift) * rate as f64 / size as f64
}
