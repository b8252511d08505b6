use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::TransformError;
use crate::audio::AudioClip;

pub const MIN_NOISE_LEN: usize = 4096;
const PINK_RMS: f64 = 0.1;

/// Pink noise by spectral synthesis: `1/sqrt(f)` magnitudes, uniform random
/// phases, inverse FFT, scaled to RMS 0.1.
pub fn generate_pink_noise(
    length: usize,
    sample_rate: u32,
    seed: u64,
) -> Result<AudioClip, TransformError> {
    if length < MIN_NOISE_LEN {
        return Err(TransformError::InvalidSpec(format!(
            "pink noise needs at least {MIN_NOISE_LEN} samples, got {length}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spectrum = vec![Complex64::new(0.0, 0.0); length];
    for k in 1..=length / 2 {
        let mag = 1.0 / (k as f64).sqrt();
        let phase = if 2 * k == length {
            // Nyquist bin must stay real
            if rng.random_bool(0.5) {
                0.0
            } else {
                PI
            }
        } else {
            rng.random_range(0.0..2.0 * PI)
        };
        spectrum[k] = Complex64::from_polar(mag, phase);
        if 2 * k != length {
            spectrum[length - k] = spectrum[k].conj();
        }
    }
    FftPlanner::new()
        .plan_fft_inverse(length)
        .process(&mut spectrum);
    let mut samples: Vec<f64> = spectrum.iter().map(|c| c.re).collect();
    let rms = (samples.iter().map(|s| s * s).sum::<f64>() / length as f64).sqrt();
    for s in &mut samples {
        *s *= PINK_RMS / rms;
    }
    Ok(AudioClip::new(format!("pink-{seed}"), sample_rate, samples)?)
}

/// Repeats `noise` from `offset` until it covers `len` samples.
pub fn tile(noise: &[f64], offset: usize, len: usize) -> Vec<f64> {
    noise.iter().cycle().skip(offset % noise.len()).take(len).copied().collect()
}

/// Adds `noise` (tiled or truncated to the signal length) at a gain that sets
/// the full-excerpt power ratio to `snr_db`.
pub fn mix_at_snr(
    signal: &AudioClip,
    noise: &AudioClip,
    snr_db: f64,
) -> Result<AudioClip, TransformError> {
    if signal.sample_rate() != noise.sample_rate() {
        return Err(TransformError::InvalidSpec(format!(
            "noise at {} Hz cannot be mixed into a {} Hz signal",
            noise.sample_rate(),
            signal.sample_rate()
        )));
    }
    if !snr_db.is_finite() {
        return Err(TransformError::InvalidSpec("SNR must be finite".into()));
    }
    let noise = tile(noise.samples(), 0, signal.len());
    let signal_power = signal.power();
    let noise_power = noise.iter().map(|s| s * s).sum::<f64>() / noise.len() as f64;
    if signal_power == 0.0 {
        return Err(TransformError::Silent("signal"));
    }
    if noise_power == 0.0 {
        return Err(TransformError::Silent("noise"));
    }
    let gain = (signal_power / (noise_power * 10f64.powf(snr_db / 10.0))).sqrt();
    let mixed = signal
        .samples()
        .iter()
        .zip(&noise)
        .map(|(s, n)| s + gain * n)
        .collect();
    Ok(signal.with_samples(mixed)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{sine, white_noise};

    /// Welch periodogram with Hann segments of `seg` samples, 50% overlap.
    fn welch(x: &[f64], seg: usize) -> Vec<f64> {
        let hop = seg / 2;
        let w: Vec<f64> = (0..seg)
            .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / seg as f64).cos())
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(seg);
        let mut acc = vec![0.0; seg / 2 + 1];
        let mut count = 0;
        let mut start = 0;
        while start + seg <= x.len() {
            let mut buf: Vec<Complex64> = (0..seg)
                .map(|i| Complex64::new(x[start + i] * w[i], 0.0))
                .collect();
            fft.process(&mut buf);
            for (a, c) in acc.iter_mut().zip(&buf) {
                *a += c.norm_sqr();
            }
            count += 1;
            start += hop;
        }
        acc.iter().map(|a| a / count as f64).collect()
    }

    #[test]
    fn pink_slope_is_minus_ten_db_per_decade() {
        let rate = 22050;
        let noise = generate_pink_noise(22050 * 4, rate, 17).unwrap();
        let seg = 4096;
        let psd = welch(noise.samples(), seg);
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for (k, p) in psd.iter().enumerate() {
            let f = k as f64 * rate as f64 / seg as f64;
            if (100.0..=8000.0).contains(&f) {
                xs.push(f.log10());
                ys.push(10.0 * p.log10());
            }
        }
        let n = xs.len() as f64;
        let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        let slope = sxy / sxx;
        assert!((slope + 10.0).abs() <= 1.5, "slope {slope} dB/decade");
        assert!((noise.rms() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn pink_is_seeded() {
        let n = 33536;
        let a = generate_pink_noise(n, 22050, 1).unwrap();
        assert_eq!(a, generate_pink_noise(n, 22050, 1).unwrap());
        // brute-force normalised cross-correlation over +-2048 lags
        for seed in 2..6 {
            let b = generate_pink_noise(n, 22050, seed).unwrap();
            let norm = a.power() * n as f64;
            let peak = (-2048isize..=2048)
                .map(|lag| {
                    (0..n as isize)
                        .filter_map(|i| {
                            let j = i + lag;
                            (j >= 0 && j < n as isize)
                                .then(|| a.samples()[i as usize] * b.samples()[j as usize])
                        })
                        .sum::<f64>()
                        .abs()
                        / norm
                })
                .fold(0.0, f64::max);
            assert!(peak < 0.2, "seed {seed}: peak correlation {peak}");
        }
        assert!(generate_pink_noise(100, 22050, 1).is_err());
    }

    fn snr_by_subtraction(clean: &AudioClip, mixed: &AudioClip) -> f64 {
        let residual: f64 = clean
            .samples()
            .iter()
            .zip(mixed.samples())
            .map(|(c, m)| (m - c) * (m - c))
            .sum::<f64>()
            / clean.len() as f64;
        10.0 * (clean.power() / residual).log10()
    }

    #[test]
    fn snr_is_exact() {
        let signal = sine("s", 22050, 33536, 440.0, 0.5);
        let noise = generate_pink_noise(20000, 22050, 4).unwrap();
        for snr in [30.0, 20.0, 0.0, -15.0] {
            let mixed = mix_at_snr(&signal, &noise, snr).unwrap();
            assert_eq!(mixed.len(), signal.len());
            assert!((snr_by_subtraction(&signal, &mixed) - snr).abs() < 0.01);
        }
        let zero = mix_at_snr(&signal, &noise, 0.0).unwrap();
        let scaled_rms = (zero
            .samples()
            .iter()
            .zip(signal.samples())
            .map(|(m, s)| (m - s) * (m - s))
            .sum::<f64>()
            / signal.len() as f64)
            .sqrt();
        assert!((scaled_rms / signal.rms() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn silent_inputs_are_rejected() {
        let silence = AudioClip::new("z", 22050, vec![0.0; 5000]).unwrap();
        let noise = white_noise("n", 5000, 0.1, 1);
        assert!(matches!(
            mix_at_snr(&silence, &noise, 10.0),
            Err(TransformError::Silent("signal"))
        ));
        assert!(matches!(
            mix_at_snr(&noise, &silence, 10.0),
            Err(TransformError::Silent("noise"))
        ));
    }
}
