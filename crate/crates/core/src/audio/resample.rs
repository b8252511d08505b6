use std::sync::OnceLock;

use super::{AudioClip, AudioError};

/// Half-width of the interpolation kernel in zero crossings of the cutoff sinc.
const ZERO_CROSSINGS: usize = 32;
/// Kernel table resolution per zero crossing.
const TABLE_DENSITY: usize = 512;
const KAISER_BETA: f64 = 9.0;
/// Passband edge as a fraction of the lower of the two Nyquist rates.
const ROLLOFF: f64 = 0.94;

fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let half = x / 2.0;
    for k in 1..64 {
        term *= (half / k as f64) * (half / k as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

/// Windowed sinc sampled on `[0, ZERO_CROSSINGS]`.
fn kernel_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = ZERO_CROSSINGS * TABLE_DENSITY + 2;
        let norm = bessel_i0(KAISER_BETA);
        (0..n)
            .map(|i| {
                let x = i as f64 / TABLE_DENSITY as f64;
                if x >= ZERO_CROSSINGS as f64 {
                    return 0.0;
                }
                let sinc = if i == 0 {
                    1.0
                } else {
                    (std::f64::consts::PI * x).sin() / (std::f64::consts::PI * x)
                };
                let r = x / ZERO_CROSSINGS as f64;
                let window = bessel_i0(KAISER_BETA * (1.0 - r * r).sqrt()) / norm;
                sinc * window
            })
            .collect()
    })
}

#[inline]
fn kernel_at(table: &[f64], x: f64) -> f64 {
    let pos = x.abs() * TABLE_DENSITY as f64;
    let idx = pos as usize;
    if idx + 1 >= table.len() {
        return 0.0;
    }
    let frac = pos - idx as f64;
    table[idx] + (table[idx + 1] - table[idx]) * frac
}

/// Band-limited resampling of a raw sample buffer.
///
/// `ratio` is output rate over input rate. Each output sample is evaluated
/// against a Kaiser-windowed sinc spanning at least 64 input taps; signal
/// outside the buffer is treated as zero.
pub fn resample_by_ratio(samples: &[f64], ratio: f64, out_len: usize) -> Vec<f64> {
    assert!(ratio > 0.0 && ratio.is_finite(), "resampling ratio must be positive");
    let table = kernel_table();
    let cutoff = ROLLOFF * ratio.min(1.0);
    let half_width = ZERO_CROSSINGS as f64 / cutoff;
    let step = 1.0 / ratio;
    let last = samples.len() as isize - 1;

    (0..out_len)
        .map(|n| {
            let t = n as f64 * step;
            let lo = ((t - half_width).ceil() as isize).max(0);
            let hi = ((t + half_width).floor() as isize).min(last);
            let mut acc = 0.0;
            for k in lo..=hi {
                acc += samples[k as usize] * kernel_at(table, (t - k as f64) * cutoff);
            }
            acc * cutoff
        })
        .collect()
}

/// Resamples a clip to `target_rate`, preserving its id.
///
/// The output holds `round(len * target / source)` samples. Equal rates
/// return the input unchanged.
pub fn resample(clip: &AudioClip, target_rate: u32) -> Result<AudioClip, AudioError> {
    if target_rate == 0 {
        return Err(AudioError::InvalidClip("target rate must be positive".into()));
    }
    let source_rate = clip.sample_rate();
    if source_rate == target_rate {
        return Ok(clip.clone());
    }
    let len = clip.len() as u64;
    let out_len = ((len * target_rate as u64 + source_rate as u64 / 2) / source_rate as u64)
        .max(1) as usize;
    let ratio = target_rate as f64 / source_rate as f64;
    let samples = resample_by_ratio(clip.samples(), ratio, out_len);
    AudioClip::new(clip.id(), target_rate, samples)
}
