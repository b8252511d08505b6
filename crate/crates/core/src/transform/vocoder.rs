//! Phase-vocoder time stretching and the pitch shifter built on it.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::grid::check_range;
use super::{Category, TransformError};
use crate::audio::{resample_by_ratio, AudioClip, Stft, FRAME_HOP, WINDOW_LEN};

fn wrap_phase(p: f64) -> f64 {
    p - 2.0 * PI * ((p + PI) / (2.0 * PI)).floor()
}

/// Local magnitude maxima over a +-2 bin neighbourhood.
fn spectral_peaks(mags: &[f64]) -> Vec<usize> {
    let n = mags.len();
    (0..n)
        .filter(|&k| {
            let lo = k.saturating_sub(2);
            let hi = (k + 2).min(n - 1);
            (lo..=hi).all(|j| j == k || mags[k] > mags[j])
        })
        .collect()
}

/// Stretches `samples` by `factor` (output duration over input duration)
/// keeping pitch. Analysis hop 256, synthesis hop `round(256 * factor)`,
/// 1024-sample Hann windows, per-bin instantaneous-frequency phase
/// propagation. With `phase_locking`, bins follow the phase of the nearest
/// spectral peak (identity phase locking).
///
/// Output holds `round(len * factor)` samples.
pub fn time_stretch(samples: &[f64], factor: f64, phase_locking: bool) -> Vec<f64> {
    assert!(factor > 0.0 && factor.is_finite());
    let n = WINDOW_LEN;
    let analysis_hop = FRAME_HOP;
    let synthesis_hop = ((analysis_hop as f64 * factor).round() as usize).max(1);
    let out_len = (samples.len() as f64 * factor).round() as usize;

    let mut padded = vec![0.0; n];
    padded.extend_from_slice(samples);
    padded.extend(std::iter::repeat_n(0.0, n));

    let stft = Stft::new(n, analysis_hop);
    let ifft = FftPlanner::new().plan_fft_inverse(n);
    let window = crate::audio::hann(n);
    let bins = stft.bins();
    let frames = stft.frame_count(padded.len());

    let total = (frames - 1) * synthesis_hop + n;
    let mut out = vec![0.0; total];
    let mut norm = vec![0.0; total];

    let bin_advance: Vec<f64> = (0..bins)
        .map(|k| 2.0 * PI * k as f64 * analysis_hop as f64 / n as f64)
        .collect();
    let mut prev_phase = vec![0.0; bins];
    let mut synth_phase = vec![0.0; bins];
    let mut spec = Vec::with_capacity(n);
    let mut full = vec![Complex64::new(0.0, 0.0); n];
    let ratio = synthesis_hop as f64 / analysis_hop as f64;

    for m in 0..frames {
        stft.frame(&padded, m * analysis_hop, &mut spec);
        let mags: Vec<f64> = spec.iter().map(|c| c.norm()).collect();
        let phases: Vec<f64> = spec.iter().map(|c| c.arg()).collect();

        if m == 0 {
            synth_phase.copy_from_slice(&phases);
        } else {
            let advance = |k: usize| {
                let dev = wrap_phase(phases[k] - prev_phase[k] - bin_advance[k]);
                (bin_advance[k] + dev) * ratio
            };
            if phase_locking {
                let peaks = spectral_peaks(&mags);
                if peaks.is_empty() {
                    for k in 0..bins {
                        synth_phase[k] += advance(k);
                    }
                } else {
                    for &p in &peaks {
                        synth_phase[p] += advance(p);
                    }
                    let mut region = 0;
                    for k in 0..bins {
                        while region + 1 < peaks.len()
                            && k >= (peaks[region] + peaks[region + 1]).div_ceil(2)
                        {
                            region += 1;
                        }
                        let p = peaks[region];
                        if k != p {
                            synth_phase[k] = synth_phase[p] + phases[k] - phases[p];
                        }
                    }
                }
            } else {
                for k in 0..bins {
                    synth_phase[k] += advance(k);
                }
            }
        }
        prev_phase.copy_from_slice(&phases);

        for k in 0..bins {
            full[k] = Complex64::from_polar(mags[k], synth_phase[k]);
        }
        for k in 1..n - bins + 1 {
            full[n - k] = full[k].conj();
        }
        full[n / 2] = Complex64::new(full[n / 2].re, 0.0);
        ifft.process(&mut full);

        let start = m * synthesis_hop;
        for i in 0..n {
            let w = window[i];
            out[start + i] += full[i].re / n as f64 * w;
            norm[start + i] += w * w;
        }
    }

    let peak_norm = norm.iter().copied().fold(0.0, f64::max);
    let floor = peak_norm * 1e-2;
    for (o, w) in out.iter_mut().zip(&norm) {
        *o /= w.max(floor);
    }

    let offset = (n as f64 * ratio).round() as usize;
    let mut result: Vec<f64> = out.into_iter().skip(offset).take(out_len).collect();
    result.resize(out_len, 0.0);
    result
}

/// Changes tempo to `percent` of the original without changing pitch.
pub fn tempo_shift(clip: &AudioClip, percent: f64) -> Result<AudioClip, TransformError> {
    tempo_shift_with(clip, percent, false)
}

pub fn tempo_shift_with(
    clip: &AudioClip,
    percent: f64,
    phase_locking: bool,
) -> Result<AudioClip, TransformError> {
    check_range(Category::TS, percent)?;
    let stretched = time_stretch(clip.samples(), 100.0 / percent, phase_locking);
    Ok(clip.with_samples(stretched)?)
}

/// Shifts pitch by `cents` keeping duration: time-stretch by
/// `r = 2^(cents/1200)`, then resample by `1/r`.
pub fn pitch_shift(clip: &AudioClip, cents: f64) -> Result<AudioClip, TransformError> {
    pitch_shift_with(clip, cents, false)
}

pub fn pitch_shift_with(
    clip: &AudioClip,
    cents: f64,
    phase_locking: bool,
) -> Result<AudioClip, TransformError> {
    check_range(Category::PS, cents)?;
    let r = 2f64.powf(cents / 1200.0);
    let stretched = time_stretch(clip.samples(), r, phase_locking);
    if r == 1.0 {
        return Ok(clip.with_samples(stretched)?);
    }
    let shifted = resample_by_ratio(&stretched, 1.0 / r, clip.len());
    Ok(clip.with_samples(shifted)?)
}
