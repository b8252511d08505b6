//! Synthetic test corpus: tone mixtures, band-filtered noise and
//! amplitude-modulated chords, plus a babble-like noise bed.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::audio::{write_wav, AudioClip, AudioError, ANALYSIS_RATE};
use crate::seed::derive_seed;

pub const CLIP_SECONDS: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthKind {
    ToneMixture,
    FilteredNoise,
    ModulatedChord,
}

impl SynthKind {
    pub fn for_index(i: usize) -> Self {
        match i % 3 {
            0 => SynthKind::ToneMixture,
            1 => SynthKind::FilteredNoise,
            _ => SynthKind::ModulatedChord,
        }
    }
}

fn n_samples(secs: f64) -> usize {
    (secs * ANALYSIS_RATE as f64).round() as usize
}

fn normalize(mut x: Vec<f64>, peak: f64) -> Vec<f64> {
    let m = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if m > 0.0 {
        x.iter_mut().for_each(|v| *v *= peak / m);
    }
    x
}

/// RBJ constant-peak band-pass biquad.
fn bandpass(x: &[f64], center: f64, q: f64) -> Vec<f64> {
    let w0 = 2.0 * PI * center / ANALYSIS_RATE as f64;
    let alpha = w0.sin() / (2.0 * q);
    let a0 = 1.0 + alpha;
    let (b0, b2) = (alpha / a0, -alpha / a0);
    let (a1, a2) = (-2.0 * w0.cos() / a0, (1.0 - alpha) / a0);
    let (mut x1, mut x2, mut y1, mut y2) = (0.0, 0.0, 0.0, 0.0);
    x.iter()
        .map(|&v| {
            let y = b0 * v + b2 * x2 - a1 * y1 - a2 * y2;
            x2 = x1;
            x1 = v;
            y2 = y1;
            y1 = y;
            y
        })
        .collect()
}

fn tone_mixture(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let rate = ANALYSIS_RATE as f64;
    let voices = rng.random_range(2..=4);
    let mut out = vec![0.0; n];
    for _ in 0..voices {
        let f0 = 110.0 * 2f64.powf(rng.random_range(0.0..4.0));
        let partials = rng.random_range(1..=6);
        let tilt = rng.random_range(0.5..1.5);
        let vibrato = rng.random_range(0.0..0.01);
        let vib_rate = rng.random_range(3.0..7.0);
        for k in 1..=partials {
            let f = f0 * k as f64;
            if f > 0.45 * rate {
                break;
            }
            let amp = (k as f64).powf(-tilt);
            let phase0 = rng.random_range(0.0..2.0 * PI);
            let mut phase = phase0;
            for (i, o) in out.iter_mut().enumerate() {
                let t = i as f64 / rate;
                let inst = f * (1.0 + vibrato * (2.0 * PI * vib_rate * t).sin());
                phase += 2.0 * PI * inst / rate;
                *o += amp * phase.sin();
            }
        }
    }
    out
}

fn filtered_noise(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let bands = rng.random_range(1..=2);
    let white: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let mut out = vec![0.0; n];
    for _ in 0..bands {
        let center = 150.0 * 2f64.powf(rng.random_range(0.0..5.5));
        let q = rng.random_range(1.0..8.0);
        let band = bandpass(&white, center, q);
        let gain = rng.random_range(0.5..1.0);
        out.iter_mut().zip(band).for_each(|(o, b)| *o += gain * b);
    }
    out
}

fn modulated_chord(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    const SHAPES: [&[f64]; 4] = [
        &[0.0, 4.0, 7.0],
        &[0.0, 3.0, 7.0],
        &[0.0, 4.0, 7.0, 11.0],
        &[0.0, 5.0, 7.0, 10.0],
    ];
    let rate = ANALYSIS_RATE as f64;
    let root = 98.0 * 2f64.powf(rng.random_range(0.0..3.0));
    let shape = SHAPES[rng.random_range(0..SHAPES.len())];
    let mod_rate = rng.random_range(1.0..12.0);
    let depth = rng.random_range(0.3..0.95);
    let mut out = vec![0.0; n];
    for &semi in shape {
        let f = root * 2f64.powf(semi / 12.0);
        let phase0 = rng.random_range(0.0..2.0 * PI);
        for (i, o) in out.iter_mut().enumerate() {
            let t = i as f64 / rate;
            let p = 2.0 * PI * f * t + phase0;
            *o += p.sin() + 0.3 * (2.0 * p).sin();
        }
    }
    for (i, o) in out.iter_mut().enumerate() {
        let t = i as f64 / rate;
        *o *= 1.0 - depth * 0.5 * (1.0 - (2.0 * PI * mod_rate * t).cos());
    }
    out
}

/// One 2 s clip at 22050 Hz; the kind cycles with `index`.
pub fn synthetic_clip(index: usize, seed: u64) -> AudioClip {
    let id = format!("syn{index:03}");
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &["synth", &id]));
    let n = n_samples(CLIP_SECONDS);
    let x = match SynthKind::for_index(index) {
        SynthKind::ToneMixture => tone_mixture(&mut rng, n),
        SynthKind::FilteredNoise => filtered_noise(&mut rng, n),
        SynthKind::ModulatedChord => modulated_chord(&mut rng, n),
    };
    let x = with_floor(&mut rng, x);
    AudioClip::new(id, ANALYSIS_RATE, normalize(x, 0.5)).expect("synthetic clip is valid")
}

/// Adds a broadband background 25 to 35 dB below the signal, as in a
/// recording, so no mel band is empty.
fn with_floor(rng: &mut ChaCha8Rng, x: Vec<f64>) -> Vec<f64> {
    let power = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
    let snr: f64 = rng.random_range(25.0..35.0);
    let g = (power / 10f64.powf(snr / 10.0)).sqrt();
    x.into_iter()
        .map(|v| v + g * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// Several band-limited noise voices with syllable-rate envelopes.
pub fn babble_noise(secs: f64, seed: u64) -> AudioClip {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &["babble"]));
    let n = n_samples(secs);
    let rate = ANALYSIS_RATE as f64;
    let mut out = vec![0.0; n];
    for _ in 0..6 {
        let white: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let formant = rng.random_range(300.0..2500.0);
        let voice = bandpass(&white, formant, 2.0);
        let syl = rng.random_range(3.0..6.0);
        let ph = rng.random_range(0.0..2.0 * PI);
        for (i, (o, v)) in out.iter_mut().zip(voice).enumerate() {
            let env = 0.5 + 0.5 * (2.0 * PI * syl * i as f64 / rate + ph).sin();
            *o += env * v;
        }
    }
    AudioClip::new("babble", ANALYSIS_RATE, normalize(out, 0.5)).expect("noise is valid")
}

/// Writes `n` synthetic clips as `syn000.wav`, ... into `dir`.
pub fn write_synthetic_corpus(dir: &Path, n: usize, seed: u64) -> Result<Vec<PathBuf>, AudioError> {
    fs::create_dir_all(dir).map_err(|e| AudioError::Write {
        path: dir.display().to_string(),
        reason: e.to_string(),
    })?;
    (0..n)
        .map(|i| {
            let clip = synthetic_clip(i, seed);
            let path = dir.join(format!("{}.wav", clip.id()));
            write_wav(&path, &clip)?;
            Ok(path)
        })
        .collect()
}
