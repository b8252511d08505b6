use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::Array2;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{AudioClip, AudioError, ANALYSIS_RATE};

pub const WINDOW_LEN: usize = 1024;
pub const FRAME_HOP: usize = 256;

/// Periodic Hann window.
pub(crate) fn hann(len: usize) -> Vec<f64> {
    (0..len)
        .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / len as f64).cos())
        .collect()
}

/// Short-time Fourier analysis without centre padding: frame `k` covers
/// samples `[k * hop, k * hop + window)`.
pub struct Stft {
    window: Vec<f64>,
    hop: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl Stft {
    pub fn new(window_len: usize, hop: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(window_len);
        Self {
            window: hann(window_len),
            hop,
            fft,
        }
    }

    pub fn window_len(&self) -> usize {
        self.window.len()
    }

    pub fn hop(&self) -> usize {
        self.hop
    }

    pub fn bins(&self) -> usize {
        self.window.len() / 2 + 1
    }

    pub fn frame_count(&self, len: usize) -> usize {
        if len < self.window.len() {
            0
        } else {
            (len - self.window.len()) / self.hop + 1
        }
    }

    /// Positive-frequency spectrum of the windowed frame starting at `start`.
    /// Samples past the end of the buffer read as zero.
    pub fn frame(&self, samples: &[f64], start: usize, out: &mut Vec<Complex64>) {
        let n = self.window.len();
        out.clear();
        out.extend((0..n).map(|i| {
            let s = samples.get(start + i).copied().unwrap_or(0.0);
            Complex64::new(s * self.window[i], 0.0)
        }));
        self.fft.process(out);
        out.truncate(self.bins());
    }

    pub fn magnitudes(&self, samples: &[f64]) -> Array2<f64> {
        let frames = self.frame_count(samples.len());
        let mut values = Array2::zeros((frames, self.bins()));
        let mut buf = Vec::with_capacity(self.window.len());
        for (k, mut row) in values.rows_mut().into_iter().enumerate() {
            self.frame(samples, k * self.hop, &mut buf);
            for (dst, c) in row.iter_mut().zip(&buf) {
                *dst = c.norm();
            }
        }
        values
    }
}

/// Linear magnitude STFT, `[frames x 513]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MagnitudeSpectrogram {
    values: Array2<f64>,
    window: usize,
    hop: usize,
}

impl MagnitudeSpectrogram {
    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn frames(&self) -> usize {
        self.values.nrows()
    }

    pub fn bin_count(&self) -> usize {
        self.values.ncols()
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn hop(&self) -> usize {
        self.hop
    }

    /// `20 log10(max(m, amin))`, the input representation deep encoders expect.
    pub fn to_db(&self, amin: f64) -> Array2<f64> {
        self.values.mapv(|m| 20.0 * m.max(amin).log10())
    }

    /// Mean over frames of each bin.
    pub fn mean_spectrum(&self) -> Vec<f64> {
        let frames = self.frames() as f64;
        self.values
            .columns()
            .into_iter()
            .map(|c| c.sum() / frames)
            .collect()
    }
}

pub fn stft_magnitude(clip: &AudioClip) -> Result<MagnitudeSpectrogram, AudioError> {
    clip.require_rate(ANALYSIS_RATE)?;
    if clip.len() < WINDOW_LEN {
        return Err(AudioError::TooShort {
            needed: WINDOW_LEN,
            got: clip.len(),
        });
    }
    let stft = Stft::new(WINDOW_LEN, FRAME_HOP);
    Ok(MagnitudeSpectrogram {
        values: stft.magnitudes(clip.samples()),
        window: WINDOW_LEN,
        hop: FRAME_HOP,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::sine;

    #[test]
    fn frame_count_formula() {
        let clip = AudioClip::new("z", 22050, vec![0.0; 33792]).unwrap();
        let spec = stft_magnitude(&clip).unwrap();
        assert_eq!(spec.frames(), 129);
        assert_eq!(spec.bin_count(), 513);
        assert!(spec.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_short_or_wrong_rate() {
        let short = AudioClip::new("z", 22050, vec![0.0; 1023]).unwrap();
        assert!(matches!(
            stft_magnitude(&short),
            Err(AudioError::TooShort { .. })
        ));
        let other = AudioClip::new("z", 44100, vec![0.0; 4096]).unwrap();
        assert!(matches!(
            stft_magnitude(&other),
            Err(AudioError::SampleRate { .. })
        ));
    }

    /// Direct DFT of one Hann-windowed frame, independent of the FFT path.
    fn direct_dft_magnitudes(frame: &[f64]) -> Vec<f64> {
        let n = frame.len();
        let w = hann(n);
        (0..=n / 2)
            .map(|k| {
                let (mut re, mut im) = (0.0, 0.0);
                for (i, (&x, &wi)) in frame.iter().zip(&w).enumerate() {
                    let ph = -2.0 * PI * (k * i) as f64 / n as f64;
                    re += x * wi * ph.cos();
                    im += x * wi * ph.sin();
                }
                (re * re + im * im).sqrt()
            })
            .collect()
    }

    #[test]
    fn bin_centre_sine_peaks_in_bin_32() {
        let freq = 32.0 * 22050.0 / 1024.0;
        let clip = sine("s", 22050, 8192, freq, 1.0);
        let spec = stft_magnitude(&clip).unwrap();
        let oracle = direct_dft_magnitudes(&clip.samples()[256..256 + 1024]);
        let oracle_peak = argmax(&oracle);
        assert_eq!(oracle_peak, 32);
        for row in spec.values().rows() {
            assert_eq!(argmax(row.as_slice().unwrap()), oracle_peak);
        }
        let fft_row = spec.values().row(1);
        for (a, b) in fft_row.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-8 * (1.0 + b));
        }
    }

    fn argmax(v: &[f64]) -> usize {
        v.iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0
    }
}
