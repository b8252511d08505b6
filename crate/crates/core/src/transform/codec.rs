//! Lossy-compression transformation: an external encoder/decoder round trip,
//! or a deterministic surrogate when no codec is installed.

use std::path::{Path, PathBuf};
use std::process::Command;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{check_range, Category, TransformError};
use crate::audio::{load_audio, resample, write_wav, AudioClip};

const MAX_LAG: usize = 4096;
const SUSPECT_CORRELATION: f64 = 0.5;

/// Shell command templates for an encode/decode pair. `{in}`, `{out}` and
/// `{bitrate}` are substituted before running through `sh -c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodecCommand {
    pub encode: String,
    pub decode: String,
    /// Extension of the intermediate compressed file.
    #[serde(default = "default_extension")]
    pub extension: String,
    #[serde(default)]
    pub scratch_dir: Option<PathBuf>,
}

fn default_extension() -> String {
    "mp3".to_string()
}

impl CodecCommand {
    /// ffmpeg-based MP3 round trip.
    pub fn ffmpeg() -> Self {
        Self {
            encode: "ffmpeg -nostdin -loglevel error -y -i {in} -codec:a libmp3lame -b:a {bitrate}k {out}"
                .into(),
            decode: "ffmpeg -nostdin -loglevel error -y -i {in} -c:a pcm_f32le {out}".into(),
            extension: default_extension(),
            scratch_dir: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CodecOutcome {
    pub clip: AudioClip,
    /// Samples by which the decoded stream lagged the input.
    pub lag: isize,
    pub correlation: f64,
    /// Alignment correlation fell below 0.5.
    pub suspect: bool,
}

fn render(template: &str, input: &Path, output: &Path, bitrate: f64) -> String {
    template
        .replace("{in}", &shell_quote(input))
        .replace("{out}", &shell_quote(output))
        .replace("{bitrate}", &format!("{bitrate}"))
}

fn shell_quote(p: &Path) -> String {
    format!("'{}'", p.display().to_string().replace('\'', r"'\''"))
}

fn run_shell(command: &str) -> Result<(), TransformError> {
    let output = Command::new("sh")
        .arg("-c")
        .arg(command)
        .output()
        .map_err(|e| TransformError::CodecUnavailable(format!("cannot spawn sh: {e}")))?;
    match output.status.code() {
        Some(0) => Ok(()),
        // sh reports a missing executable as 127 and a non-executable one as 126
        Some(126) | Some(127) => Err(TransformError::CodecUnavailable(
            String::from_utf8_lossy(&output.stderr).trim().to_string(),
        )),
        code => Err(TransformError::CodecFailed {
            status: code,
            stderr: String::from_utf8_lossy(&output.stderr).trim().to_string(),
        }),
    }
}

/// Encodes `clip` at `bitrate` kb/s with the external tool, decodes it back,
/// resamples to the input rate and removes codec delay by cross-correlation
/// over +-4096 samples. The result has exactly the input length.
pub fn codec_roundtrip(
    clip: &AudioClip,
    bitrate: f64,
    command: &CodecCommand,
) -> Result<CodecOutcome, TransformError> {
    check_range(Category::MP, bitrate)?;
    let scratch = match &command.scratch_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| TransformError::Io(e.to_string()))?;
            tempfile::tempdir_in(dir)
        }
        None => tempfile::tempdir(),
    }
    .map_err(|e| TransformError::Io(e.to_string()))?;

    let wav_in = scratch.path().join("in.wav");
    let encoded = scratch.path().join(format!("enc.{}", command.extension));
    let wav_out = scratch.path().join("out.wav");
    write_wav(&wav_in, clip)?;
    run_shell(&render(&command.encode, &wav_in, &encoded, bitrate))?;
    run_shell(&render(&command.decode, &encoded, &wav_out, bitrate))?;
    let decoded = resample(&load_audio(&wav_out)?, clip.sample_rate())?;

    let (lag, correlation) = align(clip.samples(), decoded.samples(), MAX_LAG);
    let aligned: Vec<f64> = (0..clip.len())
        .map(|n| {
            let src = n as isize + lag;
            if src >= 0 {
                decoded.samples().get(src as usize).copied().unwrap_or(0.0)
            } else {
                0.0
            }
        })
        .collect();
    Ok(CodecOutcome {
        clip: clip.with_samples(aligned)?,
        lag,
        correlation,
        suspect: correlation < SUSPECT_CORRELATION,
    })
}

/// Lag `l` in `[-max_lag, max_lag]` maximising the correlation of
/// `reference[n]` with `other[n + l]`, and the Pearson correlation at that lag
/// over the overlapping samples.
pub fn align(reference: &[f64], other: &[f64], max_lag: usize) -> (isize, f64) {
    let size = (reference.len() + other.len()).next_power_of_two();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(size);
    let ifft = planner.plan_fft_inverse(size);
    let pad = |x: &[f64]| {
        let mut v: Vec<Complex64> = x.iter().map(|&s| Complex64::new(s, 0.0)).collect();
        v.resize(size, Complex64::new(0.0, 0.0));
        v
    };
    let (mut a, mut b) = (pad(reference), pad(other));
    fft.process(&mut a);
    fft.process(&mut b);
    let mut cross: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x.conj() * y).collect();
    ifft.process(&mut cross);

    // cross[l mod size] = sum_n reference[n] * other[n + l]
    let max_lag = max_lag as isize;
    let best = (-max_lag..=max_lag)
        .max_by(|&l, &m| {
            let at = |lag: isize| cross[lag.rem_euclid(size as isize) as usize].re;
            at(l).total_cmp(&at(m)).then(m.abs().cmp(&l.abs()))
        })
        .unwrap_or(0);
    (best, pearson_at_lag(reference, other, best))
}

fn pearson_at_lag(reference: &[f64], other: &[f64], lag: isize) -> f64 {
    let pairs: Vec<(f64, f64)> = (0..reference.len())
        .filter_map(|n| {
            let j = n as isize + lag;
            (j >= 0 && (j as usize) < other.len()).then(|| (reference[n], other[j as usize]))
        })
        .collect();
    if pairs.len() < 2 {
        return 0.0;
    }
    let k = pairs.len() as f64;
    let (ma, mb) = pairs
        .iter()
        .fold((0.0, 0.0), |(sa, sb), (a, b)| (sa + a / k, sb + b / k));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (a, b) in &pairs {
        sab += (a - ma) * (b - mb);
        saa += (a - ma) * (a - ma);
        sbb += (b - mb) * (b - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        0.0
    } else {
        sab / (saa * sbb).sqrt()
    }
}

/// Low-pass cutoff of the surrogate codec: `min(nyquist, 1000 * sqrt(kbps))`.
pub fn surrogate_cutoff(bitrate: f64, sample_rate: u32) -> f64 {
    (1000.0 * bitrate.sqrt()).min(sample_rate as f64 / 2.0)
}

/// Deterministic compression stand-in: brick-wall low-pass at
/// [`surrogate_cutoff`] plus uniform quantisation of spectral magnitudes with
/// step `max_magnitude / bitrate`, phases kept.
pub fn surrogate_codec(clip: &AudioClip, bitrate: f64) -> Result<AudioClip, TransformError> {
    check_range(Category::MP, bitrate)?;
    let n = clip.len();
    let rate = clip.sample_rate();
    let mut planner = FftPlanner::new();
    let mut spec: Vec<Complex64> = clip
        .samples()
        .iter()
        .map(|&s| Complex64::new(s, 0.0))
        .collect();
    planner.plan_fft_forward(n).process(&mut spec);

    let cutoff = surrogate_cutoff(bitrate, rate);
    let max_mag = spec.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let step = max_mag / bitrate;
    for k in 0..=n / 2 {
        let f = k as f64 * rate as f64 / n as f64;
        let q = if f > cutoff || step == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            let c = spec[k];
            let m = (c.norm() / step).round() * step;
            if m == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                c * (m / c.norm())
            }
        };
        spec[k] = q;
        if k != 0 && 2 * k != n {
            spec[n - k] = q.conj();
        }
    }
    planner.plan_fft_inverse(n).process(&mut spec);
    let samples = spec.iter().map(|c| c.re / n as f64).collect();
    Ok(clip.with_samples(samples)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{sine, white_noise};

    fn rms_diff(a: &AudioClip, b: &AudioClip) -> f64 {
        (a.samples()
            .iter()
            .zip(b.samples())
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            / a.len() as f64)
            .sqrt()
    }

    fn band_energy(x: &AudioClip, lo: f64) -> f64 {
        let n = x.len();
        let mut buf: Vec<Complex64> = x.samples().iter().map(|&s| Complex64::new(s, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        (0..=n / 2)
            .filter(|&k| k as f64 * x.sample_rate() as f64 / n as f64 >= lo)
            .map(|k| buf[k].norm_sqr())
            .sum()
    }

    #[test]
    fn top_bitrate_is_full_band() {
        assert_eq!(surrogate_cutoff(320.0, 22050), 11025.0);
        assert!(surrogate_cutoff(8.0, 22050) < 4000.0);
    }

    #[test]
    fn error_shrinks_with_bitrate() {
        let clip = white_noise("n", 33536, 0.3, 8);
        let errs: Vec<f64> = [8.0, 64.0, 320.0]
            .iter()
            .map(|&b| rms_diff(&clip, &surrogate_codec(&clip, b).unwrap()))
            .collect();
        assert!(errs[0] >= errs[1] && errs[1] >= errs[2], "{errs:?}");
    }

    #[test]
    fn idempotent_at_fixed_bitrate() {
        let clip = white_noise("n", 33536, 0.3, 8);
        for b in [8.0, 128.0, 320.0] {
            let once = surrogate_codec(&clip, b).unwrap();
            let twice = surrogate_codec(&once, b).unwrap();
            assert!((twice.rms() / once.rms() - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn low_bitrate_strips_highs() {
        let clip = white_noise("n", 33536, 0.3, 3);
        let out = surrogate_codec(&clip, 8.0).unwrap();
        let drop = 10.0 * (band_energy(&clip, 4000.0) / band_energy(&out, 4000.0).max(1e-300)).log10();
        assert!(drop > 20.0, "{drop} dB");
    }

    #[test]
    fn align_finds_known_delay() {
        let clip = white_noise("n", 20000, 0.3, 1);
        let mut delayed = vec![0.0; 1105];
        delayed.extend_from_slice(clip.samples());
        let (lag, corr) = align(clip.samples(), &delayed, MAX_LAG);
        assert_eq!(lag, 1105);
        assert!(corr > 0.999);
        let (lag, _) = align(&delayed, clip.samples(), MAX_LAG);
        assert_eq!(lag, -1105);
    }

    fn sh_available() -> bool {
        Command::new("sh").arg("-c").arg("true").status().is_ok()
    }

    #[test]
    fn copy_codec_round_trip_is_lossless() {
        if !sh_available() {
            return;
        }
        let cmd = CodecCommand {
            encode: "cp {in} {out}".into(),
            decode: "cp {in} {out}".into(),
            extension: "wav".into(),
            scratch_dir: None,
        };
        let clip = sine("s", 22050, 33536, 440.0, 0.5);
        let out = codec_roundtrip(&clip, 128.0, &cmd).unwrap();
        assert_eq!(out.clip.len(), clip.len());
        assert_eq!(out.lag, 0);
        assert!(out.correlation > 0.999 && !out.suspect);
        assert!(rms_diff(&clip, &out.clip) < 1e-6);
    }

    #[test]
    fn missing_tool_is_unavailable_and_failures_are_errors() {
        if !sh_available() {
            return;
        }
        let clip = sine("s", 22050, 4096, 440.0, 0.5);
        let missing = CodecCommand {
            encode: "definitely-not-a-codec-binary {in} {out}".into(),
            decode: "cp {in} {out}".into(),
            extension: "bin".into(),
            scratch_dir: None,
        };
        assert!(matches!(
            codec_roundtrip(&clip, 128.0, &missing),
            Err(TransformError::CodecUnavailable(_))
        ));
        let failing = CodecCommand {
            encode: "exit 3".into(),
            ..missing
        };
        assert!(matches!(
            codec_roundtrip(&clip, 128.0, &failing),
            Err(TransformError::CodecFailed { status: Some(3), .. })
        ));
    }
}
