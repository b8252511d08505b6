//! Integrated loudness after EBU R128 / ITU-R BS.1770: K-weighting, 400 ms
//! blocks at 75% overlap, absolute gate at -70 LUFS and relative gate at
//! -10 LU.

use std::f64::consts::PI;
use std::fmt;

use super::{AudioClip, AudioError};

const ABSOLUTE_GATE: f64 = -70.0;
const RELATIVE_GATE: f64 = -10.0;

/// Integrated loudness in LUFS. Digital silence is `-inf`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Loudness(pub f64);

impl Loudness {
    pub fn lufs(self) -> f64 {
        self.0
    }

    pub fn is_silent(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }
}

impl fmt::Display for Loudness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2} LUFS", self.0)
    }
}

#[derive(Clone, Copy)]
struct Biquad {
    b0: f64,
    b1: f64,
    b2: f64,
    a1: f64,
    a2: f64,
}

impl Biquad {
    /// Head-effect high shelf, redesigned for `rate` from the 48 kHz prototype.
    fn high_shelf(rate: f64) -> Self {
        let gain_db = 3.999_843_853_973_347;
        let q = 0.707_175_236_955_419_3;
        let centre = 1_681.974_450_955_531_9;
        let k = (PI * centre / rate).tan();
        let vh = 10f64.powf(gain_db / 20.0);
        let vb = vh.powf(0.499_666_774_154_541_6);
        let a0 = 1.0 + k / q + k * k;
        Self {
            b0: (vh + vb * k / q + k * k) / a0,
            b1: 2.0 * (k * k - vh) / a0,
            b2: (vh - vb * k / q + k * k) / a0,
            a1: 2.0 * (k * k - 1.0) / a0,
            a2: (1.0 - k / q + k * k) / a0,
        }
    }

    /// RLB high-pass.
    fn high_pass(rate: f64) -> Self {
        let q = 0.500_327_037_325_395_3;
        let centre = 38.135_470_876_139_82;
        let k = (PI * centre / rate).tan();
        let a0 = 1.0 + k / q + k * k;
        Self {
            b0: 1.0,
            b1: -2.0,
            b2: 1.0,
            a1: 2.0 * (k * k - 1.0) / a0,
            a2: (1.0 - k / q + k * k) / a0,
        }
    }

    fn run(&self, input: &[f64]) -> Vec<f64> {
        let (mut x1, mut x2, mut y1, mut y2) = (0.0, 0.0, 0.0, 0.0);
        input
            .iter()
            .map(|&x0| {
                let y0 = self.b0 * x0 + self.b1 * x1 + self.b2 * x2 - self.a1 * y1 - self.a2 * y2;
                x2 = x1;
                x1 = x0;
                y2 = y1;
                y1 = y0;
                y0
            })
            .collect()
    }
}

fn block_loudness(power: f64) -> f64 {
    -0.691 + 10.0 * power.log10()
}

/// Minimum clip length for one gating block.
pub(crate) fn block_len(rate: u32) -> usize {
    (rate as f64 * 0.4).round() as usize
}

pub fn integrated_loudness(clip: &AudioClip) -> Result<Loudness, AudioError> {
    let rate = clip.sample_rate();
    let block = block_len(rate);
    if clip.len() < block {
        return Err(AudioError::TooShort {
            needed: block,
            got: clip.len(),
        });
    }
    let rate_f = rate as f64;
    let weighted = Biquad::high_pass(rate_f).run(&Biquad::high_shelf(rate_f).run(clip.samples()));

    // mean square per 100 ms step; a block is four consecutive steps
    let step = (rate_f * 0.1).round() as usize;
    let steps = (weighted.len() - block) / step + 1;
    let block_powers: Vec<f64> = (0..steps)
        .map(|j| {
            let start = j * step;
            weighted[start..start + block].iter().map(|y| y * y).sum::<f64>() / block as f64
        })
        .collect();

    let above_absolute: Vec<f64> = block_powers
        .iter()
        .copied()
        .filter(|&p| p > 0.0 && block_loudness(p) > ABSOLUTE_GATE)
        .collect();
    if above_absolute.is_empty() {
        return Ok(Loudness(f64::NEG_INFINITY));
    }
    let mean_abs = above_absolute.iter().sum::<f64>() / above_absolute.len() as f64;
    let relative = block_loudness(mean_abs) + RELATIVE_GATE;
    let gated: Vec<f64> = above_absolute
        .into_iter()
        .filter(|&p| block_loudness(p) > relative)
        .collect();
    let mean = gated.iter().sum::<f64>() / gated.len() as f64;
    Ok(Loudness(block_loudness(mean)))
}

/// Result of [`match_loudness`].
#[derive(Debug, Clone)]
pub struct LoudnessMatch {
    pub clip: AudioClip,
    pub gain: f64,
    /// Some output sample exceeds full scale. Samples are not hard-clipped.
    pub clipped: bool,
}

/// Scales `clip` by a single gain so its integrated loudness equals that of
/// `reference`.
pub fn match_loudness(clip: &AudioClip, reference: &AudioClip) -> Result<LoudnessMatch, AudioError> {
    let target = integrated_loudness(reference)?;
    if target.is_silent() {
        return Err(AudioError::Silent("reference"));
    }
    let current = integrated_loudness(clip)?;
    if current.is_silent() {
        return Err(AudioError::Silent("input"));
    }
    let gain = 10f64.powf((target.0 - current.0) / 20.0);
    let out = clip.scaled(gain);
    let clipped = out.samples().iter().any(|s| s.abs() > 1.0);
    Ok(LoudnessMatch {
        clip: out,
        gain,
        clipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{sine, white_noise};

    #[test]
    fn full_scale_997_hz_sine() {
        for rate in [22050, 44100, 48000] {
            let clip = sine("s", rate, rate as usize * 5, 997.0, 1.0);
            let l = integrated_loudness(&clip).unwrap();
            assert!((l.0 + 3.01).abs() < 0.1, "{rate} Hz: {l}");
        }
    }

    #[test]
    fn gain_law() {
        let clip = white_noise("n", 22050 * 3, 0.2, 5);
        let base = integrated_loudness(&clip).unwrap().0;
        for g in [0.1, 0.5, 2.0] {
            let l = integrated_loudness(&clip.scaled(g)).unwrap().0;
            assert!((l - base - 20.0 * g.log10()).abs() < 0.01, "gain {g}");
        }
    }

    #[test]
    fn silence_is_negative_infinity() {
        let clip = AudioClip::new("z", 22050, vec![0.0; 22050]).unwrap();
        assert!(integrated_loudness(&clip).unwrap().is_silent());
    }

    #[test]
    fn too_short() {
        let clip = AudioClip::new("z", 22050, vec![0.1; 8819]).unwrap();
        assert!(matches!(
            integrated_loudness(&clip),
            Err(AudioError::TooShort { needed: 8820, .. })
        ));
    }

    #[test]
    fn matching_recovers_gain() {
        let reference = white_noise("n", 22050 * 2, 0.2, 9);
        let same = match_loudness(&reference, &reference).unwrap();
        assert!((same.gain - 1.0).abs() < 0.01);
        let quiet = reference.scaled(0.25);
        let m = match_loudness(&quiet, &reference).unwrap();
        assert!((m.gain - 4.0).abs() < 0.05);
        assert!(!m.clipped);
    }

    #[test]
    fn matching_flags_overs_and_rejects_silence() {
        let loud = sine("s", 22050, 22050, 440.0, 0.9);
        let quiet = loud.scaled(0.01);
        let hot = white_noise("n", 22050, 0.5, 2);
        let m = match_loudness(&hot, &loud).unwrap();
        let _ = m.clipped;
        let silent = AudioClip::new("z", 22050, vec![0.0; 22050]).unwrap();
        assert!(matches!(
            match_loudness(&quiet, &silent),
            Err(AudioError::Silent("reference"))
        ));
        let boosted = match_loudness(&loud, &loud.scaled(4.0)).unwrap();
        assert!(boosted.clipped);
    }
}
