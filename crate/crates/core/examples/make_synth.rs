//! Writes the synthetic corpus, a babble noise bed and a starter config.
//!
//! cargo run --release --example make_synth -- <dir> [n_clips] [seed]

use std::path::PathBuf;

use audiocons::audio::write_wav;
use audiocons::synth::{babble_noise, write_synthetic_corpus};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "synthetic".into()));
    let n: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(50);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0);

    write_synthetic_corpus(&dir.join("corpus"), n, seed)?;
    write_wav(dir.join("babble.wav"), &babble_noise(10.0, seed))?;
    let config = r#"corpus_dir = "corpus"
noise_wav_path = "babble.wav"
output_dir = "run"
phase_locking = true

[measures]
audio = ["dtw", "simple"]
latent = ["euclidean", "cosine"]

[seeds]
root = 0

[[encoders]]
id = "mfcc"
kind = "mfcc_stats"
"#;
    std::fs::write(dir.join("experiment.toml"), config)?;
    println!("{}", dir.join("experiment.toml").display());
    Ok(())
}
