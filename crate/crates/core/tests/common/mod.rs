#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::Path;

use audiocons::audio::write_wav;
use audiocons::encoder::{EncoderDescriptor, EncoderKind};
use audiocons::harness::ExperimentConfig;
use audiocons::synth::{babble_noise, write_synthetic_corpus};
use audiocons::transform::Category;
use tempfile::TempDir;

/// Corpus of `n` synthetic clips plus a babble noise file in a fresh
/// directory, with a small grid over every category.
pub fn fixture(n: usize) -> (TempDir, ExperimentConfig) {
    let dir = tempfile::tempdir().unwrap();
    write_synthetic_corpus(&dir.path().join("corpus"), n, 0).unwrap();
    let noise = dir.path().join("babble.wav");
    write_wav(&noise, &babble_noise(4.0, 0)).unwrap();
    let mut config = ExperimentConfig::new(
        dir.path().join("corpus"),
        vec![EncoderDescriptor::new("mfcc", EncoderKind::MfccStats)],
    );
    config.noise_wav_path = Some(noise);
    config.output_dir = dir.path().join("run");
    config.grids = small_grids();
    config.n_boot = 200;
    (dir, config)
}

pub fn small_grids() -> BTreeMap<Category, Vec<f64>> {
    BTreeMap::from([
        (Category::PN, vec![30.0, 0.0]),
        (Category::EN, vec![30.0, 0.0]),
        (Category::TS, vec![50.0, 120.0]),
        (Category::PS, vec![-200.0, 100.0]),
        (Category::MP, vec![32.0, 192.0]),
    ])
}

pub fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}
