use std::fs;
use std::path::PathBuf;

use rayon::prelude::*;

use super::{ExperimentConfig, HarnessError};
use crate::audio::{crop_excerpt, load_audio, resample, AudioClip, AudioError, ANALYSIS_RATE};
use crate::seed::derive_seed;

/// Excerpts of the test set, sorted by clip id.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub clips: Vec<AudioClip>,
    /// Files that could not be used, with the reason.
    pub skipped: Vec<(PathBuf, String)>,
}

fn prepare(path: &PathBuf, frames: usize, crop_seed: u64) -> Result<AudioClip, AudioError> {
    let clip = resample(&load_audio(path)?, ANALYSIS_RATE)?;
    let seed = derive_seed(crop_seed, &[clip.id()]);
    crop_excerpt(&clip, frames, seed)
}

/// Loads every `*.wav` under the corpus directory (not recursive),
/// downmixes, resamples to 22050 Hz and crops one excerpt per file.
/// Unusable files are skipped and listed.
pub fn ingest_corpus(config: &ExperimentConfig) -> Result<Corpus, HarnessError> {
    let dir = &config.corpus_dir;
    let entries = fs::read_dir(dir).map_err(|e| HarnessError::io(dir, e))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .and_then(|x| x.to_str())
                    .is_some_and(|x| x.eq_ignore_ascii_case("wav"))
        })
        .collect();
    paths.sort();

    let crop_seed = config.seeds.crop();
    let results: Vec<_> = paths
        .par_iter()
        .map(|p| prepare(p, config.excerpt_frames, crop_seed))
        .collect();

    let mut clips = Vec::new();
    let mut skipped = Vec::new();
    for (path, r) in paths.into_iter().zip(results) {
        match r {
            Ok(c) => clips.push(c),
            Err(e) => skipped.push((path, e.to_string())),
        }
    }
    clips.sort_by(|a, b| a.id().cmp(b.id()));
    if let Some(w) = clips.windows(2).find(|w| w[0].id() == w[1].id()) {
        return Err(HarnessError::Corpus(format!(
            "duplicate clip id {:?}",
            w[0].id()
        )));
    }
    if let Some(n) = config.test_set_size {
        clips.truncate(n);
    }
    if clips.len() < 2 {
        return Err(HarnessError::Corpus(format!(
            "{} usable clip(s) in {}; at least 2 are needed",
            clips.len(),
            dir.display()
        )));
    }
    Ok(Corpus { clips, skipped })
}
