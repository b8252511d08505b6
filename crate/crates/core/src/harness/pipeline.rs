use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Condvar, Mutex};

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::cache::{decode_f64s, encode_f64s, Cache, CacheStats};
use super::corpus::{ingest_corpus, Corpus};
use super::{ExperimentConfig, HarnessError};
use crate::audio::{load_audio, mfcc, resample, write_wav, AudioClip, FeatureSequence, MfccConfig, ANALYSIS_RATE};
use crate::distance::{pairwise_distances, DistanceMatrix, Measure, Representation, Space};
use crate::encoder::{
    load_external_embeddings, mfcc_stats_encode, toy_encode, Embedding, EmbeddingKey,
    EncoderDescriptor, EncoderKind,
};
use crate::metrics::{
    agreement, between_rho_rows, summarize, ConsistencyRecord, DeltaVector, Metric, MetricsError,
};
use crate::seed::derive_seed;
use crate::transform::{
    apply_transform, excerpt_file_name, Category, CodecMode, TransformContext, TransformError,
    TransformSpec,
};

/// Counting semaphore bounding concurrent codec subprocesses.
struct Semaphore {
    free: Mutex<usize>,
    cv: Condvar,
}

impl Semaphore {
    fn new(n: usize) -> Self {
        Self {
            free: Mutex::new(n.max(1)),
            cv: Condvar::new(),
        }
    }

    fn run<T>(&self, f: impl FnOnce() -> T) -> T {
        let mut free = self.free.lock().expect("semaphore lock");
        while *free == 0 {
            free = self.cv.wait(free).expect("semaphore lock");
        }
        *free -= 1;
        drop(free);
        let out = f();
        *self.free.lock().expect("semaphore lock") += 1;
        self.cv.notify_one();
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupStatus {
    Ok,
    Skipped,
    Failed,
}

/// Outcome of one transform group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupOutcome {
    pub spec: TransformSpec,
    pub status: GroupStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

/// A consistency record with the per-point values it summarises.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordEntry {
    pub record: ConsistencyRecord,
    pub values: Vec<Option<f64>>,
}

/// How an encoder is evaluated in the pipeline.
#[derive(Debug, Clone)]
enum Active {
    Native(EncoderDescriptor),
    Identity(EncoderDescriptor),
    External(EncoderDescriptor, BTreeMap<EmbeddingKey, Embedding>),
}

impl Active {
    fn descriptor(&self) -> &EncoderDescriptor {
        match self {
            Active::Native(d) | Active::Identity(d) | Active::External(d, _) => d,
        }
    }
}

pub(crate) enum Latent {
    SameAsAudio,
    Rep(Representation, String),
}

pub(crate) struct Cell {
    audio: Representation,
    audio_hash: String,
    latent: Vec<Latent>,
}

impl Cell {
    fn latent(&self, e: usize) -> (&Representation, &str) {
        match &self.latent[e] {
            Latent::SameAsAudio => (&self.audio, &self.audio_hash),
            Latent::Rep(r, h) => (r, h),
        }
    }
}

fn rep_hash(rep: &Representation) -> String {
    let mut h = Sha256::new();
    let values: &[f64] = match rep {
        Representation::Sequence(s) => {
            h.update(b"seq");
            h.update((s.dims() as u64).to_le_bytes());
            s.as_flat()
        }
        Representation::Vector(v) => {
            h.update(b"vec");
            v.values()
        }
    };
    for x in values {
        h.update(x.to_le_bytes());
    }
    hex::encode(h.finalize())
}

/// Everything fixed before any transform runs.
pub struct Pipeline {
    config: ExperimentConfig,
    corpus: Corpus,
    ctx: TransformContext,
    encoders: Vec<Active>,
    specs: Vec<TransformSpec>,
    transform_fingerprint: String,
    codec_slots: Semaphore,
    log: Vec<String>,
}

pub(crate) type Groups = Vec<(TransformSpec, Result<Vec<Cell>, GroupOutcome>)>;

/// Distance matrices of one transform group.
pub struct GroupMatrices {
    pub spec: TransformSpec,
    /// One per audio measure.
    pub audio: Vec<DistanceMatrix>,
    /// Per encoder: one per latent measure (audio measures when mirrored).
    pub latent: Vec<Vec<DistanceMatrix>>,
}

impl Pipeline {
    /// Validates inputs, loads the noise source and the corpus, and loads
    /// external embeddings for the full grid.
    pub fn prepare(config: &ExperimentConfig) -> Result<Self, HarnessError> {
        Self::build(config, true)
    }

    /// Like `prepare`, but external encoders are left out, so their
    /// embeddings need not exist yet.
    pub fn prepare_transforms_only(config: &ExperimentConfig) -> Result<Self, HarnessError> {
        Self::build(config, false)
    }

    fn build(config: &ExperimentConfig, with_external: bool) -> Result<Self, HarnessError> {
        config.validate()?;
        let categories = config.transform_categories();
        let mut log = Vec::new();

        let environmental_noise = if categories.contains(&Category::EN) {
            let path = config.noise_wav_path.as_ref().ok_or_else(|| {
                HarnessError::Config("EN is in the grid but noise_wav_path is not set".into())
            })?;
            if !path.is_file() {
                return Err(HarnessError::MissingInput(path.clone()));
            }
            let noise = load_audio(path).map_err(|e| HarnessError::Corpus(e.to_string()))?;
            Some(resample(&noise, ANALYSIS_RATE).map_err(|e| HarnessError::Corpus(e.to_string()))?)
        } else {
            None
        };
        if !config.corpus_dir.is_dir() {
            return Err(HarnessError::MissingInput(config.corpus_dir.clone()));
        }

        let codec = match (&config.codec, config.skip_codec) {
            (Some(cmd), false) => CodecMode::External(cmd.clone()),
            _ => CodecMode::Surrogate,
        };
        let ctx = TransformContext {
            environmental_noise,
            codec,
            seed: config.seeds.noise(),
            phase_locking: config.phase_locking,
        };

        let corpus = ingest_corpus(config)?;
        log.push(format!(
            "corpus: {} clips, {} skipped",
            corpus.clips.len(),
            corpus.skipped.len()
        ));
        for (p, why) in &corpus.skipped {
            log.push(format!("skipped {}: {why}", p.display()));
        }

        let mut specs = vec![TransformSpec::original()];
        for c in &categories {
            specs.extend(config.grid(*c)?.specs());
        }

        let mut encoders = Vec::new();
        for d in &config.encoders {
            if d.kind == EncoderKind::External && !with_external {
                continue;
            }
            encoders.push(match d.kind {
                EncoderKind::MfccStats | EncoderKind::Toy => Active::Native(d.clone()),
                EncoderKind::Identity => Active::Identity(d.clone()),
                EncoderKind::External => {
                    let manifest = d.manifest.as_ref().expect("validated");
                    let required: Vec<EmbeddingKey> = corpus
                        .clips
                        .iter()
                        .flat_map(|c| specs.iter().map(|s| (c.id().to_string(), *s)))
                        .collect();
                    let ext = load_external_embeddings(manifest, &required)?;
                    Active::External(d.clone(), ext.map)
                }
            });
        }

        let transform_fingerprint = {
            let mut h = Sha256::new();
            h.update(ctx.seed.to_le_bytes());
            h.update([u8::from(ctx.phase_locking)]);
            if let Some(n) = &ctx.environmental_noise {
                h.update(n.content_hash());
            }
            match &ctx.codec {
                CodecMode::Surrogate => h.update(b"surrogate"),
                CodecMode::External(c) => {
                    h.update(c.encode.as_bytes());
                    h.update(c.decode.as_bytes());
                    h.update(c.extension.as_bytes());
                }
            }
            h.update(serde_json::to_vec(&MfccConfig::default()).expect("serialisable"));
            hex::encode(h.finalize())
        };

        Ok(Self {
            codec_slots: Semaphore::new(config.subprocess_limit),
            config: config.clone(),
            corpus,
            ctx,
            encoders,
            specs,
            transform_fingerprint,
            log,
        })
    }

    pub fn clips(&self) -> &[AudioClip] {
        &self.corpus.clips
    }

    pub fn specs(&self) -> &[TransformSpec] {
        &self.specs
    }

    pub fn log(&self) -> &[String] {
        &self.log
    }

    pub fn skipped_files(&self) -> &[(PathBuf, String)] {
        &self.corpus.skipped
    }

    fn transform(&self, clip: &AudioClip, spec: &TransformSpec) -> Result<AudioClip, TransformError> {
        let run = || apply_transform(clip, spec, &self.ctx);
        let out = if spec.category() == Category::MP && matches!(self.ctx.codec, CodecMode::External(_)) {
            self.codec_slots.run(run)?
        } else {
            run()?
        };
        Ok(out.clip)
    }

    /// Writes every transformed excerpt to `dir` under the excerpt naming
    /// scheme. Returns the number of files written and the failed groups.
    pub fn write_excerpts(&self, dir: &Path) -> Result<(usize, Vec<GroupOutcome>), HarnessError> {
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        let jobs: Vec<(usize, usize)> = (0..self.specs.len())
            .flat_map(|s| (0..self.corpus.clips.len()).map(move |c| (s, c)))
            .collect();
        let results: Vec<Result<(), String>> = jobs
            .par_iter()
            .map(|&(s, c)| {
                let (clip, spec) = (&self.corpus.clips[c], &self.specs[s]);
                let out = self
                    .transform(clip, spec)
                    .map_err(|e| format!("{}: {e}", clip.id()))?;
                write_wav(dir.join(excerpt_file_name(clip.id(), spec)), &out)
                    .map_err(|e| e.to_string())
            })
            .collect();
        let mut written = 0;
        let mut failed: BTreeMap<TransformSpec, String> = BTreeMap::new();
        for (&(s, _), r) in jobs.iter().zip(results) {
            match r {
                Ok(()) => written += 1,
                Err(e) => {
                    failed.entry(self.specs[s]).or_insert(e);
                }
            }
        }
        let outcomes = failed
            .into_iter()
            .map(|(spec, message)| GroupOutcome {
                spec,
                status: GroupStatus::Failed,
                message: Some(message),
            })
            .collect();
        Ok((written, outcomes))
    }

    fn cell_key(&self, clip: &AudioClip, spec: &TransformSpec) -> String {
        Cache::key(&[
            &clip.content_hash(),
            clip.id(),
            &spec.key(),
            &self.transform_fingerprint,
        ])
    }

    fn encoder_fingerprint(d: &EncoderDescriptor) -> String {
        format!("{:?}:{:?}", d.kind, d.seed)
    }

    fn encode_native(d: &EncoderDescriptor, clip: &AudioClip) -> Result<Embedding, HarnessError> {
        Ok(match d.kind {
            EncoderKind::MfccStats => mfcc_stats_encode(clip)?,
            EncoderKind::Toy => toy_encode(clip, d.seed.unwrap_or(0))?,
            _ => unreachable!("only native encoders run here"),
        })
    }

    fn cell(&self, clip: &AudioClip, spec: &TransformSpec, cache: &Cache) -> Result<Cell, HarnessError> {
        let base = self.cell_key(clip, spec);
        let features = cache.get("features", &base, |b| {
            let (h, v) = decode_f64s(b, 2)?;
            let frames = Array2::from_shape_vec((h[0] as usize, h[1] as usize), v).ok()?;
            FeatureSequence::new(frames).ok()
        });
        let mut latent: Vec<Option<Latent>> = Vec::with_capacity(self.encoders.len());
        for enc in &self.encoders {
            latent.push(match enc {
                Active::Identity(_) => Some(Latent::SameAsAudio),
                Active::External(d, map) => {
                    let emb = map.get(&(clip.id().to_string(), *spec)).ok_or_else(|| {
                        HarnessError::Encoder(crate::encoder::EncoderError::MissingKeys(vec![
                            crate::encoder::key_name(&(clip.id().to_string(), *spec)),
                        ]))
                    })?;
                    let _ = d;
                    let rep = Representation::Vector(emb.clone());
                    let h = rep_hash(&rep);
                    Some(Latent::Rep(rep, h))
                }
                Active::Native(d) => {
                    let key = Cache::key(&[&base, &Self::encoder_fingerprint(d)]);
                    cache
                        .get("embedding", &key, |b| {
                            let (_, v) = decode_f64s(b, 0)?;
                            Embedding::new(d.id.clone(), v).ok()
                        })
                        .map(|e| {
                            let rep = Representation::Vector(e);
                            let h = rep_hash(&rep);
                            Latent::Rep(rep, h)
                        })
                }
            });
        }

        let needs_audio = features.is_none() || latent.iter().any(Option::is_none);
        let transformed = if needs_audio {
            Some(self.transform(clip, spec)?)
        } else {
            None
        };

        let features = match features {
            Some(f) => f,
            None => {
                let f = mfcc(transformed.as_ref().expect("computed above"))
                    .map_err(|e| HarnessError::Transform(e.into()))?;
                cache.put(
                    "features",
                    &base,
                    &encode_f64s(&[f.len() as u64, f.dims() as u64], f.as_flat()),
                )?;
                f
            }
        };
        let mut filled = Vec::with_capacity(latent.len());
        for (enc, l) in self.encoders.iter().zip(latent) {
            filled.push(match l {
                Some(l) => l,
                None => {
                    let Active::Native(d) = enc else {
                        unreachable!("only native encoders can miss")
                    };
                    let emb = Self::encode_native(d, transformed.as_ref().expect("computed above"))?;
                    let key = Cache::key(&[&base, &Self::encoder_fingerprint(d)]);
                    cache.put("embedding", &key, &encode_f64s(&[], emb.values()))?;
                    let rep = Representation::Vector(emb);
                    let h = rep_hash(&rep);
                    Latent::Rep(rep, h)
                }
            });
        }
        let audio = Representation::Sequence(features);
        let audio_hash = rep_hash(&audio);
        Ok(Cell {
            audio,
            audio_hash,
            latent: filled,
        })
    }

    /// Transforms, features and embeddings for every (clip, spec) cell,
    /// grouped by spec. A failing cell fails its whole group.
    pub(crate) fn compute_cells(&self, cache: &Cache) -> Groups {
        let n = self.corpus.clips.len();
        let jobs: Vec<(usize, usize)> = (0..self.specs.len())
            .flat_map(|s| (0..n).map(move |c| (s, c)))
            .collect();
        let mut results: Vec<Result<Cell, HarnessError>> = jobs
            .par_iter()
            .map(|&(s, c)| self.cell(&self.corpus.clips[c], &self.specs[s], cache))
            .collect();
        let mut groups = Vec::with_capacity(self.specs.len());
        for (s, spec) in self.specs.iter().enumerate().rev() {
            let cells: Vec<_> = results.drain(s * n..).collect();
            let mut ok = Vec::with_capacity(n);
            let mut failure = None;
            for (c, r) in cells.into_iter().enumerate() {
                match r {
                    Ok(cell) => ok.push(cell),
                    Err(e) => {
                        let skip = matches!(&e, HarnessError::Transform(t) if t.is_skip());
                        failure = Some(GroupOutcome {
                            spec: *spec,
                            status: if skip { GroupStatus::Skipped } else { GroupStatus::Failed },
                            message: Some(format!("{}: {e}", self.corpus.clips[c].id())),
                        });
                        break;
                    }
                }
            }
            groups.push((*spec, failure.map_or(Ok(ok), Err)));
        }
        groups.reverse();
        groups
    }

    fn latent_measures(&self, e: usize) -> Result<Vec<Measure>, HarnessError> {
        match self.encoders[e] {
            Active::Identity(_) => self.config.audio_measures(),
            _ => self.config.latent_measures(),
        }
    }

    fn matrix(
        &self,
        cache: &Cache,
        space: Space,
        tag: &str,
        measure: &Measure,
        spec: TransformSpec,
        rows: &[(&str, &Representation, &str)],
        cols: &[(&str, &Representation, &str)],
    ) -> Result<DistanceMatrix, HarnessError> {
        let mut parts: Vec<String> = vec![
            space.to_string(),
            tag.to_string(),
            format!("{measure:?}"),
            spec.key(),
        ];
        for (id, _, h) in rows.iter().chain(cols) {
            parts.push(format!("{id}={h}"));
        }
        parts.push(rows.len().to_string());
        let refs: Vec<&str> = parts.iter().map(String::as_str).collect();
        let key = Cache::key(&refs);
        let row_ids: Vec<String> = rows.iter().map(|r| r.0.to_string()).collect();
        let col_ids: Vec<String> = cols.iter().map(|c| c.0.to_string()).collect();
        let cached = cache.get("distance", &key, |b| {
            let (_, v) = decode_f64s(b, 0)?;
            let values = Array2::from_shape_vec((rows.len(), cols.len()), v).ok()?;
            DistanceMatrix::new(space, measure.name(), spec, row_ids.clone(), col_ids.clone(), values).ok()
        });
        if let Some(dm) = cached {
            return Ok(dm);
        }
        let r: Vec<(&str, &Representation)> = rows.iter().map(|(i, rep, _)| (*i, *rep)).collect();
        let c: Vec<(&str, &Representation)> = cols.iter().map(|(i, rep, _)| (*i, *rep)).collect();
        let dm = pairwise_distances(&r, &c, measure, space, spec)?;
        cache.put(
            "distance",
            &key,
            &encode_f64s(&[], dm.values().as_slice().expect("standard layout")),
        )?;
        Ok(dm)
    }

    /// Transformed-versus-original distance matrices for every complete
    /// group. Groups whose distances fail are returned as outcomes.
    pub(crate) fn compute_distances(
        &self,
        groups: &Groups,
        cache: &Cache,
    ) -> Result<(Vec<GroupMatrices>, Vec<GroupOutcome>), HarnessError> {
        let originals = match &groups[0] {
            (spec, Ok(cells)) if spec.is_original() => cells,
            (_, Err(o)) => {
                return Err(HarnessError::Corpus(format!(
                    "original excerpts could not be processed: {}",
                    o.message.as_deref().unwrap_or("unknown error")
                )))
            }
            _ => unreachable!("OG group comes first"),
        };
        let ids: Vec<&str> = self.corpus.clips.iter().map(|c| c.id()).collect();
        let audio_measures = self.config.audio_measures()?;
        let mut out = Vec::new();
        let mut failed = Vec::new();
        for (spec, cells) in groups {
            let cells = match cells {
                Ok(c) => c,
                Err(o) => {
                    failed.push(o.clone());
                    continue;
                }
            };
            let result = (|| -> Result<GroupMatrices, HarnessError> {
                let rows: Vec<_> = ids
                    .iter()
                    .zip(cells)
                    .map(|(id, c)| (*id, &c.audio, c.audio_hash.as_str()))
                    .collect();
                let cols: Vec<_> = ids
                    .iter()
                    .zip(originals)
                    .map(|(id, c)| (*id, &c.audio, c.audio_hash.as_str()))
                    .collect();
                let audio = audio_measures
                    .iter()
                    .map(|m| self.matrix(cache, Space::Audio, "", m, *spec, &rows, &cols))
                    .collect::<Result<Vec<_>, _>>()?;
                let mut latent = Vec::new();
                for e in 0..self.encoders.len() {
                    let tag = &self.encoders[e].descriptor().id;
                    let rows: Vec<_> = ids
                        .iter()
                        .zip(cells)
                        .map(|(id, c)| {
                            let (r, h) = c.latent(e);
                            (*id, r, h)
                        })
                        .collect();
                    let cols: Vec<_> = ids
                        .iter()
                        .zip(originals)
                        .map(|(id, c)| {
                            let (r, h) = c.latent(e);
                            (*id, r, h)
                        })
                        .collect();
                    latent.push(
                        self.latent_measures(e)?
                            .iter()
                            .map(|m| self.matrix(cache, Space::Latent, tag, m, *spec, &rows, &cols))
                            .collect::<Result<Vec<_>, _>>()?,
                    );
                }
                Ok(GroupMatrices {
                    spec: *spec,
                    audio,
                    latent,
                })
            })();
            match result {
                Ok(g) => out.push(g),
                Err(e) => failed.push(GroupOutcome {
                    spec: *spec,
                    status: GroupStatus::Failed,
                    message: Some(e.to_string()),
                }),
            }
        }
        Ok((out, failed))
    }

    /// Writes every matrix as `<dir>/<spec key>/<space>_<encoder>_<measure>.csv`
    /// with its JSON sidecar.
    pub fn write_matrices(&self, matrices: &[GroupMatrices], dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
        let mut written = Vec::new();
        for g in matrices {
            let sub = dir.join(g.spec.key());
            fs::create_dir_all(&sub).map_err(|e| HarnessError::io(&sub, e))?;
            for dm in &g.audio {
                let p = sub.join(format!("audio_{}.csv", dm.measure()));
                dm.write(&p)?;
                written.push(p);
            }
            for (e, dms) in g.latent.iter().enumerate() {
                for dm in dms {
                    let id = &self.encoders[e].descriptor().id;
                    let p = sub.join(format!("latent_{id}_{}.csv", dm.measure()));
                    dm.write(&p)?;
                    written.push(p);
                }
            }
        }
        Ok(written)
    }

    /// Consistency records for every group, encoder and measure pair.
    pub(crate) fn compute_records(
        &self,
        matrices: &[GroupMatrices],
    ) -> (Vec<RecordEntry>, Vec<GroupOutcome>) {
        let mut out = Vec::new();
        let mut failed = Vec::new();
        for g in matrices {
            match self.group_records(g) {
                Ok(r) => out.extend(r),
                Err(e) => failed.push(GroupOutcome {
                    spec: g.spec,
                    status: GroupStatus::Failed,
                    message: Some(e.to_string()),
                }),
            }
        }
        (out, failed)
    }

    fn group_records(&self, g: &GroupMatrices) -> Result<Vec<RecordEntry>, MetricsError> {
        let cfg = &self.config;
        let boot = cfg.seeds.bootstrap();
        let spec_key = g.spec.key();
        let audio_deltas = g
            .audio
            .iter()
            .map(DeltaVector::from_matrix)
            .collect::<Result<Vec<_>, _>>()?;
        let mut out = Vec::new();
        for (e, enc) in self.encoders.iter().enumerate() {
            let d = enc.descriptor();
            let latent_deltas = g.latent[e]
                .iter()
                .map(DeltaVector::from_matrix)
                .collect::<Result<Vec<_>, _>>()?;
            let pairs: Vec<(usize, usize)> = match enc {
                Active::Identity(_) => (0..g.audio.len()).map(|a| (a, a)).collect(),
                _ => (0..g.audio.len())
                    .flat_map(|a| (0..g.latent[e].len()).map(move |l| (a, l)))
                    .collect(),
            };
            for (a, l) in pairs {
                let (am, lm) = (g.audio[a].measure(), g.latent[e][l].measure());
                let complement = |dv: &DeltaVector| -> Vec<Option<f64>> {
                    dv.entries.values().map(|&x| Some(1.0 - f64::from(x))).collect()
                };
                let rho: Vec<Option<f64>> = between_rho_rows(&g.audio[a], &g.latent[e][l])?
                    .into_iter()
                    .map(|(_, r)| match r {
                        Ok(v) => Ok(Some(v)),
                        Err(MetricsError::UndefinedCorrelation | MetricsError::TooFew { .. }) => Ok(None),
                        Err(other) => Err(other),
                    })
                    .collect::<Result<_, _>>()?;
                let per_metric = [
                    (Metric::CwAudio, complement(&audio_deltas[a]), vec!["CW_audio", am, &spec_key]),
                    (
                        Metric::CwLatent,
                        complement(&latent_deltas[l]),
                        vec![&d.id, "CW_latent", lm, &spec_key],
                    ),
                    (
                        Metric::CbAcc,
                        agreement(&audio_deltas[a], &latent_deltas[l])?
                            .into_iter()
                            .map(Some)
                            .collect(),
                        vec![&d.id, "CB_acc", am, lm, &spec_key],
                    ),
                    (Metric::CbRho, rho, vec![&d.id, "CB_rho", am, lm, &spec_key]),
                ];
                for (metric, values, labels) in per_metric {
                    let summary = summarize(&values, cfg.n_boot, cfg.ci_level, derive_seed(boot, &labels))?;
                    out.push(RecordEntry {
                        record: ConsistencyRecord {
                            encoder: d.id.clone(),
                            task_label: d.task_label().to_string(),
                            audio_measure: am.to_string(),
                            latent_measure: lm.to_string(),
                            spec: g.spec,
                            metric,
                            summary,
                        },
                        values,
                    });
                }
            }
        }
        Ok(out)
    }
}

pub(crate) fn cache_stats_line(stats: CacheStats) -> String {
    format!("cache: {} hits, {} misses", stats.hits, stats.misses)
}
