//! End-to-end experiment pipeline: corpus ingestion, transformation grid,
//! features and embeddings, distance matrices, consistency metrics and
//! report emission, with a content-addressed cache.

mod cache;
mod config;
mod corpus;
mod pipeline;
pub(crate) mod report;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use cache::{Cache, CacheStats, CACHE_VERSION};
pub use config::{ExperimentConfig, MeasureConfig, SeedConfig};
pub use corpus::{ingest_corpus, Corpus};
pub use pipeline::{GroupMatrices, GroupOutcome, GroupStatus, Pipeline, RecordEntry};
pub use report::{emit_report, ReportFiles, CSV_HEADER};

use crate::distance::DistanceError;
use crate::encoder::EncoderError;
use crate::metrics::MetricsError;
use crate::transform::TransformError;

pub const ARTIFACT_FILE: &str = "artifact.json";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("missing input: {}", .0.display())]
    MissingInput(PathBuf),
    #[error("corpus: {0}")]
    Corpus(String),
    #[error("{path}: {reason}")]
    Io { path: String, reason: String },
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Encoder(#[from] EncoderError),
    #[error(transparent)]
    Distance(#[from] DistanceError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("no completed run in {}; run `consistency` or `run` first", .0.display())]
    NoRun(PathBuf),
}

impl HarnessError {
    pub(crate) fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        HarnessError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        }
    }
}

/// Everything a report is built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunArtifact {
    pub run_id: String,
    pub config: ExperimentConfig,
    pub clips: Vec<String>,
    pub skipped_files: Vec<(String, String)>,
    pub groups: Vec<GroupOutcome>,
    pub records: Vec<RecordEntry>,
    pub cache: CacheStats,
}

impl RunArtifact {
    pub fn load(output_dir: &Path) -> Result<Self, HarnessError> {
        let path = output_dir.join(ARTIFACT_FILE);
        if !path.is_file() {
            return Err(HarnessError::NoRun(output_dir.to_path_buf()));
        }
        let text = fs::read_to_string(&path).map_err(|e| HarnessError::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| HarnessError::io(&path, e))
    }

    pub fn save(&self, output_dir: &Path) -> Result<PathBuf, HarnessError> {
        let path = output_dir.join(ARTIFACT_FILE);
        let json = serde_json::to_string(self).expect("artifact serialises");
        fs::write(&path, json).map_err(|e| HarnessError::io(&path, e))?;
        Ok(path)
    }
}

/// Hash of the result-affecting configuration; cache location and
/// parallelism are left out.
pub fn run_id(config: &ExperimentConfig) -> String {
    let mut c = config.clone();
    c.cache_dir = None;
    c.jobs = 0;
    c.subprocess_limit = 0;
    let digest = Sha256::digest(format!("{CACHE_VERSION}\n{}", c.to_toml()));
    hex::encode(digest)[..16].to_string()
}

/// How far a pipeline invocation goes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    /// Transformed excerpts written as WAV files, nothing else.
    Transform,
    /// Features and embeddings only (fills the cache).
    Encode,
    /// Also writes distance matrices.
    Distances,
    /// Also computes metrics and writes the artifact.
    Consistency,
    /// Everything, including the report files.
    Report,
}

/// Summary of a pipeline invocation.
#[derive(Debug, Clone)]
pub struct StageOutcome {
    pub artifact: Option<RunArtifact>,
    pub groups: Vec<GroupOutcome>,
    pub cache: CacheStats,
    pub log: Vec<String>,
}

fn prepare_output(config: &ExperimentConfig) -> Result<(), HarnessError> {
    let dir = &config.output_dir;
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let snap = dir.join("config.toml");
    fs::write(&snap, config.to_toml()).map_err(|e| HarnessError::io(&snap, e))
}

fn write_log(config: &ExperimentConfig, log: &[String]) -> Result<(), HarnessError> {
    let path = config.output_dir.join("run.log");
    let mut text = log.join("\n");
    text.push('\n');
    fs::write(&path, text).map_err(|e| HarnessError::io(&path, e))
}

/// Runs the pipeline up to `stage`. Group failures are logged and reported;
/// other groups are still computed.
pub fn execute(config: &ExperimentConfig, cache: &Cache, stage: Stage) -> Result<StageOutcome, HarnessError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    pool.install(|| execute_inner(config, cache, stage))
}

fn execute_inner(config: &ExperimentConfig, cache: &Cache, stage: Stage) -> Result<StageOutcome, HarnessError> {
    if stage == Stage::Transform {
        let pipeline = Pipeline::prepare_transforms_only(config)?;
        prepare_output(config)?;
        let dir = config.output_dir.join("excerpts");
        let (written, failed) = pipeline.write_excerpts(&dir)?;
        let mut log = pipeline.log().to_vec();
        log.push(format!("wrote {written} excerpts to {}", dir.display()));
        log.extend(failed.iter().map(|o| {
            format!("FAILED {}: {}", o.spec.key(), o.message.as_deref().unwrap_or(""))
        }));
        write_log(config, &log)?;
        return Ok(StageOutcome {
            artifact: None,
            groups: failed,
            cache: cache.stats(),
            log,
        });
    }
    let pipeline = Pipeline::prepare(config)?;
    prepare_output(config)?;
    if config.write_excerpts {
        pipeline.write_excerpts(&config.output_dir.join("excerpts"))?;
    }
    let groups = pipeline.compute_cells(cache);
    let mut outcomes: Vec<GroupOutcome> = Vec::new();
    let mut log = Vec::new();

    let (matrices, failed) = if stage >= Stage::Distances {
        pipeline.compute_distances(&groups, cache)?
    } else {
        let failed = groups
            .iter()
            .filter_map(|(_, r)| r.as_ref().err().cloned())
            .collect();
        (Vec::new(), failed)
    };
    let mut all_failed = failed;
    if stage >= Stage::Distances {
        pipeline.write_matrices(&matrices, &config.output_dir.join("distances"))?;
    }
    let records = if stage >= Stage::Consistency {
        let (records, failed) = pipeline.compute_records(&matrices);
        all_failed.extend(failed);
        records
    } else {
        Vec::new()
    };

    for spec in pipeline.specs() {
        let outcome = all_failed
            .iter()
            .find(|o| o.spec == *spec)
            .cloned()
            .unwrap_or(GroupOutcome {
                spec: *spec,
                status: GroupStatus::Ok,
                message: None,
            });
        outcomes.push(outcome);
    }

    let clips: Vec<String> = pipeline.clips().iter().map(|c| c.id().to_string()).collect();
    let skipped_files: Vec<(String, String)> = pipeline
        .skipped_files()
        .iter()
        .map(|(path, why)| (path.display().to_string(), why.clone()))
        .collect();
    let mut base_log = pipeline.log().to_vec();
    for o in &outcomes {
        match o.status {
            GroupStatus::Ok => {}
            GroupStatus::Skipped => log.push(format!(
                "SKIPPED {}: {}",
                o.spec.key(),
                o.message.as_deref().unwrap_or("")
            )),
            GroupStatus::Failed => log.push(format!(
                "FAILED {}: {}",
                o.spec.key(),
                o.message.as_deref().unwrap_or("")
            )),
        }
    }
    let stats = cache.stats();
    log.push(pipeline::cache_stats_line(stats));
    base_log.extend(log);
    write_log(config, &base_log)?;

    let artifact = if stage >= Stage::Consistency {
        let artifact = RunArtifact {
            run_id: run_id(config),
            config: config.clone(),
            clips,
            skipped_files,
            groups: outcomes.clone(),
            records,
            cache: stats,
        };
        artifact.save(&config.output_dir)?;
        if stage >= Stage::Report {
            emit_report(&artifact, &config.output_dir)?;
        } else {
            report::write_consistency_csv(&artifact, &config.output_dir.join("consistency.csv"))?;
        }
        Some(artifact)
    } else {
        None
    };
    Ok(StageOutcome {
        artifact,
        groups: outcomes,
        cache: stats,
        log: base_log,
    })
}

/// Full pipeline: transforms, distances, metrics and report files.
pub fn run_experiment(config: &ExperimentConfig, cache: &Cache) -> Result<RunArtifact, HarnessError> {
    Ok(execute(config, cache, Stage::Report)?
        .artifact
        .expect("report stage produces an artifact"))
}
