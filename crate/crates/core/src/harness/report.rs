use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::pipeline::RecordEntry;
use super::{GroupStatus, HarnessError, RunArtifact};
use crate::metrics::{summarize, Metric, Summary};
use crate::seed::derive_seed;
use crate::transform::{Category, TransformSpec};

pub const CSV_HEADER: [&str; 12] = [
    "encoder",
    "task_label",
    "space_measure_audio",
    "space_measure_latent",
    "transform",
    "magnitude",
    "metric",
    "value",
    "ci_low",
    "ci_high",
    "n",
    "n_excluded",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ReportFiles {
    pub consistency_csv: PathBuf,
    pub summary_json: PathBuf,
    pub plots: Vec<PathBuf>,
}

fn num(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

fn magnitude(spec: &TransformSpec) -> String {
    spec.magnitude().map(|m| format!("{m}")).unwrap_or_default()
}

fn interval_cells(s: &Summary) -> [String; 3] {
    [
        num(s.interval.map(|i| i.mean)),
        num(s.interval.map(|i| i.low)),
        num(s.interval.map(|i| i.high)),
    ]
}

fn write_csv(path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| HarnessError::io(path, e))?;
    w.write_record(header).map_err(|e| HarnessError::io(path, e))?;
    for r in rows {
        w.write_record(&r).map_err(|e| HarnessError::io(path, e))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

/// Long-format CSV with one line per consistency record.
pub fn write_consistency_csv(artifact: &RunArtifact, path: &Path) -> Result<(), HarnessError> {
    let rows = artifact
        .records
        .iter()
        .map(|e| {
            let r = &e.record;
            let [v, lo, hi] = interval_cells(&r.summary);
            vec![
                r.encoder.clone(),
                r.task_label.clone(),
                r.audio_measure.clone(),
                r.latent_measure.clone(),
                r.spec.category().to_string(),
                magnitude(&r.spec),
                r.metric.to_string(),
                v,
                lo,
                hi,
                r.summary.n.to_string(),
                r.summary.n_excluded.to_string(),
            ]
        })
        .collect();
    write_csv(path, &CSV_HEADER, rows)
}

#[derive(Serialize)]
struct PooledGroup<'a> {
    encoder: &'a str,
    task_label: &'a str,
    audio_measure: &'a str,
    latent_measure: &'a str,
    metric: Metric,
    category: Category,
    mean: Option<f64>,
    ci_low: Option<f64>,
    ci_high: Option<f64>,
    n: usize,
    n_excluded: usize,
}

#[derive(Serialize)]
struct GroupIssue<'a> {
    transform: String,
    status: &'a GroupStatus,
    message: Option<&'a str>,
}

#[derive(Serialize)]
struct SummaryDoc<'a> {
    run_id: &'a str,
    n_clips: usize,
    n_boot: usize,
    ci_level: f64,
    groups: Vec<PooledGroup<'a>>,
    original_space: Vec<PooledGroup<'a>>,
    incomplete_groups: Vec<GroupIssue<'a>>,
}

/// (encoder, audio measure, latent measure) in first-appearance order.
fn pairs(records: &[RecordEntry]) -> Vec<(&str, &str, &str, &str)> {
    let mut out: Vec<(&str, &str, &str, &str)> = Vec::new();
    for e in records {
        let r = &e.record;
        let key = (
            r.encoder.as_str(),
            r.task_label.as_str(),
            r.audio_measure.as_str(),
            r.latent_measure.as_str(),
        );
        if !out.contains(&key) {
            out.push(key);
        }
    }
    out
}

fn pooled<'a>(
    artifact: &'a RunArtifact,
    (encoder, task, am, lm): (&'a str, &'a str, &'a str, &'a str),
    metric: Metric,
    category: Category,
) -> Result<PooledGroup<'a>, HarnessError> {
    let values: Vec<Option<f64>> = artifact
        .records
        .iter()
        .filter(|e| {
            let r = &e.record;
            r.encoder == encoder
                && r.audio_measure == am
                && r.latent_measure == lm
                && r.metric == metric
                && r.spec.category() == category
        })
        .flat_map(|e| e.values.iter().copied())
        .collect();
    let cfg = &artifact.config;
    let labels: Vec<&str> = match metric {
        Metric::CwAudio => vec!["pooled", metric.as_str(), am, category.as_str()],
        Metric::CwLatent => vec!["pooled", encoder, metric.as_str(), lm, category.as_str()],
        _ => vec!["pooled", encoder, metric.as_str(), am, lm, category.as_str()],
    };
    let seed = derive_seed(cfg.seeds.bootstrap(), &labels);
    let s = summarize(&values, cfg.n_boot, cfg.ci_level, seed)?;
    Ok(PooledGroup {
        encoder,
        task_label: task,
        audio_measure: am,
        latent_measure: lm,
        metric,
        category,
        mean: s.interval.map(|i| i.mean),
        ci_low: s.interval.map(|i| i.low),
        ci_high: s.interval.map(|i| i.high),
        n: s.n,
        n_excluded: s.n_excluded,
    })
}

fn plot_rows(
    artifact: &RunArtifact,
    metric: Metric,
    with_og: bool,
) -> impl Iterator<Item = &RecordEntry> {
    artifact.records.iter().filter(move |e| {
        e.record.metric == metric && (e.record.spec.is_original() == with_og)
    })
}

fn write_plots(artifact: &RunArtifact, dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let mut written = Vec::new();

    let mut seen = Vec::new();
    let mut rows = Vec::new();
    for e in plot_rows(artifact, Metric::CwAudio, false) {
        let r = &e.record;
        let key = (r.audio_measure.clone(), r.spec);
        if seen.contains(&key) {
            continue;
        }
        seen.push(key);
        let [v, lo, hi] = interval_cells(&r.summary);
        rows.push(vec![
            r.audio_measure.clone(),
            r.spec.category().to_string(),
            magnitude(&r.spec),
            v,
            lo,
            hi,
            r.summary.n.to_string(),
        ]);
    }
    let path = dir.join("within_audio.csv");
    write_csv(
        &path,
        &["audio_measure", "transform", "magnitude", "value", "ci_low", "ci_high", "n"],
        rows,
    )?;
    written.push(path);

    let mut seen = Vec::new();
    let mut rows = Vec::new();
    for e in plot_rows(artifact, Metric::CwLatent, false) {
        let r = &e.record;
        let key = (r.encoder.clone(), r.latent_measure.clone(), r.spec);
        if seen.contains(&key) {
            continue;
        }
        seen.push(key);
        let [v, lo, hi] = interval_cells(&r.summary);
        rows.push(vec![
            r.encoder.clone(),
            r.task_label.clone(),
            r.latent_measure.clone(),
            r.spec.category().to_string(),
            magnitude(&r.spec),
            v,
            lo,
            hi,
            r.summary.n.to_string(),
        ]);
    }
    let path = dir.join("within_latent.csv");
    write_csv(
        &path,
        &[
            "encoder", "task_label", "latent_measure", "transform", "magnitude", "value", "ci_low",
            "ci_high", "n",
        ],
        rows,
    )?;
    written.push(path);

    let between_header = [
        "encoder",
        "task_label",
        "audio_measure",
        "latent_measure",
        "transform",
        "magnitude",
        "value",
        "ci_low",
        "ci_high",
        "n",
        "n_excluded",
    ];
    for (metric, name) in [(Metric::CbAcc, "between_acc.csv"), (Metric::CbRho, "between_rho.csv")] {
        let rows = plot_rows(artifact, metric, false)
            .map(|e| {
                let r = &e.record;
                let [v, lo, hi] = interval_cells(&r.summary);
                vec![
                    r.encoder.clone(),
                    r.task_label.clone(),
                    r.audio_measure.clone(),
                    r.latent_measure.clone(),
                    r.spec.category().to_string(),
                    magnitude(&r.spec),
                    v,
                    lo,
                    hi,
                    r.summary.n.to_string(),
                    r.summary.n_excluded.to_string(),
                ]
            })
            .collect();
        let path = dir.join(name);
        write_csv(&path, &between_header, rows)?;
        written.push(path);
    }

    let rows = plot_rows(artifact, Metric::CbRho, true)
        .map(|e| {
            let r = &e.record;
            let [v, lo, hi] = interval_cells(&r.summary);
            vec![
                r.encoder.clone(),
                r.task_label.clone(),
                r.audio_measure.clone(),
                r.latent_measure.clone(),
                v,
                lo,
                hi,
                r.summary.n.to_string(),
                r.summary.n_excluded.to_string(),
            ]
        })
        .collect();
    let path = dir.join("original_rho.csv");
    write_csv(
        &path,
        &[
            "encoder", "task_label", "audio_measure", "latent_measure", "value", "ci_low", "ci_high",
            "n", "n_excluded",
        ],
        rows,
    )?;
    written.push(path);
    Ok(written)
}

/// Writes `consistency.csv`, `summary.json` and the `plots/` tables for a
/// run. Output depends only on the artifact, byte for byte.
pub fn emit_report(artifact: &RunArtifact, dir: &Path) -> Result<ReportFiles, HarnessError> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let consistency_csv = dir.join("consistency.csv");
    write_consistency_csv(artifact, &consistency_csv)?;

    let categories = artifact.config.transform_categories();
    let pair_list = pairs(&artifact.records);
    let mut groups = Vec::new();
    let mut original_space = Vec::new();
    for &pair in &pair_list {
        for metric in Metric::ALL {
            for &c in &categories {
                groups.push(pooled(artifact, pair, metric, c)?);
            }
        }
        original_space.push(pooled(artifact, pair, Metric::CbRho, Category::OG)?);
    }
    let incomplete_groups = artifact
        .groups
        .iter()
        .filter(|g| g.status != GroupStatus::Ok)
        .map(|g| GroupIssue {
            transform: g.spec.key(),
            status: &g.status,
            message: g.message.as_deref(),
        })
        .collect();
    let doc = SummaryDoc {
        run_id: &artifact.run_id,
        n_clips: artifact.clips.len(),
        n_boot: artifact.config.n_boot,
        ci_level: artifact.config.ci_level,
        groups,
        original_space,
        incomplete_groups,
    };
    let summary_json = dir.join("summary.json");
    let json = serde_json::to_string_pretty(&doc).expect("summary serialises") + "\n";
    fs::write(&summary_json, json).map_err(|e| HarnessError::io(&summary_json, e))?;

    let plots = write_plots(artifact, &dir.join("plots"))?;
    Ok(ReportFiles {
        consistency_csv,
        summary_json,
        plots,
    })
}
