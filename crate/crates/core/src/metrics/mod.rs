//! Distance-consistency metrics: the nearest-original error indicator,
//! within-space consistency, between-space accuracy and rank correlation,
//! with bootstrap intervals.

mod bootstrap;
mod rank;
mod record;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

pub use bootstrap::{bootstrap_ci, Interval, DEFAULT_LEVEL, DEFAULT_N_BOOT};
pub use rank::{average_ranks, spearman};
pub use record::{summarize, ConsistencyRecord, Metric, Summary};

use crate::distance::{DistanceMatrix, Space};
use crate::transform::TransformSpec;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("point {0:?} has no own original among the candidates")]
    MissingOriginal(String),
    #[error("need at least {needed} values, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("rank correlation undefined: constant input")]
    UndefinedCorrelation,
    #[error("non-finite input")]
    NonFinite,
    #[error("key sets differ: {0}")]
    KeyMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// 0 when the distance to the point's own original is strictly smaller than
/// to every other candidate, else 1. Ties count as errors.
pub fn delta(point_id: &str, candidate_ids: &[String], row: &[f64]) -> Result<u8, MetricsError> {
    if candidate_ids.len() != row.len() {
        return Err(MetricsError::LengthMismatch {
            left: candidate_ids.len(),
            right: row.len(),
        });
    }
    let own = candidate_ids
        .iter()
        .position(|c| c == point_id)
        .ok_or_else(|| MetricsError::MissingOriginal(point_id.to_string()))?;
    if row.len() < 2 {
        return Err(MetricsError::TooFew {
            needed: 2,
            got: row.len(),
        });
    }
    let d = row[own];
    let nearest = row
        .iter()
        .enumerate()
        .all(|(j, &other)| j == own || d < other);
    Ok(u8::from(!nearest))
}

/// Per-point error indicators for one space, measure and transform.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaVector {
    pub space: Space,
    pub measure: String,
    pub spec: TransformSpec,
    pub entries: BTreeMap<String, u8>,
}

impl DeltaVector {
    pub fn from_matrix(dm: &DistanceMatrix) -> Result<Self, MetricsError> {
        let mut entries = BTreeMap::new();
        for (i, id) in dm.row_ids().iter().enumerate() {
            entries.insert(id.clone(), delta(id, dm.col_ids(), &dm.row(i))?);
        }
        Ok(Self {
            space: dm.space(),
            measure: dm.measure().to_string(),
            spec: dm.spec(),
            entries,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// `1 - mean(delta)`.
pub fn within_consistency(deltas: &DeltaVector) -> Result<f64, MetricsError> {
    if deltas.is_empty() {
        return Err(MetricsError::TooFew { needed: 1, got: 0 });
    }
    let errors: f64 = deltas.entries.values().map(|&d| f64::from(d)).sum();
    Ok(1.0 - errors / deltas.len() as f64)
}

fn check_keys(a: &DeltaVector, b: &DeltaVector) -> Result<(), MetricsError> {
    let ka: BTreeSet<&String> = a.entries.keys().collect();
    let kb: BTreeSet<&String> = b.entries.keys().collect();
    if ka != kb {
        let diff: Vec<&str> = ka.symmetric_difference(&kb).map(|s| s.as_str()).collect();
        return Err(MetricsError::KeyMismatch(diff.join(", ")));
    }
    Ok(())
}

/// Per-point agreement (1.0 or 0.0) between two indicator vectors, in key
/// order.
pub fn agreement(audio: &DeltaVector, latent: &DeltaVector) -> Result<Vec<f64>, MetricsError> {
    check_keys(audio, latent)?;
    Ok(audio
        .entries
        .iter()
        .map(|(k, v)| f64::from(u8::from(latent.entries[k] == *v)))
        .collect())
}

/// Fraction of points whose audio and latent indicators agree.
pub fn between_acc(audio: &DeltaVector, latent: &DeltaVector) -> Result<f64, MetricsError> {
    let agree = agreement(audio, latent)?;
    if agree.is_empty() {
        return Err(MetricsError::TooFew { needed: 1, got: 0 });
    }
    Ok(agree.iter().sum::<f64>() / agree.len() as f64)
}

/// Rank correlation between one point's audio and latent distance rows,
/// both already restricted to the other originals in the same order.
pub fn between_rho(audio_row: &[f64], latent_row: &[f64]) -> Result<f64, MetricsError> {
    spearman(audio_row, latent_row)
}

/// Per-row `between_rho` for two matrices over the same points and
/// originals, each row's own original excluded. Latent columns are aligned
/// to the audio column order by id.
pub fn between_rho_rows(
    audio: &DistanceMatrix,
    latent: &DistanceMatrix,
) -> Result<Vec<(String, Result<f64, MetricsError>)>, MetricsError> {
    let same = |a: &[String], b: &[String]| {
        a.len() == b.len() && a.iter().collect::<BTreeSet<_>>() == b.iter().collect::<BTreeSet<_>>()
    };
    if !same(audio.col_ids(), latent.col_ids()) {
        return Err(MetricsError::KeyMismatch("original ids differ between spaces".into()));
    }
    if !same(audio.row_ids(), latent.row_ids()) {
        return Err(MetricsError::KeyMismatch("point ids differ between spaces".into()));
    }
    let col_map: Vec<usize> = audio
        .col_ids()
        .iter()
        .map(|id| latent.col_index(id).expect("column sets are equal"))
        .collect();
    let mut out = Vec::with_capacity(audio.row_ids().len());
    for (i, id) in audio.row_ids().iter().enumerate() {
        let li = latent.row_index(id).expect("row sets are equal");
        let (arow, lrow) = (audio.row(i), latent.row(li));
        let (mut xa, mut xl) = (Vec::new(), Vec::new());
        for (j, col) in audio.col_ids().iter().enumerate() {
            if col != id {
                xa.push(arow[j]);
                xl.push(lrow[col_map[j]]);
            }
        }
        if xa.len() == audio.col_ids().len() {
            return Err(MetricsError::MissingOriginal(id.clone()));
        }
        out.push((id.clone(), between_rho(&xa, &xl)));
    }
    Ok(out)
}

/// Rank correlation on original-versus-original distances, one value per
/// original with itself excluded.
pub fn original_space_rho(
    audio: &DistanceMatrix,
    latent: &DistanceMatrix,
) -> Result<Vec<(String, Result<f64, MetricsError>)>, MetricsError> {
    for dm in [audio, latent] {
        let rows: BTreeSet<&String> = dm.row_ids().iter().collect();
        let cols: BTreeSet<&String> = dm.col_ids().iter().collect();
        if rows != cols || rows.len() != dm.row_ids().len() {
            return Err(MetricsError::KeyMismatch(
                "original-space matrices must be square over one id set".into(),
            ));
        }
        if rows.len() < 4 {
            return Err(MetricsError::TooFew {
                needed: 4,
                got: rows.len(),
            });
        }
    }
    between_rho_rows(audio, latent)
}
