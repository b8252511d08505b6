//! Encoders mapping audio clips to fixed-length embeddings: the MFCC
//! statistics baseline, a seeded toy projection, the identity encoder and
//! externally computed embeddings read from EMB1 files.

mod emb1;
mod embedding;
mod native;

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use emb1::{
    key_name, load_external_embeddings, write_emb1, EmbeddingKey, ExternalEmbeddings, FileEntry,
    Manifest, ManifestRow, FORMAT_TAG,
};
pub use embedding::Embedding;
pub use native::{delta_frames, mfcc_stats_encode, toy_encode, MFCC_STATS_DIM, TOY_DIM};

use crate::audio::{AudioClip, AudioError, FeatureSequence};
use crate::distance::Representation;
use crate::transform::TransformSpec;

#[derive(Debug, Error)]
pub enum EncoderError {
    #[error(transparent)]
    Audio(#[from] AudioError),
    #[error("too few MFCC frames: need {needed}, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("invalid embedding: {0}")]
    InvalidEmbedding(String),
    #[error("invalid EMB1 manifest: {0}")]
    Manifest(String),
    #[error("embeddings missing for: {}", .0.join(", "))]
    MissingKeys(Vec<String>),
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimMismatch {
        context: String,
        expected: usize,
        got: usize,
    },
    #[error("checksum mismatch for {file}: expected {expected}, got {got}")]
    Checksum {
        file: String,
        expected: String,
        got: String,
    },
    #[error("duplicate embedding row {0}")]
    DuplicateKey(String),
    #[error("encoder {0:?} has no embeddings loaded")]
    NotLoaded(String),
    #[error("i/o: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncoderKind {
    MfccStats,
    External,
    Toy,
    /// Latent representation is the audio feature sequence itself, compared
    /// with the audio measures.
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderDescriptor {
    pub id: String,
    pub kind: EncoderKind,
    /// EMB1 manifest, for external encoders.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<PathBuf>,
    /// Projection seed, for the toy encoder.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Free-form labels; `task` names the training task of external models.
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

impl EncoderDescriptor {
    pub fn new(id: impl Into<String>, kind: EncoderKind) -> Self {
        Self {
            id: id.into(),
            kind,
            manifest: None,
            seed: None,
            metadata: BTreeMap::new(),
        }
    }

    /// Output dimension where it is fixed by the kind.
    pub fn dim(&self) -> Option<usize> {
        match self.kind {
            EncoderKind::MfccStats => Some(MFCC_STATS_DIM),
            EncoderKind::Toy => Some(TOY_DIM),
            EncoderKind::External | EncoderKind::Identity => None,
        }
    }

    pub fn task_label(&self) -> &str {
        self.metadata.get("task").map_or("-", String::as_str)
    }
}

/// A ready-to-use encoder.
#[derive(Debug, Clone)]
pub enum Encoder {
    MfccStats,
    Toy { seed: u64 },
    Identity,
    External(ExternalEmbeddings),
}

impl Encoder {
    /// Latent representation of `clip`, the result of applying `spec` to
    /// the original `clip_id`. `features` are the clip's audio-space MFCC
    /// frames, reused by the identity encoder.
    pub fn encode(
        &self,
        clip: &AudioClip,
        clip_id: &str,
        spec: &TransformSpec,
        features: &FeatureSequence,
    ) -> Result<Representation, EncoderError> {
        Ok(match self {
            Encoder::MfccStats => Representation::Vector(mfcc_stats_encode(clip)?),
            Encoder::Toy { seed } => Representation::Vector(toy_encode(clip, *seed)?),
            Encoder::Identity => Representation::Sequence(features.clone()),
            Encoder::External(ext) => Representation::Vector(
                ext.get(clip_id, spec)
                    .cloned()
                    .ok_or_else(|| EncoderError::MissingKeys(vec![key_name(&(clip_id.into(), *spec))]))?,
            ),
        })
    }

    /// Whether latent distances use the audio-space measures.
    pub fn mirrors_audio(&self) -> bool {
        matches!(self, Encoder::Identity)
    }
}
