//! EMB1 embedding interchange: a JSON manifest plus little-endian f32
//! record files.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Embedding, EncoderError};
use crate::transform::{Category, TransformSpec};

pub const FORMAT_TAG: &str = "EMB1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub encoder_id: String,
    pub dim: usize,
    pub rows: Vec<ManifestRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub files: Vec<FileEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub clip_id: String,
    pub category: Category,
    pub magnitude: Option<f64>,
    pub file: String,
    /// Byte offset of the record within `file`.
    pub offset: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub file: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sha256: Option<String>,
}

pub type EmbeddingKey = (String, TransformSpec);

/// Display form of a key, matching the excerpt file stem.
pub fn key_name(key: &EmbeddingKey) -> String {
    format!("{}__{}", key.0, key.1.key())
}

/// Embeddings loaded from an EMB1 manifest, keyed by clip and transform.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalEmbeddings {
    pub encoder_id: String,
    pub dim: usize,
    pub map: BTreeMap<EmbeddingKey, Embedding>,
}

impl ExternalEmbeddings {
    pub fn get(&self, clip_id: &str, spec: &TransformSpec) -> Option<&Embedding> {
        self.map.get(&(clip_id.to_string(), *spec))
    }
}

fn io_err(path: &Path, e: std::io::Error) -> EncoderError {
    EncoderError::Io(format!("{}: {e}", path.display()))
}

/// Loads every row of the manifest at `manifest_path` and checks that each
/// key in `required` is present.
pub fn load_external_embeddings(
    manifest_path: &Path,
    required: &[EmbeddingKey],
) -> Result<ExternalEmbeddings, EncoderError> {
    let text = fs::read_to_string(manifest_path).map_err(|e| io_err(manifest_path, e))?;
    let manifest: Manifest = serde_json::from_str(&text)
        .map_err(|e| EncoderError::Manifest(format!("{}: {e}", manifest_path.display())))?;
    if manifest.format != FORMAT_TAG {
        return Err(EncoderError::Manifest(format!(
            "format is {:?}, expected {FORMAT_TAG:?}",
            manifest.format
        )));
    }
    if manifest.dim == 0 {
        return Err(EncoderError::Manifest("dim must be positive".into()));
    }
    let base = manifest_path.parent().unwrap_or(Path::new("."));

    for entry in &manifest.files {
        if let Some(d) = entry.dim {
            if d != manifest.dim {
                return Err(EncoderError::DimMismatch {
                    context: entry.file.clone(),
                    expected: manifest.dim,
                    got: d,
                });
            }
        }
    }
    let checksums: BTreeMap<&str, &str> = manifest
        .files
        .iter()
        .filter_map(|f| f.sha256.as_deref().map(|s| (f.file.as_str(), s)))
        .collect();

    let mut data: BTreeMap<&str, Vec<u8>> = BTreeMap::new();
    for row in &manifest.rows {
        if data.contains_key(row.file.as_str()) {
            continue;
        }
        let path = base.join(&row.file);
        let bytes = fs::read(&path).map_err(|e| io_err(&path, e))?;
        if let Some(expected) = checksums.get(row.file.as_str()) {
            let got = hex::encode(Sha256::digest(&bytes));
            if !got.eq_ignore_ascii_case(expected) {
                return Err(EncoderError::Checksum {
                    file: row.file.clone(),
                    expected: expected.to_string(),
                    got,
                });
            }
        }
        data.insert(&row.file, bytes);
    }

    let record = manifest.dim * 4;
    let mut map = BTreeMap::new();
    for row in &manifest.rows {
        let spec = match row.magnitude {
            Some(m) => TransformSpec::new(row.category, m),
            None => TransformSpec::from_parts(row.category.as_str(), "none"),
        }
        .map_err(|e| EncoderError::Manifest(format!("row {}: {e}", row.clip_id)))?;
        let key = (row.clip_id.clone(), spec);
        let bytes = &data[row.file.as_str()];
        let start = usize::try_from(row.offset).unwrap_or(usize::MAX);
        let end = start.saturating_add(record);
        if end > bytes.len() {
            return Err(EncoderError::DimMismatch {
                context: format!("{} at byte {} of {}", key_name(&key), row.offset, row.file),
                expected: manifest.dim,
                got: bytes.len().saturating_sub(start) / 4,
            });
        }
        let values: Vec<f64> = bytes[start..end]
            .chunks_exact(4)
            .map(|c| f64::from(f32::from_le_bytes(c.try_into().expect("4-byte chunk"))))
            .collect();
        let emb = Embedding::new(manifest.encoder_id.clone(), values)
            .map_err(|e| EncoderError::Manifest(format!("{}: {e}", key_name(&key))))?;
        if map.insert(key.clone(), emb).is_some() {
            return Err(EncoderError::DuplicateKey(key_name(&key)));
        }
    }

    let missing: BTreeSet<String> = required
        .iter()
        .filter(|k| !map.contains_key(*k))
        .map(key_name)
        .collect();
    if !missing.is_empty() {
        return Err(EncoderError::MissingKeys(missing.into_iter().collect()));
    }
    Ok(ExternalEmbeddings {
        encoder_id: manifest.encoder_id,
        dim: manifest.dim,
        map,
    })
}

/// Writes `entries` as one `{encoder_id}.f32` record file plus
/// `manifest.json` (with checksum) in `dir`. Values are stored as f32.
pub fn write_emb1(
    dir: &Path,
    encoder_id: &str,
    entries: &[(EmbeddingKey, Embedding)],
) -> Result<PathBuf, EncoderError> {
    let dim = entries
        .first()
        .map(|(_, e)| e.dim())
        .ok_or_else(|| EncoderError::Manifest("no embeddings to write".into()))?;
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let file = format!("{encoder_id}.f32");
    let mut bytes = Vec::with_capacity(entries.len() * dim * 4);
    let mut rows = Vec::with_capacity(entries.len());
    for ((clip_id, spec), emb) in entries {
        if emb.dim() != dim {
            return Err(EncoderError::DimMismatch {
                context: key_name(&(clip_id.clone(), *spec)),
                expected: dim,
                got: emb.dim(),
            });
        }
        rows.push(ManifestRow {
            clip_id: clip_id.clone(),
            category: spec.category(),
            magnitude: spec.magnitude(),
            file: file.clone(),
            offset: bytes.len() as u64,
        });
        for v in emb.values() {
            bytes.extend_from_slice(&(*v as f32).to_le_bytes());
        }
    }
    let data_path = dir.join(&file);
    fs::write(&data_path, &bytes).map_err(|e| io_err(&data_path, e))?;
    let manifest = Manifest {
        format: FORMAT_TAG.into(),
        encoder_id: encoder_id.into(),
        dim,
        rows,
        files: vec![FileEntry {
            file,
            dim: Some(dim),
            sha256: Some(hex::encode(Sha256::digest(&bytes))),
        }],
    };
    let path = dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
    fs::write(&path, json + "\n").map_err(|e| io_err(&path, e))?;
    Ok(path)
}
