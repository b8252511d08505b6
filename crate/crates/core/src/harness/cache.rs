//! Content-addressed on-disk cache of intermediate results.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::HarnessError;

/// Part of every key, so algorithm changes invalidate old entries.
pub const CACHE_VERSION: &str = concat!("audiocons-", env!("CARGO_PKG_VERSION"), "-c1");

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheStats {
    pub hits: usize,
    pub misses: usize,
}

#[derive(Debug)]
pub struct Cache {
    root: Option<PathBuf>,
    hits: AtomicUsize,
    misses: AtomicUsize,
}

impl Cache {
    pub fn open(root: &Path) -> Result<Self, HarnessError> {
        fs::create_dir_all(root).map_err(|e| HarnessError::io(root, e))?;
        Ok(Self {
            root: Some(root.to_path_buf()),
            hits: AtomicUsize::new(0),
            misses: AtomicUsize::new(0),
        })
    }

    /// A cache that never stores anything; every lookup is a miss.
    pub fn disabled() -> Self {
        Self {
            root: None,
            hits: AtomicUsize::new(0),
            misses: AtomicUsize::new(0),
        }
    }

    pub fn key(parts: &[&str]) -> String {
        let mut h = Sha256::new();
        h.update(CACHE_VERSION.as_bytes());
        for p in parts {
            h.update((p.len() as u64).to_le_bytes());
            h.update(p.as_bytes());
        }
        hex::encode(h.finalize())
    }

    fn path(&self, stage: &str, key: &str) -> Option<PathBuf> {
        self.root
            .as_ref()
            .map(|r| r.join(stage).join(&key[..2]).join(key))
    }

    /// Looks up an entry and decodes it; undecodable entries count as misses.
    pub fn get<T>(&self, stage: &str, key: &str, decode: impl FnOnce(&[u8]) -> Option<T>) -> Option<T> {
        let found = self
            .path(stage, key)
            .and_then(|p| fs::read(p).ok())
            .and_then(|b| decode(&b));
        let counter = if found.is_some() { &self.hits } else { &self.misses };
        counter.fetch_add(1, Ordering::Relaxed);
        found
    }

    /// Stores an entry atomically (write to a temporary file, then rename).
    pub fn put(&self, stage: &str, key: &str, bytes: &[u8]) -> Result<(), HarnessError> {
        let Some(path) = self.path(stage, key) else {
            return Ok(());
        };
        let dir = path.parent().expect("entry has a parent");
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| HarnessError::io(dir, e))?;
        tmp.write_all(bytes).map_err(|e| HarnessError::io(&path, e))?;
        tmp.persist(&path)
            .map_err(|e| HarnessError::io(&path, e.error))?;
        Ok(())
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats {
            hits: self.hits.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
        }
    }
}

/// `[count u64][values f64 ...]` after a fixed header of u64 words.
pub fn encode_f64s(header: &[u64], values: &[f64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 * (header.len() + 1 + values.len()));
    for h in header {
        out.extend_from_slice(&h.to_le_bytes());
    }
    out.extend_from_slice(&(values.len() as u64).to_le_bytes());
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_f64s(bytes: &[u8], header_len: usize) -> Option<(Vec<u64>, Vec<f64>)> {
    let words: Vec<[u8; 8]> = bytes
        .chunks(8)
        .map(|c| c.try_into().ok())
        .collect::<Option<_>>()?;
    if words.len() < header_len + 1 {
        return None;
    }
    let header: Vec<u64> = words[..header_len].iter().map(|w| u64::from_le_bytes(*w)).collect();
    let n = u64::from_le_bytes(words[header_len]) as usize;
    let rest = &words[header_len + 1..];
    if rest.len() != n {
        return None;
    }
    Some((header, rest.iter().map(|w| f64::from_le_bytes(*w)).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_stats() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::open(dir.path()).unwrap();
        let key = Cache::key(&["a", "b"]);
        assert_ne!(key, Cache::key(&["ab"]));
        let decode = |b: &[u8]| decode_f64s(b, 2);
        assert!(cache.get("s", &key, decode).is_none());
        cache.put("s", &key, &encode_f64s(&[3, 4], &[0.1, -2.0])).unwrap();
        let (h, v) = cache.get("s", &key, decode).unwrap();
        assert_eq!((h, v), (vec![3, 4], vec![0.1, -2.0]));
        assert_eq!(cache.stats(), CacheStats { hits: 1, misses: 1 });
    }

    #[test]
    fn corrupt_entries_are_misses() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::open(dir.path()).unwrap();
        let key = Cache::key(&["x"]);
        cache.put("s", &key, &[1, 2, 3]).unwrap();
        assert!(cache.get("s", &key, |b| decode_f64s(b, 0)).is_none());
        let off = Cache::disabled();
        off.put("s", &key, &encode_f64s(&[], &[1.0])).unwrap();
        assert!(off.get("s", &key, |b| decode_f64s(b, 0)).is_none());
    }
}
