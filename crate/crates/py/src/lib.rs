//! Python bindings: clips, features, transforms, distances, metrics, the
//! EMB1 exchange format and whole experiment runs.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use audiocons::audio::{self, FeatureSequence};
use audiocons::distance::{self, DEFAULT_DTW_RADIUS, DEFAULT_SUBSEQ_LEN};
use audiocons::encoder::{self, Embedding};
use audiocons::harness::{self, Cache, ExperimentConfig};
use audiocons::metrics;
use audiocons::transform::{self, Category, TransformContext, TransformSpec};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn io_err(e: impl std::fmt::Display) -> PyErr {
    PyIOError::new_err(e.to_string())
}

fn spec(category: &str, magnitude: Option<f64>) -> PyResult<TransformSpec> {
    let c: Category = category.parse().map_err(value_err)?;
    match magnitude {
        None if c == Category::OG => Ok(TransformSpec::original()),
        None => Err(value_err(format!("{c} needs a magnitude"))),
        Some(m) => TransformSpec::new(c, m).map_err(value_err),
    }
}

fn sequence(rows: Vec<Vec<f64>>) -> PyResult<FeatureSequence> {
    FeatureSequence::from_rows(&rows).map_err(value_err)
}

/// Mono audio with an id and a sample rate.
#[pyclass(name = "AudioClip", module = "audiocons", frozen, from_py_object)]
#[derive(Clone)]
pub struct PyAudioClip {
    inner: audio::AudioClip,
}

#[pymethods]
impl PyAudioClip {
    #[new]
    fn new(id: String, sample_rate: u32, samples: Vec<f64>) -> PyResult<Self> {
        let inner = audio::AudioClip::new(id, sample_rate, samples).map_err(value_err)?;
        Ok(Self { inner })
    }

    /// Reads a WAV file, downmixed to mono; the id is the file stem.
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let inner = audio::load_audio(&path).map_err(io_err)?;
        Ok(Self { inner })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        audio::write_wav(&path, &self.inner).map_err(io_err)
    }

    #[getter]
    fn id(&self) -> &str {
        self.inner.id()
    }

    #[getter]
    fn sample_rate(&self) -> u32 {
        self.inner.sample_rate()
    }

    #[getter]
    fn samples(&self) -> Vec<f64> {
        self.inner.samples().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "AudioClip(id={:?}, sample_rate={}, len={})",
            self.inner.id(),
            self.inner.sample_rate(),
            self.inner.len()
        )
    }

    fn resample(&self, rate: u32) -> PyResult<Self> {
        let inner = audio::resample(&self.inner, rate).map_err(value_err)?;
        Ok(Self { inner })
    }

    /// Excerpt spanning `frames` analysis frames at a seeded offset.
    #[pyo3(signature = (frames=128, seed=0))]
    fn excerpt(&self, frames: usize, seed: u64) -> PyResult<Self> {
        let inner = audio::crop_excerpt(&self.inner, frames, seed).map_err(value_err)?;
        Ok(Self { inner })
    }

    /// Integrated loudness in LUFS.
    fn loudness(&self) -> PyResult<f64> {
        Ok(audio::integrated_loudness(&self.inner).map_err(value_err)?.lufs())
    }

    /// MFCC frames, 24 coefficients each.
    fn mfcc(&self) -> PyResult<Vec<Vec<f64>>> {
        let seq = audio::mfcc(&self.inner).map_err(value_err)?;
        Ok((0..seq.len()).map(|i| seq.frame(i).to_vec()).collect())
    }

    /// 144-dim MFCC statistics embedding.
    fn mfcc_stats(&self) -> PyResult<Vec<f64>> {
        let e = encoder::mfcc_stats_encode(&self.inner).map_err(value_err)?;
        Ok(e.values().to_vec())
    }

    /// Applies one transformation and loudness-matches the result.
    /// `noise` is the environmental noise source for EN.
    #[pyo3(signature = (category, magnitude=None, seed=0, noise=None, phase_locking=false))]
    fn transform(
        &self,
        category: &str,
        magnitude: Option<f64>,
        seed: u64,
        noise: Option<PyAudioClip>,
        phase_locking: bool,
    ) -> PyResult<Self> {
        let ctx = TransformContext {
            environmental_noise: noise.map(|n| n.inner),
            seed,
            phase_locking,
            ..TransformContext::default()
        };
        let out = transform::apply_transform(&self.inner, &spec(category, magnitude)?, &ctx)
            .map_err(value_err)?;
        Ok(Self { inner: out.clip })
    }
}

#[pyfunction]
#[pyo3(signature = (a, b, radius=DEFAULT_DTW_RADIUS))]
fn dtw(a: Vec<Vec<f64>>, b: Vec<Vec<f64>>, radius: usize) -> PyResult<f64> {
    distance::dtw_fast(&sequence(a)?, &sequence(b)?, radius).map_err(value_err)
}

#[pyfunction]
fn dtw_exact(a: Vec<Vec<f64>>, b: Vec<Vec<f64>>) -> PyResult<f64> {
    distance::dtw_exact(&sequence(a)?, &sequence(b)?).map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (a, b, subseq_len=DEFAULT_SUBSEQ_LEN))]
fn simple(a: Vec<Vec<f64>>, b: Vec<Vec<f64>>, subseq_len: usize) -> PyResult<f64> {
    distance::simple_distance(&sequence(a)?, &sequence(b)?, subseq_len).map_err(value_err)
}

#[pyfunction]
fn euclidean(u: Vec<f64>, v: Vec<f64>) -> PyResult<f64> {
    distance::euclidean(&u, &v).map_err(value_err)
}

#[pyfunction]
fn cosine(u: Vec<f64>, v: Vec<f64>) -> PyResult<f64> {
    distance::cosine(&u, &v).map_err(value_err)
}

#[pyfunction]
fn spearman(x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    metrics::spearman(&x, &y).map_err(value_err)
}

/// `(mean, low, high)` of a percentile bootstrap.
#[pyfunction]
#[pyo3(signature = (values, n_boot=metrics::DEFAULT_N_BOOT, level=metrics::DEFAULT_LEVEL, seed=0))]
fn bootstrap_ci(values: Vec<f64>, n_boot: usize, level: f64, seed: u64) -> PyResult<(f64, f64, f64)> {
    let i = metrics::bootstrap_ci(&values, n_boot, level, seed).map_err(value_err)?;
    Ok((i.mean, i.low, i.high))
}

/// Magnitudes of the default grid for one category.
#[pyfunction]
fn default_grid(category: &str) -> PyResult<Vec<f64>> {
    let c: Category = category.parse().map_err(value_err)?;
    Ok(transform::default_grid(c).map_err(value_err)?.magnitudes().to_vec())
}

#[pyfunction]
#[pyo3(signature = (clip_id, category, magnitude=None))]
fn excerpt_file_name(clip_id: &str, category: &str, magnitude: Option<f64>) -> PyResult<String> {
    Ok(transform::excerpt_file_name(clip_id, &spec(category, magnitude)?))
}

/// `(clip_id, category, magnitude)`; magnitude is None for originals.
#[pyfunction]
fn parse_excerpt_file_name(name: &str) -> PyResult<(String, String, Option<f64>)> {
    let (clip, s) = transform::parse_excerpt_file_name(name).map_err(value_err)?;
    Ok((clip, s.category().to_string(), s.magnitude()))
}

type Row = (String, String, Option<f64>, Vec<f64>);

/// Writes `{encoder_id}.f32` and `manifest.json`; returns the manifest path.
#[pyfunction]
fn write_emb1(dir: PathBuf, encoder_id: &str, rows: Vec<Row>) -> PyResult<PathBuf> {
    let entries = rows
        .into_iter()
        .map(|(clip, category, magnitude, values)| {
            let key = (clip, spec(&category, magnitude)?);
            let emb = Embedding::new(encoder_id, values).map_err(value_err)?;
            Ok((key, emb))
        })
        .collect::<PyResult<Vec<_>>>()?;
    encoder::write_emb1(&dir, encoder_id, &entries).map_err(io_err)
}

/// Every row of an EMB1 manifest as `(clip_id, category, magnitude, values)`.
#[pyfunction]
fn load_emb1(manifest: PathBuf) -> PyResult<Vec<Row>> {
    let ext = encoder::load_external_embeddings(&manifest, &[]).map_err(value_err)?;
    Ok(ext
        .map
        .into_iter()
        .map(|((clip, s), e)| (clip, s.category().to_string(), s.magnitude(), e.values().to_vec()))
        .collect())
}

/// Runs the full pipeline for a TOML config and returns the run id.
#[pyfunction]
#[pyo3(signature = (config_path, use_cache=true))]
fn run_experiment(py: Python<'_>, config_path: PathBuf, use_cache: bool) -> PyResult<String> {
    let config = ExperimentConfig::load(&config_path).map_err(value_err)?;
    py.detach(|| {
        let cache = if use_cache {
            Cache::open(&config.cache_dir()).map_err(io_err)?
        } else {
            Cache::disabled()
        };
        let artifact = harness::run_experiment(&config, &cache).map_err(value_err)?;
        Ok(artifact.run_id)
    })
}

#[pymodule]
#[pyo3(name = "audiocons")]
fn audiocons_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyAudioClip>()?;
    m.add_function(wrap_pyfunction!(dtw, m)?)?;
    m.add_function(wrap_pyfunction!(dtw_exact, m)?)?;
    m.add_function(wrap_pyfunction!(simple, m)?)?;
    m.add_function(wrap_pyfunction!(euclidean, m)?)?;
    m.add_function(wrap_pyfunction!(cosine, m)?)?;
    m.add_function(wrap_pyfunction!(spearman, m)?)?;
    m.add_function(wrap_pyfunction!(bootstrap_ci, m)?)?;
    m.add_function(wrap_pyfunction!(default_grid, m)?)?;
    m.add_function(wrap_pyfunction!(excerpt_file_name, m)?)?;
    m.add_function(wrap_pyfunction!(parse_excerpt_file_name, m)?)?;
    m.add_function(wrap_pyfunction!(write_emb1, m)?)?;
    m.add_function(wrap_pyfunction!(load_emb1, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_parsing() {
        assert!(spec("OG", None).unwrap().is_original());
        assert_eq!(spec("PN", Some(30.0)).unwrap().key(), "PN__30");
        assert!(spec("PN", None).is_err());
        assert!(spec("XX", Some(1.0)).is_err());
    }
}
