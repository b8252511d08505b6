use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::distance::{Measure, DEFAULT_DTW_RADIUS, DEFAULT_SUBSEQ_LEN};
use crate::encoder::{EncoderDescriptor, EncoderKind};
use crate::metrics::{DEFAULT_LEVEL, DEFAULT_N_BOOT};
use crate::seed::derive_seed;
use crate::transform::{default_grid, CodecCommand, Category, MagnitudeGrid};

fn default_frames() -> usize {
    128
}

fn default_categories() -> Vec<Category> {
    Category::TRANSFORMS.to_vec()
}

fn default_n_boot() -> usize {
    DEFAULT_N_BOOT
}

fn default_level() -> f64 {
    DEFAULT_LEVEL
}

fn default_subprocess_limit() -> usize {
    2
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("run")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureConfig {
    pub audio: Vec<String>,
    pub latent: Vec<String>,
    #[serde(default = "default_radius")]
    pub dtw_radius: usize,
    #[serde(default = "default_subseq")]
    pub simple_subseq_len: usize,
}

fn default_radius() -> usize {
    DEFAULT_DTW_RADIUS
}

fn default_subseq() -> usize {
    DEFAULT_SUBSEQ_LEN
}

impl Default for MeasureConfig {
    fn default() -> Self {
        Self {
            audio: vec!["dtw".into(), "simple".into()],
            latent: vec!["euclidean".into(), "cosine".into()],
            dtw_radius: DEFAULT_DTW_RADIUS,
            simple_subseq_len: DEFAULT_SUBSEQ_LEN,
        }
    }
}

/// Root seed plus optional per-purpose overrides; unset ones derive from
/// the root.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedConfig {
    #[serde(default)]
    pub root: u64,
    pub crop: Option<u64>,
    pub noise: Option<u64>,
    pub bootstrap: Option<u64>,
}

impl SeedConfig {
    pub fn crop(&self) -> u64 {
        self.crop.unwrap_or_else(|| derive_seed(self.root, &["crop"]))
    }

    pub fn noise(&self) -> u64 {
        self.noise.unwrap_or_else(|| derive_seed(self.root, &["noise"]))
    }

    pub fn bootstrap(&self) -> u64 {
        self.bootstrap
            .unwrap_or_else(|| derive_seed(self.root, &["bootstrap"]))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub corpus_dir: PathBuf,
    pub noise_wav_path: Option<PathBuf>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Defaults to `<output_dir>/cache`.
    pub cache_dir: Option<PathBuf>,
    #[serde(default = "default_frames")]
    pub excerpt_frames: usize,
    /// Keep only the first N clips by id.
    pub test_set_size: Option<usize>,
    #[serde(default = "default_categories")]
    pub categories: Vec<Category>,
    /// Per-category magnitude overrides.
    #[serde(default)]
    pub grids: BTreeMap<Category, Vec<f64>>,
    #[serde(default)]
    pub measures: MeasureConfig,
    pub encoders: Vec<EncoderDescriptor>,
    #[serde(default)]
    pub seeds: SeedConfig,
    /// External codec; the surrogate codec is used when absent.
    pub codec: Option<CodecCommand>,
    #[serde(default)]
    pub skip_codec: bool,
    /// Worker threads; 0 uses every core.
    #[serde(default)]
    pub jobs: usize,
    #[serde(default = "default_subprocess_limit")]
    pub subprocess_limit: usize,
    #[serde(default)]
    pub phase_locking: bool,
    #[serde(default = "default_n_boot")]
    pub n_boot: usize,
    #[serde(default = "default_level")]
    pub ci_level: f64,
    /// Write every transformed excerpt as `{clip}__{category}__{magnitude}.wav`.
    #[serde(default)]
    pub write_excerpts: bool,
}

impl ExperimentConfig {
    /// Minimal configuration with defaults for everything optional.
    pub fn new(corpus_dir: impl Into<PathBuf>, encoders: Vec<EncoderDescriptor>) -> Self {
        Self {
            corpus_dir: corpus_dir.into(),
            noise_wav_path: None,
            output_dir: default_output_dir(),
            cache_dir: None,
            excerpt_frames: default_frames(),
            test_set_size: None,
            categories: default_categories(),
            grids: BTreeMap::new(),
            measures: MeasureConfig::default(),
            encoders,
            seeds: SeedConfig::default(),
            codec: None,
            skip_codec: false,
            jobs: 0,
            subprocess_limit: default_subprocess_limit(),
            phase_locking: false,
            n_boot: DEFAULT_N_BOOT,
            ci_level: DEFAULT_LEVEL,
            write_excerpts: false,
        }
    }

    /// Reads a TOML file; relative paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: Self = toml::from_str(&text)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.corpus_dir);
        fix(&mut self.output_dir);
        if let Some(p) = self.noise_wav_path.as_mut() {
            fix(p);
        }
        if let Some(p) = self.cache_dir.as_mut() {
            fix(p);
        }
        for e in &mut self.encoders {
            if let Some(p) = e.manifest.as_mut() {
                fix(p);
            }
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn cache_dir(&self) -> PathBuf {
        self.cache_dir
            .clone()
            .unwrap_or_else(|| self.output_dir.join("cache"))
    }

    /// Transform categories (OG excluded), in configured order without
    /// duplicates.
    pub fn transform_categories(&self) -> Vec<Category> {
        let mut out = Vec::new();
        for c in &self.categories {
            if *c != Category::OG && !out.contains(c) {
                out.push(*c);
            }
        }
        out
    }

    pub fn grid(&self, category: Category) -> Result<MagnitudeGrid, HarnessError> {
        let grid = match self.grids.get(&category) {
            Some(m) => MagnitudeGrid::new(category, m.clone()),
            None => default_grid(category),
        };
        grid.map_err(|e| HarnessError::Config(format!("grid for {category}: {e}")))
    }

    pub fn audio_measures(&self) -> Result<Vec<Measure>, HarnessError> {
        self.measures.audio.iter().map(|m| self.measure(m, true)).collect()
    }

    pub fn latent_measures(&self) -> Result<Vec<Measure>, HarnessError> {
        self.measures.latent.iter().map(|m| self.measure(m, false)).collect()
    }

    fn measure(&self, name: &str, audio: bool) -> Result<Measure, HarnessError> {
        let m = match name.parse::<Measure>() {
            Ok(Measure::Dtw { .. }) => Measure::Dtw {
                radius: self.measures.dtw_radius,
            },
            Ok(Measure::Simple { .. }) => Measure::Simple {
                subseq_len: self.measures.simple_subseq_len,
            },
            Ok(other) => other,
            Err(e) => return Err(HarnessError::Config(e.to_string())),
        };
        if m.on_sequences() != audio {
            let space = if audio { "audio" } else { "latent" };
            return Err(HarnessError::Config(format!(
                "{name} is not a {space}-space measure"
            )));
        }
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let fail = |m: String| Err(HarnessError::Config(m));
        if self.encoders.is_empty() {
            return fail("at least one encoder is required".into());
        }
        let mut ids: Vec<&str> = self.encoders.iter().map(|e| e.id.as_str()).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return fail("encoder ids must be unique".into());
        }
        for e in &self.encoders {
            if e.kind == EncoderKind::External && e.manifest.is_none() {
                return fail(format!("external encoder {:?} needs a manifest", e.id));
            }
        }
        if self.measures.audio.is_empty() || self.measures.latent.is_empty() {
            return fail("at least one audio and one latent measure are required".into());
        }
        self.audio_measures()?;
        self.latent_measures()?;
        if self.excerpt_frames < 3 {
            return fail("excerpt_frames must be at least 3".into());
        }
        if self.measures.simple_subseq_len > self.excerpt_frames {
            return fail("simple_subseq_len exceeds excerpt_frames".into());
        }
        if self.n_boot == 0 || !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return fail("n_boot must be positive and ci_level in (0, 1)".into());
        }
        for c in self.transform_categories() {
            self.grid(c)?;
        }
        Ok(())
    }
}
