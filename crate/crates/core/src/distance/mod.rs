//! Distance measures: exact and fast DTW and SiMPle over feature sequences,
//! Euclidean and cosine over embeddings.

mod dtw;
mod matrix;
mod simple;
mod vector;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dtw::{dtw_exact, dtw_fast};
pub use matrix::{pairwise_distances, DistanceMatrix};
pub use simple::{simple_distance, simple_profile, DEFAULT_SUBSEQ_LEN};
pub use vector::{cosine, euclidean};

use crate::audio::FeatureSequence;
use crate::encoder::Embedding;

pub const DEFAULT_DTW_RADIUS: usize = 1;

#[derive(Debug, Error)]
pub enum DistanceError {
    #[error("empty sequence or vector")]
    Empty,
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },
    #[error("sequence too short: need {needed} frames, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("cosine distance is undefined for a zero vector")]
    ZeroVector,
    #[error("{measure} cannot compare {kind} representations")]
    KindMismatch { measure: String, kind: &'static str },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("malformed distance matrix: {0}")]
    Format(String),
    #[error("i/o: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Audio,
    Latent,
}

impl Space {
    pub fn as_str(self) -> &'static str {
        match self {
            Space::Audio => "audio",
            Space::Latent => "latent",
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Measure {
    Dtw { radius: usize },
    Simple { subseq_len: usize },
    Euclidean,
    Cosine,
}

impl Measure {
    pub fn dtw() -> Self {
        Measure::Dtw {
            radius: DEFAULT_DTW_RADIUS,
        }
    }

    pub fn simple() -> Self {
        Measure::Simple {
            subseq_len: DEFAULT_SUBSEQ_LEN,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Measure::Dtw { .. } => "dtw",
            Measure::Simple { .. } => "simple",
            Measure::Euclidean => "euclidean",
            Measure::Cosine => "cosine",
        }
    }

    /// Whether the measure compares frame sequences rather than vectors.
    pub fn on_sequences(&self) -> bool {
        matches!(self, Measure::Dtw { .. } | Measure::Simple { .. })
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parses a measure name with default parameters.
impl FromStr for Measure {
    type Err = DistanceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dtw" => Ok(Measure::dtw()),
            "simple" => Ok(Measure::simple()),
            "euclidean" => Ok(Measure::Euclidean),
            "cosine" => Ok(Measure::Cosine),
            other => Err(DistanceError::InvalidParameter(format!(
                "unknown measure {other:?}"
            ))),
        }
    }
}

/// What a distance is computed on.
#[derive(Debug, Clone, PartialEq)]
pub enum Representation {
    Sequence(FeatureSequence),
    Vector(Embedding),
}

impl Representation {
    fn kind(&self) -> &'static str {
        match self {
            Representation::Sequence(_) => "sequence",
            Representation::Vector(_) => "vector",
        }
    }
}

/// Distance from `a` to `b` under `measure`. SiMPle is directional.
pub fn distance(
    a: &Representation,
    b: &Representation,
    measure: &Measure,
) -> Result<f64, DistanceError> {
    use Representation::*;
    match (measure, a, b) {
        (Measure::Dtw { radius }, Sequence(x), Sequence(y)) => dtw_fast(x, y, *radius),
        (Measure::Simple { subseq_len }, Sequence(x), Sequence(y)) => {
            simple_distance(x, y, *subseq_len)
        }
        (Measure::Euclidean, Vector(x), Vector(y)) => euclidean(x.values(), y.values()),
        (Measure::Cosine, Vector(x), Vector(y)) => cosine(x.values(), y.values()),
        _ => Err(DistanceError::KindMismatch {
            measure: measure.name().into(),
            kind: if measure.on_sequences() { b.kind() } else { a.kind() },
        }),
    }
}
