use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{bootstrap_ci, Interval, MetricsError};
use crate::transform::TransformSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "CW_audio")]
    CwAudio,
    #[serde(rename = "CW_latent")]
    CwLatent,
    #[serde(rename = "CB_acc")]
    CbAcc,
    #[serde(rename = "CB_rho")]
    CbRho,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::CwAudio, Metric::CwLatent, Metric::CbAcc, Metric::CbRho];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::CwAudio => "CW_audio",
            Metric::CwLatent => "CW_latent",
            Metric::CbAcc => "CB_acc",
            Metric::CbRho => "CB_rho",
        }
    }

    /// Admissible value range.
    pub fn range(self) -> (f64, f64) {
        match self {
            Metric::CbRho => (-1.0, 1.0),
            _ => (0.0, 1.0),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = MetricsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| MetricsError::InvalidParameter(format!("unknown metric {s:?}")))
    }
}

/// Mean and interval over the defined per-point values of one group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    /// `None` when every value was excluded.
    pub interval: Option<Interval>,
    pub n: usize,
    pub n_excluded: usize,
}

/// Bootstraps the `Some` entries; `None` entries are counted as excluded.
pub fn summarize(
    values: &[Option<f64>],
    n_boot: usize,
    level: f64,
    seed: u64,
) -> Result<Summary, MetricsError> {
    let defined: Vec<f64> = values.iter().flatten().copied().collect();
    let n_excluded = values.len() - defined.len();
    let interval = if defined.is_empty() {
        None
    } else {
        Some(bootstrap_ci(&defined, n_boot, level, seed)?)
    };
    Ok(Summary {
        interval,
        n: defined.len(),
        n_excluded,
    })
}

/// One metric value with its grouping keys, as written to the long CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyRecord {
    pub encoder: String,
    pub task_label: String,
    pub audio_measure: String,
    pub latent_measure: String,
    pub spec: TransformSpec,
    pub metric: Metric,
    pub summary: Summary,
}

impl ConsistencyRecord {
    pub fn value(&self) -> Option<f64> {
        self.summary.interval.map(|i| i.mean)
    }
}
