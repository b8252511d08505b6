use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::TransformError;

/// Transformation family. `OG` is the untransformed original.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    /// Pink noise, magnitude = SNR in dB.
    PN,
    /// Environmental noise, magnitude = SNR in dB.
    EN,
    /// Tempo shift, magnitude = percent of original tempo.
    TS,
    /// Pitch shift, magnitude = cents.
    PS,
    /// Lossy compression, magnitude = kb/s.
    MP,
    OG,
}

impl Category {
    pub const TRANSFORMS: [Category; 5] = [
        Category::PN,
        Category::EN,
        Category::TS,
        Category::PS,
        Category::MP,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::PN => "PN",
            Category::EN => "EN",
            Category::TS => "TS",
            Category::PS => "PS",
            Category::MP => "MP",
            Category::OG => "OG",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Category::PN | Category::EN => "dB SNR",
            Category::TS => "% tempo",
            Category::PS => "cents",
            Category::MP => "kb/s",
            Category::OG => "",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = TransformError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "PN" => Ok(Category::PN),
            "EN" => Ok(Category::EN),
            "TS" => Ok(Category::TS),
            "PS" => Ok(Category::PS),
            "MP" => Ok(Category::MP),
            "OG" => Ok(Category::OG),
            other => Err(TransformError::InvalidSpec(format!(
                "unknown transform category {other:?}"
            ))),
        }
    }
}

/// One point `(category, magnitude)` of the transformation grid.
///
/// Equality and hashing use the exact bit pattern of the magnitude, with
/// `-0.0` folded into `0.0`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct TransformSpec {
    category: Category,
    magnitude: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawSpec {
    category: Category,
    magnitude: Option<f64>,
}

impl TryFrom<RawSpec> for TransformSpec {
    type Error = TransformError;

    fn try_from(raw: RawSpec) -> Result<Self, Self::Error> {
        match raw.magnitude {
            None if raw.category == Category::OG => Ok(TransformSpec::original()),
            None => Err(TransformError::InvalidSpec(format!(
                "{} requires a magnitude",
                raw.category
            ))),
            Some(m) => TransformSpec::new(raw.category, m),
        }
    }
}

impl From<TransformSpec> for RawSpec {
    fn from(s: TransformSpec) -> Self {
        RawSpec {
            category: s.category,
            magnitude: s.magnitude,
        }
    }
}

impl TransformSpec {
    pub fn original() -> Self {
        Self {
            category: Category::OG,
            magnitude: None,
        }
    }

    pub fn new(category: Category, magnitude: f64) -> Result<Self, TransformError> {
        if category == Category::OG {
            return Err(TransformError::InvalidSpec("OG carries no magnitude".into()));
        }
        if !magnitude.is_finite() {
            return Err(TransformError::InvalidSpec(format!(
                "non-finite magnitude for {category}"
            )));
        }
        let magnitude = if magnitude == 0.0 { 0.0 } else { magnitude };
        Ok(Self {
            category,
            magnitude: Some(magnitude),
        })
    }

    pub fn category(&self) -> Category {
        self.category
    }

    pub fn magnitude(&self) -> Option<f64> {
        self.magnitude
    }

    pub fn is_original(&self) -> bool {
        self.category == Category::OG
    }

    /// Magnitude token used in file names and CSV cells; `none` for OG.
    pub fn magnitude_token(&self) -> String {
        match self.magnitude {
            Some(m) => format!("{m}"),
            None => "none".to_string(),
        }
    }

    /// `{category}__{magnitude}`.
    pub fn key(&self) -> String {
        format!("{}__{}", self.category, self.magnitude_token())
    }

    /// Inverse of [`TransformSpec::key`].
    pub fn parse_key(key: &str) -> Result<Self, TransformError> {
        let (cat, mag) = key
            .split_once("__")
            .ok_or_else(|| TransformError::InvalidSpec(format!("malformed spec key {key:?}")))?;
        Self::from_parts(cat, mag)
    }

    pub fn from_parts(category: &str, magnitude: &str) -> Result<Self, TransformError> {
        let category: Category = category.parse()?;
        if category == Category::OG {
            return match magnitude {
                "none" | "" => Ok(Self::original()),
                other => Err(TransformError::InvalidSpec(format!(
                    "OG carries no magnitude, got {other:?}"
                ))),
            };
        }
        let m: f64 = magnitude.parse().map_err(|_| {
            TransformError::InvalidSpec(format!("bad magnitude {magnitude:?} for {category}"))
        })?;
        Self::new(category, m)
    }

    fn bits(&self) -> Option<u64> {
        self.magnitude.map(f64::to_bits)
    }
}

impl PartialEq for TransformSpec {
    fn eq(&self, other: &Self) -> bool {
        self.category == other.category && self.bits() == other.bits()
    }
}

impl Eq for TransformSpec {}

impl Hash for TransformSpec {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.category.hash(state);
        self.bits().hash(state);
    }
}

impl PartialOrd for TransformSpec {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TransformSpec {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.category.cmp(&other.category).then_with(|| {
            let a = self.magnitude.unwrap_or(f64::NEG_INFINITY);
            let b = other.magnitude.unwrap_or(f64::NEG_INFINITY);
            a.total_cmp(&b)
        })
    }
}

impl fmt::Display for TransformSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.magnitude {
            Some(m) => write!(f, "{} {} {}", self.category, m, self.category.unit()),
            None => f.write_str("OG"),
        }
    }
}

/// Name of a transformed excerpt WAV: `{clip_id}__{category}__{magnitude}.wav`.
pub fn excerpt_file_name(clip_id: &str, spec: &TransformSpec) -> String {
    format!("{clip_id}__{}.wav", spec.key())
}

/// Inverse of [`excerpt_file_name`]. Clip ids may themselves contain `__`.
pub fn parse_excerpt_file_name(name: &str) -> Result<(String, TransformSpec), TransformError> {
    let stem = name.strip_suffix(".wav").unwrap_or(name);
    let mut parts = stem.rsplitn(3, "__");
    let (mag, cat, clip) = (parts.next(), parts.next(), parts.next());
    match (clip, cat, mag) {
        (Some(clip), Some(cat), Some(mag)) if !clip.is_empty() => {
            Ok((clip.to_string(), TransformSpec::from_parts(cat, mag)?))
        }
        _ => Err(TransformError::InvalidSpec(format!(
            "excerpt name {name:?} does not follow clip__category__magnitude"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn og_has_no_magnitude() {
        assert!(TransformSpec::new(Category::OG, 1.0).is_err());
        assert_eq!(TransformSpec::original().magnitude(), None);
        assert!(TransformSpec::from_parts("PN", "none").is_err());
    }

    #[test]
    fn negative_zero_folds() {
        let a = TransformSpec::new(Category::PN, -0.0).unwrap();
        let b = TransformSpec::new(Category::PN, 0.0).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.key(), "PN__0");
    }

    #[test]
    fn file_names_with_underscored_ids() {
        let spec = TransformSpec::new(Category::PS, -25.0).unwrap();
        let name = excerpt_file_name("track__07", &spec);
        assert_eq!(name, "track__07__PS__-25.wav");
        assert_eq!(
            parse_excerpt_file_name(&name).unwrap(),
            ("track__07".to_string(), spec)
        );
        let og = excerpt_file_name("a", &TransformSpec::original());
        assert_eq!(parse_excerpt_file_name(&og).unwrap().1, TransformSpec::original());
        assert!(parse_excerpt_file_name("nounderscores.wav").is_err());
    }

    proptest! {
        #[test]
        fn key_round_trip(cat in 0usize..5, mag in -2000.0f64..2000.0) {
            let spec = TransformSpec::new(Category::TRANSFORMS[cat], mag).unwrap();
            prop_assert_eq!(TransformSpec::parse_key(&spec.key()).unwrap(), spec);
            let json = serde_json::to_string(&spec).unwrap();
            prop_assert_eq!(serde_json::from_str::<TransformSpec>(&json).unwrap(), spec);
        }
    }
}
