use serde::{Deserialize, Serialize};

use super::{Category, TransformError, TransformSpec};

/// Ordered magnitudes evaluated for one category.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MagnitudeGrid {
    category: Category,
    magnitudes: Vec<f64>,
}

impl MagnitudeGrid {
    /// Requires a non-empty, strictly monotone (either direction) list.
    pub fn new(category: Category, magnitudes: Vec<f64>) -> Result<Self, TransformError> {
        if category == Category::OG {
            return Err(TransformError::InvalidSpec("OG has no magnitude grid".into()));
        }
        if magnitudes.is_empty() {
            return Err(TransformError::InvalidSpec(format!("empty {category} grid")));
        }
        let increasing = magnitudes.windows(2).all(|w| w[0] < w[1]);
        let decreasing = magnitudes.windows(2).all(|w| w[0] > w[1]);
        if !(increasing || decreasing) {
            return Err(TransformError::InvalidSpec(format!(
                "{category} grid is not strictly monotone"
            )));
        }
        for &m in &magnitudes {
            check_range(category, m)?;
        }
        Ok(Self {
            category,
            magnitudes,
        })
    }

    pub fn category(&self) -> Category {
        self.category
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    pub fn specs(&self) -> impl Iterator<Item = TransformSpec> + '_ {
        self.magnitudes
            .iter()
            .map(move |&m| TransformSpec::new(self.category, m).expect("grid values are validated"))
    }

    pub fn contains(&self, magnitude: f64) -> bool {
        self.magnitudes.contains(&magnitude)
    }
}

/// Hard limits of each transformation's operating range.
pub fn check_range(category: Category, magnitude: f64) -> Result<(), TransformError> {
    let ok = match category {
        Category::PN | Category::EN => magnitude.is_finite(),
        Category::TS => (30.0..=150.0).contains(&magnitude),
        Category::PS => (-1200.0..=1200.0).contains(&magnitude),
        Category::MP => magnitude > 0.0 && magnitude.is_finite(),
        Category::OG => false,
    };
    if ok {
        Ok(())
    } else {
        Err(TransformError::OutOfRange {
            category,
            magnitude,
        })
    }
}

pub fn default_grid(category: Category) -> Result<MagnitudeGrid, TransformError> {
    let magnitudes: Vec<f64> = match category {
        Category::PN | Category::EN => vec![
            30.0, 27.0, 24.0, 21.0, 18.0, 15.0, 12.0, 9.0, 6.0, 3.0, 0.0, -5.0, -10.0, -15.0,
        ],
        Category::TS => vec![
            30.0, 50.0, 70.0, 80.0, 90.0, 94.0, 96.0, 98.0, 102.0, 104.0, 106.0, 110.0, 120.0,
            130.0, 150.0,
        ],
        Category::PS => {
            let steps = [25.0, 50.0, 100.0, 200.0, 400.0, 600.0, 800.0, 1000.0, 1200.0];
            let mut v: Vec<f64> = steps.iter().rev().map(|s| -s).collect();
            v.extend(steps);
            v
        }
        Category::MP => vec![
            8.0, 16.0, 24.0, 32.0, 40.0, 48.0, 64.0, 80.0, 96.0, 112.0, 128.0, 160.0, 192.0,
            224.0, 256.0, 320.0,
        ],
        Category::OG => {
            return Err(TransformError::InvalidSpec("OG has no magnitude grid".into()))
        }
    };
    MagnitudeGrid::new(category, magnitudes)
}

/// Magnitudes treated as barely perceptible: +-25 cents, +-2% tempo, 30 dB SNR
/// and 192 kb/s.
pub fn smallest_magnitudes(category: Category) -> Vec<f64> {
    match category {
        Category::PN | Category::EN => vec![30.0],
        Category::TS => vec![98.0, 102.0],
        Category::PS => vec![-25.0, 25.0],
        Category::MP => vec![192.0],
        Category::OG => vec![],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_endpoints() {
        let pn = default_grid(Category::PN).unwrap();
        assert_eq!(pn.magnitudes().first(), Some(&30.0));
        assert_eq!(pn.magnitudes().last(), Some(&-15.0));
        let ts = default_grid(Category::TS).unwrap();
        assert_eq!(ts.magnitudes().first(), Some(&30.0));
        assert_eq!(ts.magnitudes().last(), Some(&150.0));
        let ps = default_grid(Category::PS).unwrap();
        let smallest = ps
            .magnitudes()
            .iter()
            .copied()
            .fold(f64::INFINITY, |a, m| a.min(m.abs()));
        assert_eq!(smallest, 25.0);
        assert!(ps.contains(25.0) && ps.contains(-25.0));
    }

    #[test]
    fn every_default_grid_is_valid() {
        for cat in Category::TRANSFORMS {
            let grid = default_grid(cat).unwrap();
            for m in smallest_magnitudes(cat) {
                assert!(grid.contains(m), "{cat} misses {m}");
            }
        }
        assert!(default_grid(Category::OG).is_err());
    }

    #[test]
    fn rejects_unordered_or_out_of_range() {
        assert!(MagnitudeGrid::new(Category::TS, vec![50.0, 40.0, 60.0]).is_err());
        assert!(MagnitudeGrid::new(Category::TS, vec![20.0, 40.0]).is_err());
        assert!(MagnitudeGrid::new(Category::PS, vec![]).is_err());
        assert!(MagnitudeGrid::new(Category::MP, vec![0.0, 8.0]).is_err());
        assert!(MagnitudeGrid::new(Category::PN, vec![10.0, 10.0]).is_err());
    }
}
