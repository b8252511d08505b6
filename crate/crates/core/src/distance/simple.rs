//! SiMPle: AB similarity join over feature windows, summarised by the median.

use super::DistanceError;
use crate::audio::FeatureSequence;

pub const DEFAULT_SUBSEQ_LEN: usize = 20;

/// Matrix profile of `a` joined against `b`: for every length-`w` window of
/// `a`, the smallest Euclidean distance to any length-`w` window of `b`,
/// both flattened over frames and dimensions.
pub fn simple_profile(
    a: &FeatureSequence,
    b: &FeatureSequence,
    subseq_len: usize,
) -> Result<Vec<f64>, DistanceError> {
    if a.dims() != b.dims() {
        return Err(DistanceError::DimMismatch {
            left: a.dims(),
            right: b.dims(),
        });
    }
    if subseq_len == 0 {
        return Err(DistanceError::InvalidParameter(
            "subsequence length must be positive".into(),
        ));
    }
    for s in [a, b] {
        if s.len() < subseq_len {
            return Err(DistanceError::TooShort {
                needed: subseq_len,
                got: s.len(),
            });
        }
    }
    let (n, m) = (a.len(), b.len());
    let mut sq = vec![0.0; n * m];
    for i in 0..n {
        let fa = a.frame(i);
        for j in 0..m {
            sq[i * m + j] = fa
                .iter()
                .zip(b.frame(j))
                .map(|(x, y)| (x - y) * (x - y))
                .sum();
        }
    }
    let (wa, wb) = (n - subseq_len + 1, m - subseq_len + 1);
    let profile = (0..wa)
        .map(|i| {
            (0..wb)
                .map(|j| (0..subseq_len).map(|k| sq[(i + k) * m + j + k]).sum::<f64>())
                .fold(f64::INFINITY, f64::min)
                .sqrt()
        })
        .collect();
    Ok(profile)
}

pub(crate) fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Median of the `a`-to-`b` similarity-join profile. Directional: `a` is the
/// transformed excerpt, `b` the original.
pub fn simple_distance(
    a: &FeatureSequence,
    b: &FeatureSequence,
    subseq_len: usize,
) -> Result<f64, DistanceError> {
    let mut profile = simple_profile(a, b, subseq_len)?;
    Ok(median(&mut profile))
}
