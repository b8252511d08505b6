//! Exact and multi-resolution (FastDTW) dynamic time warping.

use super::DistanceError;
use crate::audio::FeatureSequence;

fn frame_cost(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn check(a: &FeatureSequence, b: &FeatureSequence) -> Result<(), DistanceError> {
    if a.is_empty() || b.is_empty() {
        return Err(DistanceError::Empty);
    }
    if a.dims() != b.dims() {
        return Err(DistanceError::DimMismatch {
            left: a.dims(),
            right: b.dims(),
        });
    }
    Ok(())
}

/// Per-row inclusive column ranges the DP may visit.
type Window = Vec<(usize, usize)>;

/// Accumulated cost along the cheapest boundary-to-boundary warping path
/// inside `window` (every cell when `None`), with steps (1,0), (0,1), (1,1)
/// and Euclidean frame cost. Also returns that path.
fn dtw_windowed(
    a: &[Vec<f64>],
    b: &[Vec<f64>],
    window: Option<&Window>,
) -> (f64, Vec<(usize, usize)>) {
    let (n, m) = (a.len(), b.len());
    let full = vec![(0, m - 1); n];
    let window = window.unwrap_or(&full);
    // cost[i][j - window[i].0]
    let mut acc: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        let (lo, hi) = window[i];
        let mut row = vec![f64::INFINITY; hi - lo + 1];
        for j in lo..=hi {
            let c = frame_cost(&a[i], &b[j]);
            let best = if i == 0 && j == 0 {
                0.0
            } else {
                let get = |ii: usize, jj: usize| -> f64 {
                    let (l, h) = window[ii];
                    if jj < l || jj > h {
                        f64::INFINITY
                    } else if ii == i {
                        row[jj - l]
                    } else {
                        acc[ii][jj - l]
                    }
                };
                let mut best = f64::INFINITY;
                if i > 0 {
                    best = best.min(get(i - 1, j));
                    if j > 0 {
                        best = best.min(get(i - 1, j - 1));
                    }
                }
                if j > 0 {
                    best = best.min(get(i, j - 1));
                }
                best
            };
            row[j - lo] = c + best;
        }
        acc.push(row);
    }
    let value = |i: usize, j: usize| -> f64 {
        let (l, h) = window[i];
        if j < l || j > h {
            f64::INFINITY
        } else {
            acc[i][j - l]
        }
    };

    let total = value(n - 1, m - 1);
    let mut path = vec![(n - 1, m - 1)];
    let (mut i, mut j) = (n - 1, m - 1);
    while (i, j) != (0, 0) {
        let mut options = Vec::with_capacity(3);
        if i > 0 && j > 0 {
            options.push((i - 1, j - 1));
        }
        if i > 0 {
            options.push((i - 1, j));
        }
        if j > 0 {
            options.push((i, j - 1));
        }
        (i, j) = options
            .into_iter()
            .min_by(|p, q| value(p.0, p.1).total_cmp(&value(q.0, q.1)))
            .expect("at least one predecessor");
        path.push((i, j));
    }
    path.reverse();
    (total, path)
}

fn rows(seq: &FeatureSequence) -> Vec<Vec<f64>> {
    (0..seq.len()).map(|i| seq.frame(i).to_vec()).collect()
}

/// Full O(nm) dynamic time warping distance.
pub fn dtw_exact(a: &FeatureSequence, b: &FeatureSequence) -> Result<f64, DistanceError> {
    check(a, b)?;
    Ok(dtw_windowed(&rows(a), &rows(b), None).0)
}

fn reduce_by_half(x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    x.chunks_exact(2)
        .map(|p| p[0].iter().zip(&p[1]).map(|(u, v)| (u + v) / 2.0).collect())
        .collect()
}

/// Projects a coarse path to the finer resolution, widened by `radius`
/// coarse cells, as per-row column ranges that always admit a
/// boundary-to-boundary path.
fn expand_window(path: &[(usize, usize)], n: usize, m: usize, radius: usize) -> Window {
    let mut lo = vec![usize::MAX; n];
    let mut hi = vec![0usize; n];
    let r = radius as isize;
    for &(i, j) in path {
        for di in -r..=r {
            let ci = i as isize + di;
            if ci < 0 {
                continue;
            }
            let (j0, j1) = ((j as isize - r).max(0) as usize, (j as isize + r) as usize);
            for fi in [2 * ci as usize, 2 * ci as usize + 1] {
                if fi < n {
                    lo[fi] = lo[fi].min(2 * j0);
                    hi[fi] = hi[fi].max(2 * j1 + 1);
                }
            }
        }
    }
    // rows past the coarse grid (odd length) inherit their neighbour
    for i in 1..n {
        if lo[i] == usize::MAX {
            lo[i] = lo[i - 1];
            hi[i] = hi[i - 1];
        }
    }
    lo[0] = 0;
    hi[n - 1] = m - 1;
    for i in 1..n {
        hi[i] = hi[i].max(hi[i - 1]);
    }
    for i in (0..n - 1).rev() {
        lo[i] = lo[i].min(lo[i + 1]);
    }
    // consecutive rows must overlap or touch diagonally
    for i in 1..n {
        lo[i] = lo[i].min(hi[i - 1] + 1);
    }
    (0..n).map(|i| (lo[i], hi[i].min(m - 1))).collect()
}

fn fastdtw_rec(a: &[Vec<f64>], b: &[Vec<f64>], radius: usize) -> (f64, Vec<(usize, usize)>) {
    let min_size = radius + 2;
    if a.len() < min_size || b.len() < min_size {
        return dtw_windowed(a, b, None);
    }
    let (ca, cb) = (reduce_by_half(a), reduce_by_half(b));
    let (_, coarse_path) = fastdtw_rec(&ca, &cb, radius);
    let window = expand_window(&coarse_path, a.len(), b.len(), radius);
    dtw_windowed(a, b, Some(&window))
}

/// FastDTW: coarsen by pairwise frame averaging, solve recursively, project
/// the path back and refine inside the projected corridor widened by
/// `radius`. Falls back to exact DTW once either sequence is shorter than
/// `radius + 2`, so a large radius reproduces [`dtw_exact`] bit for bit.
pub fn dtw_fast(
    a: &FeatureSequence,
    b: &FeatureSequence,
    radius: usize,
) -> Result<f64, DistanceError> {
    check(a, b)?;
    Ok(fastdtw_rec(&rows(a), &rows(b), radius).0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seq(rows: &[&[f64]]) -> FeatureSequence {
        FeatureSequence::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn hand_table() {
        let a = seq(&[&[0.0], &[0.0]]);
        let b = seq(&[&[3.0]]);
        assert_eq!(dtw_exact(&a, &b).unwrap(), 6.0);
        assert_eq!(dtw_exact(&b, &a).unwrap(), 6.0);
        assert_eq!(dtw_exact(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn shifted_ramp() {
        // [0,1,2,3] vs [1,2,3,4]: best path pays 1 at both ends
        let a = seq(&[&[0.0], &[1.0], &[2.0], &[3.0]]);
        let b = seq(&[&[1.0], &[2.0], &[3.0], &[4.0]]);
        assert_eq!(dtw_exact(&a, &b).unwrap(), 2.0);
    }

    #[test]
    fn rejects_dimension_mismatch() {
        let a = seq(&[&[0.0, 1.0]]);
        let b = seq(&[&[3.0]]);
        assert!(matches!(dtw_exact(&a, &b), Err(DistanceError::DimMismatch { .. })));
        assert!(dtw_fast(&a, &b, 1).is_err());
    }

    #[test]
    fn window_contains_a_full_path() {
        for (n, m) in [(7, 9), (16, 5), (33, 33), (2, 40)] {
            let coarse: Vec<(usize, usize)> =
                (0..n / 2).map(|i| (i, i * (m / 2).max(1) / (n / 2).max(1))).collect();
            for r in 0..3 {
                let w = expand_window(&coarse, n, m, r);
                assert_eq!(w[0].0, 0);
                assert_eq!(w[n - 1].1, m - 1);
                for i in 1..n {
                    assert!(w[i].0 <= w[i - 1].1 + 1 && w[i].0 >= w[i - 1].0);
                }
            }
        }
    }

    fn arb_seq(max_len: usize, dims: usize) -> impl Strategy<Value = FeatureSequence> {
        prop::collection::vec(prop::collection::vec(-5.0..5.0f64, dims), 1..max_len)
            .prop_map(|rows| FeatureSequence::from_rows(&rows).unwrap())
    }

    proptest! {
        #[test]
        fn fast_never_beats_exact(a in arb_seq(40, 3), b in arb_seq(40, 3), r in 0usize..4) {
            let exact = dtw_exact(&a, &b).unwrap();
            let fast = dtw_fast(&a, &b, r).unwrap();
            prop_assert!(fast >= exact);
            prop_assert!(fast.is_finite());
        }

        #[test]
        fn symmetric_and_zero_on_self(a in arb_seq(30, 2), b in arb_seq(30, 2)) {
            prop_assert_eq!(dtw_exact(&a, &b).unwrap(), dtw_exact(&b, &a).unwrap());
            prop_assert_eq!(dtw_exact(&a, &a).unwrap(), 0.0);
            prop_assert_eq!(dtw_fast(&a, &a, 1).unwrap(), 0.0);
        }

        #[test]
        fn large_radius_is_exact(a in arb_seq(30, 2), b in arb_seq(30, 2)) {
            let r = a.len().max(b.len());
            prop_assert_eq!(dtw_fast(&a, &b, r).unwrap(), dtw_exact(&a, &b).unwrap());
        }
    }
}
