use super::DistanceError;

fn check(u: &[f64], v: &[f64]) -> Result<(), DistanceError> {
    if u.len() != v.len() {
        return Err(DistanceError::DimMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    if u.is_empty() {
        return Err(DistanceError::Empty);
    }
    Ok(())
}

pub fn euclidean(u: &[f64], v: &[f64]) -> Result<f64, DistanceError> {
    check(u, v)?;
    Ok(u.iter()
        .zip(v)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}

/// `1 - cos(u, v)`, clamped to [0, 2].
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, DistanceError> {
    check(u, v)?;
    let norm = |x: &[f64]| x.iter().map(|a| a * a).sum::<f64>().sqrt();
    let (nu, nv) = (norm(u), norm(v));
    if nu == 0.0 || nv == 0.0 {
        return Err(DistanceError::ZeroVector);
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    if u == v {
        return Ok(0.0);
    }
    Ok((1.0 - dot / (nu * nv)).clamp(0.0, 2.0))
}
