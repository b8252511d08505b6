use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{distance, DistanceError, Measure, Representation, Space};
use crate::transform::{Category, TransformSpec};

/// Distances from transformed points (rows) to originals (columns) for one
/// space, measure and transform.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    space: Space,
    measure: String,
    spec: TransformSpec,
    row_ids: Vec<String>,
    col_ids: Vec<String>,
    values: Array2<f64>,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    space: Space,
    measure: String,
    category: Category,
    magnitude: Option<f64>,
}

impl DistanceMatrix {
    pub fn new(
        space: Space,
        measure: impl Into<String>,
        spec: TransformSpec,
        row_ids: Vec<String>,
        col_ids: Vec<String>,
        values: Array2<f64>,
    ) -> Result<Self, DistanceError> {
        if values.dim() != (row_ids.len(), col_ids.len()) {
            return Err(DistanceError::Format(format!(
                "matrix is {:?} but has {} row and {} column ids",
                values.dim(),
                row_ids.len(),
                col_ids.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(DistanceError::Format(
                "distances must be finite and non-negative".into(),
            ));
        }
        Ok(Self {
            space,
            measure: measure.into(),
            spec,
            row_ids,
            col_ids,
            values,
        })
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn measure(&self) -> &str {
        &self.measure
    }

    pub fn spec(&self) -> TransformSpec {
        self.spec
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn col_ids(&self) -> &[String] {
        &self.col_ids
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn shape(&self) -> (usize, usize) {
        self.values.dim()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.values.row(i).to_vec()
    }

    pub fn row_index(&self, id: &str) -> Option<usize> {
        self.row_ids.iter().position(|r| r == id)
    }

    pub fn col_index(&self, id: &str) -> Option<usize> {
        self.col_ids.iter().position(|c| c == id)
    }

    /// Writes `path` as CSV (header of original ids, first column of
    /// transformed ids) and the metadata next to it as `.json`.
    pub fn write(&self, path: &Path) -> Result<(), DistanceError> {
        let io = |e: std::io::Error| DistanceError::Io(format!("{}: {e}", path.display()));
        let mut out = String::new();
        out.push_str("transformed");
        for c in &self.col_ids {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (id, row) in self.row_ids.iter().zip(self.values.rows()) {
            out.push_str(id);
            for v in row {
                out.push(',');
                out.push_str(&format!("{v:?}"));
            }
            out.push('\n');
        }
        fs::write(path, out).map_err(io)?;
        let sidecar = Sidecar {
            space: self.space,
            measure: self.measure.clone(),
            category: self.spec.category(),
            magnitude: self.spec.magnitude(),
        };
        let json = serde_json::to_string_pretty(&sidecar).expect("sidecar serialises");
        fs::write(sidecar_path(path), json + "\n").map_err(io)
    }

    pub fn read(path: &Path) -> Result<Self, DistanceError> {
        let side = sidecar_path(path);
        let meta = fs::read_to_string(&side)
            .map_err(|e| DistanceError::Io(format!("{}: {e}", side.display())))?;
        let meta: Sidecar = serde_json::from_str(&meta)
            .map_err(|e| DistanceError::Format(format!("{}: {e}", side.display())))?;
        let spec = match meta.magnitude {
            Some(m) => TransformSpec::new(meta.category, m),
            None => TransformSpec::from_parts(meta.category.as_str(), "none"),
        }
        .map_err(|e| DistanceError::Format(e.to_string()))?;

        let bad = |msg: String| DistanceError::Format(format!("{}: {msg}", path.display()));
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(path)
            .map_err(|e| DistanceError::Io(format!("{}: {e}", path.display())))?;
        let header = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
        let col_ids: Vec<String> = header.iter().skip(1).map(String::from).collect();
        let mut row_ids = Vec::new();
        let mut flat = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| bad(e.to_string()))?;
            let mut fields = record.iter();
            row_ids.push(fields.next().unwrap_or_default().to_string());
            for f in fields {
                flat.push(f.parse::<f64>().map_err(|e| bad(format!("{f:?}: {e}")))?);
            }
        }
        let values = Array2::from_shape_vec((row_ids.len(), col_ids.len()), flat)
            .map_err(|e| bad(e.to_string()))?;
        Self::new(meta.space, meta.measure, spec, row_ids, col_ids, values)
    }
}

fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// All pairwise distances between `rows` and `cols`, computed in parallel
/// over cells.
pub fn pairwise_distances(
    rows: &[(&str, &Representation)],
    cols: &[(&str, &Representation)],
    measure: &Measure,
    space: Space,
    spec: TransformSpec,
) -> Result<DistanceMatrix, DistanceError> {
    let m = cols.len();
    let flat = (0..rows.len() * m)
        .into_par_iter()
        .map(|cell| distance(rows[cell / m].1, cols[cell % m].1, measure))
        .collect::<Result<Vec<f64>, _>>()?;
    let values = Array2::from_shape_vec((rows.len(), m), flat)
        .expect("cell count matches the shape");
    DistanceMatrix::new(
        space,
        measure.name(),
        spec,
        rows.iter().map(|(id, _)| id.to_string()).collect(),
        cols.iter().map(|(id, _)| id.to_string()).collect(),
        values,
    )
}
