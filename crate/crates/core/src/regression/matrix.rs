use crate::error::{Error, Result};

/// Dense row-major design matrix with labelled columns.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
    feature_ids: Vec<String>,
}

impl DesignMatrix {
    pub fn new(n_rows: usize, n_cols: usize, data: Vec<f64>, feature_ids: Vec<String>) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::DegenerateInput(format!(
                "design matrix must be non-empty, got {n_rows}x{n_cols}"
            )));
        }
        if data.len() != n_rows * n_cols {
            return Err(Error::DimensionMismatch {
                expected: n_rows * n_cols,
                got: data.len(),
            });
        }
        if feature_ids.len() != n_cols {
            return Err(Error::DimensionMismatch {
                expected: n_cols,
                got: feature_ids.len(),
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::DegenerateInput(format!(
                "non-finite value at row {}, column {}",
                pos / n_cols,
                pos % n_cols
            )));
        }
        Ok(Self {
            n_rows,
            n_cols,
            data,
            feature_ids,
        })
    }

    /// Builds from rows, labelling columns `x0, x1, ...`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        let ids = (0..p).map(|j| format!("x{j}")).collect();
        Self::from_rows_labelled(rows, ids)
    }

    pub fn from_rows_labelled(rows: &[Vec<f64>], feature_ids: Vec<String>) -> Result<Self> {
        let p = feature_ids.len();
        let mut data = Vec::with_capacity(rows.len() * p);
        for r in rows {
            if r.len() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), p, data, feature_ids)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn feature_ids(&self) -> &[String] {
        &self.feature_ids
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n_cols)
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.rows().map(move |r| r[j])
    }
}

/// Checks a target vector against a design matrix.
pub(crate) fn check_targets(x: &DesignMatrix, y: &[f64]) -> Result<()> {
    if y.len() != x.n_rows() {
        return Err(Error::LengthMismatch {
            left: x.n_rows(),
            right: y.len(),
        });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateInput("non-finite target".into()));
    }
    Ok(())
}

pub(crate) fn check_features(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: x.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateInput("non-finite feature value".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes() {
        assert!(DesignMatrix::from_rows(&[]).is_err());
        assert!(DesignMatrix::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(DesignMatrix::from_rows(&[vec![f64::NAN]]).is_err());
        let m = DesignMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(m.row(1), &[3.0, 4.0]);
        assert_eq!(m.column(1).collect::<Vec<_>>(), [2.0, 4.0]);
        assert_eq!(m.feature_ids(), ["x0", "x1"]);
    }
}
