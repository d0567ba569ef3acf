use serde::{Deserialize, Serialize};

use super::matrix::DesignMatrix;

/// Per-column centring and scaling learned from training data.
///
/// Scales are population standard deviations (divide by `n`). Columns whose
/// deviation is below `1e-10 * max|x|` are treated as constant and get scale 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

impl Standardization {
    pub fn identity(p: usize) -> Self {
        Self {
            means: vec![0.0; p],
            scales: vec![1.0; p],
        }
    }

    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    pub fn apply_row(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.means.iter().zip(&self.scales))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn invert_row(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(self.means.iter().zip(&self.scales))
            .map(|(v, (m, s))| v * s + m)
            .collect()
    }
}

pub fn standardize_fit(x: &DesignMatrix) -> Standardization {
    let n = x.n_rows() as f64;
    let p = x.n_cols();
    let mut means = vec![0.0; p];
    for row in x.rows() {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut means {
        *m /= n;
    }
    let mut ss = vec![0.0; p];
    let mut peak = vec![0.0f64; p];
    for row in x.rows() {
        for j in 0..p {
            let d = row[j] - means[j];
            ss[j] += d * d;
            peak[j] = peak[j].max(row[j].abs());
        }
    }
    let scales = ss
        .iter()
        .zip(&peak)
        .map(|(&s, &pk)| {
            let sd = (s / n).sqrt();
            if sd <= 1e-10 * pk || sd == 0.0 {
                1.0
            } else {
                sd
            }
        })
        .collect();
    Standardization { means, scales }
}

pub fn standardize_apply(st: &Standardization, x: &DesignMatrix) -> DesignMatrix {
    let data: Vec<f64> = x.rows().flat_map(|r| st.apply_row(r)).collect();
    DesignMatrix::new(x.n_rows(), x.n_cols(), data, x.feature_ids().to_vec())
        .expect("standardizing preserves shape and finiteness")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centres_and_scales_with_population_sd() {
        let x = DesignMatrix::from_rows(&[vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        let st = standardize_fit(&x);
        assert_eq!(st.means, [2.0]);
        let sd = (2.0f64 / 3.0).sqrt();
        assert!((st.scales[0] - sd).abs() < 1e-15);
        let z = standardize_apply(&st, &x);
        let col: Vec<f64> = z.column(0).collect();
        for (a, b) in col.iter().zip([-1.0 / sd, 0.0, 1.0 / sd]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_column_passes_through_centred() {
        let x = DesignMatrix::from_rows(&[vec![5.0], vec![5.0], vec![5.0]]).unwrap();
        let st = standardize_fit(&x);
        assert_eq!(st.scales, [1.0]);
        let z = standardize_apply(&st, &x);
        assert_eq!(z.column(0).collect::<Vec<_>>(), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn round_trip() {
        let rows = vec![
            vec![1.5, -3.0, 1e6],
            vec![2.5, 4.0, 2e6],
            vec![-7.0, 0.25, 3.5e6],
        ];
        let x = DesignMatrix::from_rows(&rows).unwrap();
        let st = standardize_fit(&x);
        let z = standardize_apply(&st, &x);
        for (zr, xr) in z.rows().zip(&rows) {
            for (a, b) in st.invert_row(zr).iter().zip(xr) {
                assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
            }
        }
    }
}
