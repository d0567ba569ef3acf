use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::matrix::{check_features, check_targets, DesignMatrix};
use super::standardize::{standardize_fit, Standardization};

/// Affine model over standardized features:
/// `y = intercept + sum_j coefficients[j] * (x_j - mean_j) / scale_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub standardization: Standardization,
    /// Ridge penalty the model was fitted with; zero for plain least squares.
    pub lambda: f64,
}

impl LinearModel {
    pub fn new(intercept: f64, coefficients: Vec<f64>, standardization: Standardization, lambda: f64) -> Result<Self> {
        if coefficients.len() != standardization.len() {
            return Err(Error::DimensionMismatch {
                expected: standardization.len(),
                got: coefficients.len(),
            });
        }
        if standardization.scales.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::DegenerateInput("standardization scales must be positive".into()));
        }
        Ok(Self {
            intercept,
            coefficients,
            standardization,
            lambda,
        })
    }

    pub fn n_features(&self) -> usize {
        self.coefficients.len()
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        check_features(self.n_features(), x)?;
        Ok(self.predict_unchecked(x))
    }

    pub(crate) fn predict_unchecked(&self, x: &[f64]) -> f64 {
        let st = &self.standardization;
        self.coefficients
            .iter()
            .enumerate()
            .fold(self.intercept, |acc, (j, w)| {
                acc + w * (x[j] - st.means[j]) / st.scales[j]
            })
    }

    /// Intercept and slopes in the original feature units.
    pub fn raw_coefficients(&self) -> (f64, Vec<f64>) {
        let st = &self.standardization;
        let slopes: Vec<f64> = self
            .coefficients
            .iter()
            .zip(&st.scales)
            .map(|(w, s)| w / s)
            .collect();
        let shift: f64 = slopes.iter().zip(&st.means).map(|(b, m)| b * m).sum();
        (self.intercept - shift, slopes)
    }

    pub fn coefficient_norm(&self) -> f64 {
        self.coefficients.iter().map(|w| w * w).sum::<f64>().sqrt()
    }
}

struct Centred {
    z: DMatrix<f64>,
    y: DVector<f64>,
    y_mean: f64,
    standardization: Standardization,
}

fn centre(x: &DesignMatrix, y: &[f64]) -> Result<Centred> {
    check_targets(x, y)?;
    if x.n_rows() < 2 {
        return Err(Error::DegenerateInput(format!(
            "need at least 2 rows, got {}",
            x.n_rows()
        )));
    }
    let st = standardize_fit(x);
    let n = x.n_rows();
    let p = x.n_cols();
    let z = DMatrix::from_fn(n, p, |i, j| (x.get(i, j) - st.means[j]) / st.scales[j]);
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let yc = DVector::from_iterator(n, y.iter().map(|v| v - y_mean));
    Ok(Centred {
        z,
        y: yc,
        y_mean,
        standardization: st,
    })
}

/// Minimum-norm least squares via SVD; singular values below
/// `eps * max(n, p) * sigma_max` are dropped.
fn lstsq_min_norm(a: DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let (n, p) = a.shape();
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let tol = f64::EPSILON * n.max(p) as f64 * smax;
    if smax == 0.0 {
        return Ok(DVector::zeros(p));
    }
    svd.solve(b, tol)
        .map_err(|e| Error::DegenerateInput(format!("least squares solve failed: {e}")))
}

fn finish(c: Centred, w: DVector<f64>, lambda: f64) -> Result<LinearModel> {
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateInput("solution is not finite".into()));
    }
    LinearModel::new(c.y_mean, w.iter().copied().collect(), c.standardization, lambda)
}

/// Ordinary least squares with an unpenalized intercept.
pub fn fit_mlr(x: &DesignMatrix, y: &[f64]) -> Result<LinearModel> {
    let c = centre(x, y)?;
    let w = lstsq_min_norm(c.z.clone(), &c.y)?;
    finish(c, w, 0.0)
}

/// Ridge regression on standardized features: solves
/// `(Z'Z + lambda I) w = Z'y` with the intercept left unpenalized.
pub fn fit_ridge(x: &DesignMatrix, y: &[f64], lambda: f64) -> Result<LinearModel> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::InvalidConfig(format!("ridge lambda must be >= 0, got {lambda}")));
    }
    let c = centre(x, y)?;
    let zt = c.z.transpose();
    let mut gram = &zt * &c.z;
    for i in 0..gram.nrows() {
        gram[(i, i)] += lambda;
    }
    let rhs = &zt * &c.y;
    let w = match gram.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        // Singular Gram matrix, only possible at lambda = 0.
        None => lstsq_min_norm(c.z.clone(), &c.y)?,
    };
    finish(c, w, lambda)
}
