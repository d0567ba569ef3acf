use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::linear::{fit_mlr, LinearModel};
use super::matrix::{check_features, DesignMatrix};

pub const DEFAULT_TERM_CAP: usize = 5_000;

/// Number of monomials of total degree `1..=degree` in `p` variables.
fn term_count(p: usize, degree: u32) -> usize {
    // C(p + d - 1, d), summed; saturating so huge requests still trip the cap.
    let mut total: usize = 0;
    let mut c: u128 = 1;
    for d in 1..=degree as u128 {
        c = c * (p as u128 + d - 1) / d;
        total = total.saturating_add(usize::try_from(c).unwrap_or(usize::MAX));
    }
    total
}

/// Monomials as non-decreasing lists of feature indices, graded by degree
/// and lexicographic within a degree: `[a, b, aa, ab, bb]` for two features.
pub fn polynomial_terms(p: usize, degree: u32, cap: usize) -> Result<Vec<Vec<usize>>> {
    if degree == 0 {
        return Err(Error::InvalidConfig("polynomial degree must be >= 1".into()));
    }
    let terms = term_count(p, degree);
    if terms > cap {
        return Err(Error::TermExplosion { terms, cap });
    }
    let mut out = Vec::with_capacity(terms);
    let mut layer: Vec<Vec<usize>> = (0..p).map(|j| vec![j]).collect();
    out.extend(layer.iter().cloned());
    for _ in 1..degree {
        let mut next = Vec::new();
        for t in &layer {
            let last = *t.last().expect("terms are non-empty");
            for j in last..p {
                let mut u = t.clone();
                u.push(j);
                next.push(u);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    Ok(out)
}

fn term_label(term: &[usize], names: &[String]) -> String {
    term.iter()
        .map(|&j| names[j].as_str())
        .collect::<Vec<_>>()
        .join("*")
}

fn expand_row(terms: &[Vec<usize>], x: &[f64]) -> Vec<f64> {
    terms
        .iter()
        .map(|t| t.iter().map(|&j| x[j]).product())
        .collect()
}

/// All monomials of total degree 1..=degree, without a constant column.
pub fn expand_polynomial(x: &DesignMatrix, degree: u32) -> Result<DesignMatrix> {
    expand_with_cap(x, degree, DEFAULT_TERM_CAP).map(|(m, _)| m)
}

fn expand_with_cap(x: &DesignMatrix, degree: u32, cap: usize) -> Result<(DesignMatrix, Vec<Vec<usize>>)> {
    let terms = polynomial_terms(x.n_cols(), degree, cap)?;
    let labels = terms.iter().map(|t| term_label(t, x.feature_ids())).collect();
    let data: Vec<f64> = x.rows().flat_map(|r| expand_row(&terms, r)).collect();
    let m = DesignMatrix::new(x.n_rows(), terms.len(), data, labels).map_err(|e| match e {
        Error::DegenerateInput(_) => {
            Error::DegenerateInput("polynomial expansion overflowed to a non-finite value".into())
        }
        other => other,
    })?;
    Ok((m, terms))
}

/// Least squares over polynomial terms of the raw features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyModel {
    pub degree: u32,
    pub n_features: usize,
    pub terms: Vec<Vec<usize>>,
    pub linear: LinearModel,
}

impl PolyModel {
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        check_features(self.n_features, x)?;
        Ok(self.linear.predict_unchecked(&expand_row(&self.terms, x)))
    }
}

pub fn fit_pmr(x: &DesignMatrix, y: &[f64], degree: u32) -> Result<PolyModel> {
    fit_pmr_capped(x, y, degree, DEFAULT_TERM_CAP)
}

pub(crate) fn fit_pmr_capped(x: &DesignMatrix, y: &[f64], degree: u32, cap: usize) -> Result<PolyModel> {
    let (expanded, terms) = expand_with_cap(x, degree, cap)?;
    let linear = fit_mlr(&expanded, y)?;
    Ok(PolyModel {
        degree,
        n_features: x.n_cols(),
        terms,
        linear,
    })
}
