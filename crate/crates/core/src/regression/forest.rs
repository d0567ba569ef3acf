use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::rng_for;

use super::matrix::{check_features, check_targets, DesignMatrix};
use super::tree::{RegressionTree, TreeParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub tree_count: usize,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    /// `None` means `ceil(p / 3)`.
    pub features_per_split: Option<usize>,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            tree_count: 100,
            max_depth: None,
            min_samples_leaf: 2,
            features_per_split: None,
            bootstrap: true,
        }
    }
}

impl ForestParams {
    /// One unbootstrapped tree with single-sample leaves: reproduces distinct
    /// training points exactly.
    pub fn memorizing() -> Self {
        Self {
            tree_count: 1,
            max_depth: None,
            min_samples_leaf: 1,
            features_per_split: None,
            bootstrap: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tree_count == 0 {
            return Err(Error::InvalidConfig("tree_count must be at least 1".into()));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::InvalidConfig("min_samples_leaf must be at least 1".into()));
        }
        if self.features_per_split == Some(0) {
            return Err(Error::InvalidConfig("features_per_split must be at least 1".into()));
        }
        Ok(())
    }

    fn tree_params(&self, p: usize) -> TreeParams {
        TreeParams {
            max_depth: self.max_depth,
            min_samples_leaf: self.min_samples_leaf,
            features_per_split: self.features_per_split.unwrap_or(p.div_ceil(3)).min(p),
        }
    }
}

/// Bagged regression trees; the prediction is the plain mean of the trees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub params: ForestParams,
    pub seed: u64,
    pub n_features: usize,
    pub trees: Vec<RegressionTree>,
}

impl ForestModel {
    pub fn from_trees(n_features: usize, trees: Vec<RegressionTree>) -> Result<Self> {
        let model = Self {
            params: ForestParams {
                tree_count: trees.len(),
                ..ForestParams::default()
            },
            seed: 0,
            n_features,
            trees,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trees.is_empty() {
            return Err(Error::InvariantViolation("forest has no trees".into()));
        }
        if !self.trees.iter().all(|t| t.is_well_formed(self.n_features)) {
            return Err(Error::InvariantViolation("malformed tree in forest".into()));
        }
        Ok(())
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        check_features(self.n_features, x)?;
        Ok(self.predict_unchecked(x))
    }

    pub(crate) fn predict_unchecked(&self, x: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict(x)).sum();
        sum / self.trees.len() as f64
    }
}

/// Row indices sorted by (features, target), so bootstrap draws do not
/// depend on the order rows were supplied in.
fn canonical_order(x: &DesignMatrix, y: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..x.n_rows()).collect();
    order.sort_by(|&a, &b| {
        x.row(a)
            .iter()
            .zip(x.row(b))
            .map(|(u, v)| u.total_cmp(v))
            .find(|o| o.is_ne())
            .unwrap_or_else(|| y[a].total_cmp(&y[b]))
    });
    order
}

pub fn fit_rfr(x: &DesignMatrix, y: &[f64], params: &ForestParams, seed: u64) -> Result<ForestModel> {
    check_targets(x, y)?;
    params.validate()?;
    let n = x.n_rows();
    if n < 2 {
        return Err(Error::DegenerateInput(format!("forest needs at least 2 rows, got {n}")));
    }
    let order = canonical_order(x, y);
    let tree_params = params.tree_params(x.n_cols());
    let trees: Vec<RegressionTree> = (0..params.tree_count)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_for(seed, &format!("tree-{t}"));
            let samples = if params.bootstrap {
                (0..n).map(|_| order[rng.random_range(0..n)]).collect()
            } else {
                order.clone()
            };
            RegressionTree::fit(x, y, samples, &tree_params, &mut rng)
        })
        .collect();
    Ok(ForestModel {
        params: params.clone(),
        seed,
        n_features: x.n_cols(),
        trees,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn wavy(n: usize, p: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..p).map(|j| ((i * (j + 3) * 7919) % 101) as f64 / 10.0).collect())
            .collect();
        let y = rows.iter().map(|r| r[0].sin() * 3.0 + r[p - 1]).collect();
        (rows, y)
    }

    #[test]
    fn memorizing_forest_reproduces_targets() {
        let (rows, y) = wavy(40, 3);
        let x = DesignMatrix::from_rows(&rows).unwrap();
        let m = fit_rfr(&x, &y, &ForestParams::memorizing(), 9).unwrap();
        for (r, t) in rows.iter().zip(&y) {
            assert_eq!(m.predict(r).unwrap(), *t);
        }
    }

    #[test]
    fn same_seed_same_model() {
        let (rows, y) = wavy(60, 4);
        let x = DesignMatrix::from_rows(&rows).unwrap();
        let p = ForestParams {
            tree_count: 10,
            ..ForestParams::default()
        };
        let a = fit_rfr(&x, &y, &p, 5).unwrap();
        let b = fit_rfr(&x, &y, &p, 5).unwrap();
        assert_eq!(a, b);
        let c = fit_rfr(&x, &y, &p, 6).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn averages_constant_trees() {
        let m = ForestModel::from_trees(
            2,
            vec![RegressionTree::constant(5.0), RegressionTree::constant(7.0)],
        )
        .unwrap();
        assert_eq!(m.predict(&[0.0, 100.0]).unwrap(), 6.0);
        assert!(matches!(m.predict(&[0.0]), Err(Error::DimensionMismatch { expected: 2, got: 1 })));
    }

    #[test]
    fn rejects_single_row() {
        let x = DesignMatrix::from_rows(&[vec![1.0]]).unwrap();
        assert!(matches!(
            fit_rfr(&x, &[1.0], &ForestParams::default(), 0),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn default_feature_count() {
        assert_eq!(ForestParams::default().tree_params(25).features_per_split, 9);
        assert_eq!(ForestParams::default().tree_params(7).features_per_split, 3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn predictions_stay_within_target_range(
            data in prop::collection::vec((-50.0..50.0f64, -50.0..50.0f64, -1e3..1e3f64), 2..40),
            probe in (-100.0..100.0f64, -100.0..100.0f64),
            seed in any::<u64>(),
        ) {
            let rows: Vec<Vec<f64>> = data.iter().map(|d| vec![d.0, d.1]).collect();
            let y: Vec<f64> = data.iter().map(|d| d.2).collect();
            let x = DesignMatrix::from_rows(&rows).unwrap();
            let p = ForestParams { tree_count: 8, ..ForestParams::default() };
            let m = fit_rfr(&x, &y, &p, seed).unwrap();
            let lo = y.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let v = m.predict(&[probe.0, probe.1]).unwrap();
            let slack = 1e-9 * (1.0 + hi.abs().max(lo.abs()));
            prop_assert!(v >= lo - slack && v <= hi + slack);
        }

        #[test]
        fn row_permutation_does_not_change_fit(
            data in prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64, -10.0..10.0f64), 3..30),
            rot in any::<prop::sample::Index>(),
            seed in any::<u64>(),
        ) {
            let rows: Vec<Vec<f64>> = data.iter().map(|d| vec![d.0, d.1]).collect();
            let y: Vec<f64> = data.iter().map(|d| d.2).collect();
            let k = rot.index(rows.len());
            let mut rows2 = rows.clone();
            let mut y2 = y.clone();
            rows2.rotate_left(k);
            y2.rotate_left(k);
            rows2.reverse();
            y2.reverse();
            let p = ForestParams { tree_count: 5, ..ForestParams::default() };
            let a = fit_rfr(&DesignMatrix::from_rows(&rows).unwrap(), &y, &p, seed).unwrap();
            let b = fit_rfr(&DesignMatrix::from_rows(&rows2).unwrap(), &y2, &p, seed).unwrap();
            for r in &rows {
                prop_assert!((a.predict(r).unwrap() - b.predict(r).unwrap()).abs() <= 1e-8);
            }
        }
    }
}
