use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::name_impls;

use super::forest::{fit_rfr, ForestModel, ForestParams};
use super::linear::{fit_mlr, fit_ridge, LinearModel};
use super::matrix::DesignMatrix;
use super::poly::{fit_pmr_capped, PolyModel, DEFAULT_TERM_CAP};

pub const MODEL_FORMAT_VERSION: &str = "1.0";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Mlr,
    Pmr,
    Rfr,
    Rr,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::Mlr, ModelKind::Pmr, ModelKind::Rfr, ModelKind::Rr];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Mlr => "mlr",
            ModelKind::Pmr => "pmr",
            ModelKind::Rfr => "rfr",
            ModelKind::Rr => "rr",
        }
    }
}

name_impls!(ModelKind, "model kind");

/// Hyperparameters for every model kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub pmr_degree: u32,
    pub ridge_lambda: f64,
    pub term_cap: usize,
    pub forest: ForestParams,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            pmr_degree: 2,
            ridge_lambda: 1.0,
            term_cap: DEFAULT_TERM_CAP,
            forest: ForestParams::default(),
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.pmr_degree == 0 {
            return Err(Error::InvalidConfig("pmr_degree must be at least 1".into()));
        }
        if !(self.ridge_lambda >= 0.0 && self.ridge_lambda.is_finite()) {
            return Err(Error::InvalidConfig("ridge_lambda must be finite and non-negative".into()));
        }
        self.forest.validate()
    }
}

/// A fitted model of any kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Model {
    Mlr(LinearModel),
    Pmr(PolyModel),
    Rfr(ForestModel),
    Rr(LinearModel),
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Mlr(_) => ModelKind::Mlr,
            Model::Pmr(_) => ModelKind::Pmr,
            Model::Rfr(_) => ModelKind::Rfr,
            Model::Rr(_) => ModelKind::Rr,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            Model::Mlr(m) | Model::Rr(m) => m.n_features(),
            Model::Pmr(m) => m.n_features,
            Model::Rfr(m) => m.n_features,
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        match self {
            Model::Mlr(m) | Model::Rr(m) => m.predict(x),
            Model::Pmr(m) => m.predict(x),
            Model::Rfr(m) => m.predict(x),
        }
    }
}

/// Fits a model of `kind`; `seed` only matters for forests.
pub fn fit_model(kind: ModelKind, x: &DesignMatrix, y: &[f64], config: &ModelConfig, seed: u64) -> Result<Model> {
    config.validate()?;
    Ok(match kind {
        ModelKind::Mlr => Model::Mlr(fit_mlr(x, y)?),
        ModelKind::Pmr => Model::Pmr(fit_pmr_capped(x, y, config.pmr_degree, config.term_cap)?),
        ModelKind::Rfr => Model::Rfr(fit_rfr(x, y, &config.forest, seed)?),
        ModelKind::Rr => Model::Rr(fit_ridge(x, y, config.ridge_lambda)?),
    })
}

/// Versioned on-disk wrapper for a single model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format_version: String,
    pub model: Model,
}

impl ModelDocument {
    pub fn new(model: Model) -> Self {
        Self {
            format_version: MODEL_FORMAT_VERSION.into(),
            model,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text)?;
        check_major(&doc.format_version, MODEL_FORMAT_VERSION)?;
        if let Model::Rfr(f) = &doc.model {
            f.validate()?;
        }
        Ok(doc)
    }
}

/// Accepts `found` when its major component matches `supported`'s.
pub(crate) fn check_major(found: &str, supported: &str) -> Result<()> {
    let major = |v: &str| v.split('.').next().unwrap_or("").to_owned();
    if major(found).is_empty() || major(found) != major(supported) {
        return Err(Error::UnsupportedVersion(found.to_owned()));
    }
    Ok(())
}

impl fmt::Display for ModelDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} model v{}", self.model.kind(), self.format_version)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regression::{RegressionTree, Standardization};

    fn data() -> (DesignMatrix, Vec<f64>) {
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|i| {
                let a = i as f64 * 0.37;
                vec![a, (a * 1.3).cos(), (i % 7) as f64]
            })
            .collect();
        let y = rows.iter().map(|r| 2.0 * r[0] + r[1] * r[2] + 0.5).collect();
        (DesignMatrix::from_rows(&rows).unwrap(), y)
    }

    #[test]
    fn kind_names_round_trip() {
        for k in ModelKind::ALL {
            assert_eq!(k.as_str().parse::<ModelKind>().unwrap(), k);
        }
        assert!("svm".parse::<ModelKind>().is_err());
    }

    #[test]
    fn affine_evaluation() {
        let m = Model::Mlr(LinearModel::new(1.0, vec![2.0], Standardization::identity(1), 0.0).unwrap());
        assert_eq!(m.predict(&[3.0]).unwrap(), 7.0);
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let (x, y) = data();
        let config = ModelConfig {
            forest: ForestParams {
                tree_count: 7,
                ..ForestParams::default()
            },
            ..ModelConfig::default()
        };
        for kind in ModelKind::ALL {
            let model = fit_model(kind, &x, &y, &config, 11).unwrap();
            let text = ModelDocument::new(model.clone()).to_json().unwrap();
            let back = ModelDocument::from_json(&text).unwrap().model;
            assert_eq!(back, model, "{kind}");
            for r in x.rows() {
                assert_eq!(
                    back.predict(r).unwrap().to_bits(),
                    model.predict(r).unwrap().to_bits()
                );
            }
        }
    }

    #[test]
    fn rejects_unknown_major() {
        let doc = ModelDocument {
            format_version: "2.0".into(),
            model: Model::Rfr(ForestModel::from_trees(1, vec![RegressionTree::constant(1.0)]).unwrap()),
        };
        let text = serde_json::to_string(&doc).unwrap();
        assert!(matches!(ModelDocument::from_json(&text), Err(Error::UnsupportedVersion(_))));
        assert!(check_major("1.7", "1.0").is_ok());
    }

    #[test]
    fn dimension_checked() {
        let (x, y) = data();
        let m = fit_model(ModelKind::Rr, &x, &y, &ModelConfig::default(), 0).unwrap();
        assert!(matches!(m.predict(&[1.0]), Err(Error::DimensionMismatch { expected: 3, got: 1 })));
    }
}
