//! Collective (CM) and individual per-stage (IM) down-time estimators.
//!
//! A collective estimator maps all 25 parameters straight to the total
//! offload time. An individual estimator fits one model per pipeline stage on
//! that stage's feature subset and sums the stage predictions.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalogue::{feature_subset, full_feature_set, MetricVector, ParameterId, CATALOGUE_VERSION};
use crate::error::{Error, Result};
use crate::pipeline::{name_impls, stages_of, Direction, StageId, Technique};
use crate::regression::{fit_model, DesignMatrix, Model, ModelConfig, ModelKind};
use crate::seed::derive_seed;
use crate::simulator::{Dataset, DatasetRecord};

pub const ESTIMATOR_FORMAT_VERSION: &str = "1.0";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// One model over every parameter.
    Cm,
    /// One model per stage, summed.
    Im,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::Cm, Method::Im];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Cm => "cm",
            Method::Im => "im",
        }
    }
}

name_impls!(Method, "method");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSpec {
    pub method: Method,
    pub model_kind: ModelKind,
    pub technique: Technique,
    pub direction: Direction,
    #[serde(default)]
    pub model_config: ModelConfig,
}

impl EstimatorSpec {
    pub fn new(method: Method, model_kind: ModelKind, technique: Technique, direction: Direction) -> Self {
        Self {
            method,
            model_kind,
            technique,
            direction,
            model_config: ModelConfig::default(),
        }
    }
}

/// A fitted model with the parameters it reads. `stage` is `None` for the
/// collective model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentModel {
    pub stage: Option<StageId>,
    pub features: Vec<ParameterId>,
    pub model: Model,
}

impl ComponentModel {
    pub fn predict(&self, metrics: &MetricVector) -> Result<f64> {
        self.model.predict(&metrics.project(&self.features))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimator {
    pub format_version: String,
    pub catalogue_version: String,
    pub spec: EstimatorSpec,
    /// CM: a single model. IM: one per stage, in pipeline order.
    pub components: Vec<ComponentModel>,
}

fn component_plan(spec: &EstimatorSpec) -> Result<Vec<(Option<StageId>, Vec<ParameterId>)>> {
    match spec.method {
        Method::Cm => Ok(vec![(None, full_feature_set())]),
        Method::Im => stages_of(spec.technique)
            .iter()
            .map(|&s| Ok((Some(s), feature_subset(spec.technique, s, spec.direction)?.parameters)))
            .collect(),
    }
}

fn target(record: &DatasetRecord, stage: Option<StageId>) -> Result<f64> {
    match stage {
        None => Ok(record.t_offload),
        Some(s) => record.stage_time(s).ok_or_else(|| Error::MalformedRecord {
            id: record.scenario_id.clone(),
            reason: format!("no time for stage `{s}`"),
        }),
    }
}

fn component_seed(seed: u64, stage: Option<StageId>) -> u64 {
    derive_seed(seed, stage.map_or("collective", StageId::as_str))
}

/// Trains on the dataset rows matching the `spec` technique and direction.
pub fn train_estimator(dataset: &Dataset, spec: &EstimatorSpec, seed: u64) -> Result<Estimator> {
    train_on_records(&dataset.slice(spec.technique, spec.direction), spec, seed)
}

/// Trains on exactly `records`, which must all match the `spec` technique and
/// direction.
pub fn train_on_records(records: &[&DatasetRecord], spec: &EstimatorSpec, seed: u64) -> Result<Estimator> {
    spec.model_config.validate()?;
    if records.is_empty() {
        return Err(Error::EmptyDataset {
            technique: spec.technique,
            direction: spec.direction.to_string(),
        });
    }
    for r in records {
        if r.technique != spec.technique || r.direction != spec.direction {
            return Err(Error::MalformedRecord {
                id: r.scenario_id.clone(),
                reason: format!("record is {} / {}, estimator is {} / {}", r.technique, r.direction, spec.technique, spec.direction),
            });
        }
    }
    let plan = component_plan(spec)?;
    let components = plan
        .into_par_iter()
        .map(|(stage, features)| {
            let rows: Vec<Vec<f64>> = records.iter().map(|r| r.metrics.project(&features)).collect();
            let y = records.iter().map(|r| target(r, stage)).collect::<Result<Vec<_>>>()?;
            let x = DesignMatrix::from_rows_labelled(&rows, features.iter().map(|p| p.key()).collect())?;
            let model = fit_model(spec.model_kind, &x, &y, &spec.model_config, component_seed(seed, stage))?;
            Ok(ComponentModel { stage, features, model })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Estimator {
        format_version: ESTIMATOR_FORMAT_VERSION.into(),
        catalogue_version: CATALOGUE_VERSION.into(),
        spec: spec.clone(),
        components,
    })
}

impl Estimator {
    /// Checks the structure an estimator must have for its spec.
    pub fn validate(&self) -> Result<()> {
        if self.catalogue_version != CATALOGUE_VERSION {
            return Err(Error::CatalogueMismatch {
                expected: self.catalogue_version.clone(),
                got: CATALOGUE_VERSION.into(),
            });
        }
        let plan = component_plan(&self.spec)?;
        if plan.len() != self.components.len() {
            return Err(Error::DimensionMismatch {
                expected: plan.len(),
                got: self.components.len(),
            });
        }
        for ((stage, features), c) in plan.iter().zip(&self.components) {
            if *stage != c.stage || *features != c.features {
                return Err(Error::InvariantViolation(format!(
                    "component for {} does not match the {} plan",
                    c.stage.map_or("collective", StageId::as_str),
                    self.spec.method
                )));
            }
            if c.model.n_features() != features.len() {
                return Err(Error::DimensionMismatch {
                    expected: features.len(),
                    got: c.model.n_features(),
                });
            }
        }
        Ok(())
    }

    /// Per-component predictions, in pipeline order for IM.
    pub fn component_predictions(&self, metrics: &MetricVector) -> Result<Vec<f64>> {
        if self.catalogue_version != CATALOGUE_VERSION {
            return Err(Error::CatalogueMismatch {
                expected: self.catalogue_version.clone(),
                got: CATALOGUE_VERSION.into(),
            });
        }
        self.components.iter().map(|c| c.predict(metrics)).collect()
    }

    /// Unclamped estimate: the sum of the component predictions.
    pub fn estimate_raw(&self, metrics: &MetricVector) -> Result<f64> {
        Ok(self.component_predictions(metrics)?.into_iter().fold(0.0, |acc, v| acc + v))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let est: Self = serde_json::from_str(text)?;
        crate::regression::check_major(&est.format_version, ESTIMATOR_FORMAT_VERSION)?;
        est.validate()?;
        Ok(est)
    }
}

/// Estimated down time in seconds, clamped below at zero.
pub fn estimate_offload(estimator: &Estimator, metrics: &MetricVector) -> Result<f64> {
    Ok(estimator.estimate_raw(metrics)?.max(0.0))
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}-{} estimator for {} / {}",
            self.spec.method, self.spec.model_kind, self.spec.technique, self.spec.direction
        )
    }
}

impl FromStr for EstimatorSpec {
    type Err = Error;

    /// Parses `technique/direction/method/model`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split('/').collect();
        let [t, d, m, k] = parts[..] else {
            return Err(Error::InvalidConfig(format!("expected technique/direction/method/model, got `{s}`")));
        };
        Ok(Self::new(m.parse()?, k.parse()?, t.parse()?, d.parse()?))
    }
}
