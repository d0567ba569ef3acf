//! Down-time modelling for container offloads between cloud and fog.
//!
//! The crate simulates offloads with four container techniques over
//! parameterised testbeds, trains collective and per-stage regression
//! estimators of the resulting down time, and scores them with R², MAE and
//! MAPE under train/test and k-fold validation.

pub mod catalogue;
pub mod error;
pub mod estimation;
pub mod evaluation;
pub mod persistence;
pub mod pipeline;
pub mod regression;
pub mod seed;
pub mod simulator;

pub use catalogue::{
    feature_subset, full_feature_set, validate_metric_vector, FeatureSubset, MetricVector,
    ParameterId,
};
pub use error::{Error, Result};
pub use pipeline::{stages_of, total_offload_time, Direction, StageId, StageTiming, Technique};
