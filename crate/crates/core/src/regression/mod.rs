//! Regression models behind a uniform fit/predict interface: ordinary least
//! squares, polynomial least squares, ridge and random forests.

mod forest;
mod linear;
mod matrix;
mod model;
mod poly;
mod standardize;
mod tree;

pub use forest::{fit_rfr, ForestModel, ForestParams};
pub use linear::{fit_mlr, fit_ridge, LinearModel};
pub use matrix::DesignMatrix;
pub(crate) use model::check_major;
pub use model::{fit_model, Model, ModelConfig, ModelDocument, ModelKind, MODEL_FORMAT_VERSION};
pub use poly::{expand_polynomial, fit_pmr, polynomial_terms, PolyModel, DEFAULT_TERM_CAP};
pub use standardize::{standardize_apply, standardize_fit, Standardization};
pub use tree::{Node, RegressionTree, TreeParams};
