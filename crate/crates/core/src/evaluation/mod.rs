//! Experiment matrix: validation schemes, error metrics and reports.

mod experiment;
mod metrics;
mod report;
mod split;

pub use experiment::{run_experiment, CellKey, MatrixConfig, MATRIX_FORMAT_VERSION};
pub use metrics::{mae, mape, r2, MAPE_EPSILON};
pub use report::{CellResult, EvaluationReport, FoldResult, REPORT_CSV_HEADER, REPORT_FORMAT_VERSION};
pub use split::{kfold_split, train_size, train_test_split, Partition, ValidationScheme};
