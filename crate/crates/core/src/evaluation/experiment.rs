use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{estimate_offload, train_on_records, EstimatorSpec, Method};
use crate::pipeline::{Direction, Technique};
use crate::regression::{check_major, ModelConfig, ModelKind};
use crate::seed::derive_seed;
use crate::simulator::{Dataset, DatasetRecord};

use super::metrics::{mae, mape, r2};
use super::report::{CellResult, EvaluationReport, FoldResult, REPORT_FORMAT_VERSION};
use super::split::ValidationScheme;

pub const MATRIX_FORMAT_VERSION: &str = "1.0";

/// The axes of an experiment; every combination is one report cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatrixConfig {
    pub format_version: String,
    pub techniques: Vec<Technique>,
    pub directions: Vec<Direction>,
    pub methods: Vec<Method>,
    pub models: Vec<ModelKind>,
    pub schemes: Vec<ValidationScheme>,
    pub model_config: ModelConfig,
}

impl Default for MatrixConfig {
    fn default() -> Self {
        Self {
            format_version: MATRIX_FORMAT_VERSION.into(),
            techniques: Technique::ALL.to_vec(),
            directions: Direction::ALL.to_vec(),
            methods: Method::ALL.to_vec(),
            models: ModelKind::ALL.to_vec(),
            schemes: ValidationScheme::paper_defaults(),
            model_config: ModelConfig::default(),
        }
    }
}

impl MatrixConfig {
    pub fn validate(&self) -> Result<()> {
        check_major(&self.format_version, MATRIX_FORMAT_VERSION)?;
        let axes = [
            ("techniques", self.techniques.is_empty()),
            ("directions", self.directions.is_empty()),
            ("methods", self.methods.is_empty()),
            ("models", self.models.is_empty()),
            ("schemes", self.schemes.is_empty()),
        ];
        if let Some((name, _)) = axes.iter().find(|a| a.1) {
            return Err(Error::EmptySweep(name));
        }
        for s in &self.schemes {
            s.validate()?;
        }
        self.model_config.validate()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn cell_count(&self) -> usize {
        self.techniques.len() * self.directions.len() * self.methods.len() * self.models.len() * self.schemes.len()
    }

    /// Cells in canonical report order.
    pub fn cells(&self) -> Vec<CellKey> {
        let mut out = Vec::with_capacity(self.cell_count());
        for &technique in &self.techniques {
            for &direction in &self.directions {
                for &method in &self.methods {
                    for &model in &self.models {
                        for &scheme in &self.schemes {
                            out.push(CellKey {
                                technique,
                                direction,
                                method,
                                model,
                                scheme,
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellKey {
    pub technique: Technique,
    pub direction: Direction,
    pub method: Method,
    pub model: ModelKind,
    pub scheme: ValidationScheme,
}

impl CellKey {
    /// Seed for the row partition. It omits method and model, so CM and IM
    /// (and every model kind) see the same train and test rows.
    fn partition_seed(&self, seed: u64) -> u64 {
        derive_seed(seed, &format!("partition/{}/{}/{}", self.technique, self.direction, self.scheme.label()))
    }

    fn model_seed(&self, seed: u64, fold: usize) -> u64 {
        derive_seed(
            seed,
            &format!(
                "model/{}/{}/{}/{}/{}/fold-{fold}",
                self.technique,
                self.direction,
                self.method,
                self.model,
                self.scheme.label()
            ),
        )
    }
}

/// Errors that mean "not enough data for this cell" rather than a fault.
fn is_insufficient_data(e: &Error) -> bool {
    matches!(
        e,
        Error::EmptyDataset { .. } | Error::TooFewRecords { .. } | Error::KTooLarge { .. } | Error::DegenerateInput(_)
    )
}

fn run_fold(
    key: &CellKey,
    records: &[&DatasetRecord],
    train: &[usize],
    test: &[usize],
    config: &ModelConfig,
    seed: u64,
) -> Result<FoldResult> {
    let mut spec = EstimatorSpec::new(key.method, key.model, key.technique, key.direction);
    spec.model_config = config.clone();
    let train_rows: Vec<&DatasetRecord> = train.iter().map(|&i| records[i]).collect();
    let estimator = train_on_records(&train_rows, &spec, seed)?;
    let y_true: Vec<f64> = test.iter().map(|&i| records[i].t_offload).collect();
    let y_pred = test
        .iter()
        .map(|&i| estimate_offload(&estimator, &records[i].metrics))
        .collect::<Result<Vec<_>>>()?;
    Ok(FoldResult {
        r2: r2(&y_true, &y_pred)?,
        mae_s: mae(&y_true, &y_pred)?,
        mape_pct: mape(&y_true, &y_pred)?,
        n_train: train.len(),
        n_test: test.len(),
    })
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

fn run_cell(dataset: &Dataset, key: &CellKey, config: &ModelConfig, seed: u64) -> Result<CellResult> {
    let records = dataset.slice(key.technique, key.direction);
    let outcome = (|| {
        if records.is_empty() {
            return Err(Error::EmptyDataset {
                technique: key.technique,
                direction: key.direction.to_string(),
            });
        }
        let parts = key.scheme.partitions(records.len(), key.partition_seed(seed))?;
        parts
            .iter()
            .enumerate()
            .map(|(i, p)| run_fold(key, &records, &p.train, &p.test, config, key.model_seed(seed, i)))
            .collect::<Result<Vec<_>>>()
    })();
    let mut cell = CellResult::empty(key);
    match outcome {
        Ok(folds) => {
            let r2s: Vec<f64> = folds.iter().filter_map(|f| f.r2).collect();
            cell.r2 = (!r2s.is_empty()).then(|| mean(r2s.into_iter()));
            cell.mae_s = Some(mean(folds.iter().map(|f| f.mae_s)));
            cell.mape_pct = Some(mean(folds.iter().map(|f| f.mape_pct)));
            cell.n_train = Some(folds.iter().map(|f| f.n_train).sum::<usize>() / folds.len());
            cell.n_test = Some(folds.iter().map(|f| f.n_test).sum());
            if folds.len() > 1 {
                cell.folds = folds;
            }
        }
        Err(e) if is_insufficient_data(&e) => cell.skipped = Some(e.to_string()),
        Err(e) => return Err(e),
    }
    Ok(cell)
}

/// Runs every cell of the matrix. Cells run in parallel, but each draws its
/// randomness from seeds derived from `seed` and its own key, and results are
/// reported in canonical order.
///
/// Aggregates: k-fold cells report the unweighted mean over folds, `n_test`
/// as the total number of held-out predictions (the whole slice) and
/// `n_train` as the mean training-fold size, rounded down.
pub fn run_experiment(dataset: &Dataset, matrix: &MatrixConfig, seed: u64) -> Result<EvaluationReport> {
    matrix.validate()?;
    let cells = matrix
        .cells()
        .par_iter()
        .map(|key| run_cell(dataset, key, &matrix.model_config, seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(EvaluationReport {
        format_version: REPORT_FORMAT_VERSION.into(),
        seed: Some(seed),
        cells,
    })
}
