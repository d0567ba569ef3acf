//! On-disk formats: the dataset CSV, the generation config JSON and atomic
//! file writes shared by every output.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::catalogue::{MetricVector, ParameterId, PARAMETER_COUNT};
use crate::error::{Error, Result};
use crate::pipeline::{stages_of, total_offload_time, Direction, StageId, StageTiming, Technique};
use crate::regression::check_major;
use crate::simulator::{Dataset, DatasetRecord, GenerativeConfig, SweepConfig};

pub const CONFIG_FORMAT_VERSION: &str = "1.0";

/// Stage columns of the dataset file, in header order.
pub const STAGE_COLUMNS: [StageId; 11] = [
    StageId::Commit,
    StageId::Save,
    StageId::Export,
    StageId::Transfer,
    StageId::Import,
    StageId::Load,
    StageId::Push,
    StageId::Pull,
    StageId::Checkpoint,
    StageId::Restore,
    StageId::Start,
];

const LEADING: [&str; 5] = ["scenario_id", "platform", "technique", "direction", "repetition"];
const FIRST_METRIC: usize = LEADING.len();
const FIRST_STAGE: usize = FIRST_METRIC + PARAMETER_COUNT;
const OFFLOAD_COL: usize = FIRST_STAGE + STAGE_COLUMNS.len();
const COLUMN_COUNT: usize = OFFLOAD_COL + 2;

/// Half a unit in the sixth decimal: the most one printed value can be off.
const PRINT_HALF_UNIT: f64 = 5e-7;

pub fn dataset_header() -> Vec<String> {
    LEADING
        .iter()
        .map(|s| s.to_string())
        .chain(ParameterId::ALL.iter().map(|p| p.key()))
        .chain(STAGE_COLUMNS.iter().map(|s| format!("t_{s}")))
        .chain(["t_offload".to_owned(), "sample_count".to_owned()])
        .collect()
}

/// Serialises the dataset: rows in scenario-id order, reals with exactly six
/// decimals, stages a technique lacks left empty, LF line endings.
pub fn dataset_to_csv(dataset: &Dataset) -> String {
    let mut rows: Vec<&DatasetRecord> = dataset.records.iter().collect();
    rows.sort_by(|a, b| a.scenario_id.cmp(&b.scenario_id));
    let mut out = dataset_header().join(",");
    out.push('\n');
    for r in rows {
        let _ = write!(out, "{},{},{},{},{}", r.scenario_id, r.platform, r.technique, r.direction, r.repetition);
        for v in r.metrics.values() {
            let _ = write!(out, ",{v:.6}");
        }
        for stage in STAGE_COLUMNS {
            out.push(',');
            if let Some(t) = r.stage_time(stage) {
                let _ = write!(out, "{t:.6}");
            }
        }
        let _ = writeln!(out, ",{:.6},{}", r.t_offload, r.sample_count);
    }
    out
}

/// Largest gap tolerated between `t_offload` and the sum of the printed
/// stage times: 2e-6, widened to cover one half-unit of print rounding per
/// value on pipelines long enough to exceed it.
pub fn offload_sum_slack(technique: Technique) -> f64 {
    let values = stages_of(technique).len() + 1;
    (2e-6f64).max(values as f64 * PRINT_HALF_UNIT) + 1e-12
}

fn is_valid_id(s: &str) -> bool {
    !s.is_empty() && !s.contains([',', '"', '\n', '\r'])
}

pub fn dataset_from_csv(text: &str) -> Result<Dataset> {
    if text.contains('\r') {
        return Err(Error::SchemaMismatch("dataset must use LF line endings".into()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    let expected = dataset_header();
    if header.len() != expected.len() || header.iter().zip(&expected).any(|(a, b)| a != b) {
        return Err(Error::SchemaMismatch(format!(
            "dataset header does not match the expected {} columns starting `scenario_id`",
            expected.len()
        )));
    }
    let mut records: Vec<DatasetRecord> = Vec::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let bad = |message: String| Error::Parse { line, message };
        if row.len() != COLUMN_COUNT {
            return Err(bad(format!("expected {COLUMN_COUNT} fields, got {}", row.len())));
        }
        let real = |i: usize| -> Result<f64> {
            row[i]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(format!("`{}` is not a finite number: `{}`", expected[i], &row[i])))
        };
        let scenario_id = row[0].to_owned();
        if !is_valid_id(&scenario_id) || !is_valid_id(&row[1]) {
            return Err(bad("empty or malformed scenario_id / platform".into()));
        }
        let technique: Technique = row[2].parse().map_err(|e: Error| bad(e.to_string()))?;
        let direction: Direction = row[3].parse().map_err(|e: Error| bad(e.to_string()))?;
        let repetition: u32 = row[4]
            .parse()
            .map_err(|_| bad(format!("repetition is not a count: `{}`", &row[4])))?;
        let mut metrics = MetricVector::default();
        for (k, &p) in ParameterId::ALL.iter().enumerate() {
            metrics[p] = real(FIRST_METRIC + k)?;
        }
        let mut stage_times = Vec::new();
        for &stage in stages_of(technique) {
            let col = FIRST_STAGE + STAGE_COLUMNS.iter().position(|&s| s == stage).expect("every stage has a column");
            if row[col].is_empty() {
                return Err(bad(format!("`{}` is required for {technique}", expected[col])));
            }
            stage_times.push(StageTiming::new(stage, real(col)?));
        }
        for (k, stage) in STAGE_COLUMNS.iter().enumerate() {
            if !stages_of(technique).contains(stage) && !row[FIRST_STAGE + k].is_empty() {
                return Err(bad(format!("`{}` must be empty for {technique}", expected[FIRST_STAGE + k])));
            }
        }
        let t_offload = real(OFFLOAD_COL)?;
        let sample_count: u32 = row[OFFLOAD_COL + 1]
            .parse()
            .map_err(|_| bad(format!("sample_count is not a count: `{}`", &row[OFFLOAD_COL + 1])))?;

        let violation = |what: String| Error::InvariantViolation(format!("row `{scenario_id}` (line {line}): {what}"));
        if let Err(v) = metrics.validate() {
            return Err(violation(v[0].to_string()));
        }
        let sum = total_offload_time(&stage_times, technique).map_err(|e| violation(e.to_string()))?;
        if (sum - t_offload).abs() > offload_sum_slack(technique) {
            return Err(violation(format!("t_offload {t_offload:.6} differs from stage sum {sum:.6}")));
        }
        if let Some(prev) = records.last() {
            if prev.scenario_id >= scenario_id {
                return Err(violation("rows must be in strictly increasing scenario_id order".into()));
            }
        }
        records.push(DatasetRecord {
            scenario_id,
            platform: row[1].to_owned(),
            technique,
            direction,
            repetition,
            metrics,
            stage_times,
            t_offload,
            sample_count,
        });
    }
    Ok(Dataset::new(records))
}

pub fn write_dataset(dataset: &Dataset, path: &Path) -> Result<()> {
    write_atomic(path, dataset_to_csv(dataset).as_bytes())
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    dataset_from_csv(&read_text(path)?)
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut builder = tempfile::Builder::new();
    // Temp files default to owner-only; outputs should look like plain writes.
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        builder.permissions(std::fs::Permissions::from_mode(0o644));
    }
    let mut tmp = builder.tempfile_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Input of `generate`: the sweep grid and the ground-truth constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationConfig {
    pub format_version: String,
    pub sweep: SweepConfig,
    pub generative: GenerativeConfig,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            format_version: CONFIG_FORMAT_VERSION.into(),
            sweep: SweepConfig::default(),
            generative: GenerativeConfig::default(),
        }
    }
}

impl GenerationConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text)?;
        check_major(&c.format_version, CONFIG_FORMAT_VERSION)?;
        c.generative.validate()?;
        Ok(c)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}
