use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalogue::MetricVector;
use crate::error::{Error, Result};
use crate::pipeline::{stages_of, total_offload_time, Direction, StageId, StageTiming, Technique};
use crate::seed::{derive_seed, rng_for};

use super::config::GenerativeConfig;
use super::ground_truth::stage_time_ground_truth;
use super::sampling::{assemble_metrics, sample_count, sample_runtime_series};
use super::scenario::Scenario;
use super::sweep::{expand_scenarios, SweepConfig};

/// One simulated offload with its full scenario description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffloadRecord {
    pub scenario: Scenario,
    pub metrics: MetricVector,
    /// In pipeline order.
    pub stage_times: Vec<StageTiming>,
    pub t_offload: f64,
    pub sample_count: u32,
}

impl OffloadRecord {
    pub fn to_dataset_record(&self) -> DatasetRecord {
        DatasetRecord {
            scenario_id: self.scenario.id.clone(),
            platform: self.scenario.platform.clone(),
            technique: self.scenario.technique,
            direction: self.scenario.direction,
            repetition: self.scenario.repetition,
            metrics: self.metrics,
            stage_times: self.stage_times.clone(),
            t_offload: self.t_offload,
            sample_count: self.sample_count,
        }
    }
}

/// Row of a dataset: what the monitor saw plus the measured stage times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub scenario_id: String,
    pub platform: String,
    pub technique: Technique,
    pub direction: Direction,
    pub repetition: u32,
    pub metrics: MetricVector,
    pub stage_times: Vec<StageTiming>,
    pub t_offload: f64,
    pub sample_count: u32,
}

impl DatasetRecord {
    pub fn stage_time(&self, stage: StageId) -> Option<f64> {
        self.stage_times
            .iter()
            .find(|t| t.stage == stage)
            .map(|t| t.seconds)
    }
}

/// Records in scenario-id order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Dataset {
    pub records: Vec<DatasetRecord>,
}

impl Dataset {
    pub fn new(records: Vec<DatasetRecord>) -> Self {
        Self { records }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records of one technique and direction, keeping dataset order.
    pub fn slice(&self, technique: Technique, direction: Direction) -> Vec<&DatasetRecord> {
        self.records
            .iter()
            .filter(|r| r.technique == technique && r.direction == direction)
            .collect()
    }
}

/// Simulates one offload: draws a lognormal multiplier per stage, evaluates
/// the stage formulas, then runs the per-second monitor.
pub fn simulate_offload(scenario: &Scenario, config: &GenerativeConfig, seed: u64) -> Result<OffloadRecord> {
    scenario.validate()?;
    config.validate()?;
    let mut rng = rng_for(seed, "stage-noise");
    let stage_times = stages_of(scenario.technique)
        .iter()
        .map(|&stage| {
            let z: f64 = rng.sample(StandardNormal);
            let noise = (config.noise_sigma_for(stage) * z).exp();
            stage_time_ground_truth(scenario, stage, config, noise)
                .map(|seconds| StageTiming { stage, seconds })
        })
        .collect::<Result<Vec<_>>>()?;
    let t_offload = total_offload_time(&stage_times, scenario.technique)?;
    let series = sample_runtime_series(
        scenario,
        &stage_times,
        config,
        derive_seed(seed, "runtime-metrics"),
    )?;
    let metrics = assemble_metrics(scenario, &series.means());
    if let Err(v) = metrics.validate() {
        return Err(Error::InvalidScenario {
            id: scenario.id.clone(),
            reason: format!("simulated metrics out of range: {}", v[0]),
        });
    }
    Ok(OffloadRecord {
        scenario: scenario.clone(),
        metrics,
        stage_times,
        t_offload,
        sample_count: sample_count(t_offload),
    })
}

/// Simulates every scenario of the sweep. Each scenario's seed is derived
/// from the master seed and its id, so output is independent of scheduling.
pub fn generate_records(
    sweep: &SweepConfig,
    config: &GenerativeConfig,
    master_seed: u64,
) -> Result<Vec<OffloadRecord>> {
    config.validate()?;
    let scenarios = expand_scenarios(sweep)?;
    scenarios
        .par_iter()
        .map(|s| simulate_offload(s, config, derive_seed(master_seed, &s.id)))
        .collect()
}

pub fn generate_dataset(sweep: &SweepConfig, config: &GenerativeConfig, master_seed: u64) -> Result<Dataset> {
    let records = generate_records(sweep, config, master_seed)?;
    Ok(Dataset::new(
        records.iter().map(OffloadRecord::to_dataset_record).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::ground_truth::base_stage_time;
    use crate::simulator::scenario::fixtures::scenario;

    fn small_sweep() -> SweepConfig {
        let mut s = SweepConfig::default();
        s.platforms[0].bandwidths_mbps = vec![50.0, 1000.0];
        s.platforms[0].latencies_ms = vec![10.0];
        s.stress_levels.truncate(2);
        s.image_sizes_mb = vec![50.0, 200.0];
        s.repetitions = 2;
        s
    }

    #[test]
    fn noiseless_total_is_sum_of_base_formulas() {
        let cfg = GenerativeConfig::noiseless();
        for t in Technique::ALL {
            let s = scenario(t);
            let rec = simulate_offload(&s, &cfg, 99).unwrap();
            let expected = stages_of(t)
                .iter()
                .map(|&st| base_stage_time(&s, st, &cfg).unwrap())
                .fold(0.0, |a, b| a + b);
            assert_eq!(rec.t_offload, expected);
            // Pure function of the scenario when noise is off.
            assert_eq!(rec, simulate_offload(&s, &cfg, 1234).unwrap());
        }
    }

    #[test]
    fn seeds_change_stage_times() {
        let cfg = GenerativeConfig::default();
        let s = scenario(Technique::SaveLoad);
        let a = simulate_offload(&s, &cfg, 1).unwrap();
        let b = simulate_offload(&s, &cfg, 2).unwrap();
        assert_ne!(a.stage_times, b.stage_times);
    }

    #[test]
    fn save_load_record_has_five_stages() {
        let rec = simulate_offload(&scenario(Technique::SaveLoad), &GenerativeConfig::default(), 5)
            .unwrap();
        let stages: Vec<_> = rec.stage_times.iter().map(|t| t.stage).collect();
        assert_eq!(stages, stages_of(Technique::SaveLoad));
    }

    #[test]
    fn record_invariants() {
        let ds = generate_records(&small_sweep(), &GenerativeConfig::default(), 42).unwrap();
        assert_eq!(ds.len(), small_sweep().scenario_count());
        for r in &ds {
            assert_eq!(
                r.t_offload,
                total_offload_time(&r.stage_times, r.scenario.technique).unwrap()
            );
            assert_eq!(r.sample_count, (r.t_offload.ceil() as u32).max(1));
            r.metrics.validate().unwrap();
        }
    }

    #[test]
    fn generation_is_deterministic_and_ordered() {
        let cfg = GenerativeConfig::default();
        let a = generate_dataset(&small_sweep(), &cfg, 42).unwrap();
        let b = generate_dataset(&small_sweep(), &cfg, 42).unwrap();
        assert_eq!(a, b);
        assert!(a
            .records
            .windows(2)
            .all(|w| w[0].scenario_id < w[1].scenario_id));
        let c = generate_dataset(&small_sweep(), &cfg, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn single_thread_matches_pool() {
        let cfg = GenerativeConfig::default();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| generate_dataset(&small_sweep(), &cfg, 7).unwrap());
        let b = many.install(|| generate_dataset(&small_sweep(), &cfg, 7).unwrap());
        assert_eq!(a, b);
    }
}
