use rand::Rng;
use rand_distr::StandardNormal;

use crate::catalogue::{MetricVector, ParameterId};
use crate::error::Result;
use crate::pipeline::{canonical_timings, Direction, StageId, StageSite, StageTiming};
use crate::seed::rng_for;

use super::config::GenerativeConfig;
use super::ground_truth::{disk_megabytes, network_megabytes};
use super::scenario::{ResourceSpec, Scenario, StressProfile};

/// P1 through P16: eight cloud-side then eight fog-side runtime metrics.
pub const RUNTIME_PARAMETERS: usize = 16;

/// Per-second monitor output for one offload.
#[derive(Debug, Clone, PartialEq)]
pub struct RuntimeSeries {
    /// Noise-free value of each runtime metric in each one-second window.
    pub baseline: Vec<[f64; RUNTIME_PARAMETERS]>,
    /// Baseline plus jitter, clamped to the valid range.
    pub samples: Vec<[f64; RUNTIME_PARAMETERS]>,
}

impl RuntimeSeries {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Arithmetic mean of each metric over all samples.
    pub fn means(&self) -> [f64; RUNTIME_PARAMETERS] {
        let mut sum = [0.0; RUNTIME_PARAMETERS];
        for row in &self.samples {
            for (acc, v) in sum.iter_mut().zip(row) {
                *acc += v;
            }
        }
        let n = self.samples.len() as f64;
        sum.map(|s| s / n)
    }
}

/// Number of one-second samples the monitor takes during an offload.
pub fn sample_count(t_offload: f64) -> u32 {
    (t_offload.ceil() as u32).max(1)
}

#[derive(Clone, Copy, PartialEq)]
enum Role {
    Source,
    Destination,
}

struct Interval {
    stage: StageId,
    start: f64,
    end: f64,
    disk_rate: f64,
    net_rate: f64,
}

impl Interval {
    fn overlap(&self, lo: f64, hi: f64) -> f64 {
        (self.end.min(hi) - self.start.max(lo)).max(0.0)
    }

    fn runs_on(&self, role: Role) -> bool {
        match self.stage.site() {
            StageSite::Link => true,
            StageSite::Source => role == Role::Source,
            StageSite::Destination => role == Role::Destination,
        }
    }

    fn sends_from(&self, role: Role) -> bool {
        match self.stage {
            StageId::Transfer | StageId::Restore => role == Role::Source,
            StageId::Push => role == Role::Source,
            _ => false,
        }
    }

    fn receives_on(&self, role: Role) -> bool {
        match self.stage {
            StageId::Transfer | StageId::Restore => role == Role::Destination,
            StageId::Pull => role == Role::Destination,
            _ => false,
        }
    }
}

fn side_baseline(
    intervals: &[Interval],
    role: Role,
    spec: &ResourceSpec,
    stress: &StressProfile,
    footprint_mb: f64,
    config: &GenerativeConfig,
    lo: f64,
    hi: f64,
) -> [f64; 8] {
    let sampling = &config.sampling;
    let mut busy = 0.0;
    let mut disk_busy = 0.0;
    let mut disk_bps = 0.0;
    let mut sent = 0.0;
    let mut received = 0.0;
    for iv in intervals {
        let o = iv.overlap(lo, hi);
        if o == 0.0 {
            continue;
        }
        if iv.runs_on(role) {
            busy += o;
            if iv.disk_rate > 0.0 && iv.stage.site() != StageSite::Link {
                disk_busy += o;
                disk_bps += o * iv.disk_rate;
            }
        }
        if iv.sends_from(role) {
            sent += o * iv.net_rate;
        }
        if iv.receives_on(role) {
            received += o * iv.net_rate;
        }
    }
    let busy = busy.min(1.0);
    let disk_busy = disk_busy.min(1.0);

    let cpu_active = (100.0 * sampling.busy_cores / (f64::from(spec.cores) * spec.base_cpu_score))
        .min(100.0 - stress.cpu_load_pct);
    let cpu_idle = sampling.idle_process_cpu_pct.min(cpu_active);
    let proc_cpu = cpu_idle + busy * (cpu_active - cpu_idle);
    let footprint_pct = (100.0 * footprint_mb / (spec.memory_gb * 1024.0)).min(100.0);
    let proc_mem = busy * footprint_pct;
    let sys_cpu = stress.cpu_load_pct + proc_cpu;
    let sys_mem = stress.mem_load_pct + sampling.system_memory_base_pct + proc_mem;
    let sys_disk = stress.disk_load_pct
        + disk_busy * (100.0 - stress.disk_load_pct) * sampling.disk_active_share;

    [
        sys_cpu.clamp(0.0, 100.0),
        sys_mem.clamp(0.0, 100.0),
        sys_disk.clamp(0.0, 100.0),
        proc_cpu.clamp(0.0, 100.0),
        proc_mem.clamp(0.0, 100.0),
        disk_bps,
        sent,
        received,
    ]
}

fn is_utilisation(slot: usize) -> bool {
    slot % 8 < 5
}

/// Emits one sample per simulated second for every runtime metric.
///
/// Sample `s` covers `[s, s+1)`; stage contributions are weighted by their
/// overlap with that window, so throughput samples sum to the bytes moved.
pub fn sample_runtime_series(
    scenario: &Scenario,
    stage_times: &[StageTiming],
    config: &GenerativeConfig,
    seed: u64,
) -> Result<RuntimeSeries> {
    let ordered = canonical_timings(stage_times, scenario.technique)?;
    let mut intervals = Vec::with_capacity(ordered.len());
    let mut clock = 0.0;
    for t in &ordered {
        let start = clock;
        clock += t.seconds;
        let per_second = |amount: f64| {
            if t.seconds > 0.0 {
                amount / t.seconds
            } else {
                0.0
            }
        };
        intervals.push(Interval {
            stage: t.stage,
            start,
            end: clock,
            disk_rate: per_second(disk_megabytes(scenario, t.stage, config) * 1e6),
            net_rate: per_second(network_megabytes(scenario, t.stage, config) * 1000.0),
        });
    }
    let n = sample_count(clock) as usize;

    let (cloud_role, fog_role) = match scenario.direction {
        Direction::CloudToFog => (Role::Source, Role::Destination),
        Direction::FogToCloud => (Role::Destination, Role::Source),
    };
    let (cloud_spec, cloud_stress) = scenario.cloud();
    let (fog_spec, fog_stress) = scenario.fog();

    let sampling = &config.sampling;
    let mut rng = rng_for(seed, "runtime-jitter");
    let mut baseline = Vec::with_capacity(n);
    let mut samples = Vec::with_capacity(n);
    for s in 0..n {
        let (lo, hi) = (s as f64, s as f64 + 1.0);
        let cloud = side_baseline(
            &intervals,
            cloud_role,
            cloud_spec,
            cloud_stress,
            scenario.memory_footprint_mb,
            config,
            lo,
            hi,
        );
        let fog = side_baseline(
            &intervals,
            fog_role,
            fog_spec,
            fog_stress,
            scenario.memory_footprint_mb,
            config,
            lo,
            hi,
        );
        let mut base = [0.0; RUNTIME_PARAMETERS];
        base[..8].copy_from_slice(&cloud);
        base[8..].copy_from_slice(&fog);

        let mut noisy = base;
        for (slot, v) in noisy.iter_mut().enumerate() {
            let z: f64 = rng.sample(StandardNormal);
            *v = if is_utilisation(slot) {
                (*v + sampling.util_jitter_pp * z).clamp(0.0, 100.0)
            } else {
                (*v * (1.0 + sampling.throughput_jitter_rel * z)).max(0.0)
            };
        }
        baseline.push(base);
        samples.push(noisy);
    }
    Ok(RuntimeSeries { baseline, samples })
}

/// Averaged runtime metrics plus the scenario's offline parameters.
pub fn sample_runtime_metrics(
    scenario: &Scenario,
    stage_times: &[StageTiming],
    config: &GenerativeConfig,
    seed: u64,
) -> Result<MetricVector> {
    let series = sample_runtime_series(scenario, stage_times, config, seed)?;
    Ok(assemble_metrics(scenario, &series.means()))
}

pub(crate) fn assemble_metrics(scenario: &Scenario, runtime: &[f64; RUNTIME_PARAMETERS]) -> MetricVector {
    use ParameterId::*;
    let mut v = MetricVector::default();
    for (i, &x) in runtime.iter().enumerate() {
        v[ParameterId::ALL[i]] = x;
    }
    let (cloud, _) = scenario.cloud();
    let (fog, _) = scenario.fog();
    v[P17] = scenario.image_size_mb;
    v[P18] = f64::from(cloud.cores);
    v[P19] = cloud.memory_gb;
    v[P20] = cloud.disk_gb;
    v[P21] = f64::from(fog.cores);
    v[P22] = fog.memory_gb;
    v[P23] = fog.disk_gb;
    v[P24] = scenario.network.bandwidth_bps;
    v[P25] = scenario.network.latency_ms;
    v
}
