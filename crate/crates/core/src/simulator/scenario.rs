use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::{Direction, Technique};

/// Static capacity of one machine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourceSpec {
    pub cores: u32,
    pub memory_gb: f64,
    pub disk_gb: f64,
    /// Sequential disk rate with no competing load, MB/s.
    pub base_disk_rate_mbps: f64,
    /// Relative CPU speed; 1.0 is the reference core.
    pub base_cpu_score: f64,
}

impl ResourceSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = self.cores > 0
            && self.memory_gb > 0.0
            && self.disk_gb > 0.0
            && self.base_disk_rate_mbps > 0.0
            && self.base_disk_rate_mbps <= 10_000.0
            && self.base_cpu_score > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid resource spec {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub bandwidth_bps: f64,
    pub latency_ms: f64,
    /// Throughput ceiling of the central image registry path.
    pub hub_uplink_bps: f64,
}

impl NetworkSpec {
    pub fn validate(&self) -> Result<()> {
        if self.bandwidth_bps > 0.0 && self.hub_uplink_bps > 0.0 && self.latency_ms >= 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid network spec {self:?}")))
        }
    }
}

/// Background load imposed on one machine, in percent of capacity.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StressProfile {
    pub cpu_load_pct: f64,
    pub mem_load_pct: f64,
    pub disk_load_pct: f64,
}

/// Stress sweeps on the physical testbeds stopped at this level.
pub const STRESS_SWEEP_CEILING_PCT: f64 = 75.0;

impl StressProfile {
    pub fn validate(&self) -> Result<()> {
        for v in [self.cpu_load_pct, self.mem_load_pct, self.disk_load_pct] {
            if !(0.0..100.0).contains(&v) {
                return Err(Error::InvalidConfig(format!(
                    "stress load {v} outside [0, 100)"
                )));
            }
        }
        Ok(())
    }

    /// Permitted, but outside the range the stress sweeps covered.
    pub fn beyond_sweep_ceiling(&self) -> bool {
        [self.cpu_load_pct, self.mem_load_pct, self.disk_load_pct]
            .iter()
            .any(|&v| v >= STRESS_SWEEP_CEILING_PCT)
    }

    /// Disk rate left over after background I/O.
    pub fn effective_disk_rate(&self, spec: &ResourceSpec) -> f64 {
        spec.base_disk_rate_mbps * (1.0 - self.disk_load_pct / 100.0)
    }

    /// Slowdown of CPU-bound work under background CPU load, in [1, 10].
    pub fn cpu_slowdown(&self) -> f64 {
        (1.0 / (1.0 - self.cpu_load_pct / 100.0)).clamp(1.0, 10.0)
    }
}

/// One offload to simulate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    pub platform: String,
    pub technique: Technique,
    pub direction: Direction,
    pub source: ResourceSpec,
    pub destination: ResourceSpec,
    pub network: NetworkSpec,
    pub stress_source: StressProfile,
    pub stress_destination: StressProfile,
    pub image_size_mb: f64,
    /// Checkpoint dump size; zero for stateless techniques.
    pub state_size_mb: f64,
    /// Resident memory of the running container.
    pub memory_footprint_mb: f64,
    pub repetition: u32,
}

impl Scenario {
    /// Machine playing the cloud role.
    pub fn cloud(&self) -> (&ResourceSpec, &StressProfile) {
        match self.direction {
            Direction::CloudToFog => (&self.source, &self.stress_source),
            Direction::FogToCloud => (&self.destination, &self.stress_destination),
        }
    }

    pub fn fog(&self) -> (&ResourceSpec, &StressProfile) {
        match self.direction {
            Direction::CloudToFog => (&self.destination, &self.stress_destination),
            Direction::FogToCloud => (&self.source, &self.stress_source),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |reason: String| Error::InvalidScenario {
            id: self.id.clone(),
            reason,
        };
        self.source.validate().map_err(|e| invalid(e.to_string()))?;
        self.destination
            .validate()
            .map_err(|e| invalid(e.to_string()))?;
        self.network.validate().map_err(|e| invalid(e.to_string()))?;
        self.stress_source
            .validate()
            .map_err(|e| invalid(e.to_string()))?;
        self.stress_destination
            .validate()
            .map_err(|e| invalid(e.to_string()))?;
        if !(self.image_size_mb.is_finite() && self.image_size_mb > 0.0) {
            return Err(invalid(format!(
                "image size must be positive, got {}",
                self.image_size_mb
            )));
        }
        if !(self.state_size_mb.is_finite() && self.state_size_mb >= 0.0) {
            return Err(invalid(format!(
                "state size must be non-negative, got {}",
                self.state_size_mb
            )));
        }
        if self.technique.is_stateful() && self.state_size_mb <= 0.0 {
            return Err(invalid("checkpoint/restore needs a positive state size".into()));
        }
        if !(self.memory_footprint_mb.is_finite() && self.memory_footprint_mb >= 0.0) {
            return Err(invalid("memory footprint must be non-negative".into()));
        }
        if self.repetition < 1 {
            return Err(invalid("repetition index starts at 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn cloud() -> ResourceSpec {
        ResourceSpec {
            cores: 6,
            memory_gb: 6.0,
            disk_gb: 30.0,
            base_disk_rate_mbps: 200.0,
            base_cpu_score: 1.0,
        }
    }

    pub fn fog() -> ResourceSpec {
        ResourceSpec {
            cores: 2,
            memory_gb: 2.0,
            disk_gb: 20.0,
            base_disk_rate_mbps: 80.0,
            base_cpu_score: 0.6,
        }
    }

    pub fn scenario(technique: Technique) -> Scenario {
        Scenario {
            id: format!("test-{technique}"),
            platform: "test".into(),
            technique,
            direction: Direction::CloudToFog,
            source: cloud(),
            destination: fog(),
            network: NetworkSpec {
                bandwidth_bps: 1e8,
                latency_ms: 10.0,
                hub_uplink_bps: 5e7,
            },
            stress_source: StressProfile::default(),
            stress_destination: StressProfile::default(),
            image_size_mb: 100.0,
            state_size_mb: if technique.is_stateful() { 44.5 } else { 0.0 },
            memory_footprint_mb: 178.0,
            repetition: 1,
        }
    }
}
