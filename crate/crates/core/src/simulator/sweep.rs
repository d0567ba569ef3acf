use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::{Direction, Technique};

use super::scenario::{NetworkSpec, ResourceSpec, Scenario, StressProfile};

/// A cloud/fog machine pair and the network conditions it was run under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlatformSpec {
    pub name: String,
    pub cloud: ResourceSpec,
    pub fog: ResourceSpec,
    pub bandwidths_mbps: Vec<f64>,
    pub latencies_ms: Vec<f64>,
    pub hub_uplink_mbps: f64,
    /// Replaces the sweep-wide image sizes on this platform.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_sizes_mb: Option<Vec<f64>>,
}

impl PlatformSpec {
    fn sizes<'a>(&'a self, sweep: &'a SweepConfig) -> &'a [f64] {
        self.image_sizes_mb.as_deref().unwrap_or(&sweep.image_sizes_mb)
    }
}

/// Background load on both machines for one step of the stress sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StressLevel {
    pub name: String,
    pub source: StressProfile,
    pub destination: StressProfile,
}

impl StressLevel {
    fn symmetric(name: &str, cpu: f64, mem: f64, disk: f64) -> Self {
        let p = StressProfile {
            cpu_load_pct: cpu,
            mem_load_pct: mem,
            disk_load_pct: disk,
        };
        Self {
            name: name.into(),
            source: p,
            destination: p,
        }
    }
}

/// Axes of the experiment grid. The default reproduces the two lab
/// platforms: four emulated bandwidths and two latencies on the first, the
/// ~3.2 Mbps default link on the second.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub platforms: Vec<PlatformSpec>,
    pub techniques: Vec<Technique>,
    pub directions: Vec<Direction>,
    pub stress_levels: Vec<StressLevel>,
    /// Container image sizes. Not given for the lab runs; these span small
    /// service images to large application images.
    pub image_sizes_mb: Vec<f64>,
    pub repetitions: u32,
    /// Container resident memory is `base + per_image * image_size`.
    pub container_memory_base_mb: f64,
    pub container_memory_per_image_mb: f64,
    /// Checkpoint dump size as a fraction of resident memory.
    pub criu_state_fraction: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            platforms: vec![
                PlatformSpec {
                    name: "p1".into(),
                    cloud: ResourceSpec {
                        cores: 6,
                        memory_gb: 6.0,
                        disk_gb: 30.0,
                        base_disk_rate_mbps: 200.0,
                        base_cpu_score: 1.0,
                    },
                    fog: ResourceSpec {
                        cores: 2,
                        memory_gb: 2.0,
                        disk_gb: 20.0,
                        base_disk_rate_mbps: 80.0,
                        base_cpu_score: 0.6,
                    },
                    bandwidths_mbps: vec![25.0, 50.0, 100.0, 1000.0],
                    latencies_ms: vec![10.0, 30.0],
                    hub_uplink_mbps: 50.0,
                    image_sizes_mb: None,
                },
                PlatformSpec {
                    name: "p2".into(),
                    cloud: ResourceSpec {
                        cores: 4,
                        memory_gb: 8.0,
                        disk_gb: 80.0,
                        base_disk_rate_mbps: 250.0,
                        base_cpu_score: 1.0,
                    },
                    fog: ResourceSpec {
                        cores: 2,
                        memory_gb: 4.0,
                        disk_gb: 40.0,
                        base_disk_rate_mbps: 120.0,
                        base_cpu_score: 0.7,
                    },
                    bandwidths_mbps: vec![3.2],
                    latencies_ms: vec![20.0],
                    hub_uplink_mbps: 50.0,
                    // The slow link keeps to small images so offloads stay
                    // in the tens of seconds.
                    image_sizes_mb: Some(vec![5.0, 10.0, 25.0, 50.0]),
                },
            ],
            techniques: Technique::ALL.to_vec(),
            directions: Direction::ALL.to_vec(),
            stress_levels: vec![
                StressLevel::symmetric("s0", 0.0, 0.0, 0.0),
                StressLevel::symmetric("s1", 10.0, 25.0, 25.0),
                StressLevel::symmetric("s2", 20.0, 50.0, 50.0),
                StressLevel::symmetric("s3", 30.0, 70.0, 70.0),
            ],
            image_sizes_mb: vec![50.0, 200.0, 500.0, 1000.0],
            repetitions: 5,
            container_memory_base_mb: 128.0,
            container_memory_per_image_mb: 0.5,
            criu_state_fraction: 0.25,
        }
    }
}

impl SweepConfig {
    /// Number of scenarios `expand_scenarios` will produce.
    pub fn scenario_count(&self) -> usize {
        let per_platform: usize = self
            .platforms
            .iter()
            .map(|p| p.bandwidths_mbps.len() * p.latencies_ms.len() * p.sizes(self).len())
            .sum();
        per_platform
            * self.techniques.len()
            * self.directions.len()
            * self.stress_levels.len()
            * self.repetitions as usize
    }

    fn check_axes(&self) -> Result<()> {
        if self.platforms.is_empty() {
            return Err(Error::EmptySweep("platforms"));
        }
        for p in &self.platforms {
            if p.bandwidths_mbps.is_empty() {
                return Err(Error::EmptySweep("bandwidths_mbps"));
            }
            if p.latencies_ms.is_empty() {
                return Err(Error::EmptySweep("latencies_ms"));
            }
            if p.sizes(self).is_empty() {
                return Err(Error::EmptySweep("image_sizes_mb"));
            }
        }
        if self.techniques.is_empty() {
            return Err(Error::EmptySweep("techniques"));
        }
        if self.directions.is_empty() {
            return Err(Error::EmptySweep("directions"));
        }
        if self.stress_levels.is_empty() {
            return Err(Error::EmptySweep("stress_levels"));
        }
        if self.repetitions == 0 {
            return Err(Error::EmptySweep("repetitions"));
        }
        if !(self.criu_state_fraction > 0.0
            && self.container_memory_base_mb >= 0.0
            && self.container_memory_per_image_mb >= 0.0)
        {
            return Err(Error::InvalidConfig(
                "container memory model must be non-negative with a positive state fraction"
                    .into(),
            ));
        }
        Ok(())
    }
}

/// Cartesian product of the sweep axes, sorted by scenario id.
pub fn expand_scenarios(sweep: &SweepConfig) -> Result<Vec<Scenario>> {
    sweep.check_axes()?;
    let mut out = Vec::with_capacity(sweep.scenario_count());
    for platform in &sweep.platforms {
        for &bw in &platform.bandwidths_mbps {
            for &lat in &platform.latencies_ms {
                let network = NetworkSpec {
                    bandwidth_bps: bw * 1e6,
                    latency_ms: lat,
                    hub_uplink_bps: platform.hub_uplink_mbps * 1e6,
                };
                for &technique in &sweep.techniques {
                    for &direction in &sweep.directions {
                        let (source, destination) = match direction {
                            Direction::CloudToFog => (&platform.cloud, &platform.fog),
                            Direction::FogToCloud => (&platform.fog, &platform.cloud),
                        };
                        for stress in &sweep.stress_levels {
                            for &size in platform.sizes(sweep) {
                                let footprint = sweep.container_memory_base_mb
                                    + sweep.container_memory_per_image_mb * size;
                                let state = if technique.is_stateful() {
                                    sweep.criu_state_fraction * footprint
                                } else {
                                    0.0
                                };
                                for rep in 1..=sweep.repetitions {
                                    let id = format!(
                                        "{}-{}-{}-{}mbps-{}ms-{}-{}mb-r{}",
                                        platform.name,
                                        technique,
                                        direction,
                                        bw,
                                        lat,
                                        stress.name,
                                        size,
                                        rep
                                    );
                                    let scenario = Scenario {
                                        id,
                                        platform: platform.name.clone(),
                                        technique,
                                        direction,
                                        source: source.clone(),
                                        destination: destination.clone(),
                                        network: network.clone(),
                                        stress_source: stress.source,
                                        stress_destination: stress.destination,
                                        image_size_mb: size,
                                        state_size_mb: state,
                                        memory_footprint_mb: footprint,
                                        repetition: rep,
                                    };
                                    scenario.validate()?;
                                    out.push(scenario);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out.sort_by(|a, b| a.id.cmp(&b.id));
    let unique: BTreeSet<&str> = out.iter().map(|s| s.id.as_str()).collect();
    if unique.len() != out.len() {
        return Err(Error::InvalidConfig(
            "sweep produces duplicate scenario ids; axis values must be distinct".into(),
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_platform() -> SweepConfig {
        let mut s = SweepConfig::default();
        s.platforms.truncate(1);
        s.stress_levels.truncate(1);
        s.image_sizes_mb.truncate(1);
        s.repetitions = 1;
        s
    }

    #[test]
    fn product_count() {
        let s = single_platform();
        let scenarios = expand_scenarios(&s).unwrap();
        assert_eq!(scenarios.len(), 64);
        assert_eq!(s.scenario_count(), 64);
    }

    #[test]
    fn default_grid_has_lab_axes() {
        let s = SweepConfig::default();
        assert_eq!(s.platforms[0].bandwidths_mbps, [25.0, 50.0, 100.0, 1000.0]);
        assert_eq!(s.platforms[0].latencies_ms, [10.0, 30.0]);
        assert_eq!(s.platforms[0].cloud.cores, 6);
        assert_eq!(s.platforms[0].cloud.disk_gb, 30.0);
        assert_eq!(s.platforms[1].bandwidths_mbps, [3.2]);
        assert_eq!(s.scenario_count(), 5760);
    }

    #[test]
    fn repetitions_get_distinct_ids() {
        let mut s = single_platform();
        s.repetitions = 5;
        let scenarios = expand_scenarios(&s).unwrap();
        assert_eq!(scenarios.len(), 320);
        let first = &scenarios[0];
        let base = first.id.trim_end_matches(char::is_numeric);
        let reps: Vec<u32> = scenarios
            .iter()
            .filter(|x| x.id.trim_end_matches(char::is_numeric) == base)
            .map(|x| x.repetition)
            .collect();
        assert_eq!(reps, [1, 2, 3, 4, 5]);
    }

    #[test]
    fn ids_sorted_and_formatted() {
        let scenarios = expand_scenarios(&single_platform()).unwrap();
        assert!(scenarios.windows(2).all(|w| w[0].id < w[1].id));
        assert!(scenarios
            .iter()
            .any(|s| s.id == "p1-criu-cloud-to-fog-1000mbps-10ms-s0-50mb-r1"));
    }

    #[test]
    fn direction_assigns_roles() {
        let scenarios = expand_scenarios(&single_platform()).unwrap();
        for s in &scenarios {
            assert_eq!(s.cloud().0.cores, 6);
            assert_eq!(s.fog().0.cores, 2);
        }
    }

    #[test]
    fn empty_axes_rejected() {
        let mut s = single_platform();
        s.image_sizes_mb.clear();
        assert!(matches!(
            expand_scenarios(&s),
            Err(Error::EmptySweep("image_sizes_mb"))
        ));
        let mut s = single_platform();
        s.platforms[0].latencies_ms.clear();
        assert!(matches!(expand_scenarios(&s), Err(Error::EmptySweep(_))));
        let mut s = single_platform();
        s.repetitions = 0;
        assert!(matches!(expand_scenarios(&s), Err(Error::EmptySweep(_))));
    }

    #[test]
    fn platform_sizes_override_sweep_sizes() {
        let s = SweepConfig::default();
        let scenarios = expand_scenarios(&s).unwrap();
        let sizes = |name: &str| -> BTreeSet<u64> {
            scenarios
                .iter()
                .filter(|x| x.platform == name)
                .map(|x| x.image_size_mb as u64)
                .collect()
        };
        assert_eq!(sizes("p1").into_iter().collect::<Vec<_>>(), [50, 200, 500, 1000]);
        assert_eq!(sizes("p2").into_iter().collect::<Vec<_>>(), [5, 10, 25, 50]);
        let mut s = single_platform();
        s.platforms[0].image_sizes_mb = Some(vec![]);
        assert!(matches!(
            expand_scenarios(&s),
            Err(Error::EmptySweep("image_sizes_mb"))
        ));
    }

    #[test]
    fn duplicate_axis_values_rejected() {
        let mut s = single_platform();
        s.image_sizes_mb = vec![50.0, 50.0];
        assert!(matches!(expand_scenarios(&s), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn criu_gets_state() {
        let scenarios = expand_scenarios(&single_platform()).unwrap();
        for s in scenarios {
            if s.technique == Technique::Criu {
                assert!((s.state_size_mb - 0.25 * (128.0 + 25.0)).abs() < 1e-12);
            } else {
                assert_eq!(s.state_size_mb, 0.0);
            }
        }
    }

    #[test]
    fn json_round_trip_and_unknown_keys() {
        let s = SweepConfig::default();
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<SweepConfig>(&json).unwrap(), s);
        assert!(serde_json::from_str::<SweepConfig>(r#"{"reps": 2}"#).is_err());
        let partial: SweepConfig = serde_json::from_str(r#"{"repetitions": 2}"#).unwrap();
        assert_eq!(partial.repetitions, 2);
        assert_eq!(partial.platforms.len(), 2);
    }
}
