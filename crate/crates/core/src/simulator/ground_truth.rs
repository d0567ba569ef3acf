use crate::error::{Error, Result};
use crate::pipeline::{ensure_stage, StageId};

use super::config::GenerativeConfig;
use super::scenario::Scenario;

const BITS_PER_MB: f64 = 8.0e6;

/// Noise-free stage time in seconds.
///
/// `S` is the image size, `R` the stress-adjusted disk rate and `c` the CPU
/// slowdown of the side the stage runs on:
///
/// | stage      | time                                                    |
/// |------------|---------------------------------------------------------|
/// | commit     | `S / (w_c R_src) * c_src + k_commit`                    |
/// | save       | `S γ / R_src * c_src + k_save`                          |
/// | export     | `S γ f / R_src * c_src + k_export`                      |
/// | transfer   | `S γ * 8e6 / bw + h * latency`                          |
/// | load       | `S γ / R_dst * c_dst + k_load`                          |
/// | import     | `S γ f / R_dst * c_dst + k_import`                      |
/// | push, pull | `S γ * 8e6 / min(bw, hub) + h * latency`                |
/// | start      | `k_start * c_dst`                                       |
/// | checkpoint | `state / R_src * c_src + k_checkpoint`                  |
/// | restore    | `state / R_dst * c_dst + k_restore + state * 8e6 / bw`  |
pub fn base_stage_time(scenario: &Scenario, stage: StageId, config: &GenerativeConfig) -> Result<f64> {
    ensure_stage(scenario.technique, stage)?;
    let s = scenario.image_size_mb;
    let gamma = config.compress_ratio;
    let flat = config.flatten_ratio;
    let r_src = scenario.stress_source.effective_disk_rate(&scenario.source);
    let r_dst = scenario
        .stress_destination
        .effective_disk_rate(&scenario.destination);
    let c_src = scenario.stress_source.cpu_slowdown();
    let c_dst = scenario.stress_destination.cpu_slowdown();
    let net = &scenario.network;
    let handshakes = f64::from(config.handshake_count) * net.latency_ms / 1000.0;
    let k = config.stage_constant(stage);
    let state = scenario.state_size_mb;

    let t = match stage {
        StageId::Commit => s / (config.commit_rate_factor * r_src) * c_src + k,
        StageId::Save => s * gamma / r_src * c_src + k,
        StageId::Export => s * gamma * flat / r_src * c_src + k,
        StageId::Transfer => s * gamma * BITS_PER_MB / net.bandwidth_bps + handshakes,
        StageId::Load => s * gamma / r_dst * c_dst + k,
        StageId::Import => s * gamma * flat / r_dst * c_dst + k,
        StageId::Push | StageId::Pull => {
            s * gamma * BITS_PER_MB / net.bandwidth_bps.min(net.hub_uplink_bps) + handshakes
        }
        StageId::Start => k * c_dst,
        StageId::Checkpoint => state / r_src * c_src + k,
        StageId::Restore => {
            state / r_dst * c_dst + k + state * BITS_PER_MB / net.bandwidth_bps
        }
    };
    Ok(t)
}

/// Ground-truth stage time: the base formula scaled by a positive noise
/// multiplier (`1.0` for none).
pub fn stage_time_ground_truth(
    scenario: &Scenario,
    stage: StageId,
    config: &GenerativeConfig,
    noise: f64,
) -> Result<f64> {
    if !(noise.is_finite() && noise > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "noise multiplier must be positive, got {noise}"
        )));
    }
    Ok(base_stage_time(scenario, stage, config)? * noise)
}

/// Bytes a stage writes to or reads from local disk, MB.
pub(crate) fn disk_megabytes(scenario: &Scenario, stage: StageId, config: &GenerativeConfig) -> f64 {
    let s = scenario.image_size_mb;
    let gamma = config.compress_ratio;
    match stage {
        StageId::Commit => s / config.commit_rate_factor,
        StageId::Save | StageId::Load => s * gamma,
        StageId::Export | StageId::Import => s * gamma * config.flatten_ratio,
        StageId::Checkpoint | StageId::Restore => scenario.state_size_mb,
        StageId::Transfer | StageId::Push | StageId::Pull | StageId::Start => 0.0,
    }
}

/// Bytes a stage moves over the network, MB.
pub(crate) fn network_megabytes(scenario: &Scenario, stage: StageId, config: &GenerativeConfig) -> f64 {
    match stage {
        StageId::Transfer | StageId::Push | StageId::Pull => {
            scenario.image_size_mb * config.compress_ratio
        }
        StageId::Restore => scenario.state_size_mb,
        _ => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{stages_of, Technique};
    use crate::simulator::scenario::fixtures::scenario;
    use proptest::prelude::*;

    #[test]
    fn transfer_example() {
        let s = scenario(Technique::SaveLoad);
        let t = stage_time_ground_truth(&s, StageId::Transfer, &GenerativeConfig::default(), 1.0)
            .unwrap();
        // 100 MB * 0.7 * 8e6 / 1e8 = 5.6 s, plus 10 handshakes of 10 ms.
        assert!((t - 5.7).abs() < 1e-12, "{t}");
    }

    #[test]
    fn start_and_zero_size_commit() {
        let mut s = scenario(Technique::SaveLoad);
        let cfg = GenerativeConfig::default();
        assert_eq!(stage_time_ground_truth(&s, StageId::Start, &cfg, 1.0).unwrap(), 0.8);
        s.image_size_mb = 0.0;
        assert_eq!(stage_time_ground_truth(&s, StageId::Commit, &cfg, 1.0).unwrap(), 0.5);
    }

    #[test]
    fn noise_scales_linearly() {
        let s = scenario(Technique::Criu);
        let cfg = GenerativeConfig::default();
        let base = base_stage_time(&s, StageId::Restore, &cfg).unwrap();
        let noisy = stage_time_ground_truth(&s, StageId::Restore, &cfg, 1.25).unwrap();
        assert_eq!(noisy, base * 1.25);
        assert!(stage_time_ground_truth(&s, StageId::Restore, &cfg, 0.0).is_err());
    }

    #[test]
    fn stage_outside_pipeline() {
        let s = scenario(Technique::Criu);
        let err = base_stage_time(&s, StageId::Save, &GenerativeConfig::default()).unwrap_err();
        assert!(matches!(err, Error::StageNotInTechnique { .. }));
    }

    #[test]
    fn hub_uplink_caps_push() {
        let mut s = scenario(Technique::PushPull);
        let cfg = GenerativeConfig::default();
        s.network.bandwidth_bps = 1e9;
        s.network.hub_uplink_bps = 7e7;
        let push = base_stage_time(&s, StageId::Push, &cfg).unwrap();
        assert!((push - (70.0 * 8e6 / 7e7 + 0.1)).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn bandwidth_never_slows_network_stages(
            bw in 1e6f64..1e9,
            factor in 1.0f64..50.0,
            technique in prop::sample::select(Technique::ALL.to_vec()),
        ) {
            let cfg = GenerativeConfig::default();
            let mut slow = scenario(technique);
            slow.network.bandwidth_bps = bw;
            let mut fast = slow.clone();
            fast.network.bandwidth_bps = bw * factor;
            for &stage in stages_of(technique) {
                let a = base_stage_time(&slow, stage, &cfg).unwrap();
                let b = base_stage_time(&fast, stage, &cfg).unwrap();
                prop_assert!(b <= a, "{stage}: {b} > {a}");
            }
        }

        #[test]
        fn stress_never_speeds_up_a_side(
            cpu in 0.0f64..95.0,
            disk in 0.0f64..95.0,
            extra_cpu in 0.0f64..4.0,
            extra_disk in 0.0f64..4.0,
            technique in prop::sample::select(Technique::ALL.to_vec()),
            on_source in any::<bool>(),
        ) {
            let cfg = GenerativeConfig::default();
            let mut lo = scenario(technique);
            let mut hi = lo.clone();
            let (lo_p, hi_p) = if on_source {
                (&mut lo.stress_source, &mut hi.stress_source)
            } else {
                (&mut lo.stress_destination, &mut hi.stress_destination)
            };
            lo_p.cpu_load_pct = cpu;
            lo_p.disk_load_pct = disk;
            hi_p.cpu_load_pct = cpu + extra_cpu;
            hi_p.disk_load_pct = disk + extra_disk;
            for &stage in stages_of(technique) {
                let a = base_stage_time(&lo, stage, &cfg).unwrap();
                let b = base_stage_time(&hi, stage, &cfg).unwrap();
                prop_assert!(b >= a, "{stage}: {b} < {a}");
            }
        }
    }
}
