use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::StageId;

/// Constants of the synthetic ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerativeConfig {
    /// Lognormal shape of the per-stage noise multiplier (median 1).
    pub noise_sigma: f64,
    /// Compressed tarball size as a fraction of the image size.
    pub compress_ratio: f64,
    /// Flattened export size as a fraction of the compressed size.
    pub flatten_ratio: f64,
    /// Round trips paid per network stage.
    pub handshake_count: u32,
    /// Noise shape for registry push and pull.
    pub hub_noise_sigma: f64,
    pub k_commit: f64,
    pub k_save: f64,
    pub k_export: f64,
    pub k_load: f64,
    pub k_import: f64,
    pub k_start: f64,
    pub k_checkpoint: f64,
    pub k_restore: f64,
    /// Commit writes only the container diff: `S / commit_rate_factor`.
    pub commit_rate_factor: f64,
    pub sampling: SamplingConfig,
}

impl Default for GenerativeConfig {
    fn default() -> Self {
        Self {
            noise_sigma: 0.05,
            compress_ratio: 0.7,
            flatten_ratio: 0.8,
            handshake_count: 10,
            hub_noise_sigma: 0.20,
            k_commit: 0.5,
            k_save: 0.3,
            k_export: 0.3,
            k_load: 0.4,
            k_import: 0.4,
            k_start: 0.8,
            k_checkpoint: 0.4,
            k_restore: 0.6,
            commit_rate_factor: 2.0,
            sampling: SamplingConfig::default(),
        }
    }
}

impl GenerativeConfig {
    /// All noise and jitter switched off.
    pub fn noiseless() -> Self {
        let mut c = Self::default();
        c.noise_sigma = 0.0;
        c.hub_noise_sigma = 0.0;
        c.sampling.util_jitter_pp = 0.0;
        c.sampling.throughput_jitter_rel = 0.0;
        c
    }

    pub fn stage_constant(&self, stage: StageId) -> f64 {
        match stage {
            StageId::Commit => self.k_commit,
            StageId::Save => self.k_save,
            StageId::Export => self.k_export,
            StageId::Load => self.k_load,
            StageId::Import => self.k_import,
            StageId::Start => self.k_start,
            StageId::Checkpoint => self.k_checkpoint,
            StageId::Restore => self.k_restore,
            StageId::Transfer | StageId::Push | StageId::Pull => 0.0,
        }
    }

    pub fn noise_sigma_for(&self, stage: StageId) -> f64 {
        match stage {
            StageId::Push | StageId::Pull => self.hub_noise_sigma,
            _ => self.noise_sigma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("noise_sigma", self.noise_sigma),
            ("hub_noise_sigma", self.hub_noise_sigma),
            ("k_commit", self.k_commit),
            ("k_save", self.k_save),
            ("k_export", self.k_export),
            ("k_load", self.k_load),
            ("k_import", self.k_import),
            ("k_start", self.k_start),
            ("k_checkpoint", self.k_checkpoint),
            ("k_restore", self.k_restore),
        ];
        for (name, v) in nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be >= 0, got {v}")));
            }
        }
        for (name, v) in [
            ("compress_ratio", self.compress_ratio),
            ("flatten_ratio", self.flatten_ratio),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::InvalidConfig(format!("{name} must be in (0,1], got {v}")));
            }
        }
        if !(self.commit_rate_factor.is_finite() && self.commit_rate_factor > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "commit_rate_factor must be > 0, got {}",
                self.commit_rate_factor
            )));
        }
        self.sampling.validate()
    }
}

/// Baselines and jitter of the per-second runtime monitor.
///
/// While a side runs a stage, the offloading process occupies
/// `busy_cores` cores, so process CPU is `100 * busy_cores / (cores * cpu_score)`
/// (capped at 100) and `idle_process_cpu_pct` otherwise. Process memory is the
/// container footprint over the side's RAM while active, zero otherwise. System
/// CPU and memory add the stress load (and `system_memory_base_pct`) to the
/// process share; system disk is `load + busy * (100 - load) * disk_active_share`
/// during disk-bound stages. Throughputs are bytes moved spread evenly over
/// the stage duration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    /// Gaussian jitter on utilisation samples, in percentage points.
    pub util_jitter_pp: f64,
    /// Relative Gaussian jitter on throughput samples.
    pub throughput_jitter_rel: f64,
    pub busy_cores: f64,
    pub idle_process_cpu_pct: f64,
    pub system_memory_base_pct: f64,
    pub disk_active_share: f64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            util_jitter_pp: 2.0,
            throughput_jitter_rel: 0.05,
            busy_cores: 1.0,
            idle_process_cpu_pct: 0.5,
            system_memory_base_pct: 15.0,
            disk_active_share: 0.8,
        }
    }
}

impl SamplingConfig {
    fn validate(&self) -> Result<()> {
        let ok = self.util_jitter_pp >= 0.0
            && self.throughput_jitter_rel >= 0.0
            && self.busy_cores > 0.0
            && (0.0..=100.0).contains(&self.idle_process_cpu_pct)
            && (0.0..=100.0).contains(&self.system_memory_base_pct)
            && (0.0..=1.0).contains(&self.disk_active_share);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid sampling config {self:?}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        GenerativeConfig::default().validate().unwrap();
        GenerativeConfig::noiseless().validate().unwrap();
    }

    #[test]
    fn json_fills_defaults_and_rejects_unknown_keys() {
        let c: GenerativeConfig = serde_json::from_str(r#"{"noise_sigma": 0.1}"#).unwrap();
        assert_eq!(c.noise_sigma, 0.1);
        assert_eq!(c.k_start, 0.8);
        assert!(serde_json::from_str::<GenerativeConfig>(r#"{"noise": 0.1}"#).is_err());
    }

    #[test]
    fn rejects_bad_ratios() {
        let mut c = GenerativeConfig::default();
        c.compress_ratio = 0.0;
        assert!(c.validate().is_err());
        let mut c = GenerativeConfig::default();
        c.k_save = -1.0;
        assert!(c.validate().is_err());
    }
}
