//! Synthetic testbed standing in for physical cloud and fog machines.
//!
//! Stage times come from closed-form generative formulas driven by image
//! size, disk rates, CPU and disk stress, bandwidth and latency, perturbed by
//! multiplicative lognormal noise. Runtime metrics are sampled once per
//! simulated second and averaged over the offload, the same way a monitor
//! polling `/proc` would see them.

mod config;
mod dataset;
mod ground_truth;
mod sampling;
mod scenario;
mod sweep;

pub use config::{GenerativeConfig, SamplingConfig};
pub use dataset::{generate_dataset, generate_records, simulate_offload, Dataset, DatasetRecord, OffloadRecord};
pub use ground_truth::{base_stage_time, stage_time_ground_truth};
pub use sampling::{sample_runtime_metrics, sample_runtime_series, RuntimeSeries, RUNTIME_PARAMETERS};
pub use scenario::{NetworkSpec, ResourceSpec, Scenario, StressProfile};
pub use sweep::{expand_scenarios, PlatformSpec, StressLevel, SweepConfig};
