//! Shared fixtures for the benchmarks.

use offload_core::regression::DesignMatrix;
use offload_core::simulator::{Dataset, GenerativeConfig, SweepConfig};
use offload_core::{Direction, Technique};

/// One platform, every technique and direction: 1,152 records.
pub fn bench_sweep() -> SweepConfig {
    let mut sweep = SweepConfig::default();
    sweep.platforms.truncate(1);
    sweep.repetitions = 3;
    sweep.stress_levels.truncate(3);
    sweep.image_sizes_mb.truncate(3);
    sweep
}

pub fn bench_dataset() -> Dataset {
    offload_core::simulator::generate_dataset(&bench_sweep(), &GenerativeConfig::default(), 1)
        .expect("default sweep is valid")
}

/// The save-load, cloud-to-fog slice as a 25-column design matrix.
pub fn design(dataset: &Dataset) -> (DesignMatrix, Vec<f64>) {
    let rows = dataset.slice(Technique::SaveLoad, Direction::CloudToFog);
    let x: Vec<Vec<f64>> = rows.iter().map(|r| r.metrics.values().to_vec()).collect();
    let y = rows.iter().map(|r| r.t_offload).collect();
    (DesignMatrix::from_rows(&x).expect("finite metrics"), y)
}
