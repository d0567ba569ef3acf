use offload_core::estimation::{estimate_offload, train_estimator, Estimator, EstimatorSpec, Method};
use offload_core::evaluation::{run_experiment, EvaluationReport, MatrixConfig, ValidationScheme};
use offload_core::persistence::{dataset_from_csv, dataset_to_csv, read_dataset, write_dataset};
use offload_core::regression::{ForestParams, ModelKind};
use offload_core::simulator::{generate_dataset, GenerativeConfig, SweepConfig};
use offload_core::{Direction, Technique};

fn small_sweep() -> SweepConfig {
    let mut s = SweepConfig::default();
    s.platforms.truncate(1);
    s.platforms[0].bandwidths_mbps = vec![25.0, 100.0];
    s.platforms[0].latencies_ms = vec![10.0];
    s.stress_levels.truncate(2);
    s.repetitions = 2;
    s
}

#[test]
fn dataset_survives_disk() {
    let data = generate_dataset(&small_sweep(), &GenerativeConfig::default(), 11).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    write_dataset(&data, &path).unwrap();
    let back = read_dataset(&path).unwrap();
    assert_eq!(back.len(), data.len());
    // Printing is a fixed point after one round.
    assert_eq!(dataset_to_csv(&back), dataset_to_csv(&dataset_from_csv(&dataset_to_csv(&back)).unwrap()));
}

#[test]
fn estimator_json_predicts_identically() {
    let data = generate_dataset(&small_sweep(), &GenerativeConfig::default(), 12).unwrap();
    for method in Method::ALL {
        for kind in ModelKind::ALL {
            let mut spec = EstimatorSpec::new(method, kind, Technique::PushPull, Direction::FogToCloud);
            spec.model_config.forest.tree_count = 5;
            let est = train_estimator(&data, &spec, 3).unwrap();
            let back = Estimator::from_json(&est.to_json().unwrap()).unwrap();
            for r in data.slice(Technique::PushPull, Direction::FogToCloud) {
                let a = estimate_offload(&est, &r.metrics).unwrap();
                let b = estimate_offload(&back, &r.metrics).unwrap();
                assert_eq!(a.to_bits(), b.to_bits(), "{method} {kind}");
                assert!(a >= 0.0);
            }
        }
    }
}

#[test]
fn report_csv_and_json_agree() {
    let data = generate_dataset(&small_sweep(), &GenerativeConfig::default(), 13).unwrap();
    let mut matrix = MatrixConfig {
        techniques: vec![Technique::Criu],
        schemes: vec![ValidationScheme::TrainTest { ratio: 0.7 }, ValidationScheme::Kfold { k: 3 }],
        ..MatrixConfig::default()
    };
    matrix.model_config.forest = ForestParams {
        tree_count: 4,
        ..ForestParams::default()
    };
    let report = run_experiment(&data, &matrix, 5).unwrap();
    assert_eq!(report.cells.len(), matrix.cell_count());
    let from_json = EvaluationReport::from_json(&report.to_json().unwrap()).unwrap();
    assert_eq!(from_json.to_csv(), report.to_csv());
    let from_csv = EvaluationReport::from_csv(&report.to_csv()).unwrap();
    assert_eq!(from_csv.to_csv(), report.to_csv());
}
