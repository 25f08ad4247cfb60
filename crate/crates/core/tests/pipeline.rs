use matseq::montecarlo::{load_scenarios, run_replications, Parallelism};
use matseq::tensor_data::{load_series, save_series};
use matseq::{estimate_structure, simulate, DgpSpec, StructureClass, TestConfig};

fn small_spec(seed: u64) -> DgpSpec {
    DgpSpec {
        p1: 40,
        p2: 12,
        t: 40,
        seed,
        ..DgpSpec::default()
    }
}

#[test]
fn csv_round_trip_preserves_series_and_verdict() {
    let series = simulate(&small_spec(11)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("series.csv");
    save_series(&series, &path).unwrap();
    let loaded = load_series(&path).unwrap();
    assert_eq!(loaded, series);

    let config = TestConfig {
        k_max: 4,
        seed: 5,
        ..TestConfig::default()
    };
    let a = estimate_structure(&series, &config).unwrap();
    let b = estimate_structure(&loaded, &config).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.class, StructureClass::from_counts(a.k1_hat, a.k2_hat));
}

#[test]
fn scenario_file_drives_replications() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.txt");
    std::fs::write(
        &path,
        "# two small designs\n\
         label = noise\nreplications = 3\np1 = 30\np2 = 10\nT = 30\nk1 = 0\nk2 = 0\nk_max = 3\nseed = 1\n\
         ---\n\
         label = one\nreplications = 3\np1 = 30\np2 = 10\nT = 30\nk_max = 3\nseed = 2\n",
    )
    .unwrap();
    let scenarios = load_scenarios(&path).unwrap();
    assert_eq!(scenarios.len(), 2);
    assert_eq!(scenarios[0].label, "noise");
    assert_eq!(scenarios[1].dgp.k1, 1);

    let parallelism = Parallelism::default();
    let first = run_replications(&scenarios[0], parallelism).unwrap();
    let again = run_replications(&scenarios[0], parallelism).unwrap();
    assert_eq!(first.outcomes.len(), 3);
    assert_eq!(first.outcomes, again.outcomes);
    assert_eq!(first.row, again.row);
}

#[test]
fn missing_series_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let err = load_series(dir.path().join("absent.csv")).unwrap_err();
    assert_eq!(err.category(), matseq::ErrorCategory::Io);
}
