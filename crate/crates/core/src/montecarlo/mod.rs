//! Replication harness for simulation studies.
//!
//! A [`Scenario`] fixes a data generating process, a test configuration and
//! the number of replications `R`. Replication `r` (1-based) uses
//! `seed_r = mix(base_seed, r)` for the simulated series and
//! `mix(seed_r, 1)` as the test seed, so every replication is reproducible
//! on its own and the results do not depend on how many threads run them.
//! The `seed` of the scenario's test configuration is not used.

mod calibration;
mod presets;
mod scenario_file;
mod summary;

pub use calibration::{calibration_experiment, CalibrationReport};
pub use presets::{preset, PRESETS};
pub use scenario_file::{load_scenarios, parse_scenarios};
pub use summary::{CountSummary, ProportionSummary, SummaryRow, SummaryTable};

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{eigenvalue_ratio_estimate, sequential_estimate_spectrum, StructureClass};
use crate::randomized_test::{AxisSpectrum, TestConfig};
use crate::rng::mix;
use crate::spectra::Axis;
use crate::tensor_data::{simulate, DgpSpec, MatrixSeries};

/// What counts as a correct structure verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StructureMode {
    /// The four-way class from both axes must equal the true class.
    Joint,
    /// Only the row axis is tested: a structure is claimed iff `k1_hat >= 1`.
    RowAxis,
}

impl std::str::FromStr for StructureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "joint" => Ok(StructureMode::Joint),
            "row-axis" => Ok(StructureMode::RowAxis),
            other => Err(Error::invalid(format!(
                "unknown structure mode `{other}` (expected joint or row-axis)"
            ))),
        }
    }
}

/// Outputs recorded for each replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Targets {
    pub structure: Option<StructureMode>,
    pub row_count: bool,
    pub column_count: bool,
    /// Eigenvalue-ratio estimates on the same spectra.
    pub baseline: bool,
}

impl Default for Targets {
    fn default() -> Self {
        Self {
            structure: Some(StructureMode::Joint),
            row_count: true,
            column_count: true,
            baseline: false,
        }
    }
}

impl Targets {
    fn needs(&self, axis: Axis) -> bool {
        match axis {
            Axis::Row => self.structure.is_some() || self.row_count || self.baseline,
            Axis::Column => {
                self.structure == Some(StructureMode::Joint) || self.column_count || self.baseline
            }
        }
    }

    fn estimates(&self, axis: Axis) -> bool {
        match axis {
            Axis::Row => self.structure.is_some() || self.row_count,
            Axis::Column => self.structure == Some(StructureMode::Joint) || self.column_count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub label: String,
    /// Template; its `seed` is the base seed of the replications.
    pub dgp: DgpSpec,
    pub config: TestConfig,
    pub replications: usize,
    pub targets: Targets,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::invalid(format!(
                "scenario `{}`: replications must be at least 1",
                self.label
            )));
        }
        let t = &self.targets;
        if t.structure.is_none() && !t.row_count && !t.column_count && !t.baseline {
            return Err(Error::invalid(format!(
                "scenario `{}` records nothing",
                self.label
            )));
        }
        self.dgp.validate()?;
        self.config.validate()?;
        self.config.check_dims(self.dgp.p1, self.dgp.p2)
    }

    /// True `(k1, k2)`; both are zero when either is, since the generator
    /// then omits the common component.
    pub fn true_counts(&self) -> (usize, usize) {
        if self.dgp.has_factors() {
            (self.dgp.k1, self.dgp.k2)
        } else {
            (0, 0)
        }
    }

    pub fn replication_seed(&self, index: usize) -> u64 {
        mix(self.dgp.seed, index as u64)
    }
}

/// Result of one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationOutcome {
    /// 1-based replication index.
    pub index: usize,
    pub seed: u64,
    pub k1_hat: Option<usize>,
    pub k2_hat: Option<usize>,
    pub class: Option<StructureClass>,
    pub structure_correct: Option<bool>,
    pub baseline_k1: Option<usize>,
    pub baseline_k2: Option<usize>,
    /// Axes on which the sequential procedure reached `k_max`.
    pub stopped_at_kmax: usize,
}

#[derive(Debug, Default)]
struct AxisOutcome {
    k_hat: Option<usize>,
    stopped: bool,
    baseline: Option<usize>,
}

fn run_axis(
    series: &MatrixSeries,
    axis: Axis,
    targets: &Targets,
    config: &TestConfig,
) -> Result<AxisOutcome> {
    if !targets.needs(axis) {
        return Ok(AxisOutcome::default());
    }
    let target = AxisSpectrum::from_series(series, axis, config.method, config.k_max)?;
    let mut out = AxisOutcome::default();
    if targets.estimates(axis) {
        let est = sequential_estimate_spectrum(&target, config)?;
        out.k_hat = Some(est.k_hat);
        out.stopped = est.stopped_at_kmax;
    }
    if targets.baseline {
        out.baseline = Some(eigenvalue_ratio_estimate(&target.spectrum, config.k_max)?);
    }
    Ok(out)
}

/// Runs replication `index` (1-based) of `scenario`.
pub fn run_replication(scenario: &Scenario, index: usize) -> Result<ReplicationOutcome> {
    let seed = scenario.replication_seed(index);
    let wrap = |e: Error| Error::Replication {
        seed,
        source: Box::new(e),
    };
    let dgp = DgpSpec {
        seed,
        ..scenario.dgp.clone()
    };
    let config = TestConfig {
        seed: mix(seed, 1),
        ..scenario.config.clone()
    };
    let series = simulate(&dgp).map_err(wrap)?;
    let targets = &scenario.targets;
    let (row, column) = rayon::join(
        || run_axis(&series, Axis::Row, targets, &config),
        || run_axis(&series, Axis::Column, targets, &config),
    );
    let (row, column) = (row.map_err(wrap)?, column.map_err(wrap)?);

    let truth = if dgp.has_factors() {
        StructureClass::TwoWay
    } else {
        StructureClass::NoFactors
    };
    let (class, structure_correct) = match targets.structure {
        Some(StructureMode::Joint) => {
            let class = StructureClass::from_counts(
                row.k_hat.expect("row axis estimated"),
                column.k_hat.expect("column axis estimated"),
            );
            (Some(class), Some(class == truth))
        }
        Some(StructureMode::RowAxis) => {
            let claims = row.k_hat.expect("row axis estimated") >= 1;
            (None, Some(claims == dgp.has_factors()))
        }
        None => (None, None),
    };
    Ok(ReplicationOutcome {
        index,
        seed,
        k1_hat: row.k_hat.filter(|_| targets.row_count),
        k2_hat: column.k_hat.filter(|_| targets.column_count),
        class,
        structure_correct,
        baseline_k1: row.baseline,
        baseline_k2: column.baseline,
        stopped_at_kmax: usize::from(row.stopped) + usize::from(column.stopped),
    })
}

/// Thread count (`0` lets rayon decide) and the number of replications
/// re-run serially to check that parallel execution changed nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Parallelism {
    pub threads: usize,
    pub verify_samples: usize,
}

impl Default for Parallelism {
    fn default() -> Self {
        Self {
            threads: 0,
            verify_samples: 1,
        }
    }
}

fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start {threads} worker threads: {e}")))
}

#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub row: SummaryRow,
    pub outcomes: Vec<ReplicationOutcome>,
    pub wall_clock: Duration,
}

/// Runs all replications of `scenario` and aggregates them.
pub fn run_replications(scenario: &Scenario, parallelism: Parallelism) -> Result<ScenarioRun> {
    scenario.validate()?;
    let started = Instant::now();
    let pool = thread_pool(parallelism.threads)?;
    let outcomes = pool.install(|| {
        use rayon::prelude::*;
        (1..=scenario.replications)
            .into_par_iter()
            .map(|r| run_replication(scenario, r))
            .collect::<Result<Vec<_>>>()
    })?;
    if parallelism.verify_samples > 0 {
        let serial = thread_pool(1)?;
        for j in 0..parallelism.verify_samples {
            let pick = mix(scenario.dgp.seed, u64::MAX - j as u64) % scenario.replications as u64;
            let index = pick as usize + 1;
            let again = serial.install(|| run_replication(scenario, index))?;
            if again != outcomes[index - 1] {
                return Err(Error::Nondeterminism { index });
            }
        }
    }
    let row = SummaryRow::aggregate(scenario, &outcomes);
    log::info!(
        "scenario `{}`: {} replications in {:.2?}",
        scenario.label,
        scenario.replications,
        started.elapsed()
    );
    Ok(ScenarioRun {
        row,
        outcomes,
        wall_clock: started.elapsed(),
    })
}

/// Runs the scenarios one after another and collects their rows.
pub fn run_scenarios(
    scenarios: &[Scenario],
    parallelism: Parallelism,
) -> Result<(SummaryTable, Vec<Duration>)> {
    let mut table = SummaryTable::default();
    let mut times = Vec::with_capacity(scenarios.len());
    for scenario in scenarios {
        let run = run_replications(scenario, parallelism)?;
        table.rows.push(run.row);
        times.push(run.wall_clock);
    }
    Ok((table, times))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::Method;

    fn small(k1: usize, k2: usize, replications: usize) -> Scenario {
        Scenario {
            label: format!("({k1},{k2})"),
            dgp: DgpSpec { p1: 30, p2: 8, t: 30, k1, k2, seed: 17, ..DgpSpec::default() },
            config: TestConfig { k_max: 3, draws: 100, rounds: 60, ..TestConfig::default() },
            replications,
            targets: Targets { baseline: true, ..Targets::default() },
        }
    }

    #[test]
    fn single_replication_counts() {
        let run = run_replications(&small(1, 1, 1), Parallelism::default()).unwrap();
        let s = run.row.structure.unwrap();
        assert!(s.proportion == 0.0 || s.proportion == 1.0);
        assert_eq!(run.row.k1_hat.unwrap().replications(), 1);
        assert_eq!(run.row.k2_hat.unwrap().replications(), 1);
    }

    #[test]
    fn thread_count_does_not_matter() {
        let scenario = small(1, 2, 12);
        let one = run_replications(&scenario, Parallelism { threads: 1, verify_samples: 0 }).unwrap();
        let many = run_replications(&scenario, Parallelism { threads: 4, verify_samples: 2 }).unwrap();
        assert_eq!(one.row, many.row);
        assert_eq!(one.outcomes, many.outcomes);
    }

    #[test]
    fn aggregate_invariants() {
        let scenario = small(2, 2, 10);
        let run = run_replications(&scenario, Parallelism::default()).unwrap();
        for c in [&run.row.k1_hat, &run.row.k2_hat, &run.row.baseline_k1, &run.row.baseline_k2] {
            let c = c.as_ref().unwrap();
            assert_eq!(c.n_under + c.n_exact + c.n_over, 10);
            assert!(c.mean >= 0.0 && c.mean <= 3.0);
        }
        let sum: usize = run.outcomes.iter().map(|o| o.k1_hat.unwrap()).sum();
        assert!((run.row.k1_hat.as_ref().unwrap().mean - sum as f64 / 10.0).abs() < 1e-12);
        assert_eq!(run.row.replication_seeds.len(), 10);
        assert_eq!(run.row.replication_seeds[0], mix(17, 1));
    }

    #[test]
    fn row_axis_mode_skips_columns() {
        let mut scenario = small(0, 0, 4);
        scenario.targets = Targets {
            structure: Some(StructureMode::RowAxis),
            row_count: false,
            column_count: false,
            baseline: false,
        };
        let run = run_replications(&scenario, Parallelism::default()).unwrap();
        assert!(run.row.k1_hat.is_none() && run.row.k2_hat.is_none());
        assert!(run.outcomes.iter().all(|o| o.class.is_none()));
        assert!(run.row.structure.is_some());
    }

    #[test]
    fn invalid_scenarios() {
        let mut s = small(1, 1, 0);
        assert!(s.validate().is_err());
        s.replications = 1;
        s.config.k_max = 8;
        assert!(s.validate().is_err());
        s.config.k_max = 2;
        s.targets = Targets { structure: None, row_count: false, column_count: false, baseline: false };
        assert!(s.validate().is_err());
    }

    #[test]
    fn replication_errors_report_the_seed() {
        let mut s = small(1, 1, 2);
        s.config.method = Method::Flattened;
        s.dgp.a = 100.0;
        let err = run_replication(&s, 1).unwrap_err();
        assert!(matches!(err, Error::Replication { seed, .. } if seed == s.replication_seed(1)));
    }
}
