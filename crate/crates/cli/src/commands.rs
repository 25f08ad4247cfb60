use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;

use matseq::estimator::{estimate_structure, EstimationResult, StructureClass};
use matseq::montecarlo::{
    calibration_experiment, load_scenarios, preset, run_scenarios, Parallelism, Scenario,
    StructureMode, SummaryTable,
};
use matseq::randomized_test::{test_hypothesis, Decision, Quadrature};
use matseq::tensor_data::{load_series, save_series, write_series};
use matseq::{simulate, Axis, Error, MatrixSeries, Result, TestConfig};

use crate::args::{
    BenchArgs, CalibrateArgs, Command, EstimateArgs, SimulateArgs, TestArgs,
};

/// What a command printed to stdout, plus the files it wrote.
pub struct Output {
    pub stdout: Vec<u8>,
    pub stderr: Vec<u8>,
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(io_error(path))
}

fn json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("report types serialize");
    out.push(b'\n');
    out
}

pub fn execute(command: &Command, threads: usize) -> Result<Output> {
    match command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Estimate(args) => cmd_estimate(args),
        Command::Test(args) => cmd_test(args),
        Command::Bench(args) => cmd_bench(args, threads),
        Command::Calibrate(args) => cmd_calibrate(args),
        Command::Rerun(_) => unreachable!("rerun is resolved before execution"),
    }
}

fn cmd_simulate(args: &SimulateArgs) -> Result<Output> {
    let series = simulate(&args.dgp.to_spec())?;
    let mut stdout = Vec::new();
    match &args.out {
        Some(path) => save_series(&series, path)?,
        None => write_series(&series, &mut stdout)?,
    }
    Ok(Output {
        stdout,
        stderr: Vec::new(),
    })
}

fn load(input: &Path, standardize: bool) -> Result<MatrixSeries> {
    let series = load_series(input)?;
    if standardize {
        series.standardize()
    } else {
        Ok(series)
    }
}

#[derive(Serialize)]
struct Step {
    k0: usize,
    phi: f64,
    q: f64,
    threshold: f64,
    decision: Decision,
}

#[derive(Serialize)]
struct AxisTrace {
    axis: Axis,
    k_hat: usize,
    stopped_at_kmax: bool,
    steps: Vec<Step>,
}

impl From<&EstimationResult> for AxisTrace {
    fn from(r: &EstimationResult) -> Self {
        Self {
            axis: r.axis,
            k_hat: r.k_hat,
            stopped_at_kmax: r.stopped_at_kmax,
            steps: r
                .trail
                .iter()
                .map(|d| Step {
                    k0: d.k0,
                    phi: d.phi,
                    q: d.q,
                    threshold: d.threshold,
                    decision: d.decision,
                })
                .collect(),
        }
    }
}

#[derive(Serialize)]
struct EstimateReport {
    k1_hat: usize,
    k2_hat: usize,
    class: StructureClass,
    row: AxisTrace,
    column: AxisTrace,
}

fn cmd_estimate(args: &EstimateArgs) -> Result<Output> {
    let config = args.config.to_config()?;
    let series = load(&args.input, args.standardize)?;
    let verdict = estimate_structure(&series, &config)?;
    let stdout = if args.full {
        json(&verdict)
    } else {
        json(&EstimateReport {
            k1_hat: verdict.k1_hat,
            k2_hat: verdict.k2_hat,
            class: verdict.class,
            row: (&verdict.row).into(),
            column: (&verdict.column).into(),
        })
    };
    Ok(Output {
        stdout,
        stderr: Vec::new(),
    })
}

fn cmd_test(args: &TestArgs) -> Result<Output> {
    let config = args.config.to_config()?;
    if args.k0 == 0 || args.k0 > config.k_max {
        return Err(Error::InvalidArgument(format!(
            "--k0 {} must lie in 1..=--kmax {}",
            args.k0, config.k_max
        )));
    }
    let series = load(&args.input, args.standardize)?;
    let record = test_hypothesis(&series, args.axis, args.k0, &config)?;
    Ok(Output {
        stdout: json(&record),
        stderr: Vec::new(),
    })
}

#[derive(Serialize)]
struct BenchReport<'a> {
    source: String,
    scenarios: &'a [Scenario],
    table: &'a SummaryTable,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_clock_seconds: Option<Vec<f64>>,
}

fn bench_scenarios(args: &BenchArgs) -> Result<(String, Vec<Scenario>)> {
    let (source, mut scenarios) = match (&args.preset, &args.scenario) {
        (Some(name), _) => {
            let full_name = match args.scale.as_deref() {
                None => name.clone(),
                Some("full") => name.trim_end_matches("-desk").to_string(),
                Some("desk") if name.ends_with("-desk") => name.clone(),
                Some("desk") => format!("{name}-desk"),
                Some(other) => {
                    return Err(Error::InvalidArgument(format!(
                        "unknown scale `{other}` (expected desk or full)"
                    )))
                }
            };
            let scenarios = preset(&full_name, args.seed.unwrap_or(0))?;
            (format!("preset:{full_name}"), scenarios)
        }
        (None, Some(path)) => {
            let mut scenarios = load_scenarios(path)?;
            if let Some(seed) = args.seed {
                for s in &mut scenarios {
                    s.dgp.seed = seed;
                }
            }
            (format!("file:{}", path.display()), scenarios)
        }
        (None, None) => {
            return Err(Error::InvalidArgument(
                "bench needs --preset or --scenario".to_string(),
            ))
        }
    };
    for s in &mut scenarios {
        if let Some(r) = args.replications {
            s.replications = r;
        }
        if let Some(mode) = &args.structure {
            s.targets.structure = match mode.as_str() {
                "none" => None,
                other => Some(other.parse::<StructureMode>()?),
            };
        }
        s.validate()?;
    }
    Ok((source, scenarios))
}

fn cmd_bench(args: &BenchArgs, threads: usize) -> Result<Output> {
    let (source, scenarios) = bench_scenarios(args)?;
    let parallelism = Parallelism {
        threads,
        ..Parallelism::default()
    };
    let (table, times) = run_scenarios(&scenarios, parallelism)?;
    let report = BenchReport {
        source,
        scenarios: &scenarios,
        table: &table,
        wall_clock_seconds: args
            .timing
            .then(|| times.iter().map(Duration::as_secs_f64).collect()),
    };
    let text = table.to_text();
    let stderr = match &args.table {
        Some(path) => {
            write_file(path, text.as_bytes())?;
            Vec::new()
        }
        None => text.into_bytes(),
    };
    Ok(Output {
        stdout: json(&report),
        stderr,
    })
}

fn cmd_calibrate(args: &CalibrateArgs) -> Result<Output> {
    let config = TestConfig {
        draws: args.draws,
        alpha: args.alpha,
        quadrature: Quadrature::parse(&args.quadrature)?,
        seed: args.seed,
        ..TestConfig::default()
    };
    let report = calibration_experiment(args.phi, &config, args.n_outer)?;
    Ok(Output {
        stdout: json(&report),
        stderr: Vec::new(),
    })
}

#[derive(Debug, Serialize, serde::Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub threads: usize,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub seed: Option<u64>,
    pub wall_clock_seconds: f64,
}

impl Manifest {
    pub fn new(command: Command, threads: usize, elapsed: Duration) -> Self {
        let (inputs, outputs, seed) = match &command {
            Command::Simulate(a) => (vec![], a.out.iter().cloned().collect(), Some(a.dgp.seed)),
            Command::Estimate(a) => (vec![a.input.clone()], vec![], Some(a.config.seed)),
            Command::Test(a) => (vec![a.input.clone()], vec![], Some(a.config.seed)),
            Command::Bench(a) => (
                a.scenario.iter().cloned().collect(),
                a.table.iter().cloned().collect(),
                a.seed,
            ),
            Command::Calibrate(a) => (vec![], vec![], Some(a.seed)),
            Command::Rerun(a) => (vec![a.path.clone()], vec![], None),
        };
        Self {
            tool: "matseq".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command,
            threads,
            inputs,
            outputs,
            seed,
            wall_clock_seconds: elapsed.as_secs_f64(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_error(path))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Parse {
                line: Some(e.line() as u64),
                message: format!("bad manifest {}: {e}", path.display()),
            })
    }

    pub fn emit(&self, path: Option<&Path>) -> Result<()> {
        match path {
            Some(path) => write_file(path, &json(self)),
            None => {
                let line = serde_json::to_string(self).expect("manifest serializes");
                writeln!(std::io::stderr(), "manifest: {line}").map_err(io_error(Path::new("<stderr>")))
            }
        }
    }
}
