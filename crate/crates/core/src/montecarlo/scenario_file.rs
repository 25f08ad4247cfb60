//! `key=value` scenario files.
//!
//! One key per line; `#` starts a comment; a line consisting of `---` starts
//! the next scenario. Keys are the field names of the generator (`p1`, `p2`,
//! `T`, `k1`, `k2`, `phi`, `psi`, `a`, `seed`, `burn_in`), of the test
//! configuration (`k_max`, `alpha`, `M`, `S`, `epsilon`, `threshold_rule`,
//! `method`, `quadrature`) and of the scenario itself (`label`,
//! `replications`, `structure` = `joint` | `row-axis` | `none`, `row_count`,
//! `column_count`, `baseline`). Unset keys keep their defaults.

use std::path::Path;
use std::str::FromStr;

use super::{Scenario, StructureMode, Targets};
use crate::error::{Error, Result};
use crate::randomized_test::{Quadrature, TestConfig};
use crate::tensor_data::DgpSpec;

const KEYS: [&str; 22] = [
    "label", "replications", "structure", "row_count", "column_count", "baseline", "p1", "p2",
    "T", "k1", "k2", "phi", "psi", "a", "seed", "burn_in", "k_max", "alpha", "M", "S", "epsilon",
    "threshold_rule",
];
const MORE_KEYS: [&str; 2] = ["method", "quadrature"];

fn blank(label: String) -> Scenario {
    Scenario {
        label,
        dgp: DgpSpec::default(),
        config: TestConfig::default(),
        replications: 100,
        targets: Targets::default(),
    }
}

fn value<T: FromStr>(line: u64, key: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::parse(Some(line), format!("bad value `{raw}` for `{key}`")))
}

fn apply(s: &mut Scenario, line: u64, key: &str, raw: &str) -> Result<()> {
    let at = |e: Error| Error::parse(Some(line), e.to_string());
    match key {
        "label" => s.label = raw.to_string(),
        "replications" => s.replications = value(line, key, raw)?,
        "structure" => {
            s.targets.structure = match raw {
                "none" => None,
                other => Some(other.parse::<StructureMode>().map_err(at)?),
            }
        }
        "row_count" => s.targets.row_count = value(line, key, raw)?,
        "column_count" => s.targets.column_count = value(line, key, raw)?,
        "baseline" => s.targets.baseline = value(line, key, raw)?,
        "p1" => s.dgp.p1 = value(line, key, raw)?,
        "p2" => s.dgp.p2 = value(line, key, raw)?,
        "T" => s.dgp.t = value(line, key, raw)?,
        "k1" => s.dgp.k1 = value(line, key, raw)?,
        "k2" => s.dgp.k2 = value(line, key, raw)?,
        "phi" => s.dgp.phi = value(line, key, raw)?,
        "psi" => s.dgp.psi = value(line, key, raw)?,
        "a" => s.dgp.a = value(line, key, raw)?,
        "seed" => s.dgp.seed = value(line, key, raw)?,
        "burn_in" => s.dgp.burn_in = value(line, key, raw)?,
        "k_max" => s.config.k_max = value(line, key, raw)?,
        "alpha" => s.config.alpha = value(line, key, raw)?,
        "M" => s.config.draws = value(line, key, raw)?,
        "S" => s.config.rounds = value(line, key, raw)?,
        "epsilon" => s.config.epsilon = value(line, key, raw)?,
        "threshold_rule" => s.config.threshold_rule = raw.parse().map_err(at)?,
        "method" => s.config.method = raw.parse().map_err(at)?,
        "quadrature" => s.config.quadrature = Quadrature::parse(raw).map_err(at)?,
        other => {
            let known: Vec<&str> = KEYS.iter().chain(&MORE_KEYS).copied().collect();
            return Err(Error::parse(
                Some(line),
                format!("unknown key `{other}` (known keys: {})", known.join(", ")),
            ));
        }
    }
    Ok(())
}

/// Parses one or more scenarios separated by `---` lines.
pub fn parse_scenarios(text: &str) -> Result<Vec<Scenario>> {
    let mut scenarios = Vec::new();
    let mut current: Option<Scenario> = None;
    for (n, raw) in text.lines().enumerate() {
        let line = n as u64 + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if content == "---" {
            scenarios.extend(current.take());
            continue;
        }
        let (key, val) = content
            .split_once('=')
            .ok_or_else(|| Error::parse(Some(line), format!("expected key=value, got `{content}`")))?;
        let scenario =
            current.get_or_insert_with(|| blank(format!("scenario {}", scenarios.len() + 1)));
        apply(scenario, line, key.trim(), val.trim())?;
    }
    scenarios.extend(current);
    if scenarios.is_empty() {
        return Err(Error::parse(None, "scenario file defines no scenario"));
    }
    for s in &scenarios {
        s.validate()?;
    }
    Ok(scenarios)
}

pub fn load_scenarios(path: impl AsRef<Path>) -> Result<Vec<Scenario>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenarios(&text)
}
