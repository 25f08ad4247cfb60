//! Built-in scenario grids.

use super::{Scenario, StructureMode, Targets};
use crate::error::{Error, Result};
use crate::randomized_test::TestConfig;
use crate::rng::mix;
use crate::spectra::Method;
use crate::tensor_data::DgpSpec;

/// Preset names with a one-line description.
pub const PRESETS: [(&str, &str); 4] = [
    ("table1-desk", "structure detection, (0,0), (1,1), (1,3) x both methods, 60x15, T=60, R=100"),
    ("table2-desk", "k1 estimation, (1,1), (1,3), (3,1), (3,3) x both methods, 60x15, T=60, R=100"),
    ("table1", "structure detection at 100x15, T=100, R=500"),
    ("table2", "k1 estimation at 100x15, T=100, R=500"),
];

struct Grid {
    p1: usize,
    t: usize,
    replications: usize,
}

const DESK: Grid = Grid { p1: 60, t: 60, replications: 100 };
const FULL: Grid = Grid { p1: 100, t: 100, replications: 500 };

/// Scenarios of preset `name`. Both methods of a `(k1, k2)` design share the
/// base seed `mix(base_seed, design)`, so they see the same data.
pub fn preset(name: &str, base_seed: u64) -> Result<Vec<Scenario>> {
    let (grid, designs, targets): (Grid, &[(usize, usize)], Targets) = match name {
        "table1-desk" | "table1" => (
            if name == "table1" { FULL } else { DESK },
            &[(0, 0), (1, 1), (1, 3)],
            Targets {
                structure: Some(StructureMode::RowAxis),
                row_count: false,
                column_count: false,
                baseline: false,
            },
        ),
        "table2-desk" | "table2" => (
            if name == "table2" { FULL } else { DESK },
            &[(1, 1), (1, 3), (3, 1), (3, 3)],
            Targets {
                structure: None,
                row_count: true,
                column_count: false,
                baseline: true,
            },
        ),
        other => {
            let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
            return Err(Error::invalid(format!(
                "unknown preset `{other}`; available presets: {}",
                names.join(", ")
            )));
        }
    };
    let mut scenarios = Vec::new();
    for (design, &(k1, k2)) in designs.iter().enumerate() {
        for method in [Method::Flattened, Method::Projected] {
            let stp = match method {
                Method::Flattened => "STP1",
                Method::Projected => "STP2",
            };
            scenarios.push(Scenario {
                label: format!("({k1},{k2}) {stp}"),
                dgp: DgpSpec {
                    p1: grid.p1,
                    p2: 15,
                    t: grid.t,
                    k1,
                    k2,
                    phi: 0.1,
                    psi: 0.1,
                    seed: mix(base_seed, design as u64),
                    ..DgpSpec::default()
                },
                config: TestConfig {
                    k_max: 8,
                    alpha: 0.01,
                    draws: 300,
                    rounds: 300,
                    method,
                    ..TestConfig::default()
                },
                replications: grid.replications,
                targets,
            });
        }
    }
    Ok(scenarios)
}
