//! Aggregation of replication outcomes into table rows.

use serde::{Deserialize, Serialize};

use super::{ReplicationOutcome, Scenario, StructureMode};
use crate::spectra::Method;

/// Mean estimate with under/exact/over counts against the true value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountSummary {
    pub truth: usize,
    pub mean: f64,
    pub n_under: usize,
    pub n_exact: usize,
    pub n_over: usize,
}

impl CountSummary {
    pub fn from_estimates(truth: usize, estimates: &[usize]) -> Self {
        let total: usize = estimates.iter().sum();
        let count = |f: fn(usize, usize) -> bool| estimates.iter().filter(|&&k| f(k, truth)).count();
        Self {
            truth,
            mean: total as f64 / estimates.len() as f64,
            n_under: count(|k, t| k < t),
            n_exact: count(|k, t| k == t),
            n_over: count(|k, t| k > t),
        }
    }

    pub fn replications(&self) -> usize {
        self.n_under + self.n_exact + self.n_over
    }

    /// `mean(under|over)`, e.g. `0.59(205|0)`.
    pub fn xyz(&self) -> String {
        format!("{}({}|{})", format_number(self.mean), self.n_under, self.n_over)
    }
}

/// Share of replications whose verdict matched the truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProportionSummary {
    pub mode: StructureMode,
    pub n_correct: usize,
    pub proportion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub label: String,
    pub method: Method,
    pub k1: usize,
    pub k2: usize,
    pub p1: usize,
    pub p2: usize,
    #[serde(rename = "T")]
    pub t: usize,
    pub replications: usize,
    pub base_seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub structure: Option<ProportionSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k1_hat: Option<CountSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k2_hat: Option<CountSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline_k1: Option<CountSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline_k2: Option<CountSummary>,
    pub stopped_at_kmax: usize,
    pub replication_seeds: Vec<u64>,
}

impl SummaryRow {
    pub fn aggregate(scenario: &Scenario, outcomes: &[ReplicationOutcome]) -> Self {
        let (t1, t2) = scenario.true_counts();
        let collect = |f: fn(&ReplicationOutcome) -> Option<usize>| -> Option<Vec<usize>> {
            outcomes.iter().map(f).collect()
        };
        let summarize = |truth, values: Option<Vec<usize>>| {
            values
                .filter(|v| !v.is_empty())
                .map(|v| CountSummary::from_estimates(truth, &v))
        };
        let structure = scenario.targets.structure.map(|mode| {
            let n_correct = outcomes
                .iter()
                .filter(|o| o.structure_correct == Some(true))
                .count();
            ProportionSummary {
                mode,
                n_correct,
                proportion: n_correct as f64 / outcomes.len() as f64,
            }
        });
        Self {
            label: scenario.label.clone(),
            method: scenario.config.method,
            k1: scenario.dgp.k1,
            k2: scenario.dgp.k2,
            p1: scenario.dgp.p1,
            p2: scenario.dgp.p2,
            t: scenario.dgp.t,
            replications: outcomes.len(),
            base_seed: scenario.dgp.seed,
            structure,
            k1_hat: summarize(t1, collect(|o| o.k1_hat)),
            k2_hat: summarize(t2, collect(|o| o.k2_hat)),
            baseline_k1: summarize(t1, collect(|o| o.baseline_k1)),
            baseline_k2: summarize(t2, collect(|o| o.baseline_k2)),
            stopped_at_kmax: outcomes.iter().map(|o| o.stopped_at_kmax).sum(),
            replication_seeds: outcomes.iter().map(|o| o.seed).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SummaryTable {
    pub rows: Vec<SummaryRow>,
}

impl SummaryTable {
    /// Plain-text table with proportions and `x(y|z)` cells.
    pub fn to_text(&self) -> String {
        let header = [
            "scenario", "method", "(k1,k2)", "p1", "p2", "T", "R", "proportion", "k1_hat", "k2_hat",
            "ER k1", "ER k2",
        ];
        let dash = || "-".to_string();
        let cell = |c: &Option<CountSummary>| c.as_ref().map_or_else(dash, CountSummary::xyz);
        let body: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.label.clone(),
                    r.method.to_string(),
                    format!("({},{})", r.k1, r.k2),
                    r.p1.to_string(),
                    r.p2.to_string(),
                    r.t.to_string(),
                    r.replications.to_string(),
                    r.structure
                        .as_ref()
                        .map_or_else(dash, |s| format_number(s.proportion)),
                    cell(&r.k1_hat),
                    cell(&r.k2_hat),
                    cell(&r.baseline_k1),
                    cell(&r.baseline_k2),
                ]
            })
            .collect();
        let widths: Vec<usize> = (0..header.len())
            .map(|c| {
                body.iter()
                    .map(|row| row[c].len())
                    .chain([header[c].len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let line = |cells: Vec<&str>| {
            let padded: Vec<String> = cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect();
            padded.join("  ").trim_end().to_string() + "\n"
        };
        let mut out = line(header.to_vec());
        for row in &body {
            out += &line(row.iter().map(String::as_str).collect());
        }
        out
    }
}

/// Up to three decimals with trailing zeros removed.
fn format_number(x: f64) -> String {
    let s = format!("{x:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}
