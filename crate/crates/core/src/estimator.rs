//! Sequential estimation of the factor counts and the structure classifier.
//!
//! For one axis the procedure tests `H0: k >= 1`, then `k >= 2`, and so on,
//! stopping at the first rejection: a rejection at `j` gives `k_hat = j - 1`.
//! If every hypothesis up to `k_max` is accepted the estimate is `k_max` and
//! the result is flagged `stopped_at_kmax`. The spectrum is computed once per
//! axis; only the artificial randomness changes between steps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::randomized_test::{test_spectrum, AxisSpectrum, Decision, DecisionRecord, TestConfig};
use crate::spectra::{Axis, Spectrum};
use crate::tensor_data::MatrixSeries;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub axis: Axis,
    pub k_hat: usize,
    /// Decisions for `k0 = 1, 2, ...` in order.
    pub trail: Vec<DecisionRecord>,
    pub stopped_at_kmax: bool,
}

/// Four-way classification of `(k1_hat, k2_hat)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StructureClass {
    TwoWay,
    RowOnly,
    ColumnOnly,
    NoFactors,
}

impl StructureClass {
    pub fn from_counts(k1: usize, k2: usize) -> Self {
        match (k1 > 0, k2 > 0) {
            (true, true) => StructureClass::TwoWay,
            (true, false) => StructureClass::RowOnly,
            (false, true) => StructureClass::ColumnOnly,
            (false, false) => StructureClass::NoFactors,
        }
    }
}

impl std::fmt::Display for StructureClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StructureClass::TwoWay => "two-way",
            StructureClass::RowOnly => "row-only",
            StructureClass::ColumnOnly => "column-only",
            StructureClass::NoFactors => "no-factors",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureVerdict {
    pub k1_hat: usize,
    pub k2_hat: usize,
    pub class: StructureClass,
    pub row: EstimationResult,
    pub column: EstimationResult,
}

/// Runs the sequential procedure on `axis` of `series`.
pub fn sequential_estimate(
    series: &MatrixSeries,
    axis: Axis,
    config: &TestConfig,
) -> Result<EstimationResult> {
    config.validate()?;
    config.check_dims(series.p1(), series.p2())?;
    let target = AxisSpectrum::from_series(series, axis, config.method, config.k_max)?;
    sequential_estimate_spectrum(&target, config)
}

/// Runs the sequential procedure against a precomputed spectrum.
pub fn sequential_estimate_spectrum(
    target: &AxisSpectrum,
    config: &TestConfig,
) -> Result<EstimationResult> {
    if config.k_max >= target.p {
        return Err(Error::invalid(format!(
            "k_max = {} must be below the axis dimension {}",
            config.k_max, target.p
        )));
    }
    let mut trail = Vec::new();
    for k0 in 1..=config.k_max {
        let record = test_spectrum(target, k0, config)?;
        let rejected = record.decision == Decision::RejectH0;
        trail.push(record);
        if rejected {
            return Ok(EstimationResult {
                axis: target.axis,
                k_hat: k0 - 1,
                trail,
                stopped_at_kmax: false,
            });
        }
    }
    Ok(EstimationResult {
        axis: target.axis,
        k_hat: config.k_max,
        trail,
        stopped_at_kmax: true,
    })
}

/// Estimates `k1` and `k2` (concurrently) and classifies the structure.
pub fn estimate_structure(series: &MatrixSeries, config: &TestConfig) -> Result<StructureVerdict> {
    config.validate()?;
    config.check_dims(series.p1(), series.p2())?;
    let (row, column) = rayon::join(
        || sequential_estimate(series, Axis::Row, config),
        || sequential_estimate(series, Axis::Column, config),
    );
    let (row, column) = (row?, column?);
    Ok(StructureVerdict {
        k1_hat: row.k_hat,
        k2_hat: column.k_hat,
        class: StructureClass::from_counts(row.k_hat, column.k_hat),
        row,
        column,
    })
}

/// Eigenvalue-ratio baseline: `argmax_{0 <= j <= k_max} lambda_j / lambda_{j+1}`
/// with the mock eigenvalue `lambda_0 = sum(lambda) / ln n`.
///
/// Ties go to the smallest `j`. Negative eigenvalues count as zero; a ratio
/// with a zero denominator is infinite unless the numerator is zero too.
pub fn eigenvalue_ratio_estimate(spectrum: &Spectrum, k_max: usize) -> Result<usize> {
    let n = spectrum.len();
    if n < 2 || k_max >= n {
        return Err(Error::invalid(format!(
            "eigenvalue ratio needs k_max < n and n >= 2 (k_max = {k_max}, n = {n})"
        )));
    }
    let lambda: Vec<f64> = spectrum.eigenvalues.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = lambda.iter().sum();
    if !(total > 0.0) {
        return Err(Error::DegenerateSpectrum(
            "all eigenvalues are zero".to_string(),
        ));
    }
    let mock = total / (n as f64).ln();
    let value = |j: usize| if j == 0 { mock } else { lambda[j - 1] };
    let ratio = |j: usize| {
        let (num, den) = (value(j), value(j + 1));
        if den > 0.0 {
            num / den
        } else if num > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    };
    let mut best = 0;
    let mut best_ratio = ratio(0);
    for j in 1..=k_max {
        let r = ratio(j);
        if r > best_ratio {
            best = j;
            best_ratio = r;
        }
    }
    Ok(best)
}
