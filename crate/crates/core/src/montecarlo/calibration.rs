//! Null calibration: how close is `Psi` at a fixed large `phi` to chi-squared(1)?

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::randomized_test::{chi2_1_cdf, chi2_1_quantile, psi_statistic, round_seed, TestConfig};
use crate::rng::{mix, stream};

const CALIBRATION_TAG: u64 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub phi: f64,
    #[serde(rename = "M")]
    pub draws: usize,
    pub n_outer: usize,
    pub alpha: f64,
    pub c_alpha: f64,
    /// Kolmogorov-Smirnov distance between the empirical `Psi` distribution
    /// and the chi-squared(1) CDF.
    pub ks_distance: f64,
    /// Share of `Psi > c_alpha`.
    pub rejection_rate: f64,
    pub mean_psi: f64,
}

/// Draws `n_outer` independent `Psi` values at `phi` using the draws,
/// quadrature, level and seed of `config`.
pub fn calibration_experiment(phi: f64, config: &TestConfig, n_outer: usize) -> Result<CalibrationReport> {
    config.validate()?;
    if n_outer == 0 || !(phi >= 0.0) {
        return Err(Error::invalid(format!(
            "calibration needs n_outer >= 1 and phi >= 0 (got {n_outer}, {phi})"
        )));
    }
    let base = mix(config.seed, CALIBRATION_TAG);
    let mut psi: Vec<f64> = (0..n_outer)
        .into_par_iter()
        .map(|i| psi_statistic(phi, config.draws, &config.quadrature, &mut stream(round_seed(base, i))))
        .collect();
    let c_alpha = chi2_1_quantile(config.alpha)?;
    let n = n_outer as f64;
    let rejection_rate = psi.iter().filter(|&&v| v > c_alpha).count() as f64 / n;
    let mean_psi = psi.iter().sum::<f64>() / n;
    psi.sort_by(f64::total_cmp);
    let ks_distance = ks_distance(&psi, chi2_1_cdf);
    Ok(CalibrationReport {
        phi,
        draws: config.draws,
        n_outer,
        alpha: config.alpha,
        c_alpha,
        ks_distance,
        rejection_rate,
        mean_psi,
    })
}

/// `sup_x |F_n(x) - F(x)|` for sorted `sample`.
fn ks_distance(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sample.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < sample.len() {
        // Step over ties so the empirical CDF jumps once per distinct value.
        let x = sample[i];
        let mut j = i;
        while j < sample.len() && sample[j] == x {
            j += 1;
        }
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max(j as f64 / n - f);
        i = j;
    }
    d
}
