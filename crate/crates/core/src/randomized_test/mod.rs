//! The randomized test of `H0: k >= k0` on one axis.
//!
//! For a spectrum `lambda_1 >= ... >= lambda_p` the test forms
//!
//! ```text
//! phi = exp{ p^-delta * lambda_k0 / mean(lambda) } - 1
//! ```
//!
//! which diverges when the `k0`-th eigenvalue is spiked and vanishes when it
//! is bounded. Each of `S` rounds draws `M` artificial normals `eta_m`, counts
//! `sqrt(phi) eta_m <= u` at each quadrature node `u` and reduces the counts
//! to `Psi`, which is asymptotically chi-squared(1) under `H0` and of order
//! `M` otherwise. `Q` is the fraction of rounds with `Psi <= c_alpha`, and the
//! strong rule accepts `H0` iff `Q >= (1 - alpha) - f(S)`.
//!
//! Randomness: the test of `(axis, k0)` under `config.seed` uses
//! `test_seed = mix(mix(seed, axis_tag), k0)` (row tag 1, column tag 2) and
//! round `s` draws from `stream(mix(test_seed, s))`, so every axis, step and
//! round is independent and the rounds can run in any order.

mod quadrature;
mod quantile;
mod rule;
mod statistic;

pub use quadrature::Quadrature;
pub use quantile::{chi2_1_cdf, chi2_1_quantile, normal_cdf, normal_quantile};
pub use rule::{strong_rule, Decision, ThresholdRule};
pub use statistic::{
    delta_exponent, fraction_at_most, phi_statistic, psi_statistic, q_fraction, round_seed,
};

use std::sync::atomic::{AtomicBool, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::mix;
use crate::spectra::{second_moment, sym_eigen, Axis, Method, Spectrum};
use crate::tensor_data::MatrixSeries;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestConfig {
    /// Largest factor count probed; also the rank of the initial projection.
    pub k_max: usize,
    pub alpha: f64,
    /// Artificial draws per round.
    #[serde(rename = "M")]
    pub draws: usize,
    /// Randomization rounds.
    #[serde(rename = "S")]
    pub rounds: usize,
    pub epsilon: f64,
    pub threshold_rule: ThresholdRule,
    pub method: Method,
    pub quadrature: Quadrature,
    pub seed: u64,
}

impl Default for TestConfig {
    fn default() -> Self {
        Self {
            k_max: 8,
            alpha: 0.01,
            draws: 300,
            rounds: 300,
            epsilon: 0.05,
            threshold_rule: ThresholdRule::PowerQuarter,
            method: Method::Projected,
            quadrature: Quadrature::default(),
            seed: 0,
        }
    }
}

impl TestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_max == 0 {
            return Err(Error::invalid("k_max must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(format!(
                "alpha = {} must lie in (0, 1)",
                self.alpha
            )));
        }
        if self.draws == 0 {
            return Err(Error::invalid("M (draws per round) must be at least 1"));
        }
        if self.rounds == 0 {
            return Err(Error::invalid("S (rounds) must be at least 1"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(Error::invalid(format!(
                "epsilon = {} must lie in (0, 0.5)",
                self.epsilon
            )));
        }
        self.threshold_rule.slack(self.alpha, self.rounds)?;
        Ok(())
    }

    /// Checks `k_max < min(p1, p2)` for a `p1 x p2` series.
    pub fn check_dims(&self, p1: usize, p2: usize) -> Result<()> {
        let limit = p1.min(p2);
        if self.k_max >= limit {
            return Err(Error::invalid(format!(
                "k_max = {} must be below min(p1, p2) = {limit}",
                self.k_max
            )));
        }
        Ok(())
    }

    /// Seed of the test of `H0: k >= k0` on `axis`.
    pub fn test_seed(&self, axis: Axis, k0: usize) -> u64 {
        mix(mix(self.seed, axis.stream_tag()), k0 as u64)
    }
}

/// Outcome of one test of `H0: k >= k0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub axis: Axis,
    pub k0: usize,
    pub delta: f64,
    pub phi: f64,
    pub psi_values: Vec<f64>,
    pub q: f64,
    pub c_alpha: f64,
    pub threshold: f64,
    pub decision: Decision,
}

/// The spectrum tested on one axis, with the geometry needed for `delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisSpectrum {
    pub axis: Axis,
    pub spectrum: Spectrum,
    /// Dimension of the tested axis.
    pub p: usize,
    /// Dimension of the opposite axis.
    pub q: usize,
    pub t: usize,
}

impl AxisSpectrum {
    /// Second-moment spectrum of `series` on `axis` per `method`; the
    /// projected variant uses `k_init` initial loadings.
    pub fn from_series(
        series: &MatrixSeries,
        axis: Axis,
        method: Method,
        k_init: usize,
    ) -> Result<Self> {
        let moment = second_moment(series, axis, method, k_init)?;
        let spectrum = sym_eigen(&moment, false)?;
        Ok(Self {
            axis,
            spectrum,
            p: axis.dim(series),
            q: axis.opposite().dim(series),
            t: series.t_len(),
        })
    }

    /// A spectrum supplied directly, tested as if it came from a series with
    /// opposite dimension `q` and `t` time points.
    pub fn injected(axis: Axis, spectrum: Spectrum, q: usize, t: usize) -> Self {
        Self {
            axis,
            p: spectrum.len(),
            spectrum,
            q,
            t,
        }
    }
}

static RESTRICTION_WARNED: AtomicBool = AtomicBool::new(false);

/// Runs the test of `H0: k >= k0` against a precomputed spectrum.
pub fn test_spectrum(target: &AxisSpectrum, k0: usize, config: &TestConfig) -> Result<DecisionRecord> {
    config.validate()?;
    if k0 == 0 || k0 > config.k_max {
        return Err(Error::invalid(format!(
            "k0 = {k0} must lie in 1..=k_max = {}",
            config.k_max
        )));
    }
    let delta = delta_exponent(target.p, target.q, target.t, config.epsilon)?;
    let restriction = config.draws as f64 * (-(target.p as f64).powf(1.0 - delta)).exp();
    if restriction > 0.01 && !RESTRICTION_WARNED.swap(true, Ordering::Relaxed) {
        log::warn!(
            "M = {} is large for p = {} (M exp(-p^(1-delta)) = {restriction:.3}); Psi may not be close to chi-squared (reported once)",
            config.draws,
            target.p
        );
    }
    let phi = phi_statistic(&target.spectrum, k0, delta, target.p)?;
    let c_alpha = chi2_1_quantile(config.alpha)?;
    let (q, psi_values) = q_fraction(
        phi,
        config.draws,
        config.rounds,
        &config.quadrature,
        c_alpha,
        config.test_seed(target.axis, k0),
    );
    let threshold = config.threshold_rule.threshold(config.alpha, config.rounds)?;
    let decision = strong_rule(q, config.alpha, config.rounds, config.threshold_rule)?;
    Ok(DecisionRecord {
        axis: target.axis,
        k0,
        delta,
        phi,
        psi_values,
        q,
        c_alpha,
        threshold,
        decision,
    })
}

/// Tests `H0: k >= k0` on `axis` of `series` (`k1` for rows, `k2` for
/// columns).
pub fn test_hypothesis(
    series: &MatrixSeries,
    axis: Axis,
    k0: usize,
    config: &TestConfig,
) -> Result<DecisionRecord> {
    config.validate()?;
    config.check_dims(series.p1(), series.p2())?;
    if k0 == 0 || k0 > config.k_max {
        return Err(Error::invalid(format!(
            "k0 = {k0} must lie in 1..=k_max = {}",
            config.k_max
        )));
    }
    let target = AxisSpectrum::from_series(series, axis, config.method, config.k_max)?;
    test_spectrum(&target, k0, config)
}
