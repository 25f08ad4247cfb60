use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use super::MatrixSeries;
use crate::error::{Error, Result};
use crate::rng::{stream, StreamRng};

const CHOLESKY_PIVOT_TOL: f64 = 1e-12;

/// Simulation scenario for `X_t = R F_t C' + E_t` with AR(1) factors and
/// AR(1) matrix-normal noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DgpSpec {
    pub p1: usize,
    pub p2: usize,
    #[serde(rename = "T")]
    pub t: usize,
    pub k1: usize,
    pub k2: usize,
    /// AR coefficient of the factors.
    pub phi: f64,
    /// AR coefficient of the noise.
    pub psi: f64,
    /// Cross-sectional dependence: off-diagonals of `U_E` and `V_E` are
    /// `a / p1` and `a / p2`.
    pub a: f64,
    pub seed: u64,
    pub burn_in: usize,
}

impl Default for DgpSpec {
    fn default() -> Self {
        Self {
            p1: 100,
            p2: 15,
            t: 100,
            k1: 1,
            k2: 1,
            phi: 0.1,
            psi: 0.1,
            a: 0.0,
            seed: 0,
            burn_in: 100,
        }
    }
}

impl DgpSpec {
    pub fn validate(&self) -> Result<()> {
        if self.p1 == 0 || self.p2 == 0 || self.t == 0 {
            return Err(Error::invalid("p1, p2 and T must all be at least 1"));
        }
        for (name, v) in [("phi", self.phi), ("psi", self.psi)] {
            if !v.is_finite() || v * v >= 1.0 {
                return Err(Error::invalid(format!(
                    "{name} = {v} violates stationarity ({name}^2 < 1)"
                )));
            }
        }
        if !self.a.is_finite() || self.a < 0.0 {
            return Err(Error::invalid(format!("a = {} must be >= 0", self.a)));
        }
        Ok(())
    }

    /// Whether the common component `R F_t C'` is generated.
    pub fn has_factors(&self) -> bool {
        self.k1 > 0 && self.k2 > 0
    }

    /// Row covariance `U_E` of the matrix-normal innovations.
    pub fn noise_row_covariance(&self) -> DMatrix<f64> {
        equicorrelation(self.p1, self.a / self.p1 as f64)
    }

    /// Column covariance `V_E` of the matrix-normal innovations.
    pub fn noise_column_covariance(&self) -> DMatrix<f64> {
        equicorrelation(self.p2, self.a / self.p2 as f64)
    }
}

/// Row and column loadings `R` (`p1 x k1`) and `C` (`p2 x k2`).
#[derive(Debug, Clone, PartialEq)]
pub struct LoadingPair {
    pub row: DMatrix<f64>,
    pub column: DMatrix<f64>,
}

fn equicorrelation(n: usize, off: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { off })
}

/// Lower-triangular Cholesky factor; pivots below `CHOLESKY_PIVOT_TOL` are
/// rejected.
fn cholesky(a: &DMatrix<f64>, name: &'static str) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let mut l = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > CHOLESKY_PIVOT_TOL) {
            return Err(Error::NotPositiveDefinite {
                matrix: name,
                index: j,
                pivot: d,
            });
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

fn normal_matrix(rng: &mut StreamRng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

struct NoiseSampler {
    row_factor: DMatrix<f64>,
    column_factor_t: DMatrix<f64>,
}

impl NoiseSampler {
    fn new(spec: &DgpSpec) -> Result<Self> {
        let row_factor = cholesky(&spec.noise_row_covariance(), "U_E")?;
        let column_factor = cholesky(&spec.noise_column_covariance(), "V_E")?;
        Ok(Self {
            row_factor,
            column_factor_t: column_factor.transpose(),
        })
    }

    /// One draw of `L_U Z L_V'`, i.e. `Vec(U) ~ N(0, V_E (x) U_E)`.
    fn sample(&self, rng: &mut StreamRng) -> DMatrix<f64> {
        let z = normal_matrix(rng, self.row_factor.nrows(), self.column_factor_t.nrows());
        &self.row_factor * z * &self.column_factor_t
    }
}

/// Generates `T` frames. Deterministic in `spec` (including its seed).
pub fn simulate(spec: &DgpSpec) -> Result<MatrixSeries> {
    simulate_with_loadings(spec).map(|(series, _)| series)
}

/// Same as [`simulate`], also returning the loadings that were drawn (if any).
///
/// Both AR chains start at their stationary marginal, which equals the
/// innovation distribution because the innovations are scaled by
/// `sqrt(1 - coef^2)`, and are then advanced `burn_in` steps before the first
/// recorded frame.
pub fn simulate_with_loadings(spec: &DgpSpec) -> Result<(MatrixSeries, Option<LoadingPair>)> {
    spec.validate()?;
    let noise = NoiseSampler::new(spec)?;
    let mut rng = stream(spec.seed);

    let loadings = spec.has_factors().then(|| {
        let unif = Uniform::new(-1.0, 1.0).expect("valid bounds");
        LoadingPair {
            row: DMatrix::from_fn(spec.p1, spec.k1, |_, _| rng.sample(unif)),
            column: DMatrix::from_fn(spec.p2, spec.k2, |_, _| rng.sample(unif)),
        }
    });

    let factor_scale = (1.0 - spec.phi * spec.phi).sqrt();
    let noise_scale = (1.0 - spec.psi * spec.psi).sqrt();
    let mut factor = loadings
        .as_ref()
        .map(|_| normal_matrix(&mut rng, spec.k1, spec.k2));
    let mut error = noise.sample(&mut rng);

    let column_t = loadings.as_ref().map(|l| l.column.transpose());
    let mut frames = Vec::with_capacity(spec.t);
    for step in 1..=(spec.burn_in + spec.t) {
        if let Some(f) = factor.as_mut() {
            let innovation = normal_matrix(&mut rng, spec.k1, spec.k2);
            *f = &*f * spec.phi + innovation * factor_scale;
        }
        error = &error * spec.psi + noise.sample(&mut rng) * noise_scale;
        if step > spec.burn_in {
            let frame = match (&loadings, &factor, &column_t) {
                (Some(l), Some(f), Some(ct)) => &l.row * f * ct + &error,
                _ => error.clone(),
            };
            frames.push(frame);
        }
    }
    Ok((MatrixSeries::new(frames)?, loadings))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> DgpSpec {
        DgpSpec {
            p1: 4,
            p2: 3,
            t: 5,
            k1: 1,
            k2: 1,
            phi: 0.1,
            psi: 0.1,
            a: 0.0,
            seed: 7,
            burn_in: 100,
        }
    }

    fn lag1_autocorrelation(x: &[f64]) -> f64 {
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let var: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
        let cov: f64 = x.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum();
        cov / var
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let a = simulate(&spec()).unwrap();
        let b = simulate(&spec()).unwrap();
        assert_eq!(a, b);
        let c = simulate(&DgpSpec { seed: 8, ..spec() }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_non_stationary_coefficients() {
        assert!(simulate(&DgpSpec { phi: 1.0, ..spec() }).is_err());
        assert!(simulate(&DgpSpec { psi: -1.0, ..spec() }).is_err());
    }

    #[test]
    fn noise_covariances_use_a_over_p() {
        let s = DgpSpec { a: 0.5, p1: 4, ..spec() };
        let u = s.noise_row_covariance();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.125 };
                assert_eq!(u[(i, j)], want);
            }
        }
        let v = s.noise_column_covariance();
        assert!((v[(0, 1)] - 0.5 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_indefinite_noise_covariance() {
        // Equicorrelation with off-diagonal rho is PD iff rho > -1/(n-1) and
        // rho < 1; a/p2 >= 1 breaks it.
        let s = DgpSpec { a: 3.0, p2: 3, ..spec() };
        let err = simulate(&s).unwrap_err();
        assert!(err.to_string().contains("V_E"), "{err}");
    }

    #[test]
    fn cholesky_reconstructs() {
        let a = DgpSpec { a: 2.0, p1: 5, ..spec() }.noise_row_covariance();
        let l = cholesky(&a, "U_E").unwrap();
        assert!((&l * l.transpose() - &a).norm() < 1e-14);
    }

    #[test]
    fn pure_noise_has_unit_variance() {
        // U_E = V_E = I, phi = psi = 0: iid standard normal cells.
        let s = DgpSpec {
            p1: 2,
            p2: 2,
            t: 20_000,
            k1: 0,
            k2: 0,
            phi: 0.0,
            psi: 0.0,
            a: 0.0,
            seed: 11,
            burn_in: 0,
        };
        let series = simulate(&s).unwrap();
        let n = series.t_len() as f64;
        for i in 0..2 {
            for j in 0..2 {
                let x: Vec<f64> = series.frames().iter().map(|f| f[(i, j)]).collect();
                let var = x.iter().map(|v| v * v).sum::<f64>() / n;
                // sd of the sample second moment of N(0,1) is sqrt(2/n).
                assert!((var - 1.0).abs() < 4.0 * (2.0 / n).sqrt(), "var {var}");
                assert!(lag1_autocorrelation(&x).abs() < 4.0 / n.sqrt());
            }
        }
    }

    #[test]
    fn noise_autocorrelation_matches_psi() {
        let s = DgpSpec {
            p1: 2,
            p2: 2,
            t: 100_000,
            k1: 0,
            k2: 0,
            phi: 0.0,
            psi: 0.4,
            a: 0.0,
            seed: 5,
            burn_in: 100,
        };
        let series = simulate(&s).unwrap();
        let x: Vec<f64> = series.frames().iter().map(|f| f[(1, 0)]).collect();
        let r = lag1_autocorrelation(&x);
        assert!((r - 0.4).abs() < 4.0 / (x.len() as f64).sqrt(), "r {r}");
    }

    #[test]
    fn factor_variance_is_stationary() {
        // With R = C = 1 (p1 = p2 = 1, k = 1) the frames are F_t + E_t; recover
        // F_t's variance from X_t - E_t by regenerating without factors.
        let base = DgpSpec {
            p1: 1,
            p2: 1,
            t: 100_000,
            k1: 1,
            k2: 1,
            phi: 0.1,
            psi: 0.1,
            a: 0.0,
            seed: 3,
            burn_in: 100,
        };
        let (series, loadings) = simulate_with_loadings(&base).unwrap();
        let l = loadings.unwrap();
        let scale = l.row[(0, 0)] * l.column[(0, 0)];
        // var(X) = scale^2 var(F) + var(E) with var(E) = 1.
        let n = series.t_len() as f64;
        let x: Vec<f64> = series.frames().iter().map(|f| f[(0, 0)]).collect();
        let mean = x.iter().sum::<f64>() / n;
        let var_x = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let var_f = (var_x - 1.0) / (scale * scale);
        // Var of the sample variance for an AR(1) with coefficient 0.1 is close
        // to the iid value 2/n; allow 3 standard errors scaled by 1/scale^2.
        let se = (2.0 * (1.0 + scale * scale).powi(2) / n).sqrt() / (scale * scale);
        assert!((var_f - 1.0).abs() < 3.0 * se, "var_f {var_f}, se {se}");
    }

    #[test]
    fn zero_factor_count_disables_common_component() {
        let with_k = DgpSpec { k1: 0, k2: 3, ..spec() };
        let none = DgpSpec { k1: 0, k2: 0, ..spec() };
        let (a, la) = simulate_with_loadings(&with_k).unwrap();
        let (b, _) = simulate_with_loadings(&none).unwrap();
        assert!(la.is_none());
        assert_eq!(a, b);
    }

    #[test]
    fn loadings_are_uniform_on_unit_interval() {
        let s = DgpSpec { p1: 200, p2: 50, k1: 3, k2: 3, ..spec() };
        let (_, l) = simulate_with_loadings(&s).unwrap();
        let l = l.unwrap();
        assert_eq!(l.row.shape(), (200, 3));
        assert_eq!(l.column.shape(), (50, 3));
        assert!(l.row.iter().chain(l.column.iter()).all(|v| (-1.0..1.0).contains(v)));
        let mean = l.row.iter().sum::<f64>() / 600.0;
        assert!(mean.abs() < 0.1);
    }
}
