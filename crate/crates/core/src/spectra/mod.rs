//! Second-moment matrices of a matrix series and their spectra.
//!
//! For the row axis the flattened matrix is `M_c = (T p2)^-1 sum_t X_t X_t'`
//! (`p1 x p1`); for the column axis `M_r = (T p1)^-1 sum_t X_t' X_t`
//! (`p2 x p2`). The projected variant first compresses the opposite axis with
//! an initial loading estimate: `Y_t = X_t C_hat / p2`, `M_1 = T^-1 sum_t Y_t Y_t'`,
//! and mirrored for columns.

mod eigen;

pub use eigen::{sym_eigen, Spectrum, SymMatrix};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor_data::MatrixSeries;

/// Which factor count is targeted: `Row` for `k1`, `Column` for `k2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Row,
    Column,
}

impl Axis {
    pub const BOTH: [Axis; 2] = [Axis::Row, Axis::Column];

    /// Dimension of the matrices this axis operates on.
    pub fn dim(self, series: &MatrixSeries) -> usize {
        match self {
            Axis::Row => series.p1(),
            Axis::Column => series.p2(),
        }
    }

    pub fn opposite(self) -> Axis {
        match self {
            Axis::Row => Axis::Column,
            Axis::Column => Axis::Row,
        }
    }

    pub(crate) fn stream_tag(self) -> u64 {
        match self {
            Axis::Row => 1,
            Axis::Column => 2,
        }
    }
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Axis::Row => "row",
            Axis::Column => "column",
        })
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "row" => Ok(Axis::Row),
            "column" => Ok(Axis::Column),
            other => Err(Error::invalid(format!(
                "unknown axis `{other}` (expected row or column)"
            ))),
        }
    }
}

/// Flattened (`M_c`/`M_r`) or projected (`M_1`/`M_2`) second moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Flattened,
    Projected,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Flattened => "flattened",
            Method::Projected => "projected",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flattened" | "stp1" => Ok(Method::Flattened),
            "projected" | "stp2" => Ok(Method::Projected),
            other => Err(Error::invalid(format!(
                "unknown method `{other}` (expected flattened or projected)"
            ))),
        }
    }
}

/// `M_c` for [`Axis::Row`], `M_r` for [`Axis::Column`].
pub fn flattened_second_moment(series: &MatrixSeries, axis: Axis) -> SymMatrix {
    let n = axis.dim(series);
    let mut acc = DMatrix::<f64>::zeros(n, n);
    for x in series.frames() {
        match axis {
            Axis::Row => acc.gemm(1.0, x, &x.transpose(), 1.0),
            Axis::Column => acc.gemm(1.0, &x.transpose(), x, 1.0),
        }
    }
    let scale = (series.t_len() * axis.opposite().dim(series)) as f64;
    SymMatrix::new(acc / scale).expect("second moment of finite data is finite")
}

/// Initial estimate of the opposite-axis loadings used for projection.
///
/// For [`Axis::Row`] this is `C_hat = sqrt(p2) * Q` with `Q` the leading `k`
/// eigenvectors of `M_r`; for [`Axis::Column`] it is
/// `R_hat = sqrt(p1) * (leading k eigenvectors of M_c)`. The result satisfies
/// `C_hat' C_hat / p2 = I_k`.
pub fn initial_loading_estimate(
    series: &MatrixSeries,
    axis: Axis,
    k: usize,
) -> Result<DMatrix<f64>> {
    let other = axis.opposite();
    let n = other.dim(series);
    if k == 0 || k > n {
        return Err(Error::invalid(format!(
            "initial loading rank k = {k} must be in 1..={n}"
        )));
    }
    let spectrum = sym_eigen(&flattened_second_moment(series, other), true)?;
    let q = spectrum
        .leading_vectors(k)
        .expect("eigenvectors were requested");
    Ok(q * (n as f64).sqrt())
}

/// Projected second moment built from an explicit loading estimate.
///
/// `loading` is `p2 x k` for [`Axis::Row`] and `p1 x k` for [`Axis::Column`].
pub fn projected_second_moment_with(
    series: &MatrixSeries,
    axis: Axis,
    loading: &DMatrix<f64>,
) -> Result<SymMatrix> {
    let other_dim = axis.opposite().dim(series);
    if loading.nrows() != other_dim {
        return Err(Error::invalid(format!(
            "loading has {} rows, expected {other_dim}",
            loading.nrows()
        )));
    }
    let n = axis.dim(series);
    let mut acc = DMatrix::<f64>::zeros(n, n);
    let inv = 1.0 / other_dim as f64;
    for x in series.frames() {
        let y = match axis {
            Axis::Row => x * loading * inv,
            Axis::Column => x.transpose() * loading * inv,
        };
        acc.gemm(1.0, &y, &y.transpose(), 1.0);
    }
    SymMatrix::new(acc / series.t_len() as f64)
}

/// `M_1` for [`Axis::Row`], `M_2` for [`Axis::Column`].
pub fn projected_second_moment(
    series: &MatrixSeries,
    axis: Axis,
    k_init: usize,
) -> Result<SymMatrix> {
    let loading = initial_loading_estimate(series, axis, k_init)?;
    projected_second_moment_with(series, axis, &loading)
}

/// Dispatches on `method`; `k_init` only matters for the projected variant.
pub fn second_moment(
    series: &MatrixSeries,
    axis: Axis,
    method: Method,
    k_init: usize,
) -> Result<SymMatrix> {
    match method {
        Method::Flattened => Ok(flattened_second_moment(series, axis)),
        Method::Projected => projected_second_moment(series, axis, k_init),
    }
}
