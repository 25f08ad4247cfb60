//! Randomized eigen-gap inference for matrix-valued time series.
//!
//! Given observations `X_t` (each `p1 x p2`, `t = 1..T`) the crate decides
//! whether the series carries a two-way, one-way, or no factor structure, and
//! estimates the numbers of row and column factors with a sequential
//! procedure built on randomized tests of the form `H0: k >= k0`.
//!
//! The pipeline is
//!
//! 1. [`spectra`]: flattened (`M_c`, `M_r`) or projected second-moment
//!    matrices and a cyclic Jacobi eigensolver.
//! 2. [`randomized_test`]: the `phi` statistic, the randomized `Psi`
//!    statistic, the `Q(alpha)` fraction and the strong decision rule.
//! 3. [`estimator`]: sequential testing for `k1`/`k2` and the four-way
//!    structure classifier.
//! 4. [`montecarlo`]: replication harness and null calibration experiment.
//!
//! [`tensor_data`] holds the data model, the AR(1) matrix-normal generator
//! and CSV I/O.

pub mod error;
pub mod estimator;
pub mod montecarlo;
pub mod randomized_test;
pub mod rng;
pub mod spectra;
pub mod tensor_data;

pub use error::{Error, ErrorCategory, Result};

pub use spectra::{sym_eigen, Axis, Method, Spectrum, SymMatrix};
pub use tensor_data::{simulate, DgpSpec, MatrixSeries};
pub use estimator::{
    eigenvalue_ratio_estimate, estimate_structure, sequential_estimate, EstimationResult,
    StructureClass, StructureVerdict,
};
pub use randomized_test::{
    chi2_1_quantile, test_hypothesis, Decision, DecisionRecord, Quadrature, TestConfig,
    ThresholdRule,
};
