//! Cyclic Jacobi eigensolver for symmetric matrices.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;
const REL_TOL: f64 = 1e-12;

/// A real symmetric matrix. Construction symmetrizes `(A + A') / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    data: DMatrix<f64>,
}

impl SymMatrix {
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::invalid(format!(
                "symmetric matrix must be square, got {:?}",
                a.shape()
            )));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("symmetric matrix has non-finite entries"));
        }
        let data = (&a + a.transpose()) * 0.5;
        Ok(Self { data })
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.data
    }

    pub fn trace(&self) -> f64 {
        self.data.trace()
    }
}

/// Descending eigenvalues, optional orthonormal eigenvectors (as columns) and
/// the trace of the source matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    #[serde(skip)]
    pub eigenvectors: Option<DMatrix<f64>>,
    pub trace: f64,
}

impl Spectrum {
    /// A spectrum given directly by its eigenvalues (sorted here, descending).
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.is_empty() || eigenvalues.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("eigenvalues must be a non-empty list of finite values"));
        }
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        let trace = eigenvalues.iter().sum();
        Ok(Self {
            eigenvalues,
            eigenvectors: None,
            trace,
        })
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `k`-th largest eigenvalue, 1-based.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        self.eigenvalues[k - 1]
    }

    /// Leading `k` eigenvectors as a `n x k` matrix.
    pub fn leading_vectors(&self, k: usize) -> Option<DMatrix<f64>> {
        self.eigenvectors
            .as_ref()
            .map(|v| v.columns(0, k).into_owned())
    }

    /// Sets eigenvalues in `[-1e-10 * lambda_1, 0)` to zero.
    pub fn clamp_psd_dust(&mut self) {
        let floor = -1e-10 * self.eigenvalues.first().copied().unwrap_or(0.0).abs();
        for v in &mut self.eigenvalues {
            if *v < 0.0 && *v >= floor {
                *v = 0.0;
            }
        }
    }
}

fn off_diagonal_norm(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// Full eigendecomposition by cyclic Jacobi rotations.
///
/// Sweeps stop once the off-diagonal Frobenius mass is at most
/// `1e-12 * ||A||_F`. Eigenvalues are returned in descending order (ties keep
/// the diagonal order); each eigenvector is signed so that its largest
/// magnitude entry, first one on ties, is positive.
pub fn sym_eigen(a: &SymMatrix, want_vectors: bool) -> Result<Spectrum> {
    let n = a.dim();
    let mut m = a.as_matrix().clone();
    let mut v = want_vectors.then(|| DMatrix::<f64>::identity(n, n));
    let tol = REL_TOL * m.norm();

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&m);
        if off <= tol {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                off_diagonal: off,
            });
        }
        sweeps += 1;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                m[(p, p)] -= t * apq;
                m[(q, q)] += t * apq;
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = m[(r, p)];
                    let arq = m[(r, q)];
                    let new_p = c * arp - s * arq;
                    let new_q = s * arp + c * arq;
                    m[(r, p)] = new_p;
                    m[(p, r)] = new_p;
                    m[(r, q)] = new_q;
                    m[(q, r)] = new_q;
                }
                if let Some(v) = v.as_mut() {
                    for r in 0..n {
                        let vrp = v[(r, p)];
                        let vrq = v[(r, q)];
                        v[(r, p)] = c * vrp - s * vrq;
                        v[(r, q)] = s * vrp + c * vrq;
                    }
                }
            }
        }
    }

    let diag: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| diag[y].total_cmp(&diag[x]));
    let eigenvalues = order.iter().map(|&i| diag[i]).collect();
    let eigenvectors = v.map(|v| {
        let mut sorted = DMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            let col = v.column(src);
            let mut pivot = 0;
            for r in 1..n {
                if col[r].abs() > col[pivot].abs() {
                    pivot = r;
                }
            }
            let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
            sorted.set_column(dst, &(col * sign));
        }
        sorted
    });
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
        trace: a.trace(),
    })
}
