//! Matrix time series, the synthetic generator and CSV I/O.

mod dgp;
mod io;

pub use dgp::{simulate, simulate_with_loadings, DgpSpec, LoadingPair};
pub use io::{load_series, read_series, save_series, write_series};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// `T` observed `p1 x p2` real matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSeries {
    frames: Vec<DMatrix<f64>>,
    p1: usize,
    p2: usize,
}

impl MatrixSeries {
    /// Builds a series, checking that it is non-empty, rectangular and finite.
    pub fn new(frames: Vec<DMatrix<f64>>) -> Result<Self> {
        let first = frames
            .first()
            .ok_or_else(|| Error::invalid("a matrix series needs at least one frame"))?;
        let (p1, p2) = first.shape();
        if p1 == 0 || p2 == 0 {
            return Err(Error::invalid("frames must have at least one row and one column"));
        }
        for (t, frame) in frames.iter().enumerate() {
            if frame.shape() != (p1, p2) {
                return Err(Error::invalid(format!(
                    "frame {} has shape {:?}, expected ({p1}, {p2})",
                    t + 1,
                    frame.shape()
                )));
            }
            if let Some(idx) = frame.iter().position(|v| !v.is_finite()) {
                let (i, j) = (idx % p1, idx / p1);
                return Err(Error::invalid(format!(
                    "non-finite entry at t={}, i={}, j={}",
                    t + 1,
                    i + 1,
                    j + 1
                )));
            }
        }
        Ok(Self { frames, p1, p2 })
    }

    /// Builds a series from `f(t, i, j)` with zero-based indices.
    pub fn from_fn(
        t_len: usize,
        p1: usize,
        p2: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let frames = (0..t_len)
            .map(|t| DMatrix::from_fn(p1, p2, |i, j| f(t, i, j)))
            .collect();
        Self::new(frames)
    }

    pub fn t_len(&self) -> usize {
        self.frames.len()
    }

    pub fn p1(&self) -> usize {
        self.p1
    }

    pub fn p2(&self) -> usize {
        self.p2
    }

    pub fn frames(&self) -> &[DMatrix<f64>] {
        &self.frames
    }

    pub fn frame(&self, t: usize) -> &DMatrix<f64> {
        &self.frames[t]
    }

    pub fn into_frames(self) -> Vec<DMatrix<f64>> {
        self.frames
    }

    /// Multiplies every entry by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.frames.iter().map(|f| f * c).collect())
    }

    /// Cell-wise standardization over time: subtract the time mean and divide
    /// by the time standard deviation (denominator `T - 1`). Cells with zero
    /// variance become all zeros.
    pub fn standardize(&self) -> Result<Self> {
        let t_len = self.t_len();
        if t_len < 2 {
            return Err(Error::InsufficientTimePoints {
                needed: 2,
                got: t_len,
            });
        }
        let n = t_len as f64;
        let mut out = self.frames.clone();
        for j in 0..self.p2 {
            for i in 0..self.p1 {
                let mean = self.frames.iter().map(|f| f[(i, j)]).sum::<f64>() / n;
                let ss: f64 = self
                    .frames
                    .iter()
                    .map(|f| (f[(i, j)] - mean).powi(2))
                    .sum();
                let sd = (ss / (n - 1.0)).sqrt();
                for (dst, src) in out.iter_mut().zip(&self.frames) {
                    dst[(i, j)] = if sd > 0.0 {
                        (src[(i, j)] - mean) / sd
                    } else {
                        0.0
                    };
                }
            }
        }
        Self::new(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn single_cell(values: &[f64]) -> MatrixSeries {
        MatrixSeries::from_fn(values.len(), 1, 1, |t, _, _| values[t]).unwrap()
    }

    #[test]
    fn rejects_ragged_and_non_finite_frames() {
        let a = DMatrix::zeros(2, 2);
        let b = DMatrix::zeros(2, 3);
        assert!(MatrixSeries::new(vec![a.clone(), b]).is_err());
        assert!(MatrixSeries::new(vec![]).is_err());
        let mut c = a.clone();
        c[(1, 0)] = f64::NAN;
        let err = MatrixSeries::new(vec![a, c]).unwrap_err().to_string();
        assert!(err.contains("t=2, i=2, j=1"), "{err}");
    }

    #[test]
    fn standardize_simple_cell() {
        let s = single_cell(&[1.0, 2.0, 3.0]).standardize().unwrap();
        let got: Vec<f64> = s.frames().iter().map(|f| f[(0, 0)]).collect();
        assert_eq!(got, vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn standardize_constant_cell_is_zero() {
        let s = single_cell(&[5.0, 5.0, 5.0]).standardize().unwrap();
        assert!(s.frames().iter().all(|f| f[(0, 0)] == 0.0));
    }

    #[test]
    fn standardize_needs_two_points() {
        let err = single_cell(&[1.0]).standardize().unwrap_err();
        assert!(matches!(err, Error::InsufficientTimePoints { got: 1, .. }));
        assert!(err.to_string().contains("insufficient time points"));
    }

    proptest! {
        #[test]
        fn standardize_is_idempotent(
            values in proptest::collection::vec(-1e3f64..1e3, 3 * 2 * 2..=3 * 2 * 2 * 4)
        ) {
            let t_len = values.len() / 4;
            let s = MatrixSeries::from_fn(t_len, 2, 2, |t, i, j| values[t * 4 + i * 2 + j]).unwrap();
            let once = s.standardize().unwrap();
            let twice = once.standardize().unwrap();
            prop_assert_eq!(once.frames()[0].shape(), (2, 2));
            prop_assert_eq!(once.t_len(), t_len);
            for (a, b) in once.frames().iter().zip(twice.frames()) {
                for (x, y) in a.iter().zip(b.iter()) {
                    prop_assert!((x - y).abs() <= 1e-10);
                }
            }
        }
    }
}
