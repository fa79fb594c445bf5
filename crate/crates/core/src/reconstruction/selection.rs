//! Toeplitz selection map between a lag sequence and the column-major
//! `vec` of the `N × N` covariance it generates. Stored implicitly: entry
//! `(i, j)` of the covariance reads lag `i - j`.

use crate::error::{Error, Result};
use crate::kernels::autocorr::AutocorrSeq;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelectionMatrix {
    n: usize,
}

impl SelectionMatrix {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    pub fn rows(&self) -> usize {
        self.n * self.n
    }

    pub fn cols(&self) -> usize {
        2 * self.n - 1
    }

    /// Column holding the single unit entry of row `row`.
    pub fn column_of(&self, row: usize) -> usize {
        let (i, j) = (row % self.n, row / self.n);
        i + self.n - 1 - j
    }

    /// `C r = vec(T(r))`.
    pub fn apply(&self, r: &AutocorrSeq) -> Result<Vec<C64>> {
        if r.n_ref() != self.n {
            return Err(Error::LengthMismatch { expected: self.cols(), got: r.len() });
        }
        Ok((0..self.rows()).map(|row| r.lags()[self.column_of(row)]).collect())
    }

    /// `Cᵀ v`: sums of `v` along each diagonal.
    pub fn adjoint(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.rows() {
            return Err(Error::LengthMismatch { expected: self.rows(), got: v.len() });
        }
        let mut out = vec![C64::new(0.0, 0.0); self.cols()];
        for (row, &x) in v.iter().enumerate() {
            out[self.column_of(row)] += x;
        }
        Ok(out)
    }
}
