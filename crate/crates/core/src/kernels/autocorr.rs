//! Biased autocorrelation `r[k] = (1/N) Σ_n x[n] x*[n-k]`, `|k| <= N-1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::fft;
use crate::C64;

/// Lag sequence of length `2N-1`; index `i` holds lag `i - (N-1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutocorrSeq {
    lags: Vec<C64>,
    n_ref: usize,
}

impl AutocorrSeq {
    pub fn new(lags: Vec<C64>, n_ref: usize) -> Result<Self> {
        if n_ref == 0 || lags.len() != 2 * n_ref - 1 {
            return Err(Error::LengthMismatch {
                expected: (2 * n_ref).saturating_sub(1),
                got: lags.len(),
            });
        }
        Ok(Self { lags, n_ref })
    }

    /// Build from a function of the lag.
    pub fn from_fn(n_ref: usize, f: impl Fn(i64) -> C64) -> Self {
        let max = n_ref as i64 - 1;
        Self { lags: (-max..=max).map(f).collect(), n_ref }
    }

    pub fn n_ref(&self) -> usize {
        self.n_ref
    }

    pub fn max_lag(&self) -> i64 {
        self.n_ref as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.lags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lags.is_empty()
    }

    pub fn lags(&self) -> &[C64] {
        &self.lags
    }

    pub fn lags_mut(&mut self) -> &mut [C64] {
        &mut self.lags
    }

    pub fn into_lags(self) -> Vec<C64> {
        self.lags
    }

    pub fn index_of(&self, k: i64) -> usize {
        (k + self.max_lag()) as usize
    }

    pub fn lag(&self, k: i64) -> C64 {
        self.lags[self.index_of(k)]
    }

    /// `max_k |r[-k] - conj(r[k])|`.
    pub fn hermitian_residual(&self) -> f64 {
        let l = self.lags.len();
        (0..self.n_ref)
            .map(|i| (self.lags[l - 1 - i] - self.lags[i].conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Replace `r[k]` and `r[-k]` by their Hermitian average.
    pub fn symmetrize(&mut self) {
        let l = self.lags.len();
        for i in 0..self.n_ref {
            let j = l - 1 - i;
            let avg = (self.lags[j] + self.lags[i].conj()) * 0.5;
            self.lags[j] = avg;
            self.lags[i] = avg.conj();
        }
    }
}

/// FFT-based biased autocorrelation (zero padding to a fast length >= 2N-1).
pub fn autocorr_fft(x: &[C64]) -> Result<AutocorrSeq> {
    let n = x.len();
    if n == 0 {
        return Err(Error::InvalidSignal("autocorrelation of an empty sequence".into()));
    }
    let p = fft::next_fast_len(2 * n - 1);
    let mut buf = vec![C64::new(0.0, 0.0); p];
    buf[..n].copy_from_slice(x);
    fft::fft_in_place(&mut buf);
    buf.iter_mut().for_each(|z| *z = C64::new(z.norm_sqr(), 0.0));
    fft::ifft_in_place(&mut buf);
    let inv_n = 1.0 / n as f64;
    let lags = (-(n as i64 - 1)..=(n as i64 - 1))
        .map(|k| buf[k.rem_euclid(p as i64) as usize] * inv_n)
        .collect();
    AutocorrSeq::new(lags, n)
}

/// Direct `O(N²)` sum; test oracle and fallback for tiny inputs.
pub fn autocorr_direct(x: &[C64]) -> Result<AutocorrSeq> {
    let n = x.len();
    if n == 0 {
        return Err(Error::InvalidSignal("autocorrelation of an empty sequence".into()));
    }
    Ok(AutocorrSeq::from_fn(n, |k| {
        let s: C64 = if k >= 0 {
            (k as usize..n).map(|i| x[i] * x[i - k as usize].conj()).sum()
        } else {
            let a = (-k) as usize;
            (0..n - a).map(|i| x[i] * x[i + a].conj()).sum()
        };
        s / n as f64
    }))
}
