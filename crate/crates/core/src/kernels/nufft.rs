//! Non-uniform DFT from arbitrary sample instants to a uniform frequency grid:
//! `Y[b] = Σ_m y_m exp(-j 2π f_b t_m)`, `f_b = start + b·step`.
//!
//! Large grids use Gaussian gridding (Greengard & Lee 2004) with oversampling
//! ratio 2; small grids use the direct sum, which is also the test oracle.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::fft;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreqGrid {
    pub start_hz: f64,
    pub step_hz: f64,
    pub len: usize,
}

impl FreqGrid {
    pub fn new(start_hz: f64, step_hz: f64, len: usize) -> Self {
        Self { start_hz, step_hz, len }
    }

    pub fn freq(&self, b: usize) -> f64 {
        self.start_hz + b as f64 * self.step_hz
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NufftConfig {
    /// Target error relative to `Σ|y_m|`.
    pub tolerance: f64,
    /// Grids shorter than this are evaluated by the direct sum.
    pub direct_below: usize,
}

impl Default for NufftConfig {
    fn default() -> Self {
        Self { tolerance: 1e-10, direct_below: 1024 }
    }
}

const OVERSAMPLING: f64 = 2.0;
const MIN_TOLERANCE: f64 = 1e-13;

impl NufftConfig {
    /// Half-width of the spreading kernel in fine-grid points.
    pub fn spread_width(&self) -> Result<usize> {
        if !(self.tolerance.is_finite() && self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "NUFFT tolerance {} must lie in (0, 1)",
                self.tolerance
            )));
        }
        if self.tolerance < MIN_TOLERANCE {
            return Err(Error::UnreachableTolerance(self.tolerance));
        }
        let r = OVERSAMPLING;
        let w = (100.0 / self.tolerance).ln() * r / (PI * (r - 0.5));
        Ok(w.ceil() as usize)
    }
}

#[inline]
fn frac(x: f64) -> f64 {
    x - x.floor()
}

/// Direct `O(MN)` evaluation.
pub fn nudft_direct(y: &[C64], instants: &[f64], grid: &FreqGrid) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); grid.len];
    for (&ym, &t) in y.iter().zip(instants) {
        let a = frac(grid.start_hz * t);
        let d = frac(grid.step_hz * t);
        for (b, o) in out.iter_mut().enumerate() {
            let cycles = frac(a + frac(b as f64 * d));
            *o += ym * C64::from_polar(1.0, -2.0 * PI * cycles);
        }
    }
    out
}

pub fn nufft_time_to_freq(
    y: &[C64],
    instants: &[f64],
    grid: &FreqGrid,
    config: &NufftConfig,
) -> Result<Vec<C64>> {
    if y.len() != instants.len() {
        return Err(Error::LengthMismatch { expected: y.len(), got: instants.len() });
    }
    if instants.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidConfig("non-finite sampling instant".into()));
    }
    let sp = config.spread_width()?;
    if grid.len < config.direct_below.max(2 * sp + 2) {
        return Ok(nudft_direct(y, instants, grid));
    }
    Ok(gridded(y, instants, grid, sp))
}

fn gridded(y: &[C64], instants: &[f64], grid: &FreqGrid, sp: usize) -> Vec<C64> {
    let n = grid.len;
    let shift = n / 2;
    let mr = (OVERSAMPLING as usize) * n;
    let r = OVERSAMPLING;
    let tau = PI * sp as f64 / ((n * n) as f64 * r * (r - 0.5));
    let h = 2.0 * PI / mr as f64;
    let centre_hz = grid.start_hz + shift as f64 * grid.step_hz;

    // Modes k = b - shift; the remaining phase is folded into the weights.
    let mut fine = vec![C64::new(0.0, 0.0); mr];
    for (&ym, &t) in y.iter().zip(instants) {
        let c = ym * C64::from_polar(1.0, -2.0 * PI * frac(centre_hz * t));
        let x = 2.0 * PI * frac(grid.step_hz * t);
        let l0 = (x / h).floor() as i64;
        for l in (l0 - sp as i64 + 1)..=(l0 + sp as i64) {
            let d = x - l as f64 * h;
            let w = (-d * d / (4.0 * tau)).exp();
            fine[l.rem_euclid(mr as i64) as usize] += c * w;
        }
    }
    fft::fft_in_place(&mut fine);

    let scale = (PI / tau).sqrt() / mr as f64;
    (0..n)
        .map(|b| {
            let k = b as i64 - shift as i64;
            let kf = k as f64;
            fine[k.rem_euclid(mr as i64) as usize] * (scale * (kf * kf * tau).exp())
        })
        .collect()
}
