//! Dense NYFR sensing matrix in the zone-block form
//! `A = [I_M … I_M] · diag(e^{-jlθ} I_M) · diag(Ψ_M) · Ψ_N^{-1}`.
//!
//! Multiplying the four factors out gives
//! `A[m, n] = ω_s D(mK_Z - n) Σ_l exp(-jl(θ + 2πn / K_Z))`
//! where `D` is the `N`-periodic impulse response of the ideal baseband
//! filter. Only the `O(MN)` closed form is evaluated here.
//!
//! `θ` is sampled either on the Nyquist grid (`θ(t_n)` in column `n`), which
//! reproduces the simulated front end exactly, or held at the ADC instants
//! (`θ(t_m)` in row `m`). The held form is the literal block product; it
//! agrees with the front end for `θ ≡ 0` and whenever each zone's FM
//! sidebands stay inside the zone.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frontend::{lo_phase, passband_bins, NyfrConfig};
use crate::kernels::fft;
use crate::C64;

pub const DEFAULT_DENSE_CAP: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensingMatrixSpec {
    pub n: usize,
    pub m: usize,
    pub nz_count: usize,
    /// `θ(t_n)` at the `N` Nyquist instants, or `θ(t_m)` at the `M` ADC
    /// instants for the held form.
    pub theta: Vec<f64>,
    /// Harmonic indices `l`; harmonic `l` carries modulation `e^{-jlθ}`.
    pub modulation_indices: Vec<usize>,
    pub omega_s: f64,
}

impl SensingMatrixSpec {
    /// `θ` on the Nyquist grid.
    pub fn from_config(config: &NyfrConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self::with_theta(config, config.theta_on_grid()))
    }

    /// `θ` held at the ADC instants.
    pub fn held_at_adc(config: &NyfrConfig) -> Result<Self> {
        config.validate()?;
        let theta = config.adc_instants().iter().map(|&t| lo_phase(t, &config.lo)).collect();
        Ok(Self::with_theta(config, theta))
    }

    fn with_theta(config: &NyfrConfig, theta: Vec<f64>) -> Self {
        Self {
            n: config.n(),
            m: config.m(),
            nz_count: config.nz_count,
            theta,
            modulation_indices: (0..=config.harmonic_order).collect(),
            omega_s: config.lo.omega_s(),
        }
    }
}

/// Ideal baseband filter response `D[d] = (1/N) Σ_q exp(j2πqd/N)` for
/// `d = 0..N-1`, `q` over the `M` passband bins.
pub(crate) fn baseband_kernel(n: usize, m: usize) -> Vec<C64> {
    let mut ind = vec![C64::new(0.0, 0.0); n];
    for q in passband_bins(m) {
        ind[q.rem_euclid(n as i64) as usize] = C64::new(1.0, 0.0);
    }
    fft::ifft(&ind)
}

pub fn build_sensing_matrix(spec: &SensingMatrixSpec, cap: usize) -> Result<DMatrix<C64>> {
    let (n, m, k) = (spec.n, spec.m, spec.nz_count);
    if n > cap {
        return Err(Error::DenseCapExceeded { n, cap });
    }
    let per_column = spec.theta.len() == n;
    if k == 0 || m * k != n || !(per_column || spec.theta.len() == m) {
        return Err(Error::InvalidConfig(format!(
            "sensing matrix needs N = K_Z * M and N or M phase samples (N={n}, M={m}, K_Z={k}, θ len {})",
            spec.theta.len()
        )));
    }
    let d = baseband_kernel(n, m);
    let harmonic = |theta: f64, col: usize| -> C64 {
        let phi = theta + 2.0 * PI * (col % k) as f64 / k as f64;
        spec.modulation_indices.iter().map(|&l| C64::from_polar(spec.omega_s, -(l as f64) * phi)).sum()
    };
    let mut a = DMatrix::<C64>::zeros(m, n);
    if per_column {
        let p: Vec<C64> = (0..n).map(|col| harmonic(spec.theta[col], col)).collect();
        for row in 0..m {
            for col in 0..n {
                a[(row, col)] = d[(row * k + n - col) % n] * p[col];
            }
        }
    } else {
        for row in 0..m {
            let h: Vec<C64> = (0..k).map(|r| harmonic(spec.theta[row], r)).collect();
            for col in 0..n {
                a[(row, col)] = d[(row * k + n - col) % n] * h[col % k];
            }
        }
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::LoSpec;

    #[test]
    fn single_zone_is_scaled_identity() {
        let cfg = NyfrConfig::new(LoSpec::unmodulated(1.0), 1, 32).unwrap();
        let a = build_sensing_matrix(&SensingMatrixSpec::from_config(&cfg).unwrap(), 64).unwrap();
        let ws = cfg.lo.omega_s();
        for i in 0..32 {
            for j in 0..32 {
                let want = if i == j { ws } else { 0.0 };
                assert!((a[(i, j)] - want).norm() < 1e-12 * ws);
            }
        }
    }

    #[test]
    fn cap_is_enforced() {
        let cfg = NyfrConfig::new(LoSpec::unmodulated(1.0), 2, 128).unwrap();
        let spec = SensingMatrixSpec::from_config(&cfg).unwrap();
        assert_eq!(build_sensing_matrix(&spec, 64), Err(Error::DenseCapExceeded { n: 128, cap: 64 }));
    }

    #[test]
    fn both_phase_samplings_agree_without_modulation() {
        let cfg = NyfrConfig::new(LoSpec::unmodulated(1.0), 4, 64).unwrap();
        let a = build_sensing_matrix(&SensingMatrixSpec::from_config(&cfg).unwrap(), 64).unwrap();
        let b = build_sensing_matrix(&SensingMatrixSpec::held_at_adc(&cfg).unwrap(), 64).unwrap();
        assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn wrong_phase_length_rejected() {
        let cfg = NyfrConfig::new(LoSpec::unmodulated(1.0), 4, 64).unwrap();
        let mut spec = SensingMatrixSpec::from_config(&cfg).unwrap();
        spec.theta.pop();
        assert!(matches!(build_sensing_matrix(&spec, 64), Err(Error::InvalidConfig(_))));
    }
}
