//! NYFR acquisition chain.
//!
//! The RF pulse train is generated from its harmonic expansion
//! `p[n] = ω_s Σ_{k=0}^{K_h} exp(-jk(ω_s t_n + θ(t_n)))` on the full-band
//! grid. Harmonic `k` folds zone `k` down to baseband carrying the LO
//! modulation scaled by `k`, so the low-rate output of a zone-`k_Z` input is
//! `ω_s s_{k_Z}(t) exp(-j k_Z θ(t))`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::fft;
use crate::waveforms::{GridSpec, NyquistGridSignal};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModulationKind {
    Sinusoid,
    None,
}

/// Phase-modulated local oscillator `sin(ω_s t + θ(t))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoSpec {
    /// First-sampling (and ADC) rate `f_s`.
    pub adc_rate_hz: f64,
    pub mod_kind: ModulationKind,
    /// Peak phase deviation `A` in radians.
    #[serde(default)]
    pub mod_amplitude: f64,
    #[serde(default)]
    pub mod_freq_hz: f64,
    #[serde(default)]
    pub mod_phase: f64,
}

impl LoSpec {
    pub fn sinusoid(adc_rate_hz: f64, amplitude: f64, freq_hz: f64) -> Self {
        Self {
            adc_rate_hz,
            mod_kind: ModulationKind::Sinusoid,
            mod_amplitude: amplitude,
            mod_freq_hz: freq_hz,
            mod_phase: 0.0,
        }
    }

    pub fn unmodulated(adc_rate_hz: f64) -> Self {
        Self {
            adc_rate_hz,
            mod_kind: ModulationKind::None,
            mod_amplitude: 0.0,
            mod_freq_hz: 0.0,
            mod_phase: 0.0,
        }
    }

    pub fn omega_s(&self) -> f64 {
        2.0 * PI * self.adc_rate_hz
    }

    pub fn is_modulated(&self) -> bool {
        self.mod_kind == ModulationKind::Sinusoid && self.mod_amplitude != 0.0
    }

    fn validate(&self) -> Result<()> {
        if !(self.adc_rate_hz.is_finite() && self.adc_rate_hz > 0.0) {
            return Err(Error::InvalidConfig("adc_rate_hz must be positive".into()));
        }
        if !(self.mod_amplitude.is_finite() && self.mod_amplitude >= 0.0) {
            return Err(Error::InvalidConfig("mod_amplitude must be non-negative".into()));
        }
        if !self.mod_freq_hz.is_finite() || !self.mod_phase.is_finite() {
            return Err(Error::InvalidConfig("modulation frequency and phase must be finite".into()));
        }
        Ok(())
    }
}

/// LO phase modulation `θ(t)`.
pub fn lo_phase(t: f64, lo: &LoSpec) -> f64 {
    match lo.mod_kind {
        ModulationKind::None => 0.0,
        ModulationKind::Sinusoid => {
            lo.mod_amplitude * (2.0 * PI * lo.mod_freq_hz * t + lo.mod_phase).sin()
        }
    }
}

/// Receiver parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NyfrConfig {
    pub lo: LoSpec,
    /// Number of Nyquist zones `K_Z`; also the decimation factor `N / M`.
    pub nz_count: usize,
    /// Highest pulse-train harmonic `K_h`.
    pub harmonic_order: usize,
    pub grid: GridSpec,
}

impl NyfrConfig {
    /// Build a configuration with `K_h = K_Z - 1` and the zone-aligned grid
    /// `[-f_s/2, (K_Z - 1/2) f_s)` of `n_samples` points.
    pub fn new(lo: LoSpec, nz_count: usize, n_samples: usize) -> Result<Self> {
        lo.validate()?;
        if nz_count == 0 {
            return Err(Error::InvalidConfig("nz_count must be positive".into()));
        }
        if n_samples == 0 || n_samples % nz_count != 0 {
            return Err(Error::InvalidConfig(format!(
                "N = {n_samples} is not a positive multiple of K_Z = {nz_count}"
            )));
        }
        let grid = GridSpec::with_band_start(
            n_samples,
            nz_count as f64 * lo.adc_rate_hz,
            -lo.adc_rate_hz / 2.0,
        )?;
        Ok(Self { lo, nz_count, harmonic_order: nz_count - 1, grid })
    }

    /// The receiver used throughout the 2-18 GHz experiments: f_s = 4 GHz,
    /// 8 zones, 2 rad / 20 MHz sinusoidal LO modulation, N = 32000.
    pub fn wideband_default() -> Self {
        Self::new(LoSpec::sinusoid(4e9, 2.0, 20e6), 8, 32000).expect("valid default")
    }

    pub fn with_harmonic_order(mut self, k_h: usize) -> Result<Self> {
        if k_h + 1 < self.nz_count {
            return Err(Error::InvalidConfig(format!(
                "harmonic order {k_h} does not reach zone {}",
                self.nz_count - 1
            )));
        }
        self.harmonic_order = k_h;
        Ok(self)
    }

    pub fn with_lo(mut self, lo: LoSpec) -> Result<Self> {
        lo.validate()?;
        if lo.adc_rate_hz != self.lo.adc_rate_hz {
            return Self::new(lo, self.nz_count, self.grid.n_samples)
                .and_then(|c| c.with_harmonic_order(self.harmonic_order));
        }
        self.lo = lo;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.grid.n_samples
    }

    /// Number of low-rate samples `M = N / K_Z`.
    pub fn m(&self) -> usize {
        self.grid.n_samples / self.nz_count
    }

    pub fn adc_rate(&self) -> f64 {
        self.lo.adc_rate_hz
    }

    pub fn validate(&self) -> Result<()> {
        self.lo.validate()?;
        if self.nz_count == 0 || self.grid.n_samples % self.nz_count != 0 {
            return Err(Error::InvalidConfig("N must be a multiple of K_Z".into()));
        }
        if self.harmonic_order + 1 < self.nz_count {
            return Err(Error::InvalidConfig("harmonic_order must be at least K_Z - 1".into()));
        }
        let expect = self.nz_count as f64 * self.lo.adc_rate_hz;
        if ((self.grid.sample_rate - expect) / expect).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "grid rate {} differs from K_Z * f_s = {expect}",
                self.grid.sample_rate
            )));
        }
        Ok(())
    }

    /// `θ(t_n)` on the Nyquist grid.
    pub fn theta_on_grid(&self) -> Vec<f64> {
        (0..self.n()).map(|n| lo_phase(self.grid.time(n), &self.lo)).collect()
    }

    /// Uniform ADC instants `t_m = m / f_s`.
    pub fn adc_instants(&self) -> Vec<f64> {
        (0..self.m()).map(|m| m as f64 / self.lo.adc_rate_hz).collect()
    }
}

/// Nyquist zone index `round(f_c / f_s)`, ties away from zero.
pub fn nz_index(carrier_hz: f64, adc_rate_hz: f64) -> i64 {
    (carrier_hz / adc_rate_hz).round() as i64
}

/// `ω_s t_n` for grid sample `n`, reduced modulo 2π exactly (`ω_s t_n = 2π n / K_Z`).
fn sampling_phase(n: usize, nz_count: usize) -> f64 {
    2.0 * PI * (n % nz_count) as f64 / nz_count as f64
}

/// RF pulse train on the full grid.
pub fn pulse_train(config: &NyfrConfig) -> NyquistGridSignal {
    let ws = config.lo.omega_s();
    let samples = (0..config.n())
        .map(|n| {
            let phi = sampling_phase(n, config.nz_count) + lo_phase(config.grid.time(n), &config.lo);
            (0..=config.harmonic_order)
                .map(|k| C64::from_polar(ws, -(k as f64) * phi))
                .sum::<C64>()
        })
        .collect();
    NyquistGridSignal::new(samples, config.grid).expect("length matches grid")
}

/// RF sampling `x[n] = s[n] p[n]`.
pub fn rf_sample(s: &NyquistGridSignal, p: &NyquistGridSignal) -> Result<NyquistGridSignal> {
    s.check_same_grid(p)?;
    let samples = s.samples().iter().zip(p.samples()).map(|(a, b)| a * b).collect();
    NyquistGridSignal::new(samples, *s.grid())
}

/// Non-uniform sampling instants `t'_m = (2πm − θ(t_m)) / ω_s`.
pub fn nonuniform_instants(config: &NyfrConfig, m_count: usize) -> Vec<f64> {
    let fs = config.lo.adc_rate_hz;
    let ws = config.lo.omega_s();
    (0..m_count)
        .map(|m| {
            let t = m as f64 / fs;
            t - lo_phase(t, &config.lo) / ws
        })
        .collect()
}

/// Low-rate ADC output and the sampling instants it is associated with.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub samples: Vec<C64>,
    pub uniform_instants: Vec<f64>,
    pub nonuniform_instants: Vec<f64>,
    pub config: NyfrConfig,
    /// Seed of the noise realisation, when the record was simulated.
    pub seed: Option<u64>,
}

impl MeasurementRecord {
    /// Wrap externally obtained samples (e.g. loaded from disk).
    pub fn from_samples(samples: Vec<C64>, config: NyfrConfig, seed: Option<u64>) -> Result<Self> {
        config.validate()?;
        if samples.len() != config.m() {
            return Err(Error::LengthMismatch { expected: config.m(), got: samples.len() });
        }
        let uniform_instants = config.adc_instants();
        let nonuniform_instants = nonuniform_instants(&config, samples.len());
        if config.lo.mod_amplitude < PI
            && nonuniform_instants.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::InvalidConfig("non-uniform instants are not increasing".into()));
        }
        Ok(Self { samples, uniform_instants, nonuniform_instants, config, seed })
    }

    pub fn m(&self) -> usize {
        self.samples.len()
    }
}

/// Ideal anti-aliasing filter keeping `[-f_s/2, f_s/2)` followed by
/// decimation by `K_Z`.
///
/// Zeroing the out-of-band DFT bins and keeping every `K_Z`-th sample is
/// evaluated as an `M`-point inverse DFT of the passband bins, which gives
/// the same samples.
pub fn lpf_decimate(x: &NyquistGridSignal, config: &NyfrConfig) -> Result<MeasurementRecord> {
    config.validate()?;
    if x.grid() != &config.grid {
        return Err(Error::GridMismatch("signal is not on the receiver grid".into()));
    }
    let n = config.n();
    let m = config.m();
    let spec = fft::fft(x.samples());
    let mut folded = vec![C64::new(0.0, 0.0); m];
    for q in passband_bins(m) {
        let src = q.rem_euclid(n as i64) as usize;
        let dst = q.rem_euclid(m as i64) as usize;
        folded[dst] = spec[src];
    }
    // ifft divides by M; the N-point inverse would divide by N.
    let mut y = fft::ifft(&folded);
    let scale = m as f64 / n as f64;
    y.iter_mut().for_each(|z| *z *= scale);
    MeasurementRecord::from_samples(y, *config, None)
}

/// Signed bin indices `q` with `-M/2 <= q < M/2` (units of `f_s / M`).
pub(crate) fn passband_bins(m: usize) -> impl Iterator<Item = i64> {
    let q0 = -((m / 2) as i64);
    q0..q0 + m as i64
}

/// Full front end: pulse train, RF sampling, filter and ADC.
pub fn acquire(s: &NyquistGridSignal, config: &NyfrConfig) -> Result<MeasurementRecord> {
    let p = pulse_train(config);
    let x = rf_sample(s, &p)?;
    lpf_decimate(&x, config)
}
