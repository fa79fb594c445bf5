//! RF test scenes on the full-band Nyquist grid.
//!
//! Signals are complex analytic: a carrier `f_c` is a single spectral line
//! at `f_c` on a grid whose sample rate equals the total surveillance
//! bandwidth. Pulse windows and BPSK symbol boundaries are quantised to the
//! nearest grid sample.

use std::f64::consts::PI;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::C64;

/// Sampling grid of the full-band (Nyquist-rate) signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_samples: usize,
    /// Complex sample rate in Hz; equals the band width covered by the grid.
    pub sample_rate: f64,
    /// Lowest frequency of the band the grid represents. Frequencies are
    /// labelled in `[band_start_hz, band_start_hz + sample_rate)`.
    pub band_start_hz: f64,
}

impl GridSpec {
    /// Grid with a DC-centred band.
    pub fn new(n_samples: usize, sample_rate: f64) -> Result<Self> {
        Self::with_band_start(n_samples, sample_rate, -sample_rate / 2.0)
    }

    pub fn with_band_start(n_samples: usize, sample_rate: f64, band_start_hz: f64) -> Result<Self> {
        if n_samples == 0 {
            return Err(Error::InvalidGrid("n_samples must be positive".into()));
        }
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::InvalidGrid(format!("sample_rate {sample_rate} must be positive")));
        }
        if !band_start_hz.is_finite() {
            return Err(Error::InvalidGrid("band_start_hz must be finite".into()));
        }
        Ok(Self { n_samples, sample_rate, band_start_hz })
    }

    pub fn duration(&self) -> f64 {
        self.n_samples as f64 / self.sample_rate
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 / self.sample_rate
    }

    /// DFT bin spacing of an N-point transform on this grid.
    pub fn bin_width(&self) -> f64 {
        self.sample_rate / self.n_samples as f64
    }

    pub fn band_end_hz(&self) -> f64 {
        self.band_start_hz + self.sample_rate
    }

    pub fn contains_freq(&self, f: f64) -> bool {
        f >= self.band_start_hz && f < self.band_end_hz()
    }

    /// Nearest sample index for time `t`.
    pub fn index_of(&self, t: f64) -> usize {
        (t * self.sample_rate).round().max(0.0) as usize
    }

    fn same_as(&self, other: &GridSpec) -> bool {
        self.n_samples == other.n_samples
            && self.sample_rate == other.sample_rate
            && self.band_start_hz == other.band_start_hz
    }
}

/// Complex samples on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct NyquistGridSignal {
    samples: Vec<C64>,
    grid: GridSpec,
}

impl NyquistGridSignal {
    pub fn new(samples: Vec<C64>, grid: GridSpec) -> Result<Self> {
        if samples.len() != grid.n_samples {
            return Err(Error::LengthMismatch { expected: grid.n_samples, got: samples.len() });
        }
        Ok(Self { samples, grid })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self { samples: vec![C64::new(0.0, 0.0); grid.n_samples], grid }
    }

    pub fn samples(&self) -> &[C64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [C64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<C64> {
        self.samples
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Mean power over the samples that are not exactly zero (the pulse
    /// support). `None` for an all-zero signal.
    pub fn in_support_power(&self) -> Option<f64> {
        let (sum, count) = self
            .samples
            .iter()
            .filter(|z| z.re != 0.0 || z.im != 0.0)
            .fold((0.0, 0usize), |(s, c), z| (s + z.norm_sqr(), c + 1));
        (count > 0).then(|| sum / count as f64)
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum()
    }

    pub(crate) fn check_same_grid(&self, other: &NyquistGridSignal) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, other.grid)))
        }
    }
}

/// Modulation of a pulse, with its kind-specific parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Modulation {
    /// Mono-frequency pulse.
    Mp,
    /// Binary phase shift keying; `code` is a string of '0'/'1', '1' maps to +1.
    Bpsk { symbol_rate: f64, code: String },
    /// Linear FM sweeping `[f_c - B/2, f_c + B/2]` over the pulse.
    Lfm { bandwidth_hz: f64 },
}

impl Modulation {
    pub fn name(&self) -> &'static str {
        match self {
            Modulation::Mp => "mp",
            Modulation::Bpsk { .. } => "bpsk",
            Modulation::Lfm { .. } => "lfm",
        }
    }
}

fn default_amplitude() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    #[serde(flatten)]
    pub modulation: Modulation,
    pub carrier_hz: f64,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default)]
    pub initial_phase: f64,
    #[serde(default)]
    pub start_time: f64,
    pub pulse_len: f64,
}

impl SignalSpec {
    pub fn mp(carrier_hz: f64, start_time: f64, pulse_len: f64) -> Self {
        Self {
            modulation: Modulation::Mp,
            carrier_hz,
            amplitude: 1.0,
            initial_phase: 0.0,
            start_time,
            pulse_len,
        }
    }

    pub fn bpsk(carrier_hz: f64, start_time: f64, pulse_len: f64, symbol_rate: f64, code: &str) -> Self {
        Self {
            modulation: Modulation::Bpsk { symbol_rate, code: code.to_string() },
            ..Self::mp(carrier_hz, start_time, pulse_len)
        }
    }

    pub fn lfm(carrier_hz: f64, start_time: f64, pulse_len: f64, bandwidth_hz: f64) -> Self {
        Self { modulation: Modulation::Lfm { bandwidth_hz }, ..Self::mp(carrier_hz, start_time, pulse_len) }
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.initial_phase = phase;
        self
    }

    /// Half-open sample window `[n0, n1)` of the pulse.
    fn window(&self, grid: &GridSpec) -> Result<(usize, usize)> {
        let end = self.start_time + self.pulse_len;
        let slack = 1e-9 / grid.sample_rate;
        if !(self.start_time.is_finite() && self.pulse_len.is_finite())
            || self.start_time < -slack
            || self.pulse_len < 0.0
            || end > grid.duration() + slack
        {
            return Err(Error::WindowOutsideGrid {
                start: self.start_time,
                end,
                duration: grid.duration(),
            });
        }
        let n0 = grid.index_of(self.start_time).min(grid.n_samples);
        let n1 = grid.index_of(end).min(grid.n_samples);
        Ok((n0, n1.max(n0)))
    }

    fn check_common(&self, grid: &GridSpec) -> Result<()> {
        if !self.amplitude.is_finite() || !self.initial_phase.is_finite() {
            return Err(Error::InvalidSignal("amplitude and phase must be finite".into()));
        }
        if !grid.contains_freq(self.carrier_hz) {
            return Err(Error::InvalidSignal(format!(
                "carrier {:.6e} Hz outside band [{:.6e}, {:.6e})",
                self.carrier_hz,
                grid.band_start_hz,
                grid.band_end_hz()
            )));
        }
        Ok(())
    }
}

/// Carrier phase `2π f_c t_n + φ₀`, with `f_c t_n` reduced before scaling.
fn carrier_phase(f_c: f64, grid: &GridSpec, n: usize, phi0: f64) -> f64 {
    // f_c * n / fs can be large; reducing the integer cycles keeps the phase accurate.
    let cycles = f_c * (n as f64) / grid.sample_rate;
    2.0 * PI * (cycles - cycles.trunc()) + phi0
}

fn tone_into(out: &mut [C64], spec: &SignalSpec, grid: &GridSpec, n0: usize, n1: usize) {
    for (n, z) in out.iter_mut().enumerate().take(n1).skip(n0) {
        *z = C64::from_polar(spec.amplitude, carrier_phase(spec.carrier_hz, grid, n, spec.initial_phase));
    }
}

fn wrong_kind(spec: &SignalSpec, want: &str) -> Error {
    Error::InvalidSignal(format!("expected a {want} signal, got {}", spec.modulation.name()))
}

/// Mono-frequency pulse.
pub fn gen_mp(spec: &SignalSpec, grid: &GridSpec) -> Result<NyquistGridSignal> {
    if spec.modulation != Modulation::Mp {
        return Err(wrong_kind(spec, "mp"));
    }
    spec.check_common(grid)?;
    let (n0, n1) = spec.window(grid)?;
    let mut out = NyquistGridSignal::zeros(*grid);
    tone_into(&mut out.samples, spec, grid, n0, n1);
    Ok(out)
}

/// Parse a '0'/'1' code string into ±1 chips.
pub fn parse_code(code: &str) -> Result<Vec<f64>> {
    let chips: Result<Vec<f64>> = code
        .chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| match c {
            '1' => Ok(1.0),
            '0' => Ok(-1.0),
            other => Err(Error::InvalidSignal(format!("code character {other:?} is not 0 or 1"))),
        })
        .collect();
    let chips = chips?;
    if chips.is_empty() {
        return Err(Error::InvalidSignal("BPSK code is empty".into()));
    }
    Ok(chips)
}

/// BPSK pulse: the MP waveform keyed by ±1 per symbol, code repeated
/// cyclically over the pulse.
pub fn gen_bpsk(spec: &SignalSpec, grid: &GridSpec) -> Result<NyquistGridSignal> {
    let Modulation::Bpsk { symbol_rate, code } = &spec.modulation else {
        return Err(wrong_kind(spec, "bpsk"));
    };
    if !(symbol_rate.is_finite() && *symbol_rate > 0.0) {
        return Err(Error::InvalidSignal("symbol_rate must be positive".into()));
    }
    let samples_per_symbol = grid.sample_rate / symbol_rate;
    if samples_per_symbol < 1.0 {
        return Err(Error::InvalidSignal(format!(
            "symbol interval {:.3e} s is shorter than one grid sample",
            1.0 / symbol_rate
        )));
    }
    let chips = parse_code(code)?;
    spec.check_common(grid)?;
    let (n0, n1) = spec.window(grid)?;
    let mut out = NyquistGridSignal::zeros(*grid);
    tone_into(&mut out.samples, spec, grid, n0, n1);

    let mut symbol = 0usize;
    let mut next_boundary = n0 + (samples_per_symbol).round() as usize;
    for n in n0..n1 {
        while n >= next_boundary {
            symbol += 1;
            next_boundary = n0 + ((symbol + 1) as f64 * samples_per_symbol).round() as usize;
        }
        out.samples[n] *= chips[symbol % chips.len()];
    }
    Ok(out)
}

/// Linear FM pulse occupying `[f_c - B/2, f_c + B/2]`.
///
/// Phase is `2π f_c t_n + π B (τ²/T − τ) + φ₀` with `τ = t_n − start`, so the
/// instantaneous frequency ramps with slope `B/T` through `f_c` at mid-pulse
/// and `B = 0` reproduces [`gen_mp`] sample for sample.
pub fn gen_lfm(spec: &SignalSpec, grid: &GridSpec) -> Result<NyquistGridSignal> {
    let Modulation::Lfm { bandwidth_hz } = spec.modulation else {
        return Err(wrong_kind(spec, "lfm"));
    };
    if !(bandwidth_hz.is_finite() && bandwidth_hz >= 0.0) {
        return Err(Error::InvalidSignal("LFM bandwidth must be non-negative".into()));
    }
    spec.check_common(grid)?;
    let lo = spec.carrier_hz - bandwidth_hz / 2.0;
    let hi = spec.carrier_hz + bandwidth_hz / 2.0;
    if lo < grid.band_start_hz || hi > grid.band_end_hz() {
        return Err(Error::InvalidSignal(format!(
            "LFM band [{lo:.6e}, {hi:.6e}] Hz leaves the surveillance band"
        )));
    }
    let (n0, n1) = spec.window(grid)?;
    let mut out = NyquistGridSignal::zeros(*grid);
    let t_len = spec.pulse_len;
    let start = grid.time(n0);
    for n in n0..n1 {
        let mut phase = carrier_phase(spec.carrier_hz, grid, n, spec.initial_phase);
        if bandwidth_hz > 0.0 && t_len > 0.0 {
            let tau = grid.time(n) - start;
            phase += PI * bandwidth_hz * (tau * tau / t_len - tau);
        }
        out.samples[n] = C64::from_polar(spec.amplitude, phase);
    }
    Ok(out)
}

/// Dispatch on the modulation kind.
pub fn generate(spec: &SignalSpec, grid: &GridSpec) -> Result<NyquistGridSignal> {
    match spec.modulation {
        Modulation::Mp => gen_mp(spec, grid),
        Modulation::Bpsk { .. } => gen_bpsk(spec, grid),
        Modulation::Lfm { .. } => gen_lfm(spec, grid),
    }
}

/// Element-wise sum of signals on one grid.
pub fn mix(signals: &[NyquistGridSignal]) -> Result<NyquistGridSignal> {
    let (first, rest) = signals
        .split_first()
        .ok_or_else(|| Error::InvalidSignal("mix needs at least one signal".into()))?;
    let mut out = first.clone();
    for s in rest {
        out.check_same_grid(s)?;
        for (a, b) in out.samples.iter_mut().zip(&s.samples) {
            *a += b;
        }
    }
    Ok(out)
}

/// Add circular complex white Gaussian noise.
///
/// The noise variance is the in-pulse signal power divided by the requested
/// SNR. `snr_db = +inf` returns the input unchanged.
pub fn add_awgn(signal: &NyquistGridSignal, snr_db: f64, seed: u64) -> Result<NyquistGridSignal> {
    if snr_db == f64::INFINITY {
        return Ok(signal.clone());
    }
    if snr_db.is_nan() {
        return Err(Error::InvalidSignal("snr_db is NaN".into()));
    }
    let p_sig = signal.in_support_power().ok_or(Error::ZeroSignal)?;
    let variance = p_sig / 10f64.powf(snr_db / 10.0);
    let mut out = signal.clone();
    add_noise_in_place(&mut out.samples, variance, seed);
    Ok(out)
}

/// Add noise of a given total complex variance.
pub fn add_noise_in_place(samples: &mut [C64], variance: f64, seed: u64) {
    let sigma = (variance / 2.0).sqrt();
    let mut rng = rng_from_seed(seed);
    for z in samples.iter_mut() {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        *z += C64::new(sigma * re, sigma * im);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rustfft::FftPlanner;

    fn grid() -> GridSpec {
        GridSpec::with_band_start(32000, 32e9, -2e9).unwrap()
    }

    fn dft(x: &[C64]) -> Vec<C64> {
        let mut buf = x.to_vec();
        FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
        buf
    }

    fn peak_freq(sig: &NyquistGridSignal) -> f64 {
        let spec = dft(sig.samples());
        let g = sig.grid();
        let (b, _) = spec
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap())
            .unwrap();
        let mut f = b as f64 * g.bin_width();
        while f >= g.band_end_hz() {
            f -= g.sample_rate;
        }
        f
    }

    #[test]
    fn quarter_rate_tone_is_j_power_n() {
        let g = GridSpec::new(64, 4.0).unwrap();
        let s = gen_mp(&SignalSpec::mp(1.0, 0.0, g.duration()), &g).unwrap();
        let mut expect = C64::new(1.0, 0.0);
        for z in s.samples() {
            assert!((z - expect).norm() < 1e-12);
            expect *= C64::new(0.0, 1.0);
        }
    }

    #[test]
    fn zero_length_pulse_is_silent() {
        let g = grid();
        let s = gen_mp(&SignalSpec::mp(1.3e9, 1e-7, 0.0), &g).unwrap();
        assert!(s.samples().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn window_outside_grid_is_rejected() {
        let g = grid();
        let err = gen_mp(&SignalSpec::mp(1.3e9, 0.9e-6, 0.2e-6), &g).unwrap_err();
        assert!(matches!(err, Error::WindowOutsideGrid { .. }));
        assert!(gen_mp(&SignalSpec::mp(1.3e9, -1e-9, 0.2e-6), &g).is_err());
    }

    #[test]
    fn carrier_outside_band_is_rejected() {
        let g = grid();
        assert!(gen_mp(&SignalSpec::mp(31e9, 0.0, 1e-6), &g).is_err());
        assert!(gen_lfm(&SignalSpec::lfm(29.999e9, 0.0, 1e-6, 8e6), &g).is_err());
    }

    #[test]
    fn mp_full_record_peaks_at_carrier() {
        let g = grid();
        let s = gen_mp(&SignalSpec::mp(1.3e9, 0.0, g.duration()), &g).unwrap();
        assert!((peak_freq(&s) - 1.3e9).abs() <= g.bin_width() / 2.0);
    }

    #[test]
    fn bpsk_all_ones_equals_mp() {
        let g = grid();
        let mp = gen_mp(&SignalSpec::mp(7.8e9, 1e-7, 5e-7).with_phase(0.3), &g).unwrap();
        let b = gen_bpsk(&SignalSpec::bpsk(7.8e9, 1e-7, 5e-7, 1e7, "1111").with_phase(0.3), &g).unwrap();
        assert_eq!(mp.samples(), b.samples());
    }

    #[test]
    fn bpsk_flips_at_midpoint() {
        let g = GridSpec::new(100, 100.0).unwrap();
        // two symbols of 50 samples each
        let spec = SignalSpec::bpsk(10.0, 0.0, 1.0, 2.0, "10");
        let b = gen_bpsk(&spec, &g).unwrap();
        let m = gen_mp(&SignalSpec::mp(10.0, 0.0, 1.0), &g).unwrap();
        for n in 0..100 {
            let sign = if n < 50 { 1.0 } else { -1.0 };
            assert!((b.samples()[n] - m.samples()[n] * sign).norm() < 1e-15, "n={n}");
        }
    }

    #[test]
    fn bpsk_code_repeats_cyclically() {
        let g = GridSpec::new(100, 100.0).unwrap();
        let b = gen_bpsk(&SignalSpec::bpsk(0.0, 0.0, 1.0, 10.0, "10"), &g).unwrap();
        for n in 0..100 {
            let sign = if (n / 10) % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(b.samples()[n].re, sign);
        }
    }

    #[test]
    fn bpsk_too_fast_rejected() {
        let g = GridSpec::new(100, 100.0).unwrap();
        assert!(gen_bpsk(&SignalSpec::bpsk(0.0, 0.0, 1.0, 200.0, "10"), &g).is_err());
        assert!(gen_bpsk(&SignalSpec::bpsk(0.0, 0.0, 1.0, 10.0, ""), &g).is_err());
        assert!(gen_bpsk(&SignalSpec::bpsk(0.0, 0.0, 1.0, 10.0, "102"), &g).is_err());
    }

    #[test]
    fn bpsk_spectrum_matches_hand_keyed_tone() {
        // Oracle: key a tone by hand, symbol by symbol, and compare DFT magnitudes.
        let g = grid();
        let code = "1001100110";
        let spec = SignalSpec::bpsk(7.8e9, 0.0, g.duration(), 1e7, code);
        let b = gen_bpsk(&spec, &g).unwrap();
        let sps = 3200usize;
        let chips: Vec<f64> = code.chars().map(|c| if c == '1' { 1.0 } else { -1.0 }).collect();
        let hand: Vec<C64> = (0..g.n_samples)
            .map(|n| {
                let t = n as f64 / g.sample_rate;
                chips[n / sps] * C64::from_polar(1.0, 2.0 * PI * 7.8e9 * t)
            })
            .collect();
        let fb = dft(b.samples());
        let fh = dft(&hand);
        let scale = fh.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for (x, y) in fb.iter().zip(&fh) {
            assert!((x.norm() - y.norm()).abs() < 1e-6 * scale);
        }
        // Main lobe: ±1 symbol rate around the carrier holds most of the energy.
        let bw = g.bin_width();
        let total: f64 = fb.iter().map(|z| z.norm_sqr()).sum();
        let lobe: f64 = fb
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                let f = *i as f64 * bw;
                (f - 7.8e9).abs() <= 1e7
            })
            .map(|(_, z)| z.norm_sqr())
            .sum();
        assert!(lobe / total > 0.85, "main lobe fraction {}", lobe / total);
    }

    #[test]
    fn lfm_zero_bandwidth_equals_mp() {
        let g = grid();
        let mp = gen_mp(&SignalSpec::mp(14.5e9, 2e-7, 3e-7).with_phase(1.1), &g).unwrap();
        let l = gen_lfm(&SignalSpec::lfm(14.5e9, 2e-7, 3e-7, 0.0).with_phase(1.1), &g).unwrap();
        assert_eq!(mp.samples(), l.samples());
    }

    #[test]
    fn lfm_instantaneous_frequency_is_linear() {
        // Finite differences of the unwrapped phase, de-rotated by the carrier.
        let g = GridSpec::new(20000, 1e9).unwrap();
        let (fc, bw, t_len) = (0.0, 40e6, g.duration());
        let l = gen_lfm(&SignalSpec::lfm(fc, 0.0, t_len, bw), &g).unwrap();
        let s = l.samples();
        let dt = 1.0 / g.sample_rate;
        let inst: Vec<f64> = s.windows(2).map(|w| (w[1] * w[0].conj()).arg() / (2.0 * PI * dt)).collect();
        let slope = bw / t_len;
        for (n, f) in inst.iter().enumerate() {
            // midpoint between samples n and n+1
            let tau = (n as f64 + 0.5) * dt;
            let expect = fc - bw / 2.0 + slope * tau;
            assert!((f - expect).abs() <= 1e-6 * bw, "n={n} f={f} expect={expect}");
        }
    }

    #[test]
    fn lfm_occupies_its_bandwidth() {
        let g = grid();
        let l = gen_lfm(&SignalSpec::lfm(14.5e9, 0.0, g.duration(), 8e6), &g).unwrap();
        let spec = dft(l.samples());
        let total: f64 = spec.iter().map(|z| z.norm_sqr()).sum();
        let inside: f64 = spec
            .iter()
            .enumerate()
            .filter(|(i, _)| ((*i as f64) * g.bin_width() - 14.5e9).abs() <= 4.5e6)
            .map(|(_, z)| z.norm_sqr())
            .sum();
        assert!(inside / total > 0.95, "fraction {}", inside / total);
        let outside_near: f64 = spec
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                let d = ((*i as f64) * g.bin_width() - 14.5e9).abs();
                d > 6e6 && d < 50e6
            })
            .map(|(_, z)| z.norm_sqr())
            .sum();
        assert!(outside_near / total < 0.03);
    }

    #[test]
    fn mix_identities() {
        let g = grid();
        let x = gen_mp(&SignalSpec::mp(1.3e9, 0.0, 1e-6), &g).unwrap();
        assert_eq!(mix(std::slice::from_ref(&x)).unwrap(), x);
        let mut neg = x.clone();
        neg.samples_mut().iter_mut().for_each(|z| *z = -*z);
        let z = mix(&[x.clone(), neg]).unwrap();
        assert!(z.samples().iter().all(|v| v.norm() == 0.0));
        let other = NyquistGridSignal::zeros(GridSpec::new(16, 1.0).unwrap());
        assert!(matches!(mix(&[x, other]), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn fig4_scene_has_three_occupied_regions() {
        let g = grid();
        let d = g.duration();
        let parts = [
            gen_mp(&SignalSpec::mp(1.3e9, 0.0, d), &g).unwrap(),
            gen_bpsk(&SignalSpec::bpsk(7.8e9, 0.0, d, 1e7, "1001100110"), &g).unwrap(),
            gen_lfm(&SignalSpec::lfm(14.5e9, 0.0, d, 8e6), &g).unwrap(),
        ];
        let s = mix(&parts).unwrap();
        let spec = dft(s.samples());
        let total: f64 = spec.iter().map(|z| z.norm_sqr()).sum();
        for fc in [1.3e9, 7.8e9, 14.5e9] {
            let part: f64 = spec
                .iter()
                .enumerate()
                .filter(|(i, _)| ((*i as f64) * g.bin_width() - fc).abs() <= 12e6)
                .map(|(_, z)| z.norm_sqr())
                .sum();
            assert!(part / total > 0.28, "region at {fc}: {}", part / total);
        }
    }

    #[test]
    fn disjoint_bands_add_energy() {
        // Bin-centred tones are orthogonal over the record.
        let g = GridSpec::new(1024, 1024.0).unwrap();
        let a = gen_mp(&SignalSpec::mp(100.0, 0.0, 1.0).with_amplitude(0.7), &g).unwrap();
        let b = gen_mp(&SignalSpec::mp(-300.0, 0.0, 1.0).with_amplitude(1.9), &g).unwrap();
        let both = mix(&[a.clone(), b.clone()]).unwrap();
        let e = |s: &NyquistGridSignal| dft(s.samples()).iter().map(|z| z.norm_sqr()).sum::<f64>();
        let (ea, eb, ab) = (e(&a), e(&b), e(&both));
        assert!(((ab - ea - eb) / ab).abs() < 1e-9);
    }

    #[test]
    fn awgn_infinite_snr_is_identity_and_seeded() {
        let g = grid();
        let x = gen_mp(&SignalSpec::mp(1.3e9, 0.0, 1e-6), &g).unwrap();
        assert_eq!(add_awgn(&x, f64::INFINITY, 3).unwrap(), x);
        let a = add_awgn(&x, 0.0, 11).unwrap();
        let b = add_awgn(&x, 0.0, 11).unwrap();
        assert_eq!(a, b);
        let c = add_awgn(&x, 0.0, 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn awgn_rejects_silent_signal() {
        let g = grid();
        let z = NyquistGridSignal::zeros(g);
        assert_eq!(add_awgn(&z, 10.0, 1), Err(Error::ZeroSignal));
        assert!(add_awgn(&z, f64::INFINITY, 1).is_ok());
    }

    #[test]
    fn awgn_hits_requested_snr() {
        // Sample-variance oracle over 1e6 samples.
        let g = GridSpec::new(1_000_000, 1e9).unwrap();
        let x = gen_mp(&SignalSpec::mp(1e8, 0.0, g.duration()), &g).unwrap();
        let y = add_awgn(&x, 0.0, 5).unwrap();
        let noise: Vec<C64> = y.samples().iter().zip(x.samples()).map(|(a, b)| a - b).collect();
        let var = noise.iter().map(|z| z.norm_sqr()).sum::<f64>() / noise.len() as f64;
        let snr_db = 10.0 * (1.0 / var).log10();
        assert!(snr_db.abs() < 0.5, "measured {snr_db} dB");
        let mean: C64 = noise.iter().sum::<C64>() / noise.len() as f64;
        assert!(mean.norm() < 5.0 * var.sqrt() / (noise.len() as f64).sqrt());
    }

    #[test]
    fn awgn_references_in_pulse_power() {
        let g = GridSpec::new(200_000, 1e9).unwrap();
        // 10% duty pulse of amplitude 2: in-pulse power 4
        let x = gen_mp(&SignalSpec::mp(1e8, 0.0, g.duration() / 10.0).with_amplitude(2.0), &g).unwrap();
        let y = add_awgn(&x, 10.0, 9).unwrap();
        let var = y.samples().iter().zip(x.samples()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>()
            / g.n_samples as f64;
        assert!((var / 0.4 - 1.0).abs() < 0.02, "var {var}");
    }

    #[test]
    fn signal_spec_toml_layout() {
        let text = r#"
            kind = "bpsk"
            carrier_hz = 7.8e9
            symbol_rate = 1e7
            code = "1001100110"
            pulse_len = 1e-6
        "#;
        let s: SignalSpec = toml::from_str(text).unwrap();
        assert_eq!(s.modulation, Modulation::Bpsk { symbol_rate: 1e7, code: "1001100110".into() });
        assert_eq!(s.amplitude, 1.0);
        let back: SignalSpec = toml::from_str(&toml::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
    }
}
