//! Nyquist folding receiver (NYFR) simulator and fast wideband power
//! spectrum reconstruction.
//!
//! The crate is organised along the acquisition and processing chain:
//!
//! * [`waveforms`] synthesises MP / BPSK / LFM test scenes on the full-band
//!   Nyquist grid.
//! * [`frontend`] models the NYFR: phase-modulated LO, RF pulse-train
//!   sampling, brick-wall anti-aliasing filter and the low-rate ADC.
//! * [`kernels`] holds the numerical kernels (FFT, type-1 NUFFT, FFT-based
//!   autocorrelation, flop accounting).
//! * [`reconstruction`] implements the NUFFT → autocorrelation →
//!   pulse-train deconvolution pipeline together with the dense
//!   time-domain and frequency-domain least-squares baselines.
//! * [`detection`] and [`sweep`] turn spectra into detections and run the
//!   Monte Carlo accuracy experiments.
//!
//! Frequencies are in Hz throughout. The complex grid of rate
//! `K_Z * f_s` covers the band `[-f_s/2, (K_Z - 1/2) f_s)`, i.e. Nyquist
//! zones `0..K_Z`, each `f_s` wide and centred on `k * f_s`.

pub mod detection;
pub mod error;
pub mod frontend;
pub mod io;
pub mod kernels;
mod par;
pub mod reconstruction;
pub mod rng;
pub mod scene;
pub mod spectrogram;
pub mod sweep;
pub mod waveforms;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

pub use detection::{detect_peaks, is_eligible, Detection, DetectionPolicy, TruthSignal};
pub use frontend::{
    acquire, lo_phase, lpf_decimate, nonuniform_instants, nz_index, pulse_train, rf_sample, LoSpec,
    MeasurementRecord, ModulationKind, NyfrConfig,
};
pub use kernels::autocorr::{autocorr_fft, AutocorrSeq};
pub use kernels::flops::{flops, FlopReport, Method};
pub use kernels::nufft::{nufft_time_to_freq, FreqGrid, NufftConfig};
pub use reconstruction::{
    divide_autocorr, power_spectrum, proposed_pipeline, pulse_autocorr_ref, reconstruct_xhat,
    LagWindow, PowerSpectrum, ProposedOptions, RegularizationMode, RegularizationPolicy,
};
pub use waveforms::{add_awgn, mix, GridSpec, Modulation, NyquistGridSignal, SignalSpec};
