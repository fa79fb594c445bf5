//! Power spectrum reconstruction from NYFR measurements.

pub mod baseline;
mod proposed;
pub mod selection;
pub mod sensing;
mod spectrum;

pub use baseline::{
    baseline_freq_domain, baseline_time_domain, BaselineOptions, BaselineOutput, BaselineResult, FreqDomainSolver,
    TimeDomainSolver,
};
pub use proposed::{
    divide_autocorr, nonuniform_spectrum, proposed_pipeline, proposed_trace, pulse_autocorr_ref, reconstruct_xhat,
    ProposedOptions, ProposedTrace, RegularizationMode, RegularizationPolicy,
};
pub use selection::SelectionMatrix;
pub use sensing::{build_sensing_matrix, SensingMatrixSpec, DEFAULT_DENSE_CAP};
pub use spectrum::{power_spectrum, LagWindow, PowerSpectrum};
