//! `nyfr`: simulate NYFR acquisitions, reconstruct power spectra, run
//! accuracy sweeps and print flop tables.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nyfr_core::Method;

pub const BUILD_ID: &str = env!("NYFR_BUILD_ID");

#[derive(Debug, Parser)]
#[command(name = "nyfr", version = BUILD_ID, about = "Nyquist folding receiver simulator and spectrum reconstruction")]
pub struct Cli {
    /// Worker threads for Monte Carlo trials (default: one per core). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Output directory.
    #[arg(long, global = true, env = "NYFR_OUT_DIR", default_value = "nyfr-out")]
    pub out_dir: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesise a scene, acquire it and write the ADC record and its spectrogram.
    Simulate(SimulateArgs),
    /// Reconstruct the wideband power spectrum of a scene or a recorded ADC dump.
    Reconstruct(ReconstructArgs),
    /// Monte Carlo detection accuracy over a parameter grid.
    Sweep(SweepArgs),
    /// Dense least-squares baseline reconstruction with solver diagnostics.
    Baseline(BaselineArgs),
    /// Flop totals of the reconstruction methods.
    Flops(FlopsArgs),
}

/// Scene file and overrides. Flags take precedence over the file; without a
/// file the three-emitter demo scene on the default receiver is used.
#[derive(Debug, Args)]
pub struct SceneArgs {
    /// Scene TOML file.
    #[arg(long)]
    pub scene: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Input SNR in dB.
    #[arg(long, allow_hyphen_values = true)]
    pub snr: Option<f64>,
    /// Drop the noise entirely.
    #[arg(long, conflicts_with = "snr")]
    pub noiseless: bool,
    /// ADC rate f_s in Hz.
    #[arg(long)]
    pub adc_rate: Option<f64>,
    /// Number of Nyquist zones K_Z.
    #[arg(long)]
    pub nz_count: Option<usize>,
    /// Nyquist-grid record length N.
    #[arg(long)]
    pub n_samples: Option<usize>,
    /// LO modulation depth A in radians.
    #[arg(long)]
    pub mod_amplitude: Option<f64>,
    /// LO modulation frequency in Hz.
    #[arg(long)]
    pub mod_freq: Option<f64>,
    #[arg(long)]
    pub mod_phase: Option<f64>,
    /// Unmodulated LO (θ ≡ 0), i.e. plain uniform subsampling.
    #[arg(long)]
    pub no_modulation: bool,
}

#[derive(Debug, Args)]
pub struct DetectionArgs {
    /// Match tolerance in spectrum bins.
    #[arg(long, default_value_t = 2)]
    pub tol_bins: usize,
    /// Threshold at median + gamma * MAD.
    #[arg(long, default_value_t = 5.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 9)]
    pub smoothing_bins: usize,
    #[arg(long, default_value_t = 32)]
    pub region_bins: usize,
    #[arg(long, default_value_t = 40)]
    pub merge_bins: usize,
    #[arg(long, default_value_t = 0)]
    pub max_spurious: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum MethodArg {
    Proposed,
    TimeDomain,
    FreqDomain,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Proposed => Method::Proposed,
            MethodArg::TimeDomain => Method::TimeDomain,
            MethodArg::FreqDomain => Method::FreqDomain,
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub scene: SceneArgs,
    /// STFT frame length in ADC samples.
    #[arg(long, default_value_t = 32)]
    pub stft_window: usize,
    #[arg(long, default_value_t = 4)]
    pub stft_hop: usize,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    #[command(flatten)]
    pub scene: SceneArgs,
    #[command(flatten)]
    pub detection: DetectionArgs,
    #[arg(long, value_enum, default_value = "proposed")]
    pub method: MethodArg,
    /// Baseline block length in Nyquist samples (default: whole LO periods, at least 256).
    #[arg(long)]
    pub block: Option<usize>,
    /// ADC dump written by `simulate`; the scene then only supplies the receiver and the truth.
    #[arg(long)]
    pub record: Option<PathBuf>,
    /// Detections to print.
    #[arg(long, default_value_t = 10)]
    pub top: usize,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[command(flatten)]
    pub scene: SceneArgs,
    #[command(flatten)]
    pub detection: DetectionArgs,
    #[arg(long, value_enum, default_value = "time_domain")]
    pub method: MethodArg,
    #[arg(long)]
    pub block: Option<usize>,
    #[arg(long)]
    pub record: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub top: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TemplateArg {
    Mp,
    Bpsk,
    Lfm,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Scene file supplying the receiver; its signals are ignored.
    #[command(flatten)]
    pub scene: SceneArgs,
    #[command(flatten)]
    pub detection: DetectionArgs,
    /// Emitters drawn per trial, one per occurrence.
    #[arg(long = "template", value_enum, default_values = ["mp"])]
    pub templates: Vec<TemplateArg>,
    /// BPSK symbol rate in symbols/s.
    #[arg(long, default_value_t = 10e6)]
    pub symbol_rate: f64,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-15,-10,-5,0,5,10,15")]
    pub snr_db: Vec<f64>,
    /// Pulse lengths in seconds.
    #[arg(long, value_delimiter = ',', default_value = "500e-9")]
    pub pulse_len: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "10e6")]
    pub lfm_bw: Vec<f64>,
    /// LO modulation frequencies (default: the receiver's).
    #[arg(long = "mod-freq-axis", value_delimiter = ',')]
    pub mod_freq_axis: Vec<f64>,
    /// LO modulation depths (default: the receiver's).
    #[arg(long = "mod-amplitude-axis", value_delimiter = ',')]
    pub mod_amplitude_axis: Vec<f64>,
    /// Carrier draw range `lo,hi` in Hz (default: the whole band).
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub carrier_range: Option<Vec<f64>>,
    #[arg(long, default_value_t = 3)]
    pub guard_bins: usize,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, value_enum, default_value = "proposed")]
    pub method: MethodArg,
    #[arg(long)]
    pub block: Option<usize>,
}

#[derive(Debug, Args)]
pub struct FlopsArgs {
    #[arg(long, default_value_t = 32000)]
    pub n: usize,
    #[arg(long, default_value_t = 4000)]
    pub m: usize,
    /// Snapshots of the baselines.
    #[arg(long, default_value_t = 100)]
    pub l: usize,
    /// Occupancies k of the proposed method.
    #[arg(long, value_delimiter = ',', default_value = "10,22400")]
    pub k: Vec<usize>,
    /// Emit CSV instead of an aligned table.
    #[arg(long)]
    pub csv: bool,
}

/// Failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }
}

impl From<nyfr_core::Error> for Failure {
    fn from(e: nyfr_core::Error) -> Self {
        use nyfr_core::Error::*;
        let code = match e {
            InvalidGrid(_) | InvalidSignal(_) | WindowOutsideGrid { .. } | InvalidConfig(_) | UnreachableTolerance(_)
            | DenseCapExceeded { .. } | InvalidPolicy(_) | InvalidSweep(_) | Parse(_) | LengthMismatch { .. } => 2,
            GridMismatch(_) | ZeroSignal | ZeroPulseAutocorr | Io(_) => 1,
        };
        Self { code, message: e.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
