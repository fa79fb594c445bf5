//! Scene files.
//!
//! A scene is a TOML document with a seed, an optional SNR, the receiver and
//! a list of `[[signal]]` tables:
//!
//! ```toml
//! seed = 1
//! snr_db = 10.0            # omit for a noiseless scene
//!
//! [receiver]
//! adc_rate_hz = 4e9
//! nz_count = 8
//! n_samples = 32000
//! modulation = "sinusoid"  # or "none"
//! mod_amplitude = 2.0      # rad
//! mod_freq_hz = 20e6
//! mod_phase = 0.0
//! # harmonic_order = 7     # defaults to nz_count - 1
//!
//! [[signal]]
//! kind = "mp"              # "mp" | "bpsk" | "lfm"
//! carrier_hz = 1.3e9
//! pulse_len = 1e-6
//! start_time = 0.0         # optional, default 0
//! amplitude = 1.0          # optional, default 1
//! initial_phase = 0.0      # optional, default 0
//!
//! [[signal]]
//! kind = "bpsk"
//! carrier_hz = 7.8e9
//! pulse_len = 1e-6
//! symbol_rate = 10e6
//! code = "1001100110"
//!
//! [[signal]]
//! kind = "lfm"
//! carrier_hz = 14.5e9
//! pulse_len = 1e-6
//! bandwidth_hz = 8e6
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::detection::TruthSignal;
use crate::error::{Error, Result};
use crate::frontend::{LoSpec, ModulationKind, NyfrConfig};
use crate::rng::derive_seed;
use crate::waveforms::{add_awgn, generate, mix, NyquistGridSignal, SignalSpec};

fn default_modulation() -> ModulationKind {
    ModulationKind::Sinusoid
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReceiverSpec {
    pub adc_rate_hz: f64,
    pub nz_count: usize,
    pub n_samples: usize,
    #[serde(default = "default_modulation")]
    pub modulation: ModulationKind,
    #[serde(default)]
    pub mod_amplitude: f64,
    #[serde(default)]
    pub mod_freq_hz: f64,
    #[serde(default)]
    pub mod_phase: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub harmonic_order: Option<usize>,
}

impl ReceiverSpec {
    pub fn config(&self) -> Result<NyfrConfig> {
        let lo = LoSpec {
            adc_rate_hz: self.adc_rate_hz,
            mod_kind: self.modulation,
            mod_amplitude: self.mod_amplitude,
            mod_freq_hz: self.mod_freq_hz,
            mod_phase: self.mod_phase,
        };
        let cfg = NyfrConfig::new(lo, self.nz_count, self.n_samples)?;
        match self.harmonic_order {
            Some(k) => cfg.with_harmonic_order(k),
            None => Ok(cfg),
        }
    }

    pub fn from_config(cfg: &NyfrConfig) -> Self {
        Self {
            adc_rate_hz: cfg.lo.adc_rate_hz,
            nz_count: cfg.nz_count,
            n_samples: cfg.n(),
            modulation: cfg.lo.mod_kind,
            mod_amplitude: cfg.lo.mod_amplitude,
            mod_freq_hz: cfg.lo.mod_freq_hz,
            mod_phase: cfg.lo.mod_phase,
            harmonic_order: (cfg.harmonic_order + 1 != cfg.nz_count).then_some(cfg.harmonic_order),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
    pub receiver: ReceiverSpec,
    #[serde(rename = "signal", default)]
    pub signals: Vec<SignalSpec>,
}

impl Scene {
    /// MP at 1.3 GHz, BPSK at 7.8 GHz and an 8 MHz LFM at 14.5 GHz over the
    /// whole record, 10 dB SNR, on the default receiver.
    pub fn three_signal_demo(seed: u64) -> Self {
        let cfg = NyfrConfig::wideband_default();
        let t = cfg.grid.duration();
        Self {
            seed,
            snr_db: Some(10.0),
            receiver: ReceiverSpec::from_config(&cfg),
            signals: vec![
                SignalSpec::mp(1.3e9, 0.0, t),
                SignalSpec::bpsk(7.8e9, 0.0, t, 10e6, "1001100110"),
                SignalSpec::lfm(14.5e9, 0.0, t, 8e6),
            ],
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let scene: Scene = toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        scene.validate()?;
        Ok(scene)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = self.config()?;
        if self.signals.is_empty() {
            return Err(Error::InvalidSignal("scene has no signals".into()));
        }
        for s in &self.signals {
            if !cfg.grid.contains_freq(s.carrier_hz) {
                return Err(Error::InvalidSignal(format!(
                    "carrier {:.6e} Hz outside the band [{:.6e}, {:.6e})",
                    s.carrier_hz,
                    cfg.grid.band_start_hz,
                    cfg.grid.band_end_hz()
                )));
            }
        }
        if self.snr_db.is_some_and(f64::is_nan) {
            return Err(Error::InvalidSignal("snr_db is NaN".into()));
        }
        Ok(())
    }

    pub fn config(&self) -> Result<NyfrConfig> {
        self.receiver.config()
    }

    pub fn truth(&self) -> Vec<TruthSignal> {
        self.signals.iter().map(TruthSignal::from_spec).collect()
    }

    /// Noiseless sum of the scene's signals.
    pub fn clean_signal(&self) -> Result<NyquistGridSignal> {
        let cfg = self.config()?;
        let parts = self.signals.iter().map(|s| generate(s, &cfg.grid)).collect::<Result<Vec<_>>>()?;
        mix(&parts)
    }

    /// Scene input with noise drawn from the scene seed.
    pub fn synthesize(&self) -> Result<NyquistGridSignal> {
        let clean = self.clean_signal()?;
        match self.snr_db {
            Some(snr) => add_awgn(&clean, snr, derive_seed(self.seed, &[1])),
            None => Ok(clean),
        }
    }
}
