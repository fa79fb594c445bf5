//! WebAssembly bindings behind the static page in `www/`.
//!
//! Three operations are exposed: reconstruct the three-emitter scene, show
//! how one tone folds through the modulated LO, and tabulate flop counts.

use nyfr_core::scene::{ReceiverSpec, Scene};
use nyfr_core::spectrogram::stft;
use nyfr_core::*;
use wasm_bindgen::prelude::*;

/// Errors cross into JavaScript as message strings.
type Out<T> = std::result::Result<T, String>;

fn receiver(mod_amplitude: f64, mod_freq_hz: f64) -> Out<NyfrConfig> {
    let base = NyfrConfig::wideband_default();
    let lo = if mod_amplitude == 0.0 {
        LoSpec::unmodulated(base.adc_rate())
    } else {
        LoSpec::sinusoid(base.adc_rate(), mod_amplitude, mod_freq_hz)
    };
    base.with_lo(lo).map_err(|e| e.to_string())
}

fn db(p: f64) -> f64 {
    10.0 * p.max(1e-30).log10()
}

/// Largest value of each of `points` consecutive chunks.
fn max_pool(values: &[f64], points: usize) -> Vec<(usize, f64)> {
    let chunk = values.len().div_ceil(points.max(1)).max(1);
    values
        .chunks(chunk)
        .enumerate()
        .map(|(c, v)| {
            let (j, p) = v.iter().enumerate().fold((0, f64::MIN), |acc, (j, &p)| if p > acc.1 { (j, p) } else { acc });
            (c * chunk + j, p)
        })
        .collect()
}

#[wasm_bindgen]
pub struct SpectrumView {
    freqs_ghz: Vec<f64>,
    power_db: Vec<f64>,
    detections_ghz: Vec<f64>,
    truth_ghz: Vec<f64>,
    eligible: bool,
}

#[wasm_bindgen]
impl SpectrumView {
    #[wasm_bindgen(getter)]
    pub fn freqs_ghz(&self) -> Vec<f64> {
        self.freqs_ghz.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn power_db(&self) -> Vec<f64> {
        self.power_db.clone()
    }

    /// Detections, strongest first.
    #[wasm_bindgen(getter)]
    pub fn detections_ghz(&self) -> Vec<f64> {
        self.detections_ghz.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn truth_ghz(&self) -> Vec<f64> {
        self.truth_ghz.clone()
    }

    /// Every emitter found and no stronger spurious peak.
    #[wasm_bindgen(getter)]
    pub fn eligible(&self) -> bool {
        self.eligible
    }
}

/// MP at 1.3 GHz, BPSK at 7.8 GHz and LFM at 14.5 GHz on the 4 GHz-ADC
/// receiver, reconstructed by the fast pipeline. `mod_amplitude = 0` gives
/// an unmodulated LO. The spectrum is max-pooled to `points` values.
#[wasm_bindgen]
pub fn reconstruct_scene(
    snr_db: f64,
    mod_amplitude: f64,
    mod_freq_hz: f64,
    seed: u32,
    points: usize,
) -> Out<SpectrumView> {
    let cfg = receiver(mod_amplitude, mod_freq_hz)?;
    let mut scene = Scene::three_signal_demo(seed as u64);
    scene.snr_db = Some(snr_db);
    scene.receiver = ReceiverSpec::from_config(&cfg);
    let run = || -> nyfr_core::Result<_> {
        let rec = acquire(&scene.synthesize()?, &cfg)?;
        let ps = proposed_pipeline(&rec, &ProposedOptions::default())?;
        let policy = DetectionPolicy::default();
        let det = detect_peaks(&ps, &policy)?;
        let eligible = is_eligible(&det, &scene.truth(), &policy, ps.bin_hz);
        Ok((ps, det, eligible))
    };
    let (ps, det, eligible) = run().map_err(|e| e.to_string())?;
    let pooled = max_pool(&ps.values, points);
    Ok(SpectrumView {
        freqs_ghz: pooled.iter().map(|&(j, _)| ps.freq_of_bin(j) / 1e9).collect(),
        power_db: pooled.iter().map(|&(_, p)| db(p)).collect(),
        detections_ghz: det.iter().take(10).map(|d| d.freq_hz / 1e9).collect(),
        truth_ghz: scene.signals.iter().map(|s| s.carrier_hz / 1e9).collect(),
        eligible,
    })
}

#[wasm_bindgen]
pub struct FoldView {
    times_us: Vec<f64>,
    freqs_mhz: Vec<f64>,
    power_db: Vec<f64>,
    ridge_mhz: Vec<f64>,
    nz: i32,
}

#[wasm_bindgen]
impl FoldView {
    #[wasm_bindgen(getter)]
    pub fn times_us(&self) -> Vec<f64> {
        self.times_us.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn freqs_mhz(&self) -> Vec<f64> {
        self.freqs_mhz.clone()
    }

    /// Row-major `[frame][bin]`.
    #[wasm_bindgen(getter)]
    pub fn power_db(&self) -> Vec<f64> {
        self.power_db.clone()
    }

    /// Strongest frequency of each frame.
    #[wasm_bindgen(getter)]
    pub fn ridge_mhz(&self) -> Vec<f64> {
        self.ridge_mhz.clone()
    }

    /// Nyquist zone of the tone.
    #[wasm_bindgen(getter)]
    pub fn nz(&self) -> i32 {
        self.nz
    }
}

/// Spectrogram of the ADC output for a single noiseless tone. The alias
/// line swings by `nz · A · f_mod` around the folded frequency.
#[wasm_bindgen]
pub fn fold_tone(carrier_hz: f64, mod_amplitude: f64, mod_freq_hz: f64, window: usize, hop: usize) -> Out<FoldView> {
    let cfg = receiver(mod_amplitude, mod_freq_hz)?;
    let run = || -> nyfr_core::Result<_> {
        let s = waveforms::generate(&SignalSpec::mp(carrier_hz, 0.0, cfg.grid.duration()), &cfg.grid)?;
        let rec = acquire(&s, &cfg)?;
        stft(&rec.samples, cfg.adc_rate(), window, hop)
    };
    let sg = run().map_err(|e| e.to_string())?;
    let ridge = sg.ridge();
    Ok(FoldView {
        times_us: sg.times.iter().map(|t| t * 1e6).collect(),
        freqs_mhz: sg.freqs.iter().map(|f| f / 1e6).collect(),
        power_db: sg.power.iter().flatten().map(|&p| db(p)).collect(),
        ridge_mhz: ridge.iter().map(|&j| sg.freqs[j] / 1e6).collect(),
        nz: nz_index(carrier_hz, cfg.adc_rate()) as i32,
    })
}

/// Flop totals as CSV rows with a header line.
#[wasm_bindgen]
pub fn flop_table(n: usize, m: usize, l_snapshots: usize, sparsity_k: usize) -> Out<String> {
    let rows = [
        flops(Method::Proposed, n, m, 1, sparsity_k),
        flops(Method::TimeDomain, n, m, l_snapshots, 1),
        flops(Method::FreqDomain, n, m, l_snapshots, 1),
    ];
    let mut out = String::from(FlopReport::CSV_HEADER);
    for r in rows {
        out.push('\n');
        out.push_str(&r.map_err(|e| e.to_string())?.csv_row());
    }
    Ok(out)
}
