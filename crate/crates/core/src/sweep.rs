//! Monte Carlo accuracy sweeps.
//!
//! A sweep is a Cartesian grid over SNR, pulse length, LFM bandwidth and the
//! LO modulation frequency and amplitude. Every grid point runs `trials`
//! independent scenes built from the signal templates with random carriers,
//! start times and BPSK codes. Each trial draws from its own seed
//! `derive_seed(base_seed, [point, trial])`, so results do not depend on
//! scheduling.

use std::time::Instant;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::detection::{detect_peaks, is_eligible, DetectionPolicy, TruthSignal};
use crate::error::{Error, Result};
use crate::frontend::{acquire, LoSpec, NyfrConfig};
use crate::kernels::flops::Method;
use crate::par;
use crate::reconstruction::{
    baseline_freq_domain, baseline_time_domain, proposed_pipeline, BaselineOptions, PowerSpectrum, ProposedOptions,
};
use crate::rng::{derive_seed, rng_from_seed};
use crate::waveforms::{add_awgn, generate, mix, SignalSpec};

/// Kind of emitter drawn in every trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TemplateKind {
    Mp,
    /// Random code with one symbol per `1/symbol_rate` of pulse.
    Bpsk { symbol_rate: f64 },
    /// Bandwidth comes from the sweep's `lfm_bandwidth_hz` axis.
    Lfm,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalTemplate {
    #[serde(flatten)]
    pub kind: TemplateKind,
    #[serde(default = "one")]
    pub amplitude: f64,
}

impl SignalTemplate {
    pub fn mp() -> Self {
        Self { kind: TemplateKind::Mp, amplitude: 1.0 }
    }

    pub fn bpsk(symbol_rate: f64) -> Self {
        Self { kind: TemplateKind::Bpsk { symbol_rate }, amplitude: 1.0 }
    }

    pub fn lfm() -> Self {
        Self { kind: TemplateKind::Lfm, amplitude: 1.0 }
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    /// Receiver; the LO axes override its modulation frequency and amplitude.
    pub config: NyfrConfig,
    pub templates: Vec<SignalTemplate>,
    pub snr_db: Vec<f64>,
    /// Pulse lengths in seconds, clipped to the record.
    pub pulse_len_s: Vec<f64>,
    pub lfm_bandwidth_hz: Vec<f64>,
    pub mod_freq_hz: Vec<f64>,
    pub mod_amplitude: Vec<f64>,
    /// Carrier draw range; defaults to the whole surveillance band.
    pub carrier_range_hz: Option<[f64; 2]>,
    /// Carriers keep this many spectrum bins, plus half their occupied
    /// bandwidth, away from Nyquist zone boundaries.
    pub guard_bins: usize,
    pub trials: usize,
    pub base_seed: u64,
    pub method: Method,
    pub policy: DetectionPolicy,
    pub proposed: ProposedOptions,
    pub baseline: BaselineOptions,
    /// Nyquist block length of the baselines.
    pub baseline_block: usize,
}

impl SweepSpec {
    /// Single-point sweep of full-record pulses at 10 dB with default settings.
    pub fn new(config: NyfrConfig, templates: Vec<SignalTemplate>) -> Self {
        Self {
            config,
            templates,
            snr_db: vec![10.0],
            pulse_len_s: vec![config.grid.duration()],
            lfm_bandwidth_hz: vec![10e6],
            mod_freq_hz: vec![config.lo.mod_freq_hz],
            mod_amplitude: vec![config.lo.mod_amplitude],
            carrier_range_hz: None,
            guard_bins: 3,
            trials: 100,
            base_seed: 0,
            method: Method::Proposed,
            policy: DetectionPolicy::default(),
            proposed: ProposedOptions::default(),
            baseline: BaselineOptions::default(),
            baseline_block: 256,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSweep(m.into()));
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.templates.is_empty() {
            return bad("no signal templates");
        }
        for (name, axis) in [
            ("snr_db", &self.snr_db),
            ("pulse_len_s", &self.pulse_len_s),
            ("lfm_bandwidth_hz", &self.lfm_bandwidth_hz),
            ("mod_freq_hz", &self.mod_freq_hz),
            ("mod_amplitude", &self.mod_amplitude),
        ] {
            if axis.is_empty() {
                return bad(&format!("axis {name} is empty"));
            }
            if axis.iter().any(|v| v.is_nan()) {
                return bad(&format!("axis {name} contains NaN"));
            }
        }
        if self.pulse_len_s.iter().any(|&t| t <= 0.0) {
            return bad("pulse lengths must be positive");
        }
        self.policy.validate()?;
        self.config.validate()?;
        let [lo, hi] = self.carrier_range();
        if lo >= hi {
            return bad("empty carrier range");
        }
        Ok(())
    }

    /// All grid points, SNR varying fastest.
    pub fn points(&self) -> Vec<SweepPoint> {
        let mut out = Vec::new();
        for &mod_amplitude in &self.mod_amplitude {
            for &mod_freq_hz in &self.mod_freq_hz {
                for &lfm_bandwidth_hz in &self.lfm_bandwidth_hz {
                    for &pulse_len_s in &self.pulse_len_s {
                        for &snr_db in &self.snr_db {
                            out.push(SweepPoint { snr_db, pulse_len_s, lfm_bandwidth_hz, mod_freq_hz, mod_amplitude });
                        }
                    }
                }
            }
        }
        out
    }

    pub fn carrier_range(&self) -> [f64; 2] {
        let g = &self.config.grid;
        let band = [g.band_start_hz, g.band_end_hz()];
        match self.carrier_range_hz {
            Some([lo, hi]) => [lo.max(band[0]), hi.min(band[1])],
            None => band,
        }
    }

    fn config_at(&self, p: &SweepPoint) -> Result<NyfrConfig> {
        let base = self.config.lo;
        let lo = LoSpec { mod_amplitude: p.mod_amplitude, mod_freq_hz: p.mod_freq_hz, ..base };
        self.config.with_lo(lo)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub snr_db: f64,
    pub pulse_len_s: f64,
    pub lfm_bandwidth_hz: f64,
    pub mod_freq_hz: f64,
    pub mod_amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyResult {
    pub point: SweepPoint,
    pub eligible: usize,
    pub total: usize,
    /// Trials that raised an error; they count towards `total` only.
    pub failed: usize,
    pub first_error: Option<String>,
    pub accuracy_pct: f64,
    pub mean_flops: f64,
    /// Mean wall time per trial.
    pub wall_ms: f64,
}

impl AccuracyResult {
    pub const CSV_HEADER: &'static str =
        "snr_db,pulse_len_s,lfm_bandwidth_hz,mod_freq_hz,mod_amplitude,eligible,total,failed,accuracy_pct,mean_flops,wall_ms";

    pub fn csv_row(&self) -> String {
        let p = &self.point;
        format!(
            "{},{:e},{:e},{:e},{},{},{},{},{:.2},{:.6e},{:.3}",
            p.snr_db,
            p.pulse_len_s,
            p.lfm_bandwidth_hz,
            p.mod_freq_hz,
            p.mod_amplitude,
            self.eligible,
            self.total,
            self.failed,
            self.accuracy_pct,
            self.mean_flops,
            self.wall_ms
        )
    }
}

/// Accuracy in percent.
pub fn accuracy_pct(eligible: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        100.0 * eligible as f64 / total as f64
    }
}

/// One Monte Carlo trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub scene: Vec<SignalSpec>,
    pub eligible: bool,
    pub flops: f64,
    pub wall_ms: f64,
}

fn zone_distance(f: f64, fs: f64) -> f64 {
    let x = f / fs - 0.5;
    (x - x.round()).abs() * fs
}

fn occupied_bw(t: &SignalTemplate, p: &SweepPoint) -> f64 {
    match t.kind {
        TemplateKind::Mp => 0.0,
        TemplateKind::Bpsk { symbol_rate } => 2.0 * symbol_rate,
        TemplateKind::Lfm => p.lfm_bandwidth_hz,
    }
}

/// Random scene for one trial. Carriers avoid zone boundaries and each other.
pub fn draw_scene(spec: &SweepSpec, point: &SweepPoint, seed: u64) -> Result<Vec<SignalSpec>> {
    let mut rng = rng_from_seed(seed);
    let g = &spec.config.grid;
    let fs = spec.config.adc_rate();
    let bin = g.sample_rate / (2 * g.n_samples - 1) as f64;
    let [lo, hi] = spec.carrier_range();
    let duration = g.duration();
    let pulse = point.pulse_len_s.min(duration);
    let separation = (spec.policy.merge_bins.max(spec.policy.smoothing_bins) + spec.policy.freq_tol_bins) as f64 * bin;

    let mut scene: Vec<SignalSpec> = Vec::with_capacity(spec.templates.len());
    for t in &spec.templates {
        let bw = occupied_bw(t, point);
        let guard = spec.guard_bins as f64 * bin + bw / 2.0;
        let mut carrier = None;
        for _ in 0..10_000 {
            let f = rng.random_range(lo..hi);
            let clear_of_zone = zone_distance(f, fs) > guard;
            let clear_of_others = scene.iter().all(|s| {
                let other = TruthSignal::from_spec(s).occupied_bw_hz;
                (s.carrier_hz - f).abs() > (bw + other) / 2.0 + separation
            });
            if clear_of_zone && clear_of_others {
                carrier = Some(f);
                break;
            }
        }
        let carrier = carrier.ok_or_else(|| Error::InvalidSweep("no admissible carrier in range".into()))?;
        let start = if pulse < duration { rng.random_range(0.0..duration - pulse) } else { 0.0 };
        let phase = rng.random_range(0.0..std::f64::consts::TAU);
        let s = match t.kind {
            TemplateKind::Mp => SignalSpec::mp(carrier, start, pulse),
            TemplateKind::Bpsk { symbol_rate } => {
                let symbols = ((pulse * symbol_rate).ceil() as usize).max(1);
                let code: String = (0..symbols).map(|_| if rng.random::<bool>() { '1' } else { '0' }).collect();
                SignalSpec::bpsk(carrier, start, pulse, symbol_rate, &code)
            }
            TemplateKind::Lfm => SignalSpec::lfm(carrier, start, pulse, point.lfm_bandwidth_hz),
        };
        scene.push(s.with_amplitude(t.amplitude).with_phase(phase));
    }
    Ok(scene)
}

/// Reconstruct with the selected method.
pub fn reconstruct(
    method: Method,
    rec: &crate::frontend::MeasurementRecord,
    proposed: &ProposedOptions,
    baseline: &BaselineOptions,
    baseline_block: usize,
) -> Result<PowerSpectrum> {
    match method {
        Method::Proposed => proposed_pipeline(rec, proposed),
        Method::TimeDomain => baseline_time_domain(rec, baseline_block, baseline).map(|o| o.spectrum),
        Method::FreqDomain => baseline_freq_domain(rec, baseline_block, baseline),
    }
}

/// Run trial `trial` of grid point `point_index`.
pub fn run_trial(spec: &SweepSpec, point_index: usize, point: &SweepPoint, trial: usize) -> Result<TrialOutcome> {
    let seed = derive_seed(spec.base_seed, &[point_index as u64, trial as u64]);
    let cfg = spec.config_at(point)?;
    let scene = draw_scene(spec, point, derive_seed(seed, &[0]))?;
    let t0 = Instant::now();
    let signals = scene.iter().map(|s| generate(s, &cfg.grid)).collect::<Result<Vec<_>>>()?;
    let noisy = add_awgn(&mix(&signals)?, point.snr_db, derive_seed(seed, &[1]))?;
    let mut rec = acquire(&noisy, &cfg)?;
    rec.seed = Some(seed);
    let ps = reconstruct(spec.method, &rec, &spec.proposed, &spec.baseline, spec.baseline_block)?;
    let detections = detect_peaks(&ps, &spec.policy)?;
    let truth: Vec<TruthSignal> = scene.iter().map(TruthSignal::from_spec).collect();
    let eligible = is_eligible(&detections, &truth, &spec.policy, ps.bin_hz);
    Ok(TrialOutcome {
        scene,
        eligible,
        flops: ps.flops.map_or(0.0, |f| f.total_flops),
        wall_ms: t0.elapsed().as_secs_f64() * 1e3,
    })
}

/// Accuracy per grid point, in the order of [`SweepSpec::points`].
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<AccuracyResult>> {
    spec.validate()?;
    let points = spec.points();
    let trials = spec.trials;
    let outcomes = par::map_range(points.len() * trials, |i| {
        let (pi, t) = (i / trials, i % trials);
        run_trial(spec, pi, &points[pi], t)
    });

    Ok(points
        .iter()
        .enumerate()
        .map(|(pi, point)| {
            let chunk = &outcomes[pi * trials..(pi + 1) * trials];
            let ok: Vec<&TrialOutcome> = chunk.iter().filter_map(|o| o.as_ref().ok()).collect();
            let eligible = ok.iter().filter(|o| o.eligible).count();
            let n_ok = ok.len().max(1) as f64;
            AccuracyResult {
                point: *point,
                eligible,
                total: trials,
                failed: trials - ok.len(),
                first_error: chunk.iter().find_map(|o| o.as_ref().err().map(|e| e.to_string())),
                accuracy_pct: accuracy_pct(eligible, trials),
                mean_flops: ok.iter().map(|o| o.flops).sum::<f64>() / n_ok,
                wall_ms: ok.iter().map(|o| o.wall_ms).sum::<f64>() / n_ok,
            }
        })
        .collect())
}

/// Upper end of the Wilson 95% interval for `k` successes in `n` trials, in percent.
pub fn wilson_upper_pct(k: usize, n: usize) -> f64 {
    wilson(k, n).1
}

/// Lower end of the Wilson 95% interval, in percent.
pub fn wilson_lower_pct(k: usize, n: usize) -> f64 {
    wilson(k, n).0
}

fn wilson(k: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 100.0);
    }
    let z = 1.959_963_984_540_054;
    let nf = n as f64;
    let p = k as f64 / nf;
    let denom = 1.0 + z * z / nf;
    let centre = (p + z * z / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z * z / (4.0 * nf * nf)).sqrt() / denom;
    (100.0 * (centre - half).max(0.0), 100.0 * (centre + half).min(1.0))
}

/// Type names of a scene, e.g. `mp+bpsk`.
pub fn scene_label(scene: &[SignalSpec]) -> String {
    scene.iter().map(|s| s.modulation.name()).collect::<Vec<_>>().join("+")
}
