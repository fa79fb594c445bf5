use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use nyfr_core::frontend::ModulationKind;
use nyfr_core::io::{read_samples, write_samples, write_spectrum_csv, write_sweep_csv};
use nyfr_core::reconstruction::baseline::block_config;
use nyfr_core::reconstruction::{baseline_freq_domain, baseline_time_domain, BaselineOptions};
use nyfr_core::scene::Scene;
use nyfr_core::spectrogram::stft;
use nyfr_core::sweep::{run_sweep, SignalTemplate, SweepSpec};
use nyfr_core::*;

use crate::{
    BaselineArgs, Cli, Command, DetectionArgs, Failure, FlopsArgs, MethodArg, SceneArgs,
    SimulateArgs, SweepArgs, TemplateArg, BUILD_ID,
};

type Res<T> = std::result::Result<T, Failure>;
type Meta = Vec<(String, String)>;

pub fn run(cli: &Cli) -> Res<()> {
    match &cli.command {
        Command::Simulate(a) => simulate(cli, a),
        Command::Reconstruct(a) => reconstruct(
            cli,
            &Reconstruction { scene: &a.scene, detection: &a.detection, method: a.method, block: a.block, record: &a.record, top: a.top },
        ),
        Command::Baseline(a) => baseline(cli, a),
        Command::Sweep(a) => sweep(cli, a),
        Command::Flops(a) => flops_table(a),
    }
}

fn load_scene(a: &SceneArgs) -> Res<Scene> {
    let mut scene = match &a.scene {
        Some(path) => {
            if !path.is_file() {
                return Err(Failure::usage(format!("scene file {} not found", path.display())));
            }
            Scene::load(path)?
        }
        None => Scene::three_signal_demo(0),
    };
    let r = &mut scene.receiver;
    if let Some(v) = a.adc_rate {
        r.adc_rate_hz = v;
    }
    if let Some(v) = a.nz_count {
        r.nz_count = v;
    }
    if let Some(v) = a.n_samples {
        r.n_samples = v;
    }
    if let Some(v) = a.mod_amplitude {
        r.mod_amplitude = v;
    }
    if let Some(v) = a.mod_freq {
        r.mod_freq_hz = v;
    }
    if let Some(v) = a.mod_phase {
        r.mod_phase = v;
    }
    if a.no_modulation {
        r.modulation = ModulationKind::None;
    }
    if let Some(v) = a.seed {
        scene.seed = v;
    }
    if let Some(v) = a.snr {
        scene.snr_db = Some(v);
    }
    if a.noiseless {
        scene.snr_db = None;
    }
    scene.validate()?;
    Ok(scene)
}

fn policy(a: &DetectionArgs) -> Res<DetectionPolicy> {
    let p = DetectionPolicy {
        freq_tol_bins: a.tol_bins,
        threshold_gamma: a.gamma,
        smoothing_bins: a.smoothing_bins,
        max_spurious: a.max_spurious,
        region_bins: a.region_bins,
        merge_bins: a.merge_bins,
    };
    p.validate()?;
    Ok(p)
}

fn create(out_dir: &Path, name: &str) -> Res<(BufWriter<File>, PathBuf)> {
    fs::create_dir_all(out_dir).map_err(|e| Failure::usage(format!("output directory {}: {e}", out_dir.display())))?;
    let path = out_dir.join(name);
    let file = File::create(&path).map_err(|e| Failure::runtime(format!("{}: {e}", path.display())))?;
    Ok((BufWriter::new(file), path))
}

fn io_err(e: std::io::Error) -> Failure {
    Failure::runtime(e.to_string())
}

fn base_meta(seed: u64, config: String) -> Meta {
    let command: Vec<String> = std::env::args().collect();
    vec![
        ("build".into(), BUILD_ID.into()),
        ("command".into(), command.join(" ")),
        ("seed".into(), seed.to_string()),
        ("config".into(), config),
    ]
}

fn scene_toml(scene: &Scene) -> Res<String> {
    Ok(scene.to_toml_string()?)
}

/// Smallest block of whole LO periods with at least 256 Nyquist samples
/// whose ADC length divides the record.
fn default_block(cfg: &NyfrConfig) -> Res<usize> {
    let m = cfg.m();
    let k = cfg.nz_count;
    let whole_cycles = |mb: usize| {
        if !cfg.lo.is_modulated() {
            return true;
        }
        let c = cfg.lo.mod_freq_hz * mb as f64 / cfg.adc_rate();
        c.round() >= 1.0 && (c - c.round()).abs() <= 1e-9
    };
    (1..=m)
        .find(|&mb| m % mb == 0 && k * mb >= 256.min(cfg.n()) && whole_cycles(mb))
        .map(|mb| mb * k)
        .ok_or_else(|| Failure::usage("no block length holds a whole number of LO periods; pass --block"))
}

fn check_dense_cap(n_block: usize, opts: &BaselineOptions) -> Res<()> {
    if n_block > opts.dense_cap {
        return Err(Failure::usage(format!(
            "time-domain and frequency-domain baselines are capped at N = {} Nyquist samples per block, got {n_block}; \
             use --method proposed or a smaller --block",
            opts.dense_cap
        )));
    }
    Ok(())
}

fn simulate(cli: &Cli, a: &SimulateArgs) -> Res<()> {
    let scene = load_scene(&a.scene)?;
    let cfg = scene.config()?;
    let input = scene.synthesize()?;
    let mut rec = acquire(&input, &cfg)?;
    rec.seed = Some(scene.seed);
    let toml = scene_toml(&scene)?;
    let meta = base_meta(scene.seed, toml.clone());

    let (mut w, scene_path) = create(&cli.out_dir, "scene.toml")?;
    writeln!(w, "# build: {BUILD_ID}").map_err(io_err)?;
    w.write_all(toml.as_bytes()).map_err(io_err)?;
    w.flush().map_err(io_err)?;

    let (w, record_path) = create(&cli.out_dir, "record.bin")?;
    write_samples(w, &rec.samples, cfg.adc_rate(), &meta)?;

    let sg = stft(&rec.samples, cfg.adc_rate(), a.stft_window, a.stft_hop)?;
    let (w, sg_path) = create(&cli.out_dir, "spectrogram.csv")?;
    sg.write_csv(w, &meta)?;

    println!("N = {} Nyquist samples at {:.6} GHz", cfg.n(), cfg.grid.sample_rate / 1e9);
    println!("M = {} ADC samples at {:.6} GHz", cfg.m(), cfg.adc_rate() / 1e9);
    println!(
        "K_Z = {} Nyquist zones, band [{:.3}, {:.3}) GHz",
        cfg.nz_count,
        cfg.grid.band_start_hz / 1e9,
        cfg.grid.band_end_hz() / 1e9
    );
    match cfg.lo.mod_kind {
        ModulationKind::Sinusoid => println!(
            "LO: sinusoidal phase modulation, A = {} rad, f_mod = {:.6} MHz",
            cfg.lo.mod_amplitude,
            cfg.lo.mod_freq_hz / 1e6
        ),
        ModulationKind::None => println!("LO: unmodulated"),
    }
    for (i, s) in scene.signals.iter().enumerate() {
        println!(
            "signal {}: {} at {:.6} GHz, NZ {}",
            i + 1,
            s.modulation.name(),
            s.carrier_hz / 1e9,
            nz_index(s.carrier_hz, cfg.adc_rate())
        );
    }
    for p in [scene_path, record_path, sg_path] {
        println!("wrote {}", p.display());
    }
    Ok(())
}

struct Reconstruction<'a> {
    scene: &'a SceneArgs,
    detection: &'a DetectionArgs,
    method: MethodArg,
    block: Option<usize>,
    record: &'a Option<PathBuf>,
    top: usize,
}

fn measurement(scene: &Scene, record: &Option<PathBuf>) -> Res<MeasurementRecord> {
    let cfg = scene.config()?;
    match record {
        Some(path) => {
            let file = File::open(path).map_err(|e| Failure::usage(format!("record {}: {e}", path.display())))?;
            let (samples, rate) = read_samples(BufReader::new(file))?;
            if (rate - cfg.adc_rate()).abs() > 1e-9 * cfg.adc_rate() {
                return Err(Failure::usage(format!(
                    "record sampled at {rate:e} Hz but the receiver ADC runs at {:e} Hz",
                    cfg.adc_rate()
                )));
            }
            Ok(MeasurementRecord::from_samples(samples, cfg, Some(scene.seed))?)
        }
        None => {
            let mut rec = acquire(&scene.synthesize()?, &cfg)?;
            rec.seed = Some(scene.seed);
            Ok(rec)
        }
    }
}

fn reconstruct(cli: &Cli, r: &Reconstruction) -> Res<()> {
    let scene = load_scene(r.scene)?;
    let policy = policy(r.detection)?;
    let rec = measurement(&scene, r.record)?;
    let method = Method::from(r.method);
    let opts = BaselineOptions::default();
    let mut meta = base_meta(scene.seed, scene_toml(&scene)?);
    meta.push(("method".into(), method.as_str().into()));

    let t0 = Instant::now();
    let ps = match method {
        Method::Proposed => proposed_pipeline(&rec, &ProposedOptions::default())?,
        Method::TimeDomain | Method::FreqDomain => {
            let block = match r.block {
                Some(b) => b,
                None => default_block(&rec.config)?,
            };
            check_dense_cap(block, &opts)?;
            meta.push(("block".into(), block.to_string()));
            let bc = block_config(&rec.config, block)?;
            println!("block: N_b = {block}, M_b = {}, L = {}", bc.m(), rec.m() / bc.m());
            if method == Method::TimeDomain {
                let out = baseline_time_domain(&rec, block, &opts)?;
                let res = &out.result;
                let cond = res.condition.map_or("n/a (conjugate gradients)".to_string(), |c| format!("{c:.3e}"));
                println!("solver: cond(Phi) = {cond}, rank = {:?}, iterations = {}, relative residual = {:.3e}", res.rank, res.iterations, res.rel_residual);
                meta.push(("solver".into(), format!("cond {cond}, iterations {}, residual {:.3e}", res.iterations, res.rel_residual)));
                out.spectrum
            } else {
                baseline_freq_domain(&rec, block, &opts)?
            }
        }
    };
    let elapsed = t0.elapsed();
    let detections = detect_peaks(&ps, &policy)?;
    let truth = scene.truth();
    let eligible = is_eligible(&detections, &truth, &policy, ps.bin_hz);
    meta.push(("eligible".into(), eligible.to_string()));

    let name = method.as_str();
    let (w, spec_path) = create(&cli.out_dir, &format!("spectrum_{name}.csv"))?;
    write_spectrum_csv(w, &ps, &meta)?;
    let (mut w, det_path) = create(&cli.out_dir, &format!("detections_{name}.csv"))?;
    for (k, v) in &meta {
        writeln!(w, "# {k}: {}", v.replace('\n', " | ")).map_err(io_err)?;
    }
    writeln!(w, "rank,freq_hz,power,nz_index").map_err(io_err)?;
    for (i, d) in detections.iter().enumerate() {
        writeln!(w, "{},{:.1},{:.6e},{}", i + 1, d.freq_hz, d.power, nz_index(d.freq_hz.max(0.0), rec.config.adc_rate()))
            .map_err(io_err)?;
    }
    w.flush().map_err(io_err)?;

    println!("method: {name}, {} bins of {:.3} MHz, {:.1} ms", ps.len(), ps.bin_hz / 1e6, elapsed.as_secs_f64() * 1e3);
    if let Some(f) = ps.flops {
        println!("flops: {:.3e}", f.total_flops);
    }
    println!("{:>4}  {:>12}  {:>12}  {:>3}", "rank", "freq_GHz", "power", "NZ");
    for (i, d) in detections.iter().take(r.top).enumerate() {
        println!("{:>4}  {:>12.6}  {:>12.4e}  {:>3}", i + 1, d.freq_hz / 1e9, d.power, nz_index(d.freq_hz.max(0.0), rec.config.adc_rate()));
    }
    println!("scene matched (all emitters found, no spurious peaks above them): {eligible}");
    println!("wrote {}", spec_path.display());
    println!("wrote {}", det_path.display());
    Ok(())
}

fn baseline(cli: &Cli, a: &BaselineArgs) -> Res<()> {
    if a.method == MethodArg::Proposed {
        return Err(Failure::usage("baseline runs time_domain or freq_domain; use `reconstruct` for the proposed method"));
    }
    reconstruct(
        cli,
        &Reconstruction { scene: &a.scene, detection: &a.detection, method: a.method, block: a.block, record: &a.record, top: a.top },
    )
}

fn sweep(cli: &Cli, a: &SweepArgs) -> Res<()> {
    let scene_args = &a.scene;
    let cfg = load_scene(scene_args)?.config()?;
    let templates = a
        .templates
        .iter()
        .map(|t| match t {
            TemplateArg::Mp => SignalTemplate::mp(),
            TemplateArg::Bpsk => SignalTemplate::bpsk(a.symbol_rate),
            TemplateArg::Lfm => SignalTemplate::lfm(),
        })
        .collect();
    let mut spec = SweepSpec::new(cfg, templates);
    spec.snr_db = a.snr_db.clone();
    spec.pulse_len_s = a.pulse_len.clone();
    spec.lfm_bandwidth_hz = a.lfm_bw.clone();
    if !a.mod_freq_axis.is_empty() {
        spec.mod_freq_hz = a.mod_freq_axis.clone();
    }
    if !a.mod_amplitude_axis.is_empty() {
        spec.mod_amplitude = a.mod_amplitude_axis.clone();
    }
    spec.carrier_range_hz = match a.carrier_range.as_deref() {
        None => None,
        Some([lo, hi]) => Some([*lo, *hi]),
        Some(_) => return Err(Failure::usage("--carrier-range takes two values: lo,hi")),
    };
    spec.guard_bins = a.guard_bins;
    spec.trials = a.trials;
    spec.base_seed = scene_args.seed.unwrap_or(0);
    spec.method = a.method.into();
    spec.policy = policy(&a.detection)?;
    if spec.method != Method::Proposed {
        spec.baseline_block = match a.block {
            Some(b) => b,
            None => default_block(&spec.config)?,
        };
        check_dense_cap(spec.baseline_block, &spec.baseline)?;
    }
    spec.validate()?;

    let config = toml::to_string(&spec).unwrap_or_else(|_| format!("{spec:?}"));
    let meta = base_meta(spec.base_seed, config);
    let t0 = Instant::now();
    let results = run_sweep(&spec)?;
    let (w, path) = create(&cli.out_dir, "sweep.csv")?;
    write_sweep_csv(w, &results, &meta)?;

    println!("{:>8}  {:>10}  {:>10}  {:>9}  {:>8}  {:>9}", "snr_dB", "pulse_ns", "f_mod_MHz", "A_rad", "acc_%", "eligible");
    for r in &results {
        let p = &r.point;
        println!(
            "{:>8.1}  {:>10.1}  {:>10.3}  {:>9.3}  {:>8.1}  {:>5}/{:<3}",
            p.snr_db,
            p.pulse_len_s * 1e9,
            p.mod_freq_hz / 1e6,
            p.mod_amplitude,
            r.accuracy_pct,
            r.eligible,
            r.total
        );
    }
    let failed: usize = results.iter().map(|r| r.failed).sum();
    if failed > 0 {
        let first = results.iter().find_map(|r| r.first_error.clone()).unwrap_or_default();
        eprintln!("warning: {failed} trials failed and count as misses; first error: {first}");
    }
    println!("{} trials in {:.1} s", results.iter().map(|r| r.total).sum::<usize>(), t0.elapsed().as_secs_f64());
    println!("wrote {}", path.display());
    Ok(())
}

fn flops_table(a: &FlopsArgs) -> Res<()> {
    let mut rows = Vec::new();
    for &k in &a.k {
        rows.push(flops(Method::Proposed, a.n, a.m, 1, k)?);
    }
    rows.push(flops(Method::TimeDomain, a.n, a.m, a.l, 1)?);
    rows.push(flops(Method::FreqDomain, a.n, a.m, a.l, 1)?);
    println!("# build: {BUILD_ID}");
    if a.csv {
        println!("{}", FlopReport::CSV_HEADER);
        for r in &rows {
            println!("{}", r.csv_row());
        }
        return Ok(());
    }
    println!("{:<12}  {:>7}  {:>6}  {:>4}  {:>6}  {:>12}", "method", "N", "M", "L", "k", "flops");
    for r in &rows {
        println!(
            "{:<12}  {:>7}  {:>6}  {:>4}  {:>6}  {:>12.4e}",
            r.method.as_str(),
            r.n,
            r.m,
            r.l_snapshots,
            r.sparsity_k,
            r.total_flops
        );
    }
    Ok(())
}
