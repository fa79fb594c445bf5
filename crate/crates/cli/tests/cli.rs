use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use nyfr_core::io::{read_samples, read_spectrum_csv};

const FIG_SCENE: &str = r#"
seed = 4
snr_db = 10.0

[receiver]
adc_rate_hz = 4e9
nz_count = 8
n_samples = 32000
mod_amplitude = 2.0
mod_freq_hz = 20e6

[[signal]]
kind = "mp"
carrier_hz = 1.3e9
pulse_len = 1e-6

[[signal]]
kind = "bpsk"
carrier_hz = 7.8e9
pulse_len = 1e-6
symbol_rate = 10e6
code = "1001100110"

[[signal]]
kind = "lfm"
carrier_hz = 14.5e9
pulse_len = 1e-6
bandwidth_hz = 8e6
"#;

fn nyfr(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nyfr"))
        .args(args)
        .env("NYFR_OUT_DIR", out)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn data_rows(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().filter(|l| !l.starts_with('#')).map(str::to_owned).collect()
}

#[test]
fn missing_scene_file_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = nyfr(dir.path(), &["simulate", "--scene", "does/not/exist.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not found"));
}

#[test]
fn bad_flag_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(nyfr(dir.path(), &["reconstruct", "--method", "magic"]).status.code(), Some(2));
    assert_eq!(nyfr(dir.path(), &["simulate", "--nz-count", "0"]).status.code(), Some(2));
}

#[test]
fn simulate_reports_the_default_receiver() {
    let dir = tempfile::tempdir().unwrap();
    let o = nyfr(dir.path(), &["simulate"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("N = 32000"), "{text}");
    assert!(text.contains("M = 4000"));
    assert!(text.contains("K_Z = 8"));
    for nz in ["NZ 0", "NZ 2", "NZ 4"] {
        assert!(text.contains(nz), "{text}");
    }
    let dump = fs::read(dir.path().join("record.bin")).unwrap();
    let (samples, rate) = read_samples(&dump[..]).unwrap();
    assert_eq!(samples.len(), 4000);
    assert_eq!(rate, 4e9);
    let header = String::from_utf8_lossy(&dump[..400]);
    assert!(header.contains("# build: ") && header.contains("# seed: 0"));
    assert!(fs::read_to_string(dir.path().join("spectrogram.csv")).unwrap().contains("time_s,"));
}

fn ridge_spread(csv: &Path) -> usize {
    let ridge: Vec<usize> = data_rows(csv)
        .iter()
        .skip(1)
        .map(|row| {
            let vals: Vec<f64> = row.split(',').skip(1).map(|v| v.parse().unwrap()).collect();
            (0..vals.len()).max_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap()
        })
        .collect();
    ridge.iter().max().unwrap() - ridge.iter().min().unwrap()
}

#[test]
fn unmodulated_lo_gives_flat_alias_lines() {
    let scene = "seed = 1\n[receiver]\nadc_rate_hz = 4e9\nnz_count = 8\nn_samples = 32000\nmod_amplitude = 2.0\nmod_freq_hz = 20e6\n\
                 [[signal]]\nkind = \"mp\"\ncarrier_hz = 15.9e9\npulse_len = 1e-6\n";
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tone.toml");
    fs::write(&path, scene).unwrap();
    let flat = dir.path().join("flat");
    let o = nyfr(&flat, &["simulate", "--scene", path.to_str().unwrap(), "--no-modulation"]);
    assert!(o.status.success());
    assert_eq!(ridge_spread(&flat.join("spectrogram.csv")), 0);
    let wavy = dir.path().join("wavy");
    // NZ 4 with A = 6: the line swings by ±480 MHz, about ±4 frame bins
    assert!(nyfr(&wavy, &["simulate", "--scene", path.to_str().unwrap(), "--mod-amplitude", "6"]).status.success());
    assert!(ridge_spread(&wavy.join("spectrogram.csv")) >= 6);
}

#[test]
fn reconstruct_finds_the_three_emitters() {
    let dir = tempfile::tempdir().unwrap();
    let scene = dir.path().join("fig.toml");
    fs::write(&scene, FIG_SCENE).unwrap();
    let o = nyfr(dir.path(), &["reconstruct", "--scene", scene.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = data_rows(&dir.path().join("detections_proposed.csv"));
    assert_eq!(rows[0], "rank,freq_hz,power,nz_index");
    let top: Vec<f64> = rows[1..4].iter().map(|r| r.split(',').nth(1).unwrap().parse().unwrap()).collect();
    let bin = 32e9 / 63999.0;
    for want in [1.3e9, 7.8e9, 14.5e9] {
        assert!(top.iter().any(|f| (f - want).abs() <= 2.0 * bin), "{want:e} not in {top:?}");
    }
    let spectrum = fs::read_to_string(dir.path().join("spectrum_proposed.csv")).unwrap();
    assert!(spectrum.contains("# config: seed = 4"));
    assert!(spectrum.contains("freq_hz,power"));
}

#[test]
fn recorded_dump_reproduces_the_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let scene = dir.path().join("fig.toml");
    fs::write(&scene, FIG_SCENE).unwrap();
    let s = scene.to_str().unwrap();
    assert!(nyfr(dir.path(), &["simulate", "--scene", s]).status.success());
    let direct = dir.path().join("direct");
    assert!(nyfr(&direct, &["reconstruct", "--scene", s]).status.success());
    let replay = dir.path().join("replay");
    let record = dir.path().join("record.bin");
    assert!(nyfr(&replay, &["reconstruct", "--scene", s, "--record", record.to_str().unwrap()]).status.success());
    let read = |p: &Path| read_spectrum_csv(fs::read_to_string(p).unwrap().as_bytes()).unwrap();
    assert_eq!(read(&direct.join("spectrum_proposed.csv")), read(&replay.join("spectrum_proposed.csv")));
}

#[test]
fn dense_baseline_over_the_cap_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let o = nyfr(dir.path(), &["baseline", "--block", "32000"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("capped at N = 2048"));
}

#[test]
fn small_baseline_runs() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "baseline", "--adc-rate", "500e6", "--n-samples", "4000", "--mod-freq", "25e6", "--block", "160",
        "--smoothing-bins", "1", "--merge-bins", "2",
    ];
    // the demo carriers lie outside the 500 MHz receiver's band
    let scene = dir.path().join("s.toml");
    fs::write(
        &scene,
        "[receiver]\nadc_rate_hz = 500e6\nnz_count = 8\nn_samples = 4000\nmod_amplitude = 2.0\nmod_freq_hz = 25e6\n\
         [[signal]]\nkind = \"mp\"\ncarrier_hz = 1.1e9\npulse_len = 1e-6\n",
    )
    .unwrap();
    let mut all: Vec<&str> = args.to_vec();
    all.extend(["--scene", scene.to_str().unwrap()]);
    let o = nyfr(dir.path(), &all);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("N_b = 160, M_b = 20, L = 25"), "{text}");
    assert!(text.contains("cond(Phi)"));
}

#[test]
fn sweep_smoke_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let out = dir.path().join(name);
        let o = nyfr(
            &out,
            &["--threads", threads, "sweep", "--snr-db", "-5,10", "--trials", "3", "--seed", "9", "--carrier-range", "2e9,18e9"],
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        // wall time is the last column
        data_rows(&out.join("sweep.csv"))
            .iter()
            .map(|r| r.rsplit_once(',').unwrap().0.to_string())
            .collect::<Vec<_>>()
    };
    let a = run("a", "1");
    let b = run("b", "2");
    assert_eq!(a.len(), 3);
    assert_eq!(a[0], "snr_db,pulse_len_s,lfm_bandwidth_hz,mod_freq_hz,mod_amplitude,eligible,total,failed,accuracy_pct,mean_flops");
    assert_eq!(a, b);
}

#[test]
fn flops_table_reproduces_the_totals() {
    let dir = tempfile::tempdir().unwrap();
    let o = nyfr(dir.path(), &["flops", "--csv"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let total = |prefix: &str| -> f64 {
        let line = text.lines().find(|l| l.starts_with(prefix)).unwrap_or_else(|| panic!("{prefix} in {text}"));
        line.rsplit(',').next().unwrap().parse().unwrap()
    };
    assert!((8.3e6..=8.5e6).contains(&total("proposed,32000,4000,1,10,")));
    assert!((0.9e10..=1.2e10).contains(&total("proposed,32000,4000,1,22400,")));
    assert!(total("time_domain,32000,4000,100,1,") >= 5e11);
}
