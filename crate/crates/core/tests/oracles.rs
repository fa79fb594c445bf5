//! Property tests of the numerical kernels against direct-sum oracles.

use std::f64::consts::PI;

use nyfr_core::kernels::autocorr::autocorr_direct;
use nyfr_core::kernels::fft::{fft, ifft};
use nyfr_core::kernels::nufft::nudft_direct;
use nyfr_core::*;
use proptest::prelude::*;

fn c64() -> impl Strategy<Value = C64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| C64::new(re, im))
}

fn rel_err(a: &[C64], b: &[C64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den.max(1e-300)).sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn nufft_matches_direct_sum(
        y in prop::collection::vec(c64(), 16..128),
        jitter in prop::collection::vec(-0.45f64..0.45, 128),
        log_n in 10u32..13,
        f_start in -0.6f64..-0.4,
    ) {
        // M samples at roughly unit rate with random jitter, N-point grid
        // spanning [f_start, f_start + 8) in units of the mean rate
        let m = y.len();
        let fs = 1e9;
        let instants: Vec<f64> = (0..m).map(|i| (i as f64 + jitter[i]) / fs).collect();
        let n = 1usize << log_n;
        let grid = FreqGrid::new(f_start * fs, 8.0 * fs / n as f64, n);
        let fast = nufft_time_to_freq(&y, &instants, &grid, &NufftConfig::default()).unwrap();
        let slow = nudft_direct(&y, &instants, &grid);
        prop_assert!(rel_err(&fast, &slow) <= 1e-6, "rel err {}", rel_err(&fast, &slow));
    }

    #[test]
    fn autocorr_fft_matches_direct(x in prop::collection::vec(c64(), 1..200)) {
        let a = autocorr_fft(&x).unwrap();
        let b = autocorr_direct(&x).unwrap();
        let scale = b.lag(0).norm().max(1e-300);
        for (u, v) in a.lags().iter().zip(b.lags()) {
            prop_assert!((u - v).norm() <= 1e-10 * scale);
        }
    }

    #[test]
    fn autocorr_is_hermitian(x in prop::collection::vec(c64(), 1..300)) {
        let r = autocorr_fft(&x).unwrap();
        prop_assert!(r.hermitian_residual() <= 1e-12 * r.lag(0).norm().max(1e-300));
    }

    #[test]
    fn divide_undoes_multiply(
        rs in prop::collection::vec(c64(), 64),
        phase in 0.0f64..(2.0 * PI),
        amp in 0.5f64..3.0,
        fmod in 1e6f64..50e6,
    ) {
        let cfg = NyfrConfig::new(LoSpec::sinusoid(1e9, amp, fmod), 4, 256).unwrap();
        let r_p = pulse_autocorr_ref(&cfg).unwrap();
        let n = r_p.n_ref();
        // any Hermitian lag sequence
        let r_s = AutocorrSeq::from_fn(n, |k| {
            let v = rs[k.unsigned_abs() as usize % rs.len()] * C64::from_polar(1.0, phase * k.unsigned_abs() as f64);
            match k {
                0 => C64::new(v.re, 0.0),
                k if k > 0 => v,
                _ => v.conj(),
            }
        });
        let prod = AutocorrSeq::new(r_s.lags().iter().zip(r_p.lags()).map(|(a, b)| a * b).collect(), n).unwrap();
        let policy = RegularizationPolicy::default();
        let back = divide_autocorr(&prod, &r_p, &policy).unwrap();
        let thr = policy.epsilon_rel * r_p.lags().iter().map(|z| z.norm()).fold(0.0, f64::max);
        for ((b, s), p) in back.lags().iter().zip(r_s.lags()).zip(r_p.lags()) {
            if p.norm() > thr {
                prop_assert!((b - s).norm() <= 1e-8 * s.norm().max(1.0));
            }
        }
    }

    #[test]
    fn fft_round_trip_and_parseval(x in prop::collection::vec(c64(), 1..500)) {
        let f = fft(&x);
        let back = ifft(&f);
        prop_assert!(rel_err(&back, &x) <= 1e-12);
        let ex: f64 = x.iter().map(|z| z.norm_sqr()).sum();
        let ef: f64 = f.iter().map(|z| z.norm_sqr()).sum::<f64>() / x.len() as f64;
        prop_assert!((ex - ef).abs() <= 1e-10 * ex.max(1e-300));
    }

    #[test]
    fn proposed_flops_grow_with_n_and_k(n in 64usize..100_000, k in 1usize..100) {
        let base = flops(Method::Proposed, n, n / 8, 1, k).unwrap().total_flops;
        prop_assert!(flops(Method::Proposed, n + 1, n / 8, 1, k).unwrap().total_flops > base);
        prop_assert!(flops(Method::Proposed, n, n / 8, 1, k + 1).unwrap().total_flops > base);
    }

    #[test]
    fn baseline_flops_grow_with_every_size(n in 64usize..10_000, m in 8usize..1000, l in 1usize..200) {
        for method in [Method::TimeDomain, Method::FreqDomain] {
            let base = flops(method, n, m, l, 1).unwrap().total_flops;
            prop_assert!(flops(method, n, m + 1, l, 1).unwrap().total_flops > base);
            prop_assert!(flops(method, n, m, l + 1, 1).unwrap().total_flops > base);
            prop_assert!(flops(method, n + 1, m, l, 1).unwrap().total_flops > base);
        }
    }
}

#[test]
fn pipeline_is_deterministic() {
    let cfg = NyfrConfig::new(LoSpec::sinusoid(512e6, 2.0, 16e6), 8, 4096).unwrap();
    let s = waveforms::generate(&SignalSpec::lfm(1.1e9, 1e-7, 5e-7, 10e6), &cfg.grid).unwrap();
    let run = || {
        let rec = acquire(&add_awgn(&s, 0.0, 11).unwrap(), &cfg).unwrap();
        proposed_pipeline(&rec, &ProposedOptions::default()).unwrap().values
    };
    assert_eq!(run(), run());
}
