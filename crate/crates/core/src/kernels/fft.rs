//! Thin wrappers over `rustfft` with a per-thread plan cache.
//!
//! `fft` is unnormalised, `ifft` divides by the length so that
//! `ifft(fft(x)) == x`.

use std::cell::RefCell;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::C64;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    })
}

pub fn fft_in_place(buf: &mut [C64]) {
    if buf.len() > 1 {
        plan(buf.len(), false).process(buf);
    }
}

pub fn ifft_in_place(buf: &mut [C64]) {
    let n = buf.len();
    if n > 1 {
        plan(n, true).process(buf);
    }
    if n > 0 {
        let s = 1.0 / n as f64;
        buf.iter_mut().for_each(|z| *z *= s);
    }
}

pub fn fft(x: &[C64]) -> Vec<C64> {
    let mut buf = x.to_vec();
    fft_in_place(&mut buf);
    buf
}

pub fn ifft(x: &[C64]) -> Vec<C64> {
    let mut buf = x.to_vec();
    ifft_in_place(&mut buf);
    buf
}

/// Smallest `m >= n` whose only prime factors are 2, 3, 5 and 7.
pub fn next_fast_len(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5, 7] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}
