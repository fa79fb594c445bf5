//! Short-time Fourier spectrogram of the low-rate ADC output.
//!
//! With a modulated LO every alias line carries a scaled copy of `θ(t)`, so
//! each emitter traces a sinusoid whose depth grows with its zone index. With
//! `θ ≡ 0` all lines are flat.

use std::f64::consts::PI;
use std::io::Write;

use crate::error::{Error, Result};
use crate::kernels::fft::fft_in_place;
use crate::C64;

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    /// Frame centre times in seconds.
    pub times: Vec<f64>,
    /// Bin frequencies, DC-centred, ascending.
    pub freqs: Vec<f64>,
    /// `power[frame][bin]`.
    pub power: Vec<Vec<f64>>,
}

impl Spectrogram {
    /// Strongest bin of each frame.
    pub fn ridge(&self) -> Vec<usize> {
        self.power
            .iter()
            .map(|row| row.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map_or(0, |(j, _)| j))
            .collect()
    }

    /// Matrix CSV: a `time_s` column, then one column per frequency bin.
    pub fn write_csv<W: Write>(&self, mut w: W, meta: &[(String, String)]) -> Result<()> {
        for (k, v) in meta {
            writeln!(w, "# {k}: {}", v.replace('\n', " | "))?;
        }
        write!(w, "time_s")?;
        for f in &self.freqs {
            write!(w, ",{f:.1}")?;
        }
        writeln!(w)?;
        for (t, row) in self.times.iter().zip(&self.power) {
            write!(w, "{t:.6e}")?;
            for p in row {
                write!(w, ",{p:.6e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Hann-windowed STFT with frames of `window` samples every `hop` samples.
pub fn stft(samples: &[C64], sample_rate: f64, window: usize, hop: usize) -> Result<Spectrogram> {
    if window == 0 || hop == 0 || window > samples.len() {
        return Err(Error::InvalidConfig(format!(
            "STFT window {window} / hop {hop} invalid for {} samples",
            samples.len()
        )));
    }
    let taper: Vec<f64> = (0..window).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / window as f64).cos()).collect();
    let half = window / 2;
    let freqs = (0..window).map(|j| (j as f64 - half as f64) * sample_rate / window as f64).collect();
    let mut times = Vec::new();
    let mut power = Vec::new();
    let mut buf = vec![C64::new(0.0, 0.0); window];
    let mut start = 0;
    while start + window <= samples.len() {
        for (b, (x, w)) in buf.iter_mut().zip(samples[start..].iter().zip(&taper)) {
            *b = x * w;
        }
        fft_in_place(&mut buf);
        // rotate so that bin 0 is -rate/2
        power.push((0..window).map(|j| buf[(j + window - half) % window].norm_sqr()).collect());
        times.push((start as f64 + window as f64 / 2.0) / sample_rate);
        start += hop;
    }
    Ok(Spectrogram { times, freqs, power })
}
