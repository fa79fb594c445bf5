use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::kernels::autocorr::AutocorrSeq;
use crate::kernels::fft;
use crate::kernels::flops::{FlopReport, Method};
use crate::waveforms::GridSpec;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LagWindow {
    #[default]
    Rect,
    /// `w[k] = 1 - |k| / N`
    Bartlett,
}

impl LagWindow {
    pub fn weight(&self, k: i64, n_ref: usize) -> f64 {
        match self {
            LagWindow::Rect => 1.0,
            LagWindow::Bartlett => 1.0 - k.unsigned_abs() as f64 / n_ref as f64,
        }
    }
}

/// Real spectrum on the bins `f_j = start_hz + j * bin_hz`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSpectrum {
    pub values: Vec<f64>,
    pub start_hz: f64,
    pub bin_hz: f64,
    pub method: Method,
    /// `max |Im| / max |Re|` of the transform before the imaginary part was dropped.
    pub imag_residue: f64,
    pub flops: Option<FlopReport>,
}

impl PowerSpectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn freq_of_bin(&self, j: usize) -> f64 {
        self.start_hz + j as f64 * self.bin_hz
    }

    /// Nearest bin, or `None` outside the covered band.
    pub fn bin_of_freq(&self, f: f64) -> Option<usize> {
        let j = ((f - self.start_hz) / self.bin_hz).round();
        (j >= 0.0 && (j as usize) < self.values.len()).then_some(j as usize)
    }

    pub fn argmax(&self) -> Option<usize> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(j, _)| j)
    }

    pub fn frequencies(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(|j| self.freq_of_bin(j))
    }
}

/// Fourier transform of a lag sequence over its `2N-1` lags:
/// `P(f_j) = Σ_k w[k] r[k] exp(-j 2π f_j k / rate)`, `f_j = start + j·rate/(2N-1)`.
pub fn power_spectrum(r: &AutocorrSeq, window: LagWindow, grid: &GridSpec) -> Result<PowerSpectrum> {
    let len = r.len();
    let n_ref = r.n_ref();
    let rate = grid.sample_rate;
    let mut buf = vec![C64::new(0.0, 0.0); len];
    let shift_cycles = grid.band_start_hz / rate;
    for (i, &v) in r.lags().iter().enumerate() {
        let k = i as i64 - r.max_lag();
        let cyc = shift_cycles * k as f64;
        let rot = C64::from_polar(1.0, -2.0 * std::f64::consts::PI * (cyc - cyc.floor()));
        buf[k.rem_euclid(len as i64) as usize] = v * rot * window.weight(k, n_ref);
    }
    fft::fft_in_place(&mut buf);
    let max_re = buf.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
    let max_im = buf.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let imag_residue = if max_re > 0.0 { max_im / max_re } else { max_im };
    Ok(PowerSpectrum {
        values: buf.iter().map(|z| z.re).collect(),
        start_hz: grid.band_start_hz,
        bin_hz: rate / len as f64,
        method: Method::Proposed,
        imag_residue,
        flops: None,
    })
}
