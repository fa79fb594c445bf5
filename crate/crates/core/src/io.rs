//! File formats.
//!
//! Raw sample dumps are binary: a short text header terminated by a line
//! `end`, then interleaved little-endian `f64` pairs `(re, im)`.
//!
//! ```text
//! nyfr-samples 1
//! # seed: 7
//! n 32000
//! sample_rate 3.2e10
//! end
//! <n × 16 bytes>
//! ```
//!
//! Analysis outputs are CSV. Metadata goes first as `# key: value` comment
//! lines, then one header row with fixed column names.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::reconstruction::PowerSpectrum;
use crate::sweep::AccuracyResult;
use crate::C64;

const MAGIC: &str = "nyfr-samples 1";

/// Header lines starting with `#` carry metadata and are skipped on reading.
pub fn write_samples<W: Write>(mut w: W, samples: &[C64], sample_rate: f64, meta: &[(String, String)]) -> Result<()> {
    writeln!(w, "{MAGIC}")?;
    write_meta(&mut w, meta)?;
    write!(w, "n {}\nsample_rate {sample_rate:e}\nend\n", samples.len())?;
    let mut buf = Vec::with_capacity(16 * samples.len());
    for z in samples {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Samples and sample rate from a dump written by [`write_samples`].
pub fn read_samples<R: BufRead>(mut r: R) -> Result<(Vec<C64>, f64)> {
    let bad = |m: &str| Error::Parse(format!("sample dump: {m}"));
    let mut line = String::new();
    r.read_line(&mut line)?;
    if line.trim_end() != MAGIC {
        return Err(bad("missing header"));
    }
    let (mut n, mut rate) = (None, None);
    loop {
        line.clear();
        if r.read_line(&mut line)? == 0 {
            return Err(bad("header not terminated"));
        }
        if line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        match (parts.next(), parts.next()) {
            (Some("end"), None) => break,
            (Some("n"), Some(v)) => n = Some(v.parse::<usize>().map_err(|_| bad("bad n"))?),
            (Some("sample_rate"), Some(v)) => rate = Some(v.parse::<f64>().map_err(|_| bad("bad sample_rate"))?),
            _ => return Err(bad(&format!("unexpected header line {:?}", line.trim_end()))),
        }
    }
    let n = n.ok_or_else(|| bad("n missing"))?;
    let rate = rate.ok_or_else(|| bad("sample_rate missing"))?;
    let mut bytes = vec![0u8; 16 * n];
    r.read_exact(&mut bytes).map_err(|_| bad("truncated payload"))?;
    let f = |c: &[u8]| f64::from_le_bytes(c.try_into().expect("8 bytes"));
    let samples = bytes.chunks_exact(16).map(|c| C64::new(f(&c[..8]), f(&c[8..]))).collect();
    Ok((samples, rate))
}

fn write_meta<W: Write>(w: &mut W, meta: &[(String, String)]) -> Result<()> {
    for (k, v) in meta {
        for (i, line) in v.lines().enumerate() {
            if i == 0 {
                writeln!(w, "# {k}: {line}")?;
            } else {
                writeln!(w, "#   {line}")?;
            }
        }
    }
    Ok(())
}

pub const SPECTRUM_HEADER: &str = "freq_hz,power";

/// Spectrum as `freq_hz,power` rows.
pub fn write_spectrum_csv<W: Write>(mut w: W, ps: &PowerSpectrum, meta: &[(String, String)]) -> Result<()> {
    write_meta(&mut w, meta)?;
    writeln!(w, "{SPECTRUM_HEADER}")?;
    for (f, p) in ps.frequencies().zip(&ps.values) {
        writeln!(w, "{f:.6},{p:.9e}")?;
    }
    Ok(())
}

/// `(freq_hz, power)` rows of a spectrum CSV, skipping comments.
pub fn read_spectrum_csv<R: BufRead>(r: R) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.starts_with('#') || line == SPECTRUM_HEADER || line.is_empty() {
            continue;
        }
        let (f, p) = line.split_once(',').ok_or_else(|| Error::Parse(format!("bad row {line:?}")))?;
        let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number {s:?}")));
        out.push((parse(f)?, parse(p)?));
    }
    Ok(out)
}

pub fn write_sweep_csv<W: Write>(mut w: W, results: &[AccuracyResult], meta: &[(String, String)]) -> Result<()> {
    write_meta(&mut w, meta)?;
    writeln!(w, "{}", AccuracyResult::CSV_HEADER)?;
    for r in results {
        writeln!(w, "{}", r.csv_row())?;
    }
    Ok(())
}
