//! Peak picking on reconstructed spectra and the per-trial success test.
//!
//! The spectrum is smoothed with a circular moving average and thresholded
//! at `median + γ·MAD`. Each local maximum is located at the power centroid
//! of the above-threshold run containing it. Maxima closer than the merge
//! radius to a stronger one are folded into it, and the detection sits at the
//! weighted centroid of its members. This keeps wideband emitters on their
//! carrier: an LFM plateau yields one centred peak, and a balanced BPSK code,
//! whose spectrum has a null at the carrier, yields one detection between its
//! two lobes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reconstruction::PowerSpectrum;
use crate::waveforms::{Modulation, SignalSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionPolicy {
    pub freq_tol_bins: usize,
    pub threshold_gamma: f64,
    /// Moving-average width applied before peak picking.
    pub smoothing_bins: usize,
    /// Unmatched detections tolerated among the strongest `K`.
    pub max_spurious: usize,
    /// Centroid runs are clipped to this many bins either side of the peak.
    pub region_bins: usize,
    /// Maxima within this many bins of a stronger one join its detection.
    /// The default spans both main-lobe halves of a 10 Msym/s BPSK pulse
    /// (20 MHz) at 0.5 MHz bins.
    pub merge_bins: usize,
}

impl Default for DetectionPolicy {
    fn default() -> Self {
        Self { freq_tol_bins: 2, threshold_gamma: 5.0, smoothing_bins: 9, max_spurious: 0, region_bins: 32, merge_bins: 40 }
    }
}

impl DetectionPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.freq_tol_bins == 0 {
            return Err(Error::InvalidPolicy("freq_tol_bins must be at least 1".into()));
        }
        if !(self.threshold_gamma > 0.0 && self.threshold_gamma.is_finite()) {
            return Err(Error::InvalidPolicy("threshold_gamma must be positive".into()));
        }
        if self.smoothing_bins == 0 {
            return Err(Error::InvalidPolicy("smoothing_bins must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub freq_hz: f64,
    /// Smoothed power at the peak.
    pub power: f64,
    pub bin: usize,
}

/// Ground truth for one emitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthSignal {
    pub carrier_hz: f64,
    /// Band occupied around the carrier. Scene generation keeps carriers
    /// apart by it; matching uses the carrier alone.
    pub occupied_bw_hz: f64,
}

impl TruthSignal {
    pub fn tone(carrier_hz: f64) -> Self {
        Self { carrier_hz, occupied_bw_hz: 0.0 }
    }

    /// MP: a line; BPSK: the main lobe `±symbol_rate`; LFM: the swept band.
    pub fn from_spec(spec: &SignalSpec) -> Self {
        let occupied_bw_hz = match &spec.modulation {
            Modulation::Mp => 0.0,
            Modulation::Bpsk { symbol_rate, .. } => 2.0 * symbol_rate,
            Modulation::Lfm { bandwidth_hz } => *bandwidth_hz,
        };
        Self { carrier_hz: spec.carrier_hz, occupied_bw_hz }
    }

    pub fn matches(&self, freq_hz: f64, tol_hz: f64) -> bool {
        (freq_hz - self.carrier_hz).abs() <= tol_hz
    }
}

fn median(v: &mut [f64]) -> f64 {
    let mid = v.len() / 2;
    let (_, m, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
    let m = *m;
    if v.len() % 2 == 1 {
        m
    } else {
        let below = v[..mid].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (m + below)
    }
}

/// Circular moving average of width `w`.
pub fn smooth(values: &[f64], w: usize) -> Vec<f64> {
    let n = values.len();
    if w <= 1 || n == 0 {
        return values.to_vec();
    }
    let half = (w / 2) as i64;
    let mut acc: f64 = (-half..-half + w as i64).map(|i| values[i.rem_euclid(n as i64) as usize]).sum();
    let mut out = Vec::with_capacity(n);
    for j in 0..n as i64 {
        out.push(acc / w as f64);
        let leave = (j - half).rem_euclid(n as i64) as usize;
        let enter = (j - half + w as i64).rem_euclid(n as i64) as usize;
        acc += values[enter] - values[leave];
    }
    out
}

/// `median + γ·MAD` of `values`.
pub fn robust_threshold(values: &[f64], gamma: f64) -> f64 {
    if values.is_empty() {
        return f64::INFINITY;
    }
    let mut v = values.to_vec();
    let med = median(&mut v);
    let mut dev: Vec<f64> = values.iter().map(|x| (x - med).abs()).collect();
    med + gamma * median(&mut dev)
}

fn circ_dist(a: usize, b: usize, n: usize) -> usize {
    let d = a.abs_diff(b);
    d.min(n - d)
}

pub fn detect_peaks(ps: &PowerSpectrum, policy: &DetectionPolicy) -> Result<Vec<Detection>> {
    policy.validate()?;
    let n = ps.values.len();
    if n < 3 || ps.values.iter().any(|v| !v.is_finite()) {
        return Ok(Vec::new());
    }
    let s = smooth(&ps.values, policy.smoothing_bins);
    let thr = robust_threshold(&s, policy.threshold_gamma);
    let mut peaks: Vec<usize> = (0..n)
        .filter(|&j| {
            let l = s[(j + n - 1) % n];
            let r = s[(j + 1) % n];
            s[j] > thr && s[j] > l && s[j] >= r
        })
        .collect();
    peaks.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then(a.cmp(&b)));

    let located: Vec<(usize, f64, f64)> = peaks
        .into_iter()
        .map(|p| {
            let mut wsum = s[p] - thr;
            let mut fsum = 0.0;
            for dir in [-1i64, 1] {
                for step in 1..=policy.region_bins as i64 {
                    let j = (p as i64 + dir * step).rem_euclid(n as i64) as usize;
                    if s[j] <= thr {
                        break;
                    }
                    let w = s[j] - thr;
                    wsum += w;
                    fsum += w * (dir * step) as f64;
                }
            }
            (p, fsum / wsum, s[p] - thr)
        })
        .collect();

    // (anchor bin, Σ w·offset, Σ w); offsets are relative to the anchor
    let radius = policy.freq_tol_bins.max(policy.smoothing_bins).max(policy.merge_bins);
    let mut clusters: Vec<(usize, f64, f64)> = Vec::new();
    for (p, off, w) in located {
        let half = n as i64 / 2;
        match clusters.iter_mut().find(|c| circ_dist(c.0, p, n) <= radius) {
            Some(c) => {
                let rel = (p as i64 - c.0 as i64 + half).rem_euclid(n as i64) - half;
                c.1 += w * (rel as f64 + off);
                c.2 += w;
            }
            None => clusters.push((p, w * off, w)),
        }
    }

    Ok(clusters
        .into_iter()
        .map(|(p, fsum, wsum)| Detection {
            freq_hz: ps.freq_of_bin(p) + fsum / wsum * ps.bin_hz,
            power: s[p],
            bin: p,
        })
        .collect())
}

/// A trial succeeds when every emitter is matched by some detection and at
/// most `max_spurious` of the `K` strongest detections match no emitter.
pub fn is_eligible(detections: &[Detection], truth: &[TruthSignal], policy: &DetectionPolicy, bin_hz: f64) -> bool {
    if truth.is_empty() {
        return false;
    }
    let tol = policy.freq_tol_bins as f64 * bin_hz;
    let all_found = truth.iter().all(|t| detections.iter().any(|d| t.matches(d.freq_hz, tol)));
    let spurious = detections
        .iter()
        .take(truth.len())
        .filter(|d| !truth.iter().any(|t| t.matches(d.freq_hz, tol)))
        .count();
    all_found && spurious <= policy.max_spurious
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::flops::Method;

    fn spectrum(values: Vec<f64>) -> PowerSpectrum {
        PowerSpectrum { values, start_hz: 0.0, bin_hz: 1.0, method: Method::Proposed, imag_residue: 0.0, flops: None }
    }

    fn det(f: f64, p: f64) -> Detection {
        Detection { freq_hz: f, power: p, bin: f as usize }
    }

    #[test]
    fn flat_spectrum_has_no_peaks() {
        let d = detect_peaks(&spectrum(vec![3.0; 200]), &DetectionPolicy::default()).unwrap();
        assert!(d.is_empty());
    }

    #[test]
    fn single_delta() {
        let mut v = vec![0.0; 200];
        v[57] = 10.0;
        let d = detect_peaks(&spectrum(v), &DetectionPolicy::default()).unwrap();
        assert_eq!(d.len(), 1);
        assert!((d[0].freq_hz - 57.0).abs() < 1e-12);
    }

    #[test]
    fn peaks_sorted_and_suppressed() {
        let mut rng_state = 1u64;
        let mut v: Vec<f64> = (0..1000)
            .map(|_| {
                rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1);
                (rng_state >> 40) as f64 / (1u64 << 24) as f64
            })
            .collect();
        v[100] += 50.0;
        v[102] += 30.0; // within the suppression radius of 100
        v[600] += 80.0;
        let pol = DetectionPolicy { smoothing_bins: 1, ..Default::default() };
        let d = detect_peaks(&spectrum(v), &pol).unwrap();
        assert_eq!(d.len(), 2, "{d:?}");
        assert_eq!(d[0].bin, 600);
        assert_eq!(d[1].bin, 100);
    }

    #[test]
    fn flat_top_band_is_located_at_its_centre() {
        let mut v = vec![0.0; 400];
        for x in v.iter_mut().skip(200).take(17) {
            *x = 5.0;
        }
        v[203] = 6.0; // ripple away from the centre
        let d = detect_peaks(&spectrum(v), &DetectionPolicy::default()).unwrap();
        assert_eq!(d.len(), 1);
        assert!((d[0].freq_hz - 208.0).abs() < 1.0, "{d:?}");
    }

    #[test]
    fn symmetric_lobes_merge_onto_the_centre() {
        let mut v = vec![0.0; 400];
        for (c, h) in [(195usize, 5.0), (205, 4.0)] {
            for d in 0..5 {
                v[c + d - 2] = h;
            }
        }
        let pol = DetectionPolicy { smoothing_bins: 1, ..Default::default() };
        let d = detect_peaks(&spectrum(v.clone()), &pol).unwrap();
        assert_eq!(d.len(), 1);
        assert!((d[0].freq_hz - (195.0 * 5.0 + 205.0 * 4.0) / 9.0).abs() < 1e-9, "{d:?}");
        let apart = DetectionPolicy { merge_bins: 0, ..pol };
        assert_eq!(detect_peaks(&spectrum(v), &apart).unwrap().len(), 2);
    }

    #[test]
    fn eligibility_rules() {
        let pol = DetectionPolicy::default();
        let truth = [TruthSignal::tone(100.0), TruthSignal::tone(300.0)];
        assert!(is_eligible(&[det(100.0, 9.0), det(300.0, 8.0)], &truth, &pol, 1.0));
        assert!(is_eligible(&[det(101.5, 9.0), det(298.0, 8.0), det(700.0, 1.0)], &truth, &pol, 1.0));
        assert!(!is_eligible(&[det(100.0, 9.0)], &truth, &pol, 1.0));
        assert!(!is_eligible(&[det(500.0, 20.0), det(100.0, 9.0), det(300.0, 8.0)], &truth, &pol, 1.0));
        let lenient = DetectionPolicy { max_spurious: 1, ..pol };
        assert!(is_eligible(&[det(500.0, 20.0), det(100.0, 9.0), det(300.0, 8.0)], &truth, &lenient, 1.0));
        assert!(!is_eligible(&[det(100.0, 1.0)], &[], &pol, 1.0));
        let wide = [TruthSignal { carrier_hz: 100.0, occupied_bw_hz: 10.0 }];
        // a detection inside the occupied band but off the carrier is a miss
        assert!(is_eligible(&[det(101.5, 1.0)], &wide, &pol, 1.0));
        assert!(!is_eligible(&[det(104.0, 1.0)], &wide, &pol, 1.0));
    }

    #[test]
    fn truth_from_specs() {
        assert_eq!(TruthSignal::from_spec(&SignalSpec::mp(1e9, 0.0, 1e-7)).occupied_bw_hz, 0.0);
        assert_eq!(TruthSignal::from_spec(&SignalSpec::bpsk(1e9, 0.0, 1e-7, 1e7, "10")).occupied_bw_hz, 2e7);
        assert_eq!(TruthSignal::from_spec(&SignalSpec::lfm(1e9, 0.0, 1e-7, 8e6)).occupied_bw_hz, 8e6);
    }

    #[test]
    fn helpers() {
        assert_eq!(smooth(&[0.0, 3.0, 0.0, 0.0], 3), vec![1.0, 1.0, 1.0, 0.0]);
        assert_eq!(robust_threshold(&[1.0, 2.0, 3.0, 4.0, 100.0], 2.0), 5.0);
        let bad = DetectionPolicy { freq_tol_bins: 0, ..Default::default() };
        assert!(detect_peaks(&spectrum(vec![0.0; 10]), &bad).is_err());
    }
}
