//! Least-squares covariance baselines.
//!
//! Time domain: `r_s = ((A* ⊗ A) C)† vec(R_y)`. The `M² × (2N-1)` system
//! matrix `Φ` is never formed. Its Gram matrix is the 2-D autocorrelation
//! of `Q = Aᴴ A`,
//! `(ΦᴴΦ)[k, k'] = Σ_{n,p} Q[n, p] conj(Q[n-k, p-k'])`,
//! and `Φᴴ vec(R)` is a sum of row cross-correlations of `A` and `R A`.
//!
//! Frequency domain: `r_s(ω) = (B* ⊙ B)† vec(R_y(ω))` with
//! `B = DFT_M · A · IDFT_N`; its Gram matrix is `|BᴴB|²` element-wise.
//!
//! Both normal-equation systems are solved by a truncated eigen
//! decomposition when small, and by conjugate gradients otherwise.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::proposed::{pulse_key, PulseKey};
use super::sensing::{build_sensing_matrix, SensingMatrixSpec};
use super::spectrum::{power_spectrum, LagWindow, PowerSpectrum};
use crate::error::{Error, Result};
use crate::frontend::{MeasurementRecord, NyfrConfig};
use crate::kernels::autocorr::AutocorrSeq;
use crate::kernels::fft;
use crate::kernels::flops::{flops, Method};
use crate::par;
use crate::waveforms::GridSpec;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineOptions {
    /// Largest Nyquist block length accepted by the dense baselines.
    pub dense_cap: usize,
    /// Systems up to this dimension are solved by eigen decomposition.
    pub eigen_max_dim: usize,
    pub cg_max_iter: usize,
    pub cg_rel_tol: f64,
    pub window: LagWindow,
}

impl Default for BaselineOptions {
    fn default() -> Self {
        Self {
            dense_cap: 2048,
            eigen_max_dim: 1100,
            cg_max_iter: 300,
            cg_rel_tol: 1e-10,
            window: LagWindow::Rect,
        }
    }
}

/// Above this condition number of `Φ` small eigenvalues are discarded.
const COND_LIMIT: f64 = 1e8;

enum GramSolve {
    Eigen { vecs: DMatrix<C64>, inv_vals: Vec<f64> },
    Cg { g: DMatrix<C64> },
}

/// Solver for `G x = h` with `G = ΦᴴΦ` Hermitian positive semi-definite.
struct NormalSolver {
    kind: GramSolve,
    condition: Option<f64>,
    rank: Option<usize>,
}

struct SolveStats {
    iterations: usize,
    rel_residual: f64,
}

impl NormalSolver {
    fn new(g: DMatrix<C64>, opts: &BaselineOptions) -> Self {
        let dim = g.nrows();
        if dim > opts.eigen_max_dim {
            return Self { kind: GramSolve::Cg { g }, condition: None, rank: None };
        }
        let eig = SymmetricEigen::new(g);
        let vals = eig.eigenvalues.as_slice();
        let lmax = vals.iter().cloned().fold(0.0, f64::max);
        let lmin = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let condition = if lmin > 0.0 { (lmax / lmin).sqrt() } else { f64::INFINITY };
        let cut = if condition <= COND_LIMIT {
            0.0
        } else {
            lmax * (dim as f64 * f64::EPSILON).max(1e-16)
        };
        let inv_vals: Vec<f64> = vals.iter().map(|&l| if l > cut && l > 0.0 { 1.0 / l } else { 0.0 }).collect();
        let rank = inv_vals.iter().filter(|&&v| v > 0.0).count();
        Self {
            kind: GramSolve::Eigen { vecs: eig.eigenvectors, inv_vals },
            condition: Some(condition),
            rank: Some(rank),
        }
    }

    fn solve(&self, h: &[C64], opts: &BaselineOptions) -> (Vec<C64>, SolveStats) {
        let h = DVector::from_column_slice(h);
        match &self.kind {
            GramSolve::Eigen { vecs, inv_vals } => {
                let mut c = vecs.ad_mul(&h);
                for (ci, &w) in c.iter_mut().zip(inv_vals) {
                    *ci *= w;
                }
                let x = vecs * c;
                (x.as_slice().to_vec(), SolveStats { iterations: 0, rel_residual: 0.0 })
            }
            GramSolve::Cg { g } => conjugate_gradient(g, &h, opts),
        }
    }
}

fn conjugate_gradient(g: &DMatrix<C64>, h: &DVector<C64>, opts: &BaselineOptions) -> (Vec<C64>, SolveStats) {
    let dim = h.len();
    let h_norm = h.norm();
    let mut x = DVector::<C64>::zeros(dim);
    if h_norm == 0.0 {
        return (x.as_slice().to_vec(), SolveStats { iterations: 0, rel_residual: 0.0 });
    }
    let mut r = h.clone();
    let mut p = r.clone();
    let mut rr = r.norm_squared();
    let mut it = 0;
    while it < opts.cg_max_iter && rr.sqrt() > opts.cg_rel_tol * h_norm {
        let gp = g * &p;
        let pgp = p.dotc(&gp).re;
        if pgp <= 0.0 {
            break;
        }
        let alpha = rr / pgp;
        x.axpy(C64::new(alpha, 0.0), &p, C64::new(1.0, 0.0));
        r.axpy(C64::new(-alpha, 0.0), &gp, C64::new(1.0, 0.0));
        let rr_new = r.norm_squared();
        p = &r + &p * C64::new(rr_new / rr, 0.0);
        rr = rr_new;
        it += 1;
    }
    (x.as_slice().to_vec(), SolveStats { iterations: it, rel_residual: rr.sqrt() / h_norm })
}

/// Outcome of a least-squares covariance solve.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineResult {
    pub r_s: AutocorrSeq,
    /// `cond(Φ)` when the system was solved by eigen decomposition.
    pub condition: Option<f64>,
    pub rank: Option<usize>,
    pub iterations: usize,
    pub rel_residual: f64,
}

impl BaselineResult {
    pub fn rank_deficient(&self) -> bool {
        matches!((self.rank, self.r_s.len()), (Some(r), len) if r < len)
    }
}

/// `(1/L) Y Yᴴ` for snapshots stored as the columns of `Y`.
pub fn sample_covariance(y: &DMatrix<C64>) -> DMatrix<C64> {
    let l = y.ncols().max(1) as f64;
    (y * y.adjoint()) / C64::new(l, 0.0)
}

fn transpose_square(buf: &mut [C64], p: usize) {
    for i in 0..p {
        for j in i + 1..p {
            buf.swap(i * p + j, j * p + i);
        }
    }
}

fn rows_fft(buf: &mut [C64], p: usize, inverse: bool) {
    par::for_each_chunk(buf, p, |_, row| {
        if inverse {
            fft::ifft_in_place(row)
        } else {
            fft::fft_in_place(row)
        }
    });
}

/// Time-domain least-squares baseline for a fixed block sensing matrix.
pub struct TimeDomainSolver {
    a: DMatrix<C64>,
    a_rows_fft: Vec<Vec<C64>>,
    fft_len: usize,
    grid: GridSpec,
    solver: NormalSolver,
    opts: BaselineOptions,
}

impl std::fmt::Debug for TimeDomainSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TimeDomainSolver")
            .field("m", &self.a.nrows())
            .field("n", &self.a.ncols())
            .field("condition", &self.solver.condition)
            .field("rank", &self.solver.rank)
            .finish()
    }
}

impl TimeDomainSolver {
    /// Offline stage: Gram matrix and its factorisation for `A` (`M × N`).
    pub fn new(a: DMatrix<C64>, grid: GridSpec, opts: &BaselineOptions) -> Result<Self> {
        let (m, n) = a.shape();
        if n != grid.n_samples {
            return Err(Error::GridMismatch(format!("A has {n} columns, grid has {}", grid.n_samples)));
        }
        if n > opts.dense_cap {
            return Err(Error::DenseCapExceeded { n, cap: opts.dense_cap });
        }
        let dim = 2 * n - 1;
        let p = fft::next_fast_len(dim);

        let q = a.ad_mul(&a);
        let mut buf = vec![C64::new(0.0, 0.0); p * p];
        for row in 0..n {
            for col in 0..n {
                buf[row * p + col] = q[(row, col)];
            }
        }
        drop(q);
        rows_fft(&mut buf, p, false);
        transpose_square(&mut buf, p);
        rows_fft(&mut buf, p, false);
        buf.iter_mut().for_each(|z| *z = C64::new(z.norm_sqr(), 0.0));
        rows_fft(&mut buf, p, true);
        transpose_square(&mut buf, p);
        rows_fft(&mut buf, p, true);
        let wrap = |k: usize| (k as i64 - (n as i64 - 1)).rem_euclid(p as i64) as usize;
        let g = DMatrix::from_fn(dim, dim, |i, j| buf[wrap(i) * p + wrap(j)]);
        drop(buf);
        let solver = NormalSolver::new(g, opts);

        let a_rows_fft = (0..m)
            .map(|i| {
                let mut row = vec![C64::new(0.0, 0.0); p];
                for (c, z) in row.iter_mut().take(n).enumerate() {
                    *z = a[(i, c)];
                }
                fft::fft_in_place(&mut row);
                row
            })
            .collect();
        Ok(Self { a, a_rows_fft, fft_len: p, grid, solver, opts: *opts })
    }

    pub fn for_config(block: &NyfrConfig, opts: &BaselineOptions) -> Result<Self> {
        if block.n() > opts.dense_cap {
            return Err(Error::DenseCapExceeded { n: block.n(), cap: opts.dense_cap });
        }
        let a = build_sensing_matrix(&SensingMatrixSpec::from_config(block)?, opts.dense_cap)?;
        Self::new(a, block.grid, opts)
    }

    /// Solver for `block`, shared between calls with the same configuration.
    pub fn cached(block: &NyfrConfig, opts: &BaselineOptions) -> Result<Arc<Self>> {
        type Key = (PulseKey, usize, usize);
        static CACHE: OnceLock<Mutex<HashMap<Key, Arc<TimeDomainSolver>>>> = OnceLock::new();
        let key = (pulse_key(block), opts.eigen_max_dim, opts.dense_cap);
        let cache = CACHE.get_or_init(Default::default);
        if let Some(s) = cache.lock().unwrap_or_else(|e| e.into_inner()).get(&key) {
            if s.opts == *opts {
                return Ok(Arc::clone(s));
            }
        }
        let solver = Arc::new(Self::for_config(block, opts)?);
        let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
        if map.len() >= 4 {
            map.clear();
        }
        map.insert(key, Arc::clone(&solver));
        Ok(solver)
    }

    pub fn sensing_matrix(&self) -> &DMatrix<C64> {
        &self.a
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn condition(&self) -> Option<f64> {
        self.solver.condition
    }

    pub fn rank(&self) -> Option<usize> {
        self.solver.rank
    }

    /// `Φ r = vec(A T(r) Aᴴ)`, returned as the `M × M` matrix.
    pub fn apply_phi(&self, r: &AutocorrSeq) -> Result<DMatrix<C64>> {
        let n = self.a.ncols();
        if r.n_ref() != n {
            return Err(Error::LengthMismatch { expected: 2 * n - 1, got: r.len() });
        }
        let t = DMatrix::from_fn(n, n, |i, j| r.lag(i as i64 - j as i64));
        Ok(&self.a * t * self.a.adjoint())
    }

    /// `Φᴴ vec(R)` for an `M × M` covariance.
    pub fn rhs(&self, r_y: &DMatrix<C64>) -> Result<Vec<C64>> {
        let (m, n) = self.a.shape();
        if r_y.shape() != (m, m) {
            return Err(Error::LengthMismatch { expected: m, got: r_y.nrows() });
        }
        let p = self.fft_len;
        let w = r_y * &self.a;
        let spectra = par::map_range(m, |i| {
            let mut row = vec![C64::new(0.0, 0.0); p];
            for (c, z) in row.iter_mut().take(n).enumerate() {
                *z = w[(i, c)];
            }
            fft::fft_in_place(&mut row);
            row
        });
        let mut acc = vec![C64::new(0.0, 0.0); p];
        for (fa, fw) in self.a_rows_fft.iter().zip(&spectra) {
            for ((s, a), b) in acc.iter_mut().zip(fa).zip(fw) {
                *s += a * b.conj();
            }
        }
        fft::ifft_in_place(&mut acc);
        Ok((0..2 * n - 1)
            .map(|i| acc[(i as i64 - (n as i64 - 1)).rem_euclid(p as i64) as usize].conj())
            .collect())
    }

    /// Online stage: covariance, right-hand side and solve.
    pub fn solve(&self, snapshots: &DMatrix<C64>) -> Result<BaselineResult> {
        let r_y = sample_covariance(snapshots);
        self.solve_covariance(&r_y)
    }

    pub fn solve_covariance(&self, r_y: &DMatrix<C64>) -> Result<BaselineResult> {
        let h = self.rhs(r_y)?;
        let (x, stats) = self.solver.solve(&h, &self.opts);
        let r_s = AutocorrSeq::new(x, self.a.ncols())?;
        Ok(BaselineResult {
            r_s,
            condition: self.solver.condition,
            rank: self.solver.rank,
            iterations: stats.iterations,
            rel_residual: stats.rel_residual,
        })
    }

    pub fn spectrum(&self, result: &BaselineResult, l_snapshots: usize) -> Result<PowerSpectrum> {
        let mut ps = power_spectrum(&result.r_s, self.opts.window, &self.grid)?;
        ps.method = Method::TimeDomain;
        ps.flops = Some(flops(Method::TimeDomain, self.a.ncols(), self.a.nrows(), l_snapshots.max(1), 1)?);
        Ok(ps)
    }
}

/// Receiver configuration of one snapshot block of `n_block` Nyquist samples.
pub fn block_config(config: &NyfrConfig, n_block: usize) -> Result<NyfrConfig> {
    NyfrConfig::new(config.lo, config.nz_count, n_block)?.with_harmonic_order(config.harmonic_order)
}

/// Split a record into consecutive snapshots of `m_block` samples (columns).
///
/// The single-`A` snapshot model needs the LO modulation to repeat every
/// block, i.e. an integer number of modulation cycles per block.
pub fn snapshots_from_record(rec: &MeasurementRecord, m_block: usize) -> Result<DMatrix<C64>> {
    if m_block == 0 || rec.m() % m_block != 0 {
        return Err(Error::InvalidConfig(format!(
            "block length {m_block} does not divide M = {}",
            rec.m()
        )));
    }
    let lo = &rec.config.lo;
    if lo.is_modulated() {
        let cycles = lo.mod_freq_hz * m_block as f64 / lo.adc_rate_hz;
        if (cycles - cycles.round()).abs() > 1e-9 || cycles.round() == 0.0 {
            return Err(Error::InvalidConfig(format!(
                "LO modulation completes {cycles} cycles per block; snapshots need a whole number"
            )));
        }
    }
    let l = rec.m() / m_block;
    Ok(DMatrix::from_column_slice(m_block, l, &rec.samples))
}

#[derive(Debug, Clone)]
pub struct BaselineOutput {
    pub result: BaselineResult,
    pub spectrum: PowerSpectrum,
}

/// Time-domain baseline on a record split into blocks of `n_block` Nyquist samples.
pub fn baseline_time_domain(rec: &MeasurementRecord, n_block: usize, opts: &BaselineOptions) -> Result<BaselineOutput> {
    let block = block_config(&rec.config, n_block)?;
    let y = snapshots_from_record(rec, block.m())?;
    let solver = TimeDomainSolver::cached(&block, opts)?;
    let result = solver.solve(&y)?;
    let spectrum = solver.spectrum(&result, y.ncols())?;
    Ok(BaselineOutput { result, spectrum })
}

/// Frequency-domain least-squares baseline.
pub struct FreqDomainSolver {
    b: DMatrix<C64>,
    grid: GridSpec,
    solver: NormalSolver,
    opts: BaselineOptions,
}

impl std::fmt::Debug for FreqDomainSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FreqDomainSolver")
            .field("m", &self.b.nrows())
            .field("n", &self.b.ncols())
            .field("condition", &self.solver.condition)
            .finish()
    }
}

/// `B = DFT_M · A · IDFT_N`, columns ordered along the grid from its band start.
pub fn freq_sensing_matrix(a: &DMatrix<C64>, grid: &GridSpec) -> DMatrix<C64> {
    let (m, n) = a.shape();
    let start_cycles = grid.band_start_hz / grid.sample_rate;
    let rot: Vec<C64> = (0..n)
        .map(|c| {
            let cyc = start_cycles * c as f64;
            C64::from_polar(1.0, 2.0 * PI * (cyc - cyc.floor()))
        })
        .collect();
    let mut b = DMatrix::<C64>::zeros(m, n);
    let mut row = vec![C64::new(0.0, 0.0); n];
    for i in 0..m {
        for (c, z) in row.iter_mut().enumerate() {
            *z = a[(i, c)] * rot[c];
        }
        fft::ifft_in_place(&mut row);
        for (c, z) in row.iter().enumerate() {
            b[(i, c)] = *z;
        }
    }
    for mut col in b.column_iter_mut() {
        fft::fft_in_place(col.as_mut_slice());
    }
    b
}

impl FreqDomainSolver {
    pub fn new(a: &DMatrix<C64>, grid: GridSpec, opts: &BaselineOptions) -> Result<Self> {
        let n = a.ncols();
        if n != grid.n_samples {
            return Err(Error::GridMismatch(format!("A has {n} columns, grid has {}", grid.n_samples)));
        }
        if n > opts.dense_cap {
            return Err(Error::DenseCapExceeded { n, cap: opts.dense_cap });
        }
        let b = freq_sensing_matrix(a, &grid);
        let p = b.ad_mul(&b);
        let g = p.map(|z| C64::new(z.norm_sqr(), 0.0));
        Ok(Self { b, grid, solver: NormalSolver::new(g, opts), opts: *opts })
    }

    pub fn for_config(block: &NyfrConfig, opts: &BaselineOptions) -> Result<Self> {
        if block.n() > opts.dense_cap {
            return Err(Error::DenseCapExceeded { n: block.n(), cap: opts.dense_cap });
        }
        let a = build_sensing_matrix(&SensingMatrixSpec::from_config(block)?, opts.dense_cap)?;
        Self::new(&a, block.grid, opts)
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.b
    }

    pub fn condition(&self) -> Option<f64> {
        self.solver.condition
    }

    /// Per-bin power, `N` values scaled by `1/N`, on the grid bins.
    pub fn solve(&self, snapshots: &DMatrix<C64>) -> Result<PowerSpectrum> {
        let (m, n) = self.b.shape();
        if snapshots.nrows() != m {
            return Err(Error::LengthMismatch { expected: m, got: snapshots.nrows() });
        }
        let mut y = snapshots.clone();
        for mut col in y.column_iter_mut() {
            fft::fft_in_place(col.as_mut_slice());
        }
        let r = sample_covariance(&y);
        let rb = &r * &self.b;
        let h: Vec<C64> = (0..n).map(|c| self.b.column(c).dotc(&rb.column(c))).collect();
        let (x, _) = self.solver.solve(&h, &self.opts);
        let max_re = x.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
        let max_im = x.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        Ok(PowerSpectrum {
            values: x.iter().map(|z| z.re / n as f64).collect(),
            start_hz: self.grid.band_start_hz,
            bin_hz: self.grid.bin_width(),
            method: Method::FreqDomain,
            imag_residue: if max_re > 0.0 { max_im / max_re } else { max_im },
            flops: Some(flops(Method::FreqDomain, n, m, snapshots.ncols().max(1), 1)?),
        })
    }
}

pub fn baseline_freq_domain(rec: &MeasurementRecord, n_block: usize, opts: &BaselineOptions) -> Result<PowerSpectrum> {
    let block = block_config(&rec.config, n_block)?;
    let y = snapshots_from_record(rec, block.m())?;
    FreqDomainSolver::for_config(&block, opts)?.solve(&y)
}
