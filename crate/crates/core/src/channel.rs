//! Rayleigh channel sampling (i.i.d. and Kronecker-correlated), noise and
//! seeded random streams.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{complex_gaussian, Real};
use crate::signalset::{SystemConfig, TransmitVector};

/// Eigenvalues down to this are treated as rounding noise and clamped to zero.
pub const PSD_TOLERANCE: f64 = 1e-9;

/// Dense complex `rows x cols` matrix stored column by column.
///
/// Column `(j-1)*N + k` holds the receive vector of MAP `k` on TU `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> ChannelMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex::new(T::zero(), T::zero()); rows * cols] }
    }

    /// Builds from column vectors of equal length.
    pub fn from_columns(columns: &[Vec<Complex<T>>]) -> Self {
        let rows = columns.first().map_or(0, |c| c.len());
        assert!(columns.iter().all(|c| c.len() == rows), "ragged columns");
        let data = columns.iter().flat_map(|c| c.iter().copied()).collect();
        Self { rows, cols: columns.len(), data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex<T> {
        self.data[col * self.rows + row]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, z: Complex<T>) {
        self.data[col * self.rows + row] = z;
    }

    #[inline]
    pub fn column(&self, col: usize) -> &[Complex<T>] {
        &self.data[col * self.rows..(col + 1) * self.rows]
    }

    #[inline]
    pub fn column_mut(&mut self, col: usize) -> &mut [Complex<T>] {
        &mut self.data[col * self.rows..(col + 1) * self.rows]
    }

    /// Row `r` as a vector of length `cols` (the per-antenna channel).
    pub fn row(&self, r: usize) -> Vec<Complex<T>> {
        (0..self.cols).map(|c| self.get(r, c)).collect()
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    /// Writes `H x` into `out` for a sparse transmit vector.
    #[inline]
    pub fn mul_sparse_into(&self, x: &TransmitVector<T>, out: &mut [Complex<T>]) {
        debug_assert_eq!(out.len(), self.rows);
        out.iter_mut().for_each(|z| *z = Complex::new(T::zero(), T::zero()));
        for tap in x.taps() {
            for (o, h) in out.iter_mut().zip(self.column(tap.column)) {
                *o = *o + *h * tap.value;
            }
        }
    }

    pub fn mul_dense(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(x.len(), self.cols);
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.rows];
        for (c, &xc) in x.iter().enumerate() {
            if xc.re == T::zero() && xc.im == T::zero() {
                continue;
            }
            for (o, h) in out.iter_mut().zip(self.column(c)) {
                *o = *o + *h * xc;
            }
        }
        out
    }

    /// Multiplies every entry by a real factor.
    pub fn scaled(&self, c: T) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| *z * c).collect() }
    }
}

/// Which column count to sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColumnMode {
    /// `N_m` columns per TU.
    Operational,
    /// `N_all = 2^M_rf` columns per TU, before MAP selection.
    Full,
}

impl ColumnMode {
    pub fn columns(self, config: &SystemConfig) -> usize {
        match self {
            ColumnMode::Operational => config.columns(),
            ColumnMode::Full => config.full_columns(),
        }
    }

    pub fn block(self, config: &SystemConfig) -> usize {
        match self {
            ColumnMode::Operational => config.n_m(),
            ColumnMode::Full => config.n_all(),
        }
    }
}

/// What a random stream is used for inside one trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Purpose {
    Channel,
    Data,
    Noise,
    Other(u32),
}

impl Purpose {
    fn code(self) -> u64 {
        match self {
            Purpose::Channel => 1,
            Purpose::Data => 2,
            Purpose::Noise => 3,
            Purpose::Other(k) => 0x100 + k as u64,
        }
    }
}

/// Labels of one counter-based random substream.
///
/// Equal labels give identical draw sequences no matter which worker
/// evaluates the trial or in which order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub master_seed: u64,
    pub snr_index: u64,
    pub trial: u64,
    pub purpose: Purpose,
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(master_seed: u64, snr_index: u64, trial: u64, purpose: Purpose) -> Self {
        Self { master_seed, snr_index, trial, purpose }
    }

    /// ChaCha8 keyed by (seed, SNR index, purpose), stream = trial index.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        let mut state = splitmix64(self.master_seed ^ 0x6D62_6D5F_7369_6D00);
        state = splitmix64(state ^ self.snr_index);
        state = splitmix64(state ^ self.purpose.code());
        for chunk in key.chunks_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.trial);
        rng
    }
}

/// Fills `h` with i.i.d. CN(0, 1) entries.
pub fn fill_iid<T: Real, R: Rng + ?Sized>(h: &mut ChannelMatrix<T>, rng: &mut R) {
    for z in h.as_mut_slice() {
        *z = complex_gaussian(rng, T::one());
    }
}

/// I.i.d. Rayleigh channel, `n_r x (columns per TU * n_tu)`.
pub fn sample_iid_channel<T: Real, R: Rng + ?Sized>(
    config: &SystemConfig,
    mode: ColumnMode,
    rng: &mut R,
) -> ChannelMatrix<T> {
    let mut h = ChannelMatrix::zeros(config.n_r, mode.columns(config));
    fill_iid(&mut h, rng);
    h
}

/// Exponential inter-TU and equi-correlated intra-TU coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSpec {
    pub rho_a: f64,
    pub rho_m: f64,
}

impl CorrelationSpec {
    pub const NONE: Self = Self { rho_a: 0.0, rho_m: 0.0 };

    pub fn validate(&self) -> Result<()> {
        for (name, r) in [("rho_a", self.rho_a), ("rho_m", self.rho_m)] {
            if !(0.0..1.0).contains(&r) {
                return Err(Error::InvalidConfig(format!("{name} = {r} outside [0, 1)")));
            }
        }
        Ok(())
    }

    pub fn is_none(&self) -> bool {
        self.rho_a == 0.0 && self.rho_m == 0.0
    }
}

/// Transmit correlation over `n_tu` blocks of `block` MAPs each.
pub fn build_rtx_blocks(n_tu: usize, block: usize, spec: &CorrelationSpec) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let n = n_tu * block;
    let r = DMatrix::from_fn(n, n, |a, b| {
        let (ta, tb) = (a / block, b / block);
        if ta == tb {
            if a == b {
                1.0
            } else {
                spec.rho_m
            }
        } else {
            spec.rho_a.powi(ta.abs_diff(tb) as i32)
        }
    });
    let min_eig = SymmetricEigen::new(r.clone()).eigenvalues.min();
    if min_eig < -PSD_TOLERANCE {
        return Err(Error::NotPsd(min_eig));
    }
    Ok(r)
}

/// Transmit correlation matrix of size `N_m n_tu`.
pub fn build_rtx(config: &SystemConfig, spec: &CorrelationSpec) -> Result<DMatrix<f64>> {
    build_rtx_blocks(config.n_tu, config.n_m(), spec)
}

/// Receive correlation `rho_a^{|i-j|}`.
pub fn build_rrx(n_r: usize, rho_a: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n_r, n_r, |i, j| rho_a.powi(i.abs_diff(j) as i32))
}

/// Symmetric square root via eigendecomposition.
///
/// Diagonal inputs take the exact elementwise root.
pub fn matrix_sqrt_psd(r: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !r.is_square() {
        return Err(Error::ShapeMismatch(format!("{}x{} is not square", r.nrows(), r.ncols())));
    }
    let n = r.nrows();
    let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || r[(i, j)] == 0.0));
    if diagonal {
        let mut s = DMatrix::zeros(n, n);
        for i in 0..n {
            let d = r[(i, i)];
            if d < -PSD_TOLERANCE {
                return Err(Error::NotPsd(d));
            }
            s[(i, i)] = d.max(0.0).sqrt();
        }
        return Ok(s);
    }
    let sym = (r + r.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let min = eig.eigenvalues.min();
    if min < -PSD_TOLERANCE {
        return Err(Error::NotPsd(min));
    }
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let v = &eig.eigenvectors;
    let s = v * DMatrix::from_diagonal(&roots) * v.transpose();
    Ok((&s + s.transpose()) * 0.5)
}

/// Precomputed Kronecker colouring `H = R_rx^{1/2} H~ R_tx^{1/2}`.
#[derive(Clone, Debug)]
pub struct KroneckerSampler<T> {
    rows: usize,
    cols: usize,
    rx_root: Option<Vec<T>>,
    tx_root: Option<Vec<T>>,
    scratch_free: bool,
}

fn is_identity(m: &DMatrix<f64>) -> bool {
    (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| m[(i, j)] == if i == j { 1.0 } else { 0.0 }))
}

fn to_row_major<T: Real>(m: &DMatrix<f64>) -> Vec<T> {
    let mut v = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            v.push(T::lit(m[(i, j)]));
        }
    }
    v
}

impl<T: Real> KroneckerSampler<T> {
    pub fn new(config: &SystemConfig, spec: &CorrelationSpec, mode: ColumnMode) -> Result<Self> {
        let rtx = build_rtx_blocks(config.n_tu, mode.block(config), spec)?;
        let rrx = build_rrx(config.n_r, spec.rho_a);
        let tx = matrix_sqrt_psd(&rtx)?;
        let rx = matrix_sqrt_psd(&rrx)?;
        let rx_root = (!is_identity(&rx)).then(|| to_row_major(&rx));
        let tx_root = (!is_identity(&tx)).then(|| to_row_major(&tx));
        let scratch_free = rx_root.is_none() && tx_root.is_none();
        Ok(Self { rows: config.n_r, cols: mode.columns(config), rx_root, tx_root, scratch_free })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Draws `H~` from `rng` and colours it into `out`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut ChannelMatrix<T>) {
        assert_eq!((out.rows(), out.cols()), (self.rows, self.cols));
        fill_iid(out, rng);
        if self.scratch_free {
            return;
        }
        let zero = Complex::new(T::zero(), T::zero());
        let (n_r, n_c) = (self.rows, self.cols);
        if let Some(rx) = &self.rx_root {
            let mut col = vec![zero; n_r];
            for c in 0..n_c {
                col.copy_from_slice(out.column(c));
                for i in 0..n_r {
                    let mut acc = zero;
                    for k in 0..n_r {
                        acc = acc + col[k] * rx[i * n_r + k];
                    }
                    out.set(i, c, acc);
                }
            }
        }
        if let Some(tx) = &self.tx_root {
            let mut row = vec![zero; n_c];
            for r in 0..n_r {
                for (c, z) in row.iter_mut().enumerate() {
                    *z = out.get(r, c);
                }
                for c in 0..n_c {
                    let mut acc = zero;
                    for k in 0..n_c {
                        acc = acc + row[k] * tx[k * n_c + c];
                    }
                    out.set(r, c, acc);
                }
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ChannelMatrix<T> {
        let mut h = ChannelMatrix::zeros(self.rows, self.cols);
        self.sample_into(rng, &mut h);
        h
    }
}

/// Kronecker-correlated channel in operational shape.
pub fn sample_correlated_channel<T: Real, R: Rng + ?Sized>(
    config: &SystemConfig,
    spec: &CorrelationSpec,
    rng: &mut R,
) -> Result<ChannelMatrix<T>> {
    Ok(KroneckerSampler::new(config, spec, ColumnMode::Operational)?.sample(rng))
}

/// Per-entry complex noise variance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    sigma2: f64,
}

impl NoiseSpec {
    pub fn new(sigma2: f64) -> Result<Self> {
        if sigma2.is_finite() && sigma2 > 0.0 {
            Ok(Self { sigma2 })
        } else {
            Err(Error::InvalidConfig(format!("noise variance must be positive, got {sigma2}")))
        }
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }
}

/// `n_r` i.i.d. CN(0, sigma2) samples.
pub fn sample_noise<T: Real, R: Rng + ?Sized>(n_r: usize, noise: &NoiseSpec, rng: &mut R) -> Vec<Complex<T>> {
    let var = T::lit(noise.sigma2);
    (0..n_r).map(|_| complex_gaussian(rng, var)).collect()
}

/// Noise variance at a given SNR for unit average transmit energy.
pub fn snr_to_sigma2(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}
