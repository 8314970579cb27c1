//! Phase compensation and constellation rotation (PC-CR).
//!
//! The receiver feeds back the channel phases of one receive antenna. The
//! transmitter co-phases the active entries of each tone vector for that
//! antenna and rotates codeword `k` by `k * 2pi / |X|` (0-based `k`), so the
//! noiseless receive points sit on evenly spaced rays.
//!
//! Codebook vectors carry unit-modulus entries, which keeps the recovery
//! identity `conj(v) . v = x` exact for 0/1 tone patterns. The `1/sqrt(n_rf)`
//! power normalization is applied as a scalar transmit gain.

use num_complex::Complex;

use crate::channel::ChannelMatrix;
use crate::error::{Error, Result};
use crate::scalar::{q_function, Real};
use crate::signalset::{label_to_bits, SignalSet, SystemConfig};

/// Fed-back channel phases, one row per receive antenna.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseBook<T> {
    phases: Vec<Vec<T>>,
    bits: Option<u32>,
}

/// Maps an angle into `(-pi, pi]`.
pub fn wrap_phase<T: Real>(phi: T) -> T {
    let two_pi = T::PI() + T::PI();
    let mut p = phi % two_pi;
    if p <= -T::PI() {
        p = p + two_pi;
    } else if p > T::PI() {
        p = p - two_pi;
    }
    p
}

impl<T: Real> PhaseBook<T> {
    /// Exact phases of every entry of `h`.
    pub fn from_channel(h: &ChannelMatrix<T>) -> Self {
        let phases = (0..h.rows()).map(|r| h.row(r).iter().map(|z| wrap_phase(z.arg())).collect()).collect();
        Self { phases, bits: None }
    }

    pub fn from_phases(phases: Vec<Vec<T>>) -> Self {
        let phases = phases.into_iter().map(|r| r.into_iter().map(wrap_phase).collect()).collect();
        Self { phases, bits: None }
    }

    pub fn antennas(&self) -> usize {
        self.phases.len()
    }

    pub fn row(&self, antenna: usize) -> &[T] {
        &self.phases[antenna]
    }

    pub fn is_quantized(&self) -> bool {
        self.bits.is_some()
    }

    /// Bits per phase when quantized.
    pub fn bits(&self) -> Option<u32> {
        self.bits
    }
}

/// Nearest level `-pi + 2pi k / 2^B`, `k = 1..2^B`, by circular distance.
/// Ties go to the lower `k`.
pub fn quantize_phase<T: Real>(phi: T, bits: u32) -> T {
    assert!(bits >= 1, "at least one bit per phase");
    let two_pi = T::PI() + T::PI();
    let levels = 1u64 << bits;
    let step = two_pi / T::from_u64(levels).unwrap();
    let mut best = (T::infinity(), T::PI());
    for k in 1..=levels {
        let level = -T::PI() + step * T::from_u64(k).unwrap();
        let d = (phi - level).abs() % two_pi;
        let d = d.min(two_pi - d);
        if d < best.0 {
            best = (d, level);
        }
    }
    best.1
}

pub fn quantize_phases<T: Real>(book: &PhaseBook<T>, bits: u32) -> PhaseBook<T> {
    let phases = book.phases.iter().map(|r| r.iter().map(|&p| quantize_phase(p, bits)).collect()).collect();
    PhaseBook { phases, bits: Some(bits) }
}

/// Diagonal of `W = diag(e^{-i phi})`.
pub fn build_phase_compensation<T: Real>(phases: &[T]) -> Vec<Complex<T>> {
    phases.iter().map(|&p| Complex::from_polar(T::one(), -p)).collect()
}

/// Rotated, co-phased codebook for one feedback antenna.
#[derive(Clone, Debug)]
pub struct PcCrCodebook<T> {
    antenna: usize,
    angles: Vec<T>,
    vectors: Vec<Vec<Complex<T>>>,
}

impl<T: Real> PcCrCodebook<T> {
    pub fn antenna(&self) -> usize {
        self.antenna
    }

    pub fn angles(&self) -> &[T] {
        &self.angles
    }

    pub fn vectors(&self) -> &[Vec<Complex<T>>] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// 0/1 activity pattern of a tone vector.
pub fn tone_pattern<T: Real>(set: &SignalSet<T>, label: usize) -> Vec<Complex<T>> {
    let mut x = vec![Complex::new(T::zero(), T::zero()); set.dim()];
    for tap in set.vectors()[label].taps() {
        x[tap.column] = Complex::new(T::one(), T::zero());
    }
    x
}

/// `conj(v) . v`.
pub fn recover_tone<T: Real>(v: &[Complex<T>]) -> Vec<Complex<T>> {
    v.iter().map(|z| z.conj() * z).collect()
}

pub fn build_codebook<T: Real>(book: &PhaseBook<T>, antenna: usize, set: &SignalSet<T>) -> Result<PcCrCodebook<T>> {
    if !set.config().alphabet.is_tone() {
        return Err(Error::NonToneAlphabet);
    }
    let row = book.row(antenna);
    if row.len() != set.dim() {
        return Err(Error::LengthMismatch { expected: set.dim(), got: row.len() });
    }
    let w = build_phase_compensation(row);
    let n = T::from_usize(set.len()).unwrap();
    let two_pi = T::PI() + T::PI();
    let angles: Vec<T> = (0..set.len()).map(|k| T::from_usize(k).unwrap() * two_pi / n).collect();
    let vectors = angles
        .iter()
        .enumerate()
        .map(|(k, &psi)| {
            let rot = Complex::from_polar(T::one(), psi);
            tone_pattern(set, k).iter().zip(&w).map(|(x, w)| *x * *w * rot).collect()
        })
        .collect();
    Ok(PcCrCodebook { antenna, angles, vectors })
}

fn dot<T: Real>(h: &[Complex<T>], v: &[Complex<T>]) -> Complex<T> {
    h.iter().zip(v).fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + *a * *b)
}

/// Conditional union bound on the bit error probability when antenna
/// `antenna` alone receives codebook `cb`.
pub fn conditional_bound<T: Real>(h: &ChannelMatrix<T>, cb: &PcCrCodebook<T>, gain: T, sigma2: T, eta: usize) -> T {
    let row = h.row(cb.antenna);
    let pts: Vec<Complex<T>> = cb.vectors.iter().map(|v| dot(&row, v) * gain).collect();
    let two = T::lit(2.0);
    let mut acc = T::zero();
    for (a, pa) in pts.iter().enumerate() {
        for (b, pb) in pts.iter().enumerate() {
            if a != b {
                let ham = T::from_u32((a ^ b).count_ones()).unwrap();
                acc = acc + q_function(((*pa - *pb).norm_sqr() / (two * sigma2)).sqrt()) * ham;
            }
        }
    }
    let eta_t = T::from_usize(eta.max(1)).unwrap();
    acc / (T::from_usize(pts.len()).unwrap() * eta_t)
}

/// Receive antenna with the lowest conditional bound, each evaluated with
/// its own codebook built from `book`. Ties go to the lowest index.
pub fn select_antenna_scheme1<T: Real>(
    h: &ChannelMatrix<T>,
    sigma2: T,
    set: &SignalSet<T>,
    book: &PhaseBook<T>,
) -> Result<usize> {
    let mut best = (0, T::infinity());
    for k in 0..h.rows() {
        let cb = build_codebook(book, k, set)?;
        let p = conditional_bound(h, &cb, set.amplitude(), sigma2, set.eta());
        if p < best.1 {
            best = (k, p);
        }
    }
    Ok(best.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PcCrDetection<T> {
    pub index: usize,
    pub v: Vec<Complex<T>>,
    pub x: Vec<Complex<T>>,
    pub bits: Vec<u8>,
}

/// Demaps a recovered 0/1 pattern through the signal set.
fn demap<T: Real>(set: &SignalSet<T>, x: &[Complex<T>]) -> Result<Vec<u8>> {
    let half = T::lit(0.5);
    let scaled: Vec<Complex<T>> = x
        .iter()
        .map(|z| if z.re > half { Complex::new(set.amplitude(), T::zero()) } else { Complex::new(T::zero(), T::zero()) })
        .collect();
    set.vector_to_bits(&scaled)
}

fn finish<T: Real>(set: &SignalSet<T>, cb: &PcCrCodebook<T>, index: usize) -> Result<PcCrDetection<T>> {
    let v = cb.vectors[index].clone();
    let x = recover_tone(&v);
    let bits = demap(set, &x)?;
    debug_assert_eq!(bits, label_to_bits(index as u32, set.eta()));
    Ok(PcCrDetection { index, v, x, bits })
}

/// ML over the codebook from the feedback antenna only.
pub fn detect_pccr_scheme1<T: Real>(
    y: Complex<T>,
    h_k: &[Complex<T>],
    cb: &PcCrCodebook<T>,
    set: &SignalSet<T>,
) -> Result<PcCrDetection<T>> {
    if h_k.len() != set.dim() {
        return Err(Error::ShapeMismatch(format!("channel row length {} != {}", h_k.len(), set.dim())));
    }
    let g = set.amplitude();
    let mut best = (0, T::infinity());
    for (k, v) in cb.vectors.iter().enumerate() {
        let d = (y - dot(h_k, v) * g).norm_sqr();
        if d < best.1 {
            best = (k, d);
        }
    }
    finish(set, cb, best.0)
}

/// Combined metric `|y_k - h_k^T v|^2 + sum_{i != k} |y_i - h_i^T x|^2`.
pub fn scheme2_metric<T: Real>(y: &[Complex<T>], h: &ChannelMatrix<T>, cb: &PcCrCodebook<T>, index: usize, gain: T) -> T {
    let v = &cb.vectors[index];
    let x = recover_tone(v);
    (0..h.rows())
        .map(|i| {
            let row = h.row(i);
            let s = if i == cb.antenna { dot(&row, v) } else { dot(&row, &x) };
            (y[i] - s * gain).norm_sqr()
        })
        .fold(T::zero(), |a, b| a + b)
}

/// `H^(v)`: the feedback row unchanged, every other row multiplied by `conj(v)`.
pub fn compensated_channel<T: Real>(h: &ChannelMatrix<T>, v: &[Complex<T>], antenna: usize) -> ChannelMatrix<T> {
    let mut out = h.clone();
    for i in (0..h.rows()).filter(|&i| i != antenna) {
        for (c, vc) in v.iter().enumerate() {
            out.set(i, c, h.get(i, c) * vc.conj());
        }
    }
    out
}

/// Noiseless receive vector `g H^(v) v` for codeword `index`.
pub fn scheme2_received<T: Real>(h: &ChannelMatrix<T>, cb: &PcCrCodebook<T>, index: usize, gain: T) -> Vec<Complex<T>> {
    let v = &cb.vectors[index];
    compensated_channel(h, v, cb.antenna).mul_dense(v).into_iter().map(|z| z * gain).collect()
}

/// Minimizer of the combined metric; ties to the lowest index.
pub fn detect_pccr_scheme2<T: Real>(
    y: &[Complex<T>],
    h: &ChannelMatrix<T>,
    cb: &PcCrCodebook<T>,
    set: &SignalSet<T>,
) -> Result<PcCrDetection<T>> {
    if y.len() != h.rows() || h.cols() != set.dim() || cb.antenna >= h.rows() {
        return Err(Error::ShapeMismatch(format!(
            "y has {} entries, H is {}x{}, set dimension {}",
            y.len(),
            h.rows(),
            h.cols(),
            set.dim()
        )));
    }
    let g = set.amplitude();
    let mut best = (0, T::infinity());
    for k in 0..cb.len() {
        let d = scheme2_metric(y, h, cb, k, g);
        if d < best.1 {
            best = (k, d);
        }
    }
    finish(set, cb, best.0)
}

pub fn predicted_diversity_pccr(n_tu: usize, n_r: usize) -> usize {
    n_r * (n_tu + 1)
}

/// `n_tu 2^m_rf B`.
pub fn feedback_bits_pccr(config: &SystemConfig, bits: u32) -> u64 {
    (config.n_tu * config.n_m()) as u64 * bits as u64
}
