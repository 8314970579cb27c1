//! Exhaustive ML detection, closed-form pairwise error probability and the
//! union bound on the average bit error probability.

use std::collections::HashMap;

use num_complex::Complex;

use crate::channel::ChannelMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::signalset::{label_to_bits, SignalSet, TransmitVector};

/// Largest set for which all ordered pairs are enumerated.
pub const MAX_PAIR_SET_SIZE: usize = 1 << 12;

#[derive(Clone, Debug, PartialEq)]
pub struct DetectionResult<T> {
    /// Position of the decision in the signal set (equal to its label).
    pub index: usize,
    pub bits: Vec<u8>,
    /// `||y - H x_hat||^2`.
    pub metric: T,
}

fn check_shapes<T: Real>(y: &[Complex<T>], h: &ChannelMatrix<T>, set: &SignalSet<T>) -> Result<()> {
    if y.len() != h.rows() || h.cols() != set.dim() {
        return Err(Error::ShapeMismatch(format!(
            "y has {} entries, H is {}x{}, set dimension {}",
            y.len(),
            h.rows(),
            h.cols(),
            set.dim()
        )));
    }
    Ok(())
}

/// Squared residual `||y - H x||^2` for a sparse vector.
#[inline]
pub fn residual_sqr<T: Real>(y: &[Complex<T>], h: &ChannelMatrix<T>, x: &TransmitVector<T>) -> T {
    let taps = x.taps();
    let mut acc = T::zero();
    for (r, &yr) in y.iter().enumerate() {
        let mut z = yr;
        for tap in taps {
            z = z - h.get(r, tap.column) * tap.value;
        }
        acc = acc + z.norm_sqr();
    }
    acc
}

/// Index and metric of the ML decision; ties go to the lowest index.
pub fn ml_search<T: Real>(y: &[Complex<T>], h: &ChannelMatrix<T>, set: &SignalSet<T>) -> (usize, T) {
    let mut best = (0, T::infinity());
    for (i, x) in set.vectors().iter().enumerate() {
        let d = residual_sqr(y, h, x);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// ML detection `argmin_x ||y - H x||^2` over the whole set.
pub fn ml_detect<T: Real>(y: &[Complex<T>], h: &ChannelMatrix<T>, set: &SignalSet<T>) -> Result<DetectionResult<T>> {
    check_shapes(y, h, set)?;
    let (index, metric) = ml_search(y, h, set);
    Ok(DetectionResult { index, bits: label_to_bits(index as u32, set.eta()), metric })
}

/// `f(beta) = (1 - sqrt(beta / (1 + beta))) / 2` and `1 - f(beta)`.
///
/// The subtraction is rewritten as `1 / (2 (1+beta) (1 + sqrt(beta/(1+beta))))`
/// so the small tail keeps full relative precision.
#[inline]
pub fn rayleigh_f<T: Real>(beta: T) -> (T, T) {
    let one = T::one();
    let half = T::lit(0.5);
    if beta.is_infinite() {
        return (T::zero(), one);
    }
    let root = (beta / (one + beta)).sqrt();
    let f = one / (T::lit(2.0) * (one + beta) * (one + root));
    (f, half * (one + root))
}

/// PEP averaged over i.i.d. Rayleigh fading with `n_r` receive antennas,
/// given `||x - x~||^2`.
pub fn pep_from_distance<T: Real>(dist_sqr: T, sigma2: T, n_r: usize) -> T {
    let beta = dist_sqr / (T::lit(4.0) * sigma2);
    let (f, g) = rayleigh_f(beta);
    let mut sum = T::zero();
    let mut coeff = T::one();
    let mut g_pow = T::one();
    for i in 0..n_r {
        if i > 0 {
            // C(n_r-1+i, i) = C(n_r-2+i, i-1) * (n_r-1+i) / i
            coeff = coeff * T::from_usize(n_r - 1 + i).unwrap() / T::from_usize(i).unwrap();
            g_pow = g_pow * g;
        }
        sum = sum + coeff * g_pow;
    }
    f.powi(n_r as i32) * sum
}

/// Closed-form `P(x -> x~)` over i.i.d. CN(0,1) fades.
pub fn pep_closed_form<T: Real>(x: &TransmitVector<T>, x_tilde: &TransmitVector<T>, sigma2: T, n_r: usize) -> Result<T> {
    let d = x.distance_sqr(x_tilde);
    if d == T::zero() {
        return Err(Error::DegeneratePair);
    }
    Ok(pep_from_distance(d, sigma2, n_r))
}

/// Ordered-pair statistics of a signal set: `(||x - x~||^2, Hamming distance, count)`.
#[derive(Clone, Debug)]
pub struct DistanceSpectrum {
    eta: usize,
    size: usize,
    entries: Vec<(f64, u32, u64)>,
}

impl DistanceSpectrum {
    pub fn new<T: Real>(set: &SignalSet<T>) -> Result<Self> {
        let n = set.len();
        if n < 2 {
            return Err(Error::InvalidConfig("union bound needs at least two vectors".into()));
        }
        if n > MAX_PAIR_SET_SIZE {
            return Err(Error::SetTooLarge { size: n as u128, cap: MAX_PAIR_SET_SIZE as u128 });
        }
        let vs = set.vectors();
        let mut map: HashMap<(u64, u32), (f64, u64)> = HashMap::new();
        for a in 0..n {
            for b in (a + 1)..n {
                let d = vs[a].distance_sqr(&vs[b]).as_f64();
                let ham = (vs[a].label() ^ vs[b].label()).count_ones();
                // distances equal up to rounding share one bucket
                let e = map.entry(((d * 1e9).round() as u64, ham)).or_insert((d, 0));
                e.1 += 2;
            }
        }
        let mut keyed: Vec<_> = map.into_iter().collect();
        keyed.sort_by_key(|(k, _)| *k);
        let entries = keyed.into_iter().map(|((_, ham), (d, c))| (d, ham, c)).collect();
        Ok(Self { eta: set.eta(), size: n, entries })
    }

    pub fn entries(&self) -> &[(f64, u32, u64)] {
        &self.entries
    }

    /// Smallest pairwise squared distance.
    pub fn min_distance_sqr(&self) -> f64 {
        self.entries.iter().map(|e| e.0).fold(f64::INFINITY, f64::min)
    }

    pub fn union_bound(&self, sigma2: f64, n_r: usize) -> f64 {
        let total: f64 = self
            .entries
            .iter()
            .map(|&(d, ham, count)| count as f64 * pep_from_distance(d, sigma2, n_r) * ham as f64)
            .sum();
        total / (self.size as f64 * self.eta as f64)
    }
}

/// Union bound `(1/2^eta) sum_x sum_{x~ != x} P(x -> x~) delta(x, x~) / eta`.
pub fn union_bound_bep<T: Real>(set: &SignalSet<T>, sigma2: f64, n_r: usize) -> Result<f64> {
    Ok(DistanceSpectrum::new(set)?.union_bound(sigma2, n_r))
}

/// Union bound evaluated on an SNR grid.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundResult {
    pub snr_db: Vec<f64>,
    pub bep: Vec<f64>,
}

pub fn union_bound_curve<T: Real>(set: &SignalSet<T>, snr_db: &[f64]) -> Result<BoundResult> {
    let spectrum = DistanceSpectrum::new(set)?;
    let n_r = set.config().n_r;
    let bep = snr_db
        .iter()
        .map(|&s| spectrum.union_bound(crate::channel::snr_to_sigma2(s), n_r))
        .collect();
    Ok(BoundResult { snr_db: snr_db.to_vec(), bep })
}
