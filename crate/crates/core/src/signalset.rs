//! Modulation alphabets, MBM-TU activation patterns and the GSM-MBM
//! transmit-vector set.
//!
//! A transmit vector has `n_tu` blocks of `N_m = 2^m_rf` entries. Block `j`
//! is either zero (TU `j` silent) or `s_j * e_{l_j}`: the alphabet symbol
//! `s_j` placed at the position of the mirror activation pattern `l_j`.
//!
//! Labels are integers read most-significant-bit first with the layout
//! `[TU-pattern bits | mirror bits per active TU | symbol bits per active TU]`,
//! active TUs in ascending order. Vectors are stored in label order, so the
//! vector with label `b` lives at index `b`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{binomial, Real};

/// Largest signal set that will be materialized.
pub const MAX_SET_SIZE: u128 = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphabetKind {
    Tone,
    Psk,
    Qam,
}

/// Alphabet family plus cardinality, as it appears in configuration files.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AlphabetSpec {
    pub kind: AlphabetKind,
    #[serde(rename = "M")]
    pub order: usize,
}

impl AlphabetSpec {
    pub const TONE: Self = Self { kind: AlphabetKind::Tone, order: 1 };

    pub fn psk(order: usize) -> Self {
        Self { kind: AlphabetKind::Psk, order }
    }

    pub fn qam(order: usize) -> Self {
        Self { kind: AlphabetKind::Qam, order }
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.order.trailing_zeros() as usize
    }

    pub fn is_tone(&self) -> bool {
        self.kind == AlphabetKind::Tone
    }
}

/// Unit-energy, Gray-labelled symbol alphabet.
///
/// `points[b]` is the symbol carrying bit label `b`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModulationAlphabet<T> {
    kind: AlphabetKind,
    points: Vec<Complex<T>>,
}

impl<T: Real> ModulationAlphabet<T> {
    pub fn kind(&self) -> AlphabetKind {
        self.kind
    }

    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.points.len().trailing_zeros() as usize
    }

    pub fn points(&self) -> &[Complex<T>] {
        &self.points
    }

    pub fn point(&self, label: usize) -> Complex<T> {
        self.points[label]
    }

    /// Label of the point exactly equal to `z`, if any.
    pub fn label_of(&self, z: Complex<T>) -> Option<usize> {
        self.points.iter().position(|p| *p == z)
    }

    pub fn average_energy(&self) -> T {
        let n = T::from_usize(self.points.len()).unwrap();
        self.points.iter().map(|p| p.norm_sqr()).sum::<T>() / n
    }
}

#[inline]
fn gray(i: usize) -> usize {
    i ^ (i >> 1)
}

/// Builds a normalized, Gray-labelled alphabet.
///
/// PSK accepts any power of two. QAM accepts any power of two `>= 2`: square
/// grids for even bit counts, `2^ceil(k/2) x 2^floor(k/2)` rectangles otherwise
/// (8-QAM is 4x2).
pub fn build_alphabet<T: Real>(order: usize, kind: AlphabetKind) -> Result<ModulationAlphabet<T>> {
    let bad = || Error::UnsupportedCardinality(format!("{kind:?} with M = {order}"));
    if order == 0 || !order.is_power_of_two() {
        return Err(bad());
    }
    let points = match kind {
        AlphabetKind::Tone => {
            if order != 1 {
                return Err(bad());
            }
            vec![Complex::new(T::one(), T::zero())]
        }
        AlphabetKind::Psk => {
            if order < 2 {
                return Err(bad());
            }
            let mut pts = vec![Complex::new(T::zero(), T::zero()); order];
            for k in 0..order {
                let angle = 2.0 * std::f64::consts::PI * k as f64 / order as f64;
                // exact values on the axes keep BPSK/QPSK points clean
                let (s, c) = if k * 4 % order == 0 {
                    match k * 4 / order {
                        0 => (0.0, 1.0),
                        1 => (1.0, 0.0),
                        2 => (0.0, -1.0),
                        _ => (-1.0, 0.0),
                    }
                } else {
                    angle.sin_cos()
                };
                pts[gray(k)] = Complex::new(T::lit(c), T::lit(s));
            }
            pts
        }
        AlphabetKind::Qam => {
            if order < 2 {
                return Err(bad());
            }
            let k = order.trailing_zeros() as usize;
            let k_q = k / 2;
            let k_i = k - k_q;
            let (l_i, l_q) = (1usize << k_i, 1usize << k_q);
            let level = |i: usize, l: usize| 2.0 * i as f64 - (l as f64 - 1.0);
            let energy_i: f64 = (0..l_i).map(|i| level(i, l_i).powi(2)).sum::<f64>() / l_i as f64;
            let energy_q: f64 = (0..l_q).map(|q| level(q, l_q).powi(2)).sum::<f64>() / l_q as f64;
            let scale = 1.0 / (energy_i + energy_q).sqrt();
            let mut pts = vec![Complex::new(T::zero(), T::zero()); order];
            for i in 0..l_i {
                for q in 0..l_q {
                    let label = (gray(i) << k_q) | gray(q);
                    pts[label] = Complex::new(T::lit(level(i, l_i) * scale), T::lit(level(q, l_q) * scale));
                }
            }
            pts
        }
    };
    Ok(ModulationAlphabet { kind, points })
}

/// GSM-MBM system dimensions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SystemConfig {
    /// MBM transmit units.
    pub n_tu: usize,
    /// Active RF chains per channel use.
    pub n_rf: usize,
    /// Mirrors used per TU; 0 gives a conventional antenna with one fade.
    pub m_rf: usize,
    /// Mirrors available per TU (defaults to `m_rf`).
    #[serde(rename = "M_rf", default, skip_serializing_if = "Option::is_none")]
    pub mirrors_available: Option<usize>,
    /// Receive antennas.
    pub n_r: usize,
    pub alphabet: AlphabetSpec,
}

impl SystemConfig {
    pub fn new(n_tu: usize, n_rf: usize, m_rf: usize, n_r: usize, alphabet: AlphabetSpec) -> Self {
        Self { n_tu, n_rf, m_rf, mirrors_available: None, n_r, alphabet }
    }

    pub fn with_mirrors_available(mut self, m: usize) -> Self {
        self.mirrors_available = Some(m);
        self
    }

    /// `M_rf`.
    pub fn big_m_rf(&self) -> usize {
        self.mirrors_available.unwrap_or(self.m_rf)
    }

    /// MAPs per TU in use, `N_m = 2^m_rf`.
    pub fn n_m(&self) -> usize {
        1 << self.m_rf
    }

    /// All MAPs per TU, `N_all = 2^M_rf`.
    pub fn n_all(&self) -> usize {
        1 << self.big_m_rf()
    }

    /// Channel columns in operation, `N_m * n_tu`.
    pub fn columns(&self) -> usize {
        self.n_m() * self.n_tu
    }

    /// Channel columns before MAP selection, `N_all * n_tu`.
    pub fn full_columns(&self) -> usize {
        self.n_all() * self.n_tu
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidConfig(m));
        if self.n_tu == 0 || self.n_rf == 0 || self.n_rf > self.n_tu {
            return fail(format!("need 1 <= n_rf <= n_tu, got n_rf={} n_tu={}", self.n_rf, self.n_tu));
        }
        if self.n_r == 0 {
            return fail("n_r must be at least 1".into());
        }
        if self.big_m_rf() < self.m_rf {
            return fail(format!("M_rf={} is below m_rf={}", self.big_m_rf(), self.m_rf));
        }
        if self.big_m_rf() > 20 || self.n_tu > 32 {
            return fail("system dimensions out of range".into());
        }
        let a = self.alphabet;
        let ok = match a.kind {
            AlphabetKind::Tone => a.order == 1,
            _ => a.order >= 2 && a.order.is_power_of_two(),
        };
        if !ok {
            return Err(Error::UnsupportedCardinality(format!("{:?} with M = {}", a.kind, a.order)));
        }
        Ok(())
    }

    /// Bits carried by the TU activation pattern.
    pub fn tu_index_bits(&self) -> usize {
        let c = binomial(self.n_tu as u64, self.n_rf as u64).unwrap_or(1);
        (127 - c.leading_zeros()) as usize
    }

    /// Spectral efficiency in bits per channel use.
    pub fn rate(&self) -> usize {
        self.tu_index_bits() + self.n_rf * self.m_rf + self.n_rf * self.alphabet.bits_per_symbol()
    }

    /// The same system with all `M_rf` mirrors in use.
    pub fn full_mirror_config(&self) -> Self {
        Self { m_rf: self.big_m_rf(), ..*self }
    }
}

/// Rate `eta` of a validated configuration.
pub fn rate(config: &SystemConfig) -> Result<usize> {
    config.validate()?;
    Ok(config.rate())
}

/// TU activation patterns used for signalling, each a sorted list of active TUs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActivationPatternSet {
    n_tu: usize,
    patterns: Vec<Vec<usize>>,
}

impl ActivationPatternSet {
    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn patterns(&self) -> &[Vec<usize>] {
        &self.patterns
    }

    /// 0/1 indicator vector of pattern `i`.
    pub fn indicator(&self, i: usize) -> Vec<u8> {
        let mut v = vec![0; self.n_tu];
        for &j in &self.patterns[i] {
            v[j] = 1;
        }
        v
    }

    pub fn position(&self, active: &[usize]) -> Option<usize> {
        self.patterns.iter().position(|p| p == active)
    }
}

/// Keeps the first `2^floor(log2 C(n_tu, n_rf))` combinations in lexicographic order.
pub fn build_activation_patterns(n_tu: usize, n_rf: usize) -> ActivationPatternSet {
    assert!(n_rf >= 1 && n_rf <= n_tu, "need 1 <= n_rf <= n_tu");
    let total = binomial(n_tu as u64, n_rf as u64).expect("binomial overflow");
    let keep = 1usize << (127 - total.leading_zeros());
    let mut patterns = Vec::with_capacity(keep);
    let mut comb: Vec<usize> = (0..n_rf).collect();
    loop {
        patterns.push(comb.clone());
        if patterns.len() == keep {
            break;
        }
        // next combination in lexicographic order
        let mut i = n_rf;
        while i > 0 && comb[i - 1] == n_tu - n_rf + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        comb[i - 1] += 1;
        for t in i..n_rf {
            comb[t] = comb[t - 1] + 1;
        }
    }
    ActivationPatternSet { n_tu, patterns }
}

/// One nonzero entry of a transmit vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tap<T> {
    pub column: usize,
    pub value: Complex<T>,
}

/// Sparse GSM-MBM transmit vector with its label.
#[derive(Clone, Debug, PartialEq)]
pub struct TransmitVector<T> {
    dim: usize,
    taps: Vec<Tap<T>>,
    label: u32,
}

impl<T: Real> TransmitVector<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Nonzero entries in ascending column order.
    pub fn taps(&self) -> &[Tap<T>] {
        &self.taps
    }

    pub fn label(&self) -> u32 {
        self.label
    }

    pub fn dense(&self) -> Vec<Complex<T>> {
        let mut v = vec![Complex::new(T::zero(), T::zero()); self.dim];
        for t in &self.taps {
            v[t.column] = t.value;
        }
        v
    }

    pub fn energy(&self) -> T {
        self.taps.iter().map(|t| t.value.norm_sqr()).sum()
    }

    /// `||self - other||^2`.
    pub fn distance_sqr(&self, other: &Self) -> T {
        let (a, b) = (&self.taps, &other.taps);
        let (mut i, mut j) = (0, 0);
        let mut acc = T::zero();
        while i < a.len() || j < b.len() {
            let ca = a.get(i).map_or(usize::MAX, |t| t.column);
            let cb = b.get(j).map_or(usize::MAX, |t| t.column);
            if ca == cb {
                acc = acc + (a[i].value - b[j].value).norm_sqr();
                i += 1;
                j += 1;
            } else if ca < cb {
                acc = acc + a[i].value.norm_sqr();
                i += 1;
            } else {
                acc = acc + b[j].value.norm_sqr();
                j += 1;
            }
        }
        acc
    }
}

/// Bit string (MSB first) of `label` with `width` bits.
pub fn label_to_bits(label: u32, width: usize) -> Vec<u8> {
    (0..width).rev().map(|i| ((label >> i) & 1) as u8).collect()
}

/// Integer label of an MSB-first bit string.
pub fn bits_to_label(bits: &[u8]) -> Result<u32> {
    if bits.len() > 32 {
        return Err(Error::Parse(format!("bit string of length {} too long", bits.len())));
    }
    bits.iter().try_fold(0u32, |acc, &b| match b {
        0 | 1 => Ok((acc << 1) | b as u32),
        _ => Err(Error::Parse(format!("invalid bit value {b}"))),
    })
}

/// The full GSM-MBM signal set for one configuration.
#[derive(Clone, Debug)]
pub struct SignalSet<T> {
    config: SystemConfig,
    eta: usize,
    alphabet: ModulationAlphabet<T>,
    patterns: ActivationPatternSet,
    amplitude: T,
    vectors: Vec<TransmitVector<T>>,
}

/// Builds the signal set, scaling symbols by `1/sqrt(n_rf)` so `E||x||^2 = 1`.
pub fn build_signal_set<T: Real>(config: &SystemConfig) -> Result<SignalSet<T>> {
    config.validate()?;
    let eta = config.rate();
    let size = 1u128 << eta;
    if size > MAX_SET_SIZE {
        return Err(Error::SetTooLarge { size, cap: MAX_SET_SIZE });
    }
    let alphabet = build_alphabet::<T>(config.alphabet.order, config.alphabet.kind)?;
    let patterns = build_activation_patterns(config.n_tu, config.n_rf);
    let amplitude = T::one() / T::from_usize(config.n_rf).unwrap().sqrt();

    let (n_rf, m_rf, n_m) = (config.n_rf, config.m_rf, config.n_m());
    let sym_bits = config.alphabet.bits_per_symbol();
    let dim = config.columns();
    let mut vectors = Vec::with_capacity(size as usize);
    for label in 0..size as u32 {
        let (pattern_idx, mirrors, symbols) = split_label(label, n_rf, m_rf, sym_bits);
        let taps = patterns.patterns()[pattern_idx as usize]
            .iter()
            .enumerate()
            .map(|(slot, &tu)| Tap {
                column: tu * n_m + mirrors[slot] as usize,
                value: alphabet.point(symbols[slot] as usize) * amplitude,
            })
            .collect();
        vectors.push(TransmitVector { dim, taps, label });
    }
    Ok(SignalSet { config: *config, eta, alphabet, patterns, amplitude, vectors })
}

/// Splits a label into (pattern index, per-slot MAP index, per-slot symbol label).
fn split_label(label: u32, n_rf: usize, m_rf: usize, sym_bits: usize) -> (u32, Vec<u32>, Vec<u32>) {
    let mut rest = label;
    let mut symbols = vec![0; n_rf];
    for slot in (0..n_rf).rev() {
        symbols[slot] = rest & ((1 << sym_bits) - 1);
        rest >>= sym_bits;
    }
    let mut mirrors = vec![0; n_rf];
    for slot in (0..n_rf).rev() {
        mirrors[slot] = rest & ((1 << m_rf) - 1);
        rest >>= m_rf;
    }
    (rest, mirrors, symbols)
}

impl<T: Real> SignalSet<T> {
    pub fn config(&self) -> &SystemConfig {
        &self.config
    }

    /// Bits per channel use.
    pub fn eta(&self) -> usize {
        self.eta
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Vector dimension `N_m * n_tu`.
    pub fn dim(&self) -> usize {
        self.config.columns()
    }

    pub fn vectors(&self) -> &[TransmitVector<T>] {
        &self.vectors
    }

    pub fn vector(&self, label: u32) -> &TransmitVector<T> {
        &self.vectors[label as usize]
    }

    pub fn alphabet(&self) -> &ModulationAlphabet<T> {
        &self.alphabet
    }

    pub fn patterns(&self) -> &ActivationPatternSet {
        &self.patterns
    }

    /// Per-symbol scale factor `1/sqrt(n_rf)`.
    pub fn amplitude(&self) -> T {
        self.amplitude
    }

    pub fn average_energy(&self) -> T {
        let n = T::from_usize(self.vectors.len()).unwrap();
        self.vectors.iter().map(|v| v.energy()).sum::<T>() / n
    }

    /// Vector carrying `bits` (MSB first).
    pub fn bits_to_vector(&self, bits: &[u8]) -> Result<&TransmitVector<T>> {
        if bits.len() != self.eta {
            return Err(Error::LengthMismatch { expected: self.eta, got: bits.len() });
        }
        Ok(&self.vectors[bits_to_label(bits)? as usize])
    }

    /// Label bits of a dense vector, which must match a member exactly.
    pub fn vector_to_bits(&self, x: &[Complex<T>]) -> Result<Vec<u8>> {
        Ok(label_to_bits(self.label_of_dense(x)?, self.eta))
    }

    /// Label of a dense vector, which must match a member exactly.
    pub fn label_of_dense(&self, x: &[Complex<T>]) -> Result<u32> {
        if x.len() != self.dim() {
            return Err(Error::ShapeMismatch(format!("vector length {} != {}", x.len(), self.dim())));
        }
        let n_m = self.config.n_m();
        let mut active = Vec::with_capacity(self.config.n_rf);
        let mut mirrors = Vec::with_capacity(self.config.n_rf);
        let mut symbols = Vec::with_capacity(self.config.n_rf);
        for (tu, block) in x.chunks(n_m).enumerate() {
            let mut nz = block.iter().enumerate().filter(|(_, z)| **z != Complex::new(T::zero(), T::zero()));
            if let Some((pos, z)) = nz.next() {
                if nz.next().is_some() {
                    return Err(Error::NotInSet);
                }
                let sym = self.alphabet.points().iter().position(|p| *p * self.amplitude == *z).ok_or(Error::NotInSet)?;
                active.push(tu);
                mirrors.push(pos as u32);
                symbols.push(sym as u32);
            }
        }
        let pattern = self.patterns.position(&active).ok_or(Error::NotInSet)? as u32;
        let (m_rf, sym_bits) = (self.config.m_rf, self.config.alphabet.bits_per_symbol());
        let mut label = pattern;
        for m in mirrors {
            label = (label << m_rf) | m;
        }
        for s in symbols {
            label = (label << sym_bits) | s;
        }
        Ok(label)
    }
}
