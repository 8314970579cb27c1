//! Rate-6/8, 64-state convolutional coding over GSM-MBM channel uses.
//!
//! Generator entry `g[i][j]` is an octal tap polynomial from input `i` to
//! output `j`; bit `p` of the entry (LSB = 0) taps input `i` delayed by `p`
//! steps, so the most significant bit is the oldest register. The memory of
//! input `i` is the degree of the largest entry in its row.
//!
//! Each trellis step emits 8 coded bits, which form one channel-use label
//! (output 0 is the label MSB). Frames start in the zero state and end with
//! all-zero tail steps that flush the registers.

use num_complex::Complex;

use crate::channel::ChannelMatrix;
use crate::error::{Error, Result};
use crate::signalset::SignalSet;

pub const INPUTS: usize = 6;
pub const OUTPUTS: usize = 8;
pub const MEMORY: usize = 6;
pub const STATES: usize = 1 << MEMORY;

/// Default generator rows (64 states, memories 0, 1, 2, 0, 1, 2).
pub const DEFAULT_GENERATOR: [&str; INPUTS] = [
    "1 1 1 0 0 0 1 0",
    "3 1 2 0 0 0 0 0",
    "2 5 5 0 0 0 0 0",
    "0 0 0 1 1 1 0 1",
    "0 0 0 3 1 2 0 0",
    "0 0 0 2 5 5 0 0",
];

/// Frame length in channel uses.
pub const DEFAULT_FRAME_LEN: usize = 20;

#[derive(Clone, Debug)]
pub struct ConvCode {
    generator: [[u32; OUTPUTS]; INPUTS],
    memory: [usize; INPUTS],
    /// `next[s * 64 + u]`
    next: Vec<u8>,
    /// 8-bit output label of the branch `(s, u)`.
    output: Vec<u8>,
}

fn parity(x: u32) -> u32 {
    x.count_ones() & 1
}

impl ConvCode {
    pub fn generator(&self) -> &[[u32; OUTPUTS]; INPUTS] {
        &self.generator
    }

    pub fn memory(&self) -> &[usize; INPUTS] {
        &self.memory
    }

    pub fn states(&self) -> usize {
        STATES
    }

    /// Zero-input steps needed to return to state 0.
    pub fn tail(&self) -> usize {
        *self.memory.iter().max().unwrap()
    }

    /// Info bits carried by a frame of `frame_len` channel uses.
    pub fn info_bits(&self, frame_len: usize) -> usize {
        frame_len.saturating_sub(self.tail()) * INPUTS
    }

    #[inline]
    pub fn next_state(&self, state: usize, input: usize) -> usize {
        self.next[state * 64 + input] as usize
    }

    #[inline]
    pub fn branch_output(&self, state: usize, input: usize) -> usize {
        self.output[state * 64 + input] as usize
    }

    fn offsets(&self) -> [usize; INPUTS] {
        let mut off = [0; INPUTS];
        for i in 1..INPUTS {
            off[i] = off[i - 1] + self.memory[i - 1];
        }
        off
    }

    /// One encoder step; `input` bit `5 - i` is input `i`.
    fn step(&self, state: usize, input: usize) -> (usize, usize) {
        let off = self.offsets();
        let mut next = 0;
        let mut windows = [0u32; INPUTS];
        for i in 0..INPUTS {
            let m = self.memory[i];
            let hist = ((state >> off[i]) & ((1 << m) - 1)) as u32;
            let u = ((input >> (INPUTS - 1 - i)) & 1) as u32;
            let w = (hist << 1) | u;
            windows[i] = w;
            next |= ((w & ((1 << m) - 1)) as usize) << off[i];
        }
        let mut label = 0;
        for j in 0..OUTPUTS {
            let bit = (0..INPUTS).fold(0, |acc, i| acc ^ parity(self.generator[i][j] & windows[i]));
            label = (label << 1) | bit as usize;
        }
        (next, label)
    }
}

/// Parses six rows of eight octal entries.
pub fn build_code(rows: &[&str]) -> Result<ConvCode> {
    if rows.len() != INPUTS {
        return Err(Error::BadGenerator(format!("expected {INPUTS} rows, got {}", rows.len())));
    }
    let mut generator = [[0u32; OUTPUTS]; INPUTS];
    let mut memory = [0usize; INPUTS];
    for (i, row) in rows.iter().enumerate() {
        let entries: Vec<&str> = row.split_whitespace().collect();
        if entries.len() != OUTPUTS {
            return Err(Error::BadGenerator(format!("row {i} has {} entries", entries.len())));
        }
        for (j, e) in entries.iter().enumerate() {
            generator[i][j] =
                u32::from_str_radix(e, 8).map_err(|_| Error::BadGenerator(format!("bad octal entry {e:?}")))?;
        }
        let max = *generator[i].iter().max().unwrap();
        memory[i] = (32 - max.leading_zeros()).saturating_sub(1) as usize;
    }
    let total: usize = memory.iter().sum();
    if total != MEMORY {
        return Err(Error::BadGenerator(format!("total memory {total}, expected {MEMORY}")));
    }
    let mut code = ConvCode { generator, memory, next: vec![0; STATES * 64], output: vec![0; STATES * 64] };
    for s in 0..STATES {
        for u in 0..64 {
            let (n, o) = code.step(s, u);
            code.next[s * 64 + u] = n as u8;
            code.output[s * 64 + u] = o as u8;
        }
    }
    Ok(code)
}

pub fn default_code() -> ConvCode {
    build_code(&DEFAULT_GENERATOR).expect("default generator is valid")
}

fn chunk_value(bits: &[u8]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
}

/// Coded labels, one per trellis step including the tail.
pub fn tcm_encode_labels(bits: &[u8], code: &ConvCode) -> Result<Vec<usize>> {
    if !bits.len().is_multiple_of(INPUTS) {
        return Err(Error::LengthError(bits.len()));
    }
    let mut state = 0;
    let inputs = bits.chunks(INPUTS).map(chunk_value).chain(std::iter::repeat_n(0, code.tail()));
    Ok(inputs
        .map(|u| {
            let o = code.branch_output(state, u);
            state = code.next_state(state, u);
            o
        })
        .collect())
}

/// Coded bits: 8 per step, tail included.
pub fn tcm_encode(bits: &[u8], code: &ConvCode) -> Result<Vec<u8>> {
    Ok(tcm_encode_labels(bits, code)?
        .into_iter()
        .flat_map(|l| (0..OUTPUTS).rev().map(move |b| ((l >> b) & 1) as u8))
        .collect())
}

/// Decoded info bits and the winning path metric.
#[derive(Clone, Debug, PartialEq)]
pub struct ViterbiOutput<T> {
    pub bits: Vec<u8>,
    pub metric: T,
}

/// `||y_t - H x(l)||^2 / sigma2` for every label `l`, written into `out`.
pub fn branch_metrics<T: crate::Real>(y: &[Complex<T>], h: &ChannelMatrix<T>, set: &SignalSet<T>, sigma2: T, out: &mut [T]) {
    let mut hx = vec![Complex::new(T::zero(), T::zero()); h.rows()];
    for (x, m) in set.vectors().iter().zip(out.iter_mut()) {
        h.mul_sparse_into(x, &mut hx);
        *m = y.iter().zip(&hx).fold(T::zero(), |a, (u, v)| a + (*u - *v).norm_sqr()) / sigma2;
    }
}

/// Soft-decision Viterbi over a terminated frame with `H` fixed.
///
/// The path starts and ends in state 0; ties keep the lowest predecessor
/// state, then the lowest input.
pub fn tcm_viterbi<T: crate::Real>(
    ys: &[Vec<Complex<T>>],
    h: &ChannelMatrix<T>,
    set: &SignalSet<T>,
    sigma2: T,
    code: &ConvCode,
) -> Result<ViterbiOutput<T>> {
    if set.eta() != OUTPUTS {
        return Err(Error::ShapeMismatch(format!("signal set carries {} bits per use, code emits {OUTPUTS}", set.eta())));
    }
    if h.cols() != set.dim() {
        return Err(Error::ShapeMismatch(format!("H has {} columns, set dimension {}", h.cols(), set.dim())));
    }
    if let Some(y) = ys.iter().find(|y| y.len() != h.rows()) {
        return Err(Error::ShapeMismatch(format!("received vector length {} != {}", y.len(), h.rows())));
    }
    let steps = ys.len();
    let tail = code.tail();
    if steps < tail {
        return Err(Error::LengthError(steps));
    }
    let mut bm = vec![T::zero(); 1 << OUTPUTS];
    let mut cost = vec![T::infinity(); STATES];
    cost[0] = T::zero();
    let mut next_cost = vec![T::infinity(); STATES];
    // survivor (predecessor state, input) per step and state
    let mut surv = vec![(0u8, 0u8); steps * STATES];
    for (t, y) in ys.iter().enumerate() {
        branch_metrics(y, h, set, sigma2, &mut bm);
        let n_inputs = if t + tail >= steps { 1 } else { 64 };
        next_cost.iter_mut().for_each(|c| *c = T::infinity());
        for s in 0..STATES {
            let c = cost[s];
            if !c.is_finite() {
                continue;
            }
            for u in 0..n_inputs {
                let ns = code.next_state(s, u);
                let m = c + bm[code.branch_output(s, u)];
                if m < next_cost[ns] {
                    next_cost[ns] = m;
                    surv[t * STATES + ns] = (s as u8, u as u8);
                }
            }
        }
        std::mem::swap(&mut cost, &mut next_cost);
    }
    let metric = cost[0];
    let mut inputs = vec![0usize; steps];
    let mut state = 0;
    for t in (0..steps).rev() {
        let (p, u) = surv[t * STATES + state];
        inputs[t] = u as usize;
        state = p as usize;
    }
    let bits = inputs[..steps - tail]
        .iter()
        .flat_map(|&u| (0..INPUTS).rev().map(move |b| ((u >> b) & 1) as u8))
        .collect();
    Ok(ViterbiOutput { bits, metric })
}

/// Decoded info bits only.
pub fn tcm_viterbi_decode<T: crate::Real>(
    ys: &[Vec<Complex<T>>],
    h: &ChannelMatrix<T>,
    set: &SignalSet<T>,
    sigma2: T,
    code: &ConvCode,
) -> Result<Vec<u8>> {
    Ok(tcm_viterbi(ys, h, set, sigma2, code)?.bits)
}
