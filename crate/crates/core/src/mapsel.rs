//! Mirror activation pattern (MAP) selection.
//!
//! Each TU offers `N_all = 2^M_rf` fades but signals with only `N_m = 2^m_rf`
//! of them. The receiver picks the subset once per coherence block, either
//! by channel energy (MI criterion) or by maximizing the minimum received
//! distance of the signal set (ED criterion). MAP indices are 0-based.

use num_bigint::BigUint;
use num_complex::Complex;

use crate::channel::ChannelMatrix;
use crate::error::{Error, Result};
use crate::scalar::{norm_sqr, Real};
use crate::signalset::{SignalSet, SystemConfig};

/// Largest `|L| * |X|^2` the ED search will attempt.
pub const ED_SEARCH_CAP: f64 = 1e9;

/// Selected MAP indices per TU, each list ascending.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MapIndexSet {
    per_tu: Vec<Vec<usize>>,
}

impl MapIndexSet {
    pub fn new(mut per_tu: Vec<Vec<usize>>) -> Self {
        for l in &mut per_tu {
            l.sort_unstable();
        }
        Self { per_tu }
    }

    pub fn per_tu(&self) -> &[Vec<usize>] {
        &self.per_tu
    }

    /// Full-channel column of operational column `k` of TU `tu`.
    #[inline]
    fn full_column(&self, tu: usize, k: usize, n_all: usize) -> usize {
        tu * n_all + self.per_tu[tu][k]
    }
}

fn check_full(h_full: &ChannelMatrix<impl Real>, config: &SystemConfig) -> Result<()> {
    if h_full.cols() != config.full_columns() || h_full.rows() != config.n_r {
        return Err(Error::ShapeMismatch(format!(
            "expected {}x{} full channel, got {}x{}",
            config.n_r,
            config.full_columns(),
            h_full.rows(),
            h_full.cols()
        )));
    }
    Ok(())
}

/// Per TU, the `N_m` MAPs with the largest `||h||^2`; ties to lower index.
pub fn mi_select<T: Real>(h_full: &ChannelMatrix<T>, config: &SystemConfig) -> Result<MapIndexSet> {
    check_full(h_full, config)?;
    let (n_all, n_m) = (config.n_all(), config.n_m());
    let per_tu = (0..config.n_tu)
        .map(|tu| {
            let norms: Vec<T> = (0..n_all).map(|k| norm_sqr(h_full.column(tu * n_all + k))).collect();
            let mut idx: Vec<usize> = (0..n_all).collect();
            // stable sort keeps lower indices first among equal norms
            idx.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).unwrap_or(std::cmp::Ordering::Equal));
            idx.truncate(n_m);
            idx
        })
        .collect();
    Ok(MapIndexSet::new(per_tu))
}

/// `H_L = H A_L` in operational shape.
pub fn restrict_channel<T: Real>(h_full: &ChannelMatrix<T>, sel: &MapIndexSet, config: &SystemConfig) -> ChannelMatrix<T> {
    let mut out = ChannelMatrix::zeros(h_full.rows(), config.columns());
    restrict_channel_into(h_full, sel, config, &mut out);
    out
}

pub fn restrict_channel_into<T: Real>(
    h_full: &ChannelMatrix<T>,
    sel: &MapIndexSet,
    config: &SystemConfig,
    out: &mut ChannelMatrix<T>,
) {
    let (n_all, n_m) = (config.n_all(), config.n_m());
    for tu in 0..config.n_tu {
        for k in 0..n_m {
            out.column_mut(tu * n_m + k).copy_from_slice(h_full.column(sel.full_column(tu, k, n_all)));
        }
    }
}

/// Received points `H x` for every member, stored contiguously.
pub fn received_points<T: Real>(h: &ChannelMatrix<T>, set: &SignalSet<T>) -> Vec<Complex<T>> {
    let n_r = h.rows();
    let mut pts = vec![Complex::new(T::zero(), T::zero()); set.len() * n_r];
    for (x, out) in set.vectors().iter().zip(pts.chunks_mut(n_r)) {
        h.mul_sparse_into(x, out);
    }
    pts
}

fn min_pair_distance<T: Real>(pts: &[Complex<T>], n_r: usize, floor: T) -> T {
    let n = pts.len() / n_r;
    let mut best = T::infinity();
    for a in 0..n {
        let pa = &pts[a * n_r..(a + 1) * n_r];
        for b in (a + 1)..n {
            let pb = &pts[b * n_r..(b + 1) * n_r];
            let mut d = T::zero();
            for (u, v) in pa.iter().zip(pb) {
                d = d + (*u - *v).norm_sqr();
            }
            if d < best {
                best = d;
                if best <= floor {
                    return best;
                }
            }
        }
    }
    best
}

/// `min_{x != x~} ||H (x - x~)||^2` over a signal set.
pub fn min_received_distance<T: Real>(h: &ChannelMatrix<T>, set: &SignalSet<T>) -> T {
    min_pair_distance(&received_points(h, set), h.rows(), T::neg_infinity())
}

/// ED objective of a candidate selection.
pub fn selection_objective<T: Real>(h_full: &ChannelMatrix<T>, sel: &MapIndexSet, set: &SignalSet<T>) -> T {
    min_received_distance(&restrict_channel(h_full, sel, set.config()), set)
}

/// All `k`-subsets of `0..n` in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut comb: Vec<usize> = (0..k).collect();
    loop {
        out.push(comb.clone());
        let mut i = k;
        while i > 0 && comb[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        comb[i - 1] += 1;
        for t in i..k {
            comb[t] = comb[t - 1] + 1;
        }
    }
}

/// Reusable exhaustive ED search for one configuration.
///
/// Candidates run in lexicographic order with TU 0 most significant. A
/// candidate is abandoned as soon as one pair falls to the incumbent
/// objective, since only a strictly larger minimum can replace it.
#[derive(Clone, Debug)]
pub struct EdSearch<'a, T> {
    set: &'a SignalSet<T>,
    combos: Vec<Vec<usize>>,
    points: Vec<Complex<T>>,
    col_map: Vec<usize>,
}

impl<'a, T: Real> EdSearch<'a, T> {
    pub fn new(set: &'a SignalSet<T>) -> Result<Self> {
        let config = set.config();
        let combos = combinations(config.n_all(), config.n_m());
        let candidates = (combos.len() as f64).powi(config.n_tu as i32);
        let work = candidates * (set.len() as f64).powi(2);
        if work > ED_SEARCH_CAP {
            return Err(Error::SearchTooLarge(work));
        }
        Ok(Self {
            set,
            combos,
            points: vec![Complex::new(T::zero(), T::zero()); set.len() * config.n_r],
            col_map: vec![0; config.columns()],
        })
    }

    /// Number of candidate selections `|L|`.
    pub fn candidates(&self) -> usize {
        self.combos.len().pow(self.set.config().n_tu as u32)
    }

    pub fn select(&mut self, h_full: &ChannelMatrix<T>) -> Result<(MapIndexSet, T)> {
        let config = *self.set.config();
        check_full(h_full, &config)?;
        let (n_tu, n_m, n_all, n_r) = (config.n_tu, config.n_m(), config.n_all(), config.n_r);
        let mut digits = vec![0usize; n_tu];
        let mut best: Option<(Vec<usize>, T)> = None;
        loop {
            for tu in 0..n_tu {
                let combo = &self.combos[digits[tu]];
                for k in 0..n_m {
                    self.col_map[tu * n_m + k] = tu * n_all + combo[k];
                }
            }
            for (x, out) in self.set.vectors().iter().zip(self.points.chunks_mut(n_r)) {
                out.iter_mut().for_each(|z| *z = Complex::new(T::zero(), T::zero()));
                for tap in x.taps() {
                    for (o, h) in out.iter_mut().zip(h_full.column(self.col_map[tap.column])) {
                        *o = *o + *h * tap.value;
                    }
                }
            }
            let floor = best.as_ref().map_or(T::neg_infinity(), |b| b.1);
            let obj = min_pair_distance(&self.points, n_r, floor);
            if obj > floor {
                best = Some((digits.clone(), obj));
            }
            // odometer, last TU fastest
            let mut t = n_tu;
            loop {
                if t == 0 {
                    let (d, obj) = best.expect("at least one candidate");
                    let per_tu = d.iter().map(|&i| self.combos[i].clone()).collect();
                    return Ok((MapIndexSet::new(per_tu), obj));
                }
                t -= 1;
                digits[t] += 1;
                if digits[t] < self.combos.len() {
                    break;
                }
                digits[t] = 0;
            }
        }
    }
}

/// Selection maximizing `min ||H_L (x - x~)||^2` over all candidate sets.
pub fn ed_select<T: Real>(h_full: &ChannelMatrix<T>, set: &SignalSet<T>) -> Result<MapIndexSet> {
    Ok(EdSearch::new(set)?.select(h_full)?.0)
}

/// Minimum received distances of the full constellation and of the MI and
/// ED selections for one channel draw.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DminTriple<T> {
    pub full: T,
    pub mi: T,
    pub ed: T,
}

/// `full_set` must be built from `set.config().full_mirror_config()`.
pub fn dmin_triple<T: Real>(h_full: &ChannelMatrix<T>, set: &SignalSet<T>, full_set: &SignalSet<T>) -> Result<DminTriple<T>> {
    let config = set.config();
    check_full(h_full, config)?;
    let mi = mi_select(h_full, config)?;
    let ed = ed_select(h_full, set)?;
    Ok(DminTriple {
        full: min_received_distance(h_full, full_set),
        mi: selection_objective(h_full, &mi, set),
        ed: selection_objective(h_full, &ed, set),
    })
}

/// Block-diagonal 0/1 selection matrix `A_L`, one 1 per column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelectionMatrix {
    rows: usize,
    /// Row holding the 1 of each column.
    ones: Vec<usize>,
}

impl SelectionMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.ones.len()
    }

    pub fn get(&self, r: usize, c: usize) -> u8 {
        u8::from(self.ones[c] == r)
    }

    pub fn dense(&self) -> Vec<Vec<u8>> {
        (0..self.rows).map(|r| (0..self.cols()).map(|c| self.get(r, c)).collect()).collect()
    }

    /// `H A` computed as a column gather.
    pub fn apply<T: Real>(&self, h: &ChannelMatrix<T>) -> ChannelMatrix<T> {
        assert_eq!(h.cols(), self.rows);
        let cols: Vec<Vec<Complex<T>>> = self.ones.iter().map(|&r| h.column(r).to_vec()).collect();
        ChannelMatrix::from_columns(&cols)
    }
}

pub fn selection_matrix(sel: &MapIndexSet, config: &SystemConfig) -> SelectionMatrix {
    let (n_all, n_m) = (config.n_all(), config.n_m());
    let ones = (0..config.n_tu).flat_map(|tu| (0..n_m).map(move |k| (tu, k))).map(|(tu, k)| sel.full_column(tu, k, n_all)).collect();
    SelectionMatrix { rows: config.full_columns(), ones }
}

fn binomial_big(n: u64, k: u64) -> BigUint {
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// `ceil(log2 C(N_all, N_m)^n_tu)` in exact integer arithmetic.
pub fn feedback_bits_mapsel(config: &SystemConfig) -> u64 {
    let c = binomial_big(config.n_all() as u64, config.n_m() as u64);
    let total = c.pow(config.n_tu as u32);
    if total <= BigUint::from(1u32) {
        0
    } else {
        (total - BigUint::from(1u32)).bits()
    }
}

/// ED selection diversity `n_r (2^M_rf - 2^m_rf + 1)`.
pub fn predicted_diversity_ed(config: &SystemConfig) -> usize {
    config.n_r * (config.n_all() - config.n_m() + 1)
}

/// MI selection diversity `n_r`.
pub fn predicted_diversity_mi(config: &SystemConfig) -> usize {
    config.n_r
}
