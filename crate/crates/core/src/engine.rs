//! Deterministic Monte Carlo BER engine.
//!
//! Trials are grouped into fixed-size batches. Batches of one round run in
//! parallel, then are folded in batch order and the stop rule is checked
//! after each one. Every trial draws from its own RNG substreams, so the
//! result depends only on the configuration, never on the worker count.

use std::collections::BTreeMap;

use num_complex::Complex;
use rand::Rng;
use rayon::prelude::*;

use crate::channel::{snr_to_sigma2, ChannelMatrix, ColumnMode, KroneckerSampler, Purpose, RngStream};
use crate::config::{Feedback, Scheme, SimConfig};
use crate::detect::ml_search;
use crate::error::{Error, Result};
use crate::mapsel::{mi_select, restrict_channel_into, EdSearch};
use crate::pccr::{
    build_codebook, detect_pccr_scheme1, detect_pccr_scheme2, quantize_phases, scheme2_received, select_antenna_scheme1,
    PhaseBook,
};
use crate::scalar::complex_gaussian;
use crate::signalset::{build_signal_set, SignalSet};
use crate::tcm::{default_code, tcm_encode_labels, tcm_viterbi_decode, ConvCode, DEFAULT_FRAME_LEN};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EngineOptions {
    /// Worker threads; 0 uses rayon's default.
    pub workers: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BerPoint {
    pub snr_db: f64,
    pub bit_errors: u64,
    pub bits_simulated: u64,
    pub ber: f64,
    pub trials: u64,
}

impl BerPoint {
    pub fn new(snr_db: f64, bit_errors: u64, bits_simulated: u64, trials: u64) -> Self {
        let ber = if bits_simulated == 0 { 0.0 } else { bit_errors as f64 / bits_simulated as f64 };
        Self { snr_db, bit_errors, bits_simulated, ber, trials }
    }

    /// Binomial standard error of `ber`.
    pub fn std_error(&self) -> f64 {
        if self.bits_simulated == 0 {
            return 0.0;
        }
        (self.ber * (1.0 - self.ber) / self.bits_simulated as f64).sqrt()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BerCurve {
    pub metadata: BTreeMap<String, String>,
    pub points: Vec<BerPoint>,
}

impl BerCurve {
    /// SNR where the curve crosses `target`, interpolating `log10(ber)`
    /// linearly between the first bracketing pair of nonzero points.
    pub fn snr_at_ber(&self, target: f64) -> Option<f64> {
        let pts: Vec<&BerPoint> = self.points.iter().filter(|p| p.ber > 0.0).collect();
        pts.windows(2).find_map(|w| {
            let (a, b) = (w[0], w[1]);
            if a.ber >= target && b.ber <= target && a.ber > b.ber {
                let t = (a.ber.log10() - target.log10()) / (a.ber.log10() - b.ber.log10());
                Some(a.snr_db + t * (b.snr_db - a.snr_db))
            } else {
                None
            }
        })
    }

    /// Indices where BER rises by more than three standard errors over the
    /// previous point. Monte Carlo noise makes this a warning, not an error.
    pub fn monotonicity_flags(&self) -> Vec<usize> {
        (1..self.points.len())
            .filter(|&i| {
                let (a, b) = (&self.points[i - 1], &self.points[i]);
                b.ber - a.ber > 3.0 * (a.std_error().powi(2) + b.std_error().powi(2)).sqrt()
            })
            .collect()
    }
}

/// 64-bit FNV-1a, used to tag curves with their configuration.
pub fn config_hash(cfg: &SimConfig) -> String {
    let text = serde_json::to_string(cfg).expect("config serializes");
    let h = text.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3));
    format!("{h:016x}")
}

/// Per-scheme trial kernel.
trait Link: Sync {
    /// Info bits carried per trial.
    fn bits_per_trial(&self) -> u64;
    fn trials_per_batch(&self) -> u64;
    /// Bit errors over trials `first..first + count`.
    fn run_batch(&self, seed: u64, snr_index: u64, sigma2: f64, first: u64, count: u64) -> Result<u64>;
}

fn streams(seed: u64, snr_index: u64, trial: u64) -> [rand_chacha::ChaCha8Rng; 3] {
    [Purpose::Channel, Purpose::Data, Purpose::Noise].map(|p| RngStream::new(seed, snr_index, trial, p).rng())
}

fn add_noise<R: Rng>(y: &mut [Complex<f64>], sigma2: f64, rng: &mut R) {
    for z in y {
        *z += complex_gaussian(rng, sigma2);
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Selection {
    None,
    Mi,
    Ed,
}

/// Uncoded ML link with a fresh channel per use, optionally with MAP selection.
struct UncodedLink {
    set: SignalSet<f64>,
    sampler: KroneckerSampler<f64>,
    selection: Selection,
}

impl Link for UncodedLink {
    fn bits_per_trial(&self) -> u64 {
        self.set.eta() as u64
    }

    fn trials_per_batch(&self) -> u64 {
        if self.selection == Selection::Ed {
            64
        } else {
            512
        }
    }

    fn run_batch(&self, seed: u64, snr_index: u64, sigma2: f64, first: u64, count: u64) -> Result<u64> {
        let cfg = *self.set.config();
        let mut h = ChannelMatrix::zeros(self.sampler.rows(), self.sampler.cols());
        let mut h_op = ChannelMatrix::zeros(cfg.n_r, cfg.columns());
        let mut y = vec![Complex::new(0.0, 0.0); cfg.n_r];
        let mut ed = match self.selection {
            Selection::Ed => Some(EdSearch::new(&self.set)?),
            _ => None,
        };
        let mut errors = 0;
        for t in first..first + count {
            let [mut ch, mut data, mut noise] = streams(seed, snr_index, t);
            self.sampler.sample_into(&mut ch, &mut h);
            let hh = match self.selection {
                Selection::None => &h,
                Selection::Mi => {
                    restrict_channel_into(&h, &mi_select(&h, &cfg)?, &cfg, &mut h_op);
                    &h_op
                }
                Selection::Ed => {
                    let (sel, _) = ed.as_mut().unwrap().select(&h)?;
                    restrict_channel_into(&h, &sel, &cfg, &mut h_op);
                    &h_op
                }
            };
            let label = data.random_range(0..self.set.len());
            hh.mul_sparse_into(&self.set.vectors()[label], &mut y);
            add_noise(&mut y, sigma2, &mut noise);
            let (det, _) = ml_search(&y, hh, &self.set);
            errors += (det ^ label).count_ones() as u64;
        }
        Ok(errors)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Receiver {
    One,
    Two,
}

struct PcCrLink {
    set: SignalSet<f64>,
    sampler: KroneckerSampler<f64>,
    feedback: Feedback,
    receiver: Receiver,
}

impl Link for PcCrLink {
    fn bits_per_trial(&self) -> u64 {
        self.set.eta() as u64
    }

    fn trials_per_batch(&self) -> u64 {
        256
    }

    fn run_batch(&self, seed: u64, snr_index: u64, sigma2: f64, first: u64, count: u64) -> Result<u64> {
        let n_r = self.set.config().n_r;
        let g = self.set.amplitude();
        let mut h = ChannelMatrix::zeros(self.sampler.rows(), self.sampler.cols());
        let mut errors = 0;
        for t in first..first + count {
            let [mut ch, mut data, mut noise] = streams(seed, snr_index, t);
            self.sampler.sample_into(&mut ch, &mut h);
            let mut book = PhaseBook::from_channel(&h);
            if let Feedback::Bits(b) = self.feedback {
                book = quantize_phases(&book, b);
            }
            let k = if n_r == 1 { 0 } else { select_antenna_scheme1(&h, sigma2, &self.set, &book)? };
            let cb = build_codebook(&book, k, &self.set)?;
            let label = data.random_range(0..self.set.len());
            let det = match self.receiver {
                Receiver::One => {
                    let row = h.row(k);
                    let v = &cb.vectors()[label];
                    let s: Complex<f64> = row.iter().zip(v).map(|(a, b)| a * b).sum();
                    let y = s * g + complex_gaussian(&mut noise, sigma2);
                    detect_pccr_scheme1(y, &row, &cb, &self.set)?
                }
                Receiver::Two => {
                    let mut y = scheme2_received(&h, &cb, label, g);
                    add_noise(&mut y, sigma2, &mut noise);
                    detect_pccr_scheme2(&y, &h, &cb, &self.set)?
                }
            };
            errors += (det.index ^ label).count_ones() as u64;
        }
        Ok(errors)
    }
}

/// Coded frames over a channel held fixed for the whole frame.
struct TcmLink {
    set: SignalSet<f64>,
    sampler: KroneckerSampler<f64>,
    code: ConvCode,
    frame_len: usize,
}

impl Link for TcmLink {
    fn bits_per_trial(&self) -> u64 {
        self.code.info_bits(self.frame_len) as u64
    }

    fn trials_per_batch(&self) -> u64 {
        16
    }

    fn run_batch(&self, seed: u64, snr_index: u64, sigma2: f64, first: u64, count: u64) -> Result<u64> {
        let n_r = self.set.config().n_r;
        let mut h = ChannelMatrix::zeros(self.sampler.rows(), self.sampler.cols());
        let n_info = self.code.info_bits(self.frame_len);
        let mut errors = 0;
        for t in first..first + count {
            let [mut ch, mut data, mut noise] = streams(seed, snr_index, t);
            self.sampler.sample_into(&mut ch, &mut h);
            let bits: Vec<u8> = (0..n_info).map(|_| data.random_range(0..2u8)).collect();
            let labels = tcm_encode_labels(&bits, &self.code)?;
            let ys: Vec<Vec<Complex<f64>>> = labels
                .iter()
                .map(|&l| {
                    let mut y = vec![Complex::new(0.0, 0.0); n_r];
                    h.mul_sparse_into(&self.set.vectors()[l], &mut y);
                    add_noise(&mut y, sigma2, &mut noise);
                    y
                })
                .collect();
            let decoded = tcm_viterbi_decode(&ys, &h, &self.set, sigma2, &self.code)?;
            errors += bits.iter().zip(&decoded).filter(|(a, b)| a != b).count() as u64;
        }
        Ok(errors)
    }
}

fn build_link(cfg: &SimConfig) -> Result<Box<dyn Link>> {
    cfg.validate()?;
    let sys = cfg.system;
    let corr = cfg.correlation();
    let set = build_signal_set::<f64>(&sys)?;
    let operational = || KroneckerSampler::new(&sys, &corr, ColumnMode::Operational);
    Ok(match cfg.scheme {
        Scheme::MapselMi | Scheme::MapselEd => {
            let selection = if cfg.scheme == Scheme::MapselMi { Selection::Mi } else { Selection::Ed };
            if selection == Selection::Ed {
                EdSearch::new(&set)?;
            }
            Box::new(UncodedLink { set, sampler: KroneckerSampler::new(&sys, &corr, ColumnMode::Full)?, selection })
        }
        Scheme::PccrNr1 | Scheme::PccrRx1 | Scheme::PccrRx2 => Box::new(PcCrLink {
            set,
            sampler: operational()?,
            feedback: cfg.feedback(),
            receiver: if cfg.scheme == Scheme::PccrRx2 { Receiver::Two } else { Receiver::One },
        }),
        Scheme::TcmGsmMbm => {
            Box::new(TcmLink { set, sampler: operational()?, code: default_code(), frame_len: DEFAULT_FRAME_LEN })
        }
        _ => Box::new(UncodedLink { set, sampler: operational()?, selection: Selection::None }),
    })
}

fn run_point(link: &dyn Link, cfg: &SimConfig, snr_index: usize, pool: &rayon::ThreadPool) -> Result<BerPoint> {
    let snr_db = cfg.snr_db[snr_index];
    let sigma2 = snr_to_sigma2(snr_db);
    let batch = link.trials_per_batch();
    let max = cfg.stop.max_trials;
    let round = 2 * pool.current_num_threads().max(1) as u64;
    let (mut trials, mut errors, mut next) = (0u64, 0u64, 0u64);
    let total_batches = max.div_ceil(batch);
    'outer: while next < total_batches {
        let end = (next + round).min(total_batches);
        let results: Vec<Result<(u64, u64)>> = pool.install(|| {
            (next..end)
                .into_par_iter()
                .map(|b| {
                    let first = b * batch;
                    let count = batch.min(max - first);
                    link.run_batch(cfg.master_seed, snr_index as u64, sigma2, first, count).map(|e| (count, e))
                })
                .collect()
        });
        for r in results {
            let (count, e) = r?;
            trials += count;
            errors += e;
            if errors >= cfg.stop.min_bit_errors {
                break 'outer;
            }
        }
        next = end;
    }
    Ok(BerPoint::new(snr_db, errors, trials * link.bits_per_trial(), trials))
}

pub fn run_ber_sweep(cfg: &SimConfig) -> Result<BerCurve> {
    run_ber_sweep_with(cfg, &EngineOptions::default())
}

pub fn run_ber_sweep_with(cfg: &SimConfig, opts: &EngineOptions) -> Result<BerCurve> {
    let link = build_link(cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let points = (0..cfg.snr_db.len()).map(|i| run_point(link.as_ref(), cfg, i, &pool)).collect::<Result<_>>()?;
    let mut metadata = BTreeMap::new();
    metadata.insert("scheme".into(), cfg.scheme.name().into());
    metadata.insert("master_seed".into(), cfg.master_seed.to_string());
    metadata.insert("config_hash".into(), config_hash(cfg));
    metadata.insert("version".into(), concat!("mbm ", env!("CARGO_PKG_VERSION")).into());
    Ok(BerCurve { metadata, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signalset::{AlphabetSpec, SystemConfig};

    fn curve(pts: &[(f64, f64)]) -> BerCurve {
        BerCurve {
            metadata: BTreeMap::new(),
            points: pts.iter().map(|&(s, b)| BerPoint { snr_db: s, bit_errors: 0, bits_simulated: 1, ber: b, trials: 1 }).collect(),
        }
    }

    #[test]
    fn interpolates_crossing() {
        let c = curve(&[(0.0, 1e-1), (10.0, 1e-3), (20.0, 1e-5)]);
        assert!((c.snr_at_ber(1e-2).unwrap() - 5.0).abs() < 1e-12);
        assert!((c.snr_at_ber(1e-4).unwrap() - 15.0).abs() < 1e-12);
        assert!(c.snr_at_ber(1e-6).is_none());
    }

    #[test]
    fn stop_rule_and_conservation() {
        let sys = SystemConfig::new(1, 1, 1, 1, AlphabetSpec::psk(2));
        let cfg = SimConfig::new(Scheme::SimoMbm, sys, vec![0.0, 40.0]).with_stop(50, 3000);
        let c = run_ber_sweep_with(&cfg, &EngineOptions { workers: 1 }).unwrap();
        let p = &c.points[0];
        assert!(p.bit_errors >= 50 && p.trials < 3000 && p.trials.is_multiple_of(512));
        let q = &c.points[1];
        assert_eq!(q.trials, 3000);
        assert_eq!(q.bits_simulated, 3000 * 2);
        for p in &c.points {
            assert!(p.bit_errors <= p.bits_simulated);
        }
    }

    #[test]
    fn every_scheme_runs() {
        let bpsk = AlphabetSpec::psk(2);
        let cases = [
            (Scheme::SimoMbm, SystemConfig::new(1, 1, 2, 2, bpsk)),
            (Scheme::MimoMbm, SystemConfig::new(2, 2, 1, 2, bpsk)),
            (Scheme::SmMbm, SystemConfig::new(2, 1, 1, 2, bpsk)),
            (Scheme::GsmMbm, SystemConfig::new(3, 2, 1, 2, bpsk)),
            (Scheme::Mimo, SystemConfig::new(2, 2, 0, 2, bpsk)),
            (Scheme::Sm, SystemConfig::new(4, 1, 0, 2, bpsk)),
            (Scheme::Gsm, SystemConfig::new(4, 2, 0, 2, bpsk)),
            (Scheme::MapselMi, SystemConfig::new(2, 2, 1, 1, bpsk).with_mirrors_available(2)),
            (Scheme::MapselEd, SystemConfig::new(2, 2, 1, 1, bpsk).with_mirrors_available(2)),
            (Scheme::PccrNr1, SystemConfig::new(2, 2, 1, 1, AlphabetSpec::TONE)),
            (Scheme::PccrRx1, SystemConfig::new(2, 2, 1, 2, AlphabetSpec::TONE)),
            (Scheme::PccrRx2, SystemConfig::new(2, 2, 1, 2, AlphabetSpec::TONE)),
            (Scheme::TcmGsmMbm, SystemConfig::new(4, 2, 1, 2, AlphabetSpec::qam(4))),
        ];
        for (scheme, sys) in cases {
            let cfg = SimConfig::new(scheme, sys, vec![0.0, 60.0]).with_stop(20, 200);
            let c = run_ber_sweep(&cfg).unwrap();
            assert!(c.points[0].ber > 0.0, "{scheme}");
            assert_eq!(c.points[1].bit_errors, 0, "{scheme}");
        }
    }
}
