//! Quick invariant checks, runnable from the command line.

use num_complex::Complex;

use crate::channel::{sample_iid_channel, ColumnMode, Purpose, RngStream};
use crate::config::{Scheme, SimConfig};
use crate::detect::{ml_search, pep_from_distance};
use crate::engine::{run_ber_sweep_with, EngineOptions};
use crate::mapsel::dmin_triple;
use crate::pccr::{build_codebook, recover_tone, tone_pattern, PhaseBook};
use crate::scalar::{complex_gaussian, q_function};
use crate::signalset::{build_signal_set, label_to_bits, AlphabetSpec, SystemConfig};
use crate::tcm::{default_code, tcm_encode, tcm_encode_labels, tcm_viterbi_decode};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(), String>) -> CheckResult {
    match f() {
        Ok(()) => CheckResult { name, passed: true, detail: String::new() },
        Err(detail) => CheckResult { name, passed: false, detail },
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rng(t: u64) -> rand_chacha::ChaCha8Rng {
    RngStream::new(0x5e1f, 0, t, Purpose::Other(7)).rng()
}

fn signal_sets() -> Result<(), String> {
    for n_tu in 1..=4 {
        for n_rf in 1..=n_tu {
            for m_rf in 0..=2 {
                for alphabet in [AlphabetSpec::TONE, AlphabetSpec::psk(2), AlphabetSpec::qam(4)] {
                    let cfg = SystemConfig::new(n_tu, n_rf, m_rf, 1, alphabet);
                    let set = build_signal_set::<f64>(&cfg).map_err(|e| e.to_string())?;
                    ensure(set.len() == 1 << cfg.rate(), || format!("{cfg:?}: wrong size"))?;
                    for x in set.vectors() {
                        let bits = set.vector_to_bits(&x.dense()).map_err(|e| e.to_string())?;
                        ensure(bits == label_to_bits(x.label(), set.eta()), || format!("{cfg:?}: label mismatch"))?;
                        ensure(x.taps().len() == n_rf, || format!("{cfg:?}: wrong support"))?;
                    }
                }
            }
        }
    }
    Ok(())
}

fn noiseless_ml() -> Result<(), String> {
    let cfg = SystemConfig::new(4, 2, 1, 2, AlphabetSpec::qam(4));
    let set = build_signal_set::<f64>(&cfg).map_err(|e| e.to_string())?;
    let h = sample_iid_channel::<f64, _>(&cfg, ColumnMode::Operational, &mut rng(1));
    let mut y = vec![Complex::new(0.0, 0.0); 2];
    for (i, x) in set.vectors().iter().enumerate() {
        h.mul_sparse_into(x, &mut y);
        ensure(ml_search(&y, &h, &set).0 == i, || format!("member {i} not recovered"))?;
    }
    Ok(())
}

fn pep_monte_carlo() -> Result<(), String> {
    let (d2, sigma2, n_r) = (2.0, 1.0, 1);
    let expect = pep_from_distance(d2, sigma2, n_r);
    let n = 200_000;
    let mut r = rng(2);
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..n {
        let g = complex_gaussian::<f64, _>(&mut r, 1.0).norm_sqr() * d2;
        let q = q_function((g / (2.0 * sigma2)).sqrt());
        s += q;
        s2 += q * q;
    }
    let mean = s / n as f64;
    let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
    ensure((mean - expect).abs() < 3.0 * se, || format!("closed form {expect}, Monte Carlo {mean} +- {se}"))
}

fn dmin_ordering() -> Result<(), String> {
    let cfg = SystemConfig::new(1, 1, 1, 1, AlphabetSpec::psk(2)).with_mirrors_available(2);
    let set = build_signal_set::<f64>(&cfg).map_err(|e| e.to_string())?;
    let full = build_signal_set::<f64>(&cfg.full_mirror_config()).map_err(|e| e.to_string())?;
    for t in 0..50 {
        let h = sample_iid_channel::<f64, _>(&cfg, ColumnMode::Full, &mut rng(100 + t));
        let d = dmin_triple(&h, &set, &full).map_err(|e| e.to_string())?;
        ensure(d.full <= d.mi && d.mi <= d.ed, || format!("ordering violated: {d:?}"))?;
    }
    Ok(())
}

fn pccr_recovery() -> Result<(), String> {
    let cfg = SystemConfig::new(2, 2, 1, 1, AlphabetSpec::TONE);
    let set = build_signal_set::<f64>(&cfg).map_err(|e| e.to_string())?;
    let h = sample_iid_channel::<f64, _>(&cfg, ColumnMode::Operational, &mut rng(3));
    let cb = build_codebook(&PhaseBook::from_channel(&h), 0, &set).map_err(|e| e.to_string())?;
    for (k, v) in cb.vectors().iter().enumerate() {
        let err: f64 = recover_tone(v).iter().zip(tone_pattern(&set, k)).map(|(a, b)| (a - b).norm()).sum();
        ensure(err < 1e-12, || format!("codeword {k} breaks conj(v) v = x"))?;
    }
    Ok(())
}

fn tcm_roundtrip() -> Result<(), String> {
    let code = default_code();
    let a: Vec<u8> = (0..36).map(|i| ((i * 7) % 3 == 0) as u8).collect();
    let b: Vec<u8> = (0..36).map(|i| ((i * 5) % 4 == 1) as u8).collect();
    let ab: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
    let (ea, eb, eab) = (tcm_encode(&a, &code), tcm_encode(&b, &code), tcm_encode(&ab, &code));
    let (ea, eb, eab) = (ea.map_err(|e| e.to_string())?, eb.map_err(|e| e.to_string())?, eab.map_err(|e| e.to_string())?);
    ensure(ea.iter().zip(&eb).map(|(x, y)| x ^ y).eq(eab.iter().copied()), || "code is not linear".into())?;
    let cfg = SystemConfig::new(4, 2, 1, 2, AlphabetSpec::qam(4));
    let set = build_signal_set::<f64>(&cfg).map_err(|e| e.to_string())?;
    let h = sample_iid_channel::<f64, _>(&cfg, ColumnMode::Operational, &mut rng(4));
    let ys: Vec<_> = tcm_encode_labels(&a, &code)
        .map_err(|e| e.to_string())?
        .iter()
        .map(|&l| h.mul_dense(&set.vectors()[l].dense()))
        .collect();
    let dec = tcm_viterbi_decode(&ys, &h, &set, 1.0, &code).map_err(|e| e.to_string())?;
    ensure(dec == a, || "noiseless Viterbi decode failed".into())
}

fn determinism() -> Result<(), String> {
    let sys = SystemConfig::new(2, 2, 1, 2, AlphabetSpec::psk(2));
    let cfg = SimConfig::new(Scheme::MimoMbm, sys, vec![0.0, 6.0]).with_stop(100, 20_000).with_seed(3);
    let a = run_ber_sweep_with(&cfg, &EngineOptions { workers: 1 }).map_err(|e| e.to_string())?;
    let b = run_ber_sweep_with(&cfg, &EngineOptions { workers: 3 }).map_err(|e| e.to_string())?;
    ensure(a == b, || "sweep depends on worker count".into())
}

/// Runs every check; none of them takes more than a second or two.
pub fn run_all() -> Vec<CheckResult> {
    vec![
        check("signal set structure and label round trip", signal_sets),
        check("noiseless ML detection", noiseless_ml),
        check("PEP closed form vs Monte Carlo", pep_monte_carlo),
        check("d_min ordering full <= MI <= ED", dmin_ordering),
        check("PC-CR recovery identity", pccr_recovery),
        check("TCM linearity and noiseless decode", tcm_roundtrip),
        check("sweep determinism across workers", determinism),
    ]
}
