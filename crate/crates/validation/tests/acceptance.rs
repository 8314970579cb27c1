//! End-to-end acceptance checks, one line per criterion.
//!
//! Run with `cargo test -p mbm-validation --test acceptance -- [N ...]` to select criteria
//! by number. Set `MBM_ACCEPTANCE_LONG=1` to add the heavier PC-CR
//! diversity configurations to criterion 10.

use std::time::Instant;

use num_complex::Complex;
use rand::Rng;

use mbm::channel::{sample_iid_channel, ColumnMode, CorrelationSpec, Purpose, RngStream};
use mbm::detect::{ml_search, pep_from_distance, union_bound_curve};
use mbm::diversity::estimate_diversity_in_band;
use mbm::mapsel::dmin_triple;
use mbm::pccr::{build_codebook, compensated_channel, scheme2_metric, PhaseBook};
use mbm::scalar::{complex_gaussian, q_function};
use mbm::signalset::{build_activation_patterns, build_signal_set, label_to_bits, AlphabetSpec, SystemConfig};
use mbm::tcm::{default_code, tcm_encode_labels, tcm_viterbi};
use mbm::{run_ber_sweep, run_ber_sweep_with, BerCurve, EngineOptions, Error, Feedback, Scheme, SimConfig};

struct Outcome {
    pass: bool,
    summary: String,
}

fn outcome(pass: bool, summary: impl Into<String>) -> Outcome {
    Outcome { pass, summary: summary.into() }
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + step * i as f64).collect()
}

fn sweep(scheme: Scheme, sys: SystemConfig, snr: Vec<f64>, min_errors: u64, max_trials: u64) -> SimConfig {
    SimConfig::new(scheme, sys, snr).with_stop(min_errors, max_trials).with_seed(2024)
}

fn run(cfg: &SimConfig) -> BerCurve {
    run_ber_sweep(cfg).expect("sweep runs")
}

fn snr_at(curve: &BerCurve, target: f64) -> f64 {
    curve.snr_at_ber(target).unwrap_or(f64::NAN)
}

fn bpsk() -> AlphabetSpec {
    AlphabetSpec::psk(2)
}

// 1 -------------------------------------------------------------------------

fn binom(n: usize, k: usize) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

fn criterion_1() -> Outcome {
    let (mut checked, mut capped) = (0, 0);
    for n_tu in 1..=4 {
        for n_rf in 1..=n_tu {
            for m_rf in 0..=3 {
                for alphabet in [AlphabetSpec::TONE, bpsk(), AlphabetSpec::psk(4), AlphabetSpec::qam(4), AlphabetSpec::psk(8), AlphabetSpec::qam(8)] {
                    let cfg = SystemConfig::new(n_tu, n_rf, m_rf, 1, alphabet);
                    let c = binom(n_tu, n_rf);
                    let eta = (63 - c.leading_zeros()) as usize + n_rf * m_rf + n_rf * alphabet.order.trailing_zeros() as usize;
                    if cfg.rate() != eta {
                        return outcome(false, format!("{cfg:?}: rate {} != {eta}", cfg.rate()));
                    }
                    let set = match build_signal_set::<f64>(&cfg) {
                        Ok(s) => s,
                        Err(Error::SetTooLarge { size, .. }) if size == 1u128 << eta && eta > 20 => {
                            capped += 1;
                            continue;
                        }
                        Err(e) => return outcome(false, format!("{cfg:?}: {e}")),
                    };
                    if set.len() != 1 << eta {
                        return outcome(false, format!("{cfg:?}: |S| = {}", set.len()));
                    }
                    let patterns = build_activation_patterns(n_tu, n_rf);
                    let amp = 1.0 / (n_rf as f64).sqrt();
                    let n_m = 1 << m_rf;
                    for (label, x) in set.vectors().iter().enumerate() {
                        let dense = x.dense();
                        let back = set.vector_to_bits(&dense).map(|b| b == label_to_bits(label as u32, eta));
                        if !matches!(back, Ok(true)) {
                            return outcome(false, format!("{cfg:?}: label {label} does not round-trip"));
                        }
                        let nz: Vec<usize> = (0..dense.len()).filter(|&i| dense[i] != Complex::new(0.0, 0.0)).collect();
                        let tus: Vec<usize> = nz.iter().map(|i| i / n_m).collect();
                        let distinct = tus.windows(2).all(|w| w[0] < w[1]);
                        let allowed = patterns.position(&tus).is_some();
                        let magnitudes_ok = nz.iter().all(|&i| {
                            let r = dense[i].norm() / amp;
                            set.alphabet().points().iter().any(|p| (p * amp - dense[i]).norm() < 1e-15) && r > 0.0
                        });
                        if nz.len() != n_rf || !distinct || !allowed || !magnitudes_ok {
                            return outcome(false, format!("{cfg:?}: label {label} has bad support"));
                        }
                    }
                    checked += 1;
                }
            }
        }
    }
    outcome(true, format!("{checked} configs enumerated and verified, {capped} above the 2^20 cap refused with matching size"))
}

// 2 -------------------------------------------------------------------------

fn criterion_2() -> Outcome {
    let sys = SystemConfig::new(1, 1, 2, 2, bpsk());
    let snr = grid(0.0, 24.0, 4.0);
    let curve = run(&sweep(Scheme::SimoMbm, sys, snr.clone(), u64::MAX, 200_000));
    let set = build_signal_set::<f64>(&sys).unwrap();
    let bound = union_bound_curve(&set, &snr).unwrap();
    let mut worst_sigma = f64::NEG_INFINITY;
    let mut worst_ratio: f64 = 0.0;
    let mut pass = true;
    for (p, &b) in curve.points.iter().zip(&bound.bep) {
        let sigma = (b.min(0.5) * (1.0 - b.min(0.5)) / p.bits_simulated as f64).sqrt();
        let z = (p.ber - b) / sigma;
        worst_sigma = worst_sigma.max(z);
        if p.ber > b + 3.0 * sigma {
            pass = false;
        }
        if p.ber > 0.0 && p.ber <= 1e-3 {
            worst_ratio = worst_ratio.max(b / p.ber);
            if b / p.ber > 3.0 {
                pass = false;
            }
        }
    }
    outcome(pass, format!("max (sim - bound)/sigma = {worst_sigma:.2} (limit 3), max bound/sim below 1e-3 = {worst_ratio:.2} (limit 3)"))
}

// 3 -------------------------------------------------------------------------

fn criterion_3() -> Outcome {
    let qam4 = AlphabetSpec::qam(4);
    let gsm = SystemConfig::new(4, 2, 2, 8, qam4);
    let mimo = SystemConfig::new(2, 2, 2, 8, AlphabetSpec::qam(8));
    let simo = SystemConfig::new(1, 1, 4, 8, AlphabetSpec::qam(64));
    let g = run(&sweep(Scheme::GsmMbm, gsm, grid(5.0, 11.0, 1.0), 300, 400_000));
    let m = run(&sweep(Scheme::MimoMbm, mimo, grid(8.0, 14.0, 1.0), 300, 400_000));
    let s_star = snr_at(&g, 1e-3);
    let at = |scheme, sys| run(&sweep(scheme, sys, vec![s_star], 300, 400_000)).points[0].ber;
    let (b_g, b_m, b_s) = (at(Scheme::GsmMbm, gsm), at(Scheme::MimoMbm, mimo), at(Scheme::SimoMbm, simo));
    let gain = snr_at(&m, 1e-3) - s_star;
    let pass = b_m > b_g && b_s > b_g && gain >= 1.5;
    outcome(
        pass,
        format!("at {s_star:.2} dB: GSM {b_g:.2e}, MIMO {b_m:.2e}, SIMO {b_s:.2e}; GSM gain over MIMO at 1e-3 = {gain:.2} dB (need >= 1.5)"),
    )
}

// 4, 5 ----------------------------------------------------------------------

fn mapsel_slope(scheme: Scheme, n_r: usize, snr: Vec<f64>) -> f64 {
    let sys = SystemConfig::new(2, 2, 1, n_r, bpsk()).with_mirrors_available(2);
    let curve = run(&sweep(scheme, sys, snr, 200, 4_000_000));
    estimate_diversity_in_band(&curve, 1e-5, 1e-2).map(|e| e.diversity).unwrap_or(f64::NAN)
}

fn criterion_4() -> Outcome {
    let d1 = mapsel_slope(Scheme::MapselEd, 1, grid(14.0, 26.0, 2.0));
    let d2 = mapsel_slope(Scheme::MapselEd, 2, grid(6.0, 16.0, 2.0));
    let pass = (d1 - 3.0).abs() <= 0.5 && (d2 - 6.0).abs() <= 1.0;
    outcome(pass, format!("ED selection slope over BER [1e-5, 1e-2]: n_r=1 d = {d1:.2} (3 +- 0.5), n_r=2 d = {d2:.2} (6 +- 1)"))
}

fn criterion_5() -> Outcome {
    let d1 = mapsel_slope(Scheme::MapselMi, 1, grid(20.0, 50.0, 5.0));
    let d2 = mapsel_slope(Scheme::MapselMi, 2, grid(10.0, 30.0, 5.0));
    let pass = (d1 - 1.0).abs() <= 0.5 && (d2 - 2.0).abs() <= 0.5;
    outcome(pass, format!("MI selection slope: n_r=1 d = {d1:.2} (1 +- 0.5), n_r=2 d = {d2:.2} (2 +- 0.5)"))
}

// 6 -------------------------------------------------------------------------

fn criterion_6() -> Outcome {
    let mut violations = 0;
    let mut draws = 0;
    for big in [2, 3] {
        let cfg = SystemConfig::new(1, 1, 1, 1, bpsk()).with_mirrors_available(big);
        let set = build_signal_set::<f64>(&cfg).unwrap();
        let full = build_signal_set::<f64>(&cfg.full_mirror_config()).unwrap();
        for t in 0..200 {
            let h = sample_iid_channel::<f64, _>(&cfg, ColumnMode::Full, &mut RngStream::new(6, big as u64, t, Purpose::Channel).rng());
            let d = dmin_triple(&h, &set, &full).unwrap();
            draws += 1;
            if !(d.full <= d.mi && d.mi <= d.ed) {
                violations += 1;
            }
        }
    }
    outcome(violations == 0, format!("{violations} ordering violations over {draws} draws"))
}

// 7, 8, 9, 10 ----------------------------------------------------------------

fn tone(n_tu: usize, n_r: usize) -> SystemConfig {
    SystemConfig::new(n_tu, n_tu, 1, n_r, AlphabetSpec::TONE)
}

fn pccr_curve(scheme: Scheme, sys: SystemConfig, fb: Feedback, snr: Vec<f64>) -> BerCurve {
    run(&sweep(scheme, sys, snr, 200, 4_000_000).with_feedback(fb))
}

fn criterion_7() -> Outcome {
    let open = run(&sweep(Scheme::MimoMbm, tone(2, 1), grid(20.0, 40.0, 2.5), 200, 4_000_000));
    let pc = pccr_curve(Scheme::PccrNr1, tone(2, 1), Feedback::Perfect, grid(6.0, 18.0, 1.5));
    let (a, b) = (snr_at(&open, 1e-3), snr_at(&pc, 1e-3));
    outcome(b.is_finite() && a - b >= 15.0, format!("1e-3 at {a:.2} dB without feedback, {b:.2} dB with PC-CR: gap {:.2} dB (need >= 15)", a - b))
}

fn criterion_8() -> Outcome {
    let perfect = pccr_curve(Scheme::PccrNr1, tone(2, 1), Feedback::Perfect, grid(6.0, 18.0, 1.5));
    let b4 = pccr_curve(Scheme::PccrNr1, tone(2, 1), Feedback::Bits(4), grid(6.0, 18.0, 1.5));
    let b1 = pccr_curve(Scheme::PccrNr1, tone(2, 1), Feedback::Bits(1), grid(15.0, 35.0, 2.5));
    let (p, q4, q1) = (snr_at(&perfect, 1e-3), snr_at(&b4, 1e-3), snr_at(&b1, 1e-3));
    let pass = (q4 - p).abs() <= 1.0 && q1 - p >= 8.0;
    outcome(pass, format!("1e-3 at {p:.2} dB perfect, B=4 {:+.2} dB (|.| <= 1), B=1 {:+.2} dB (>= 8)", q4 - p, q1 - p))
}

fn criterion_9() -> Outcome {
    let snr = grid(4.0, 11.0, 1.0);
    let r1 = pccr_curve(Scheme::PccrRx1, tone(2, 3), Feedback::Perfect, snr.clone());
    let r2 = pccr_curve(Scheme::PccrRx2, tone(2, 3), Feedback::Perfect, snr);
    let ordered = r1.points.iter().zip(&r2.points).all(|(a, b)| b.ber <= a.ber);
    let gain = snr_at(&r1, 1e-4) - snr_at(&r2, 1e-4);
    outcome(ordered && gain >= 0.5, format!("scheme 2 <= scheme 1 at every point: {ordered}; gain at 1e-4 = {gain:.2} dB (need >= 0.5)"))
}

fn criterion_10() -> Outcome {
    let mut cases = vec![(1, 1, grid(8.0, 28.0, 4.0)), (2, 1, grid(6.0, 21.0, 3.0))];
    if std::env::var_os("MBM_ACCEPTANCE_LONG").is_some() {
        cases.push((1, 3, grid(2.0, 12.0, 2.0)));
        cases.push((2, 2, grid(4.0, 14.0, 2.0)));
        cases.push((3, 2, grid(6.0, 16.0, 2.0)));
    }
    let mut pass = true;
    let mut parts = Vec::new();
    for (n_tu, n_r, snr) in cases {
        let scheme = if n_r == 1 { Scheme::PccrNr1 } else { Scheme::PccrRx2 };
        let curve = pccr_curve(scheme, tone(n_tu, n_r), Feedback::Perfect, snr);
        let d = estimate_diversity_in_band(&curve, 1e-5, 1e-2).map(|e| e.diversity).unwrap_or(f64::NAN);
        let want = (n_r * (n_tu + 1)) as f64;
        let ok = (d - want).abs() <= 0.15 * want;
        pass &= ok;
        parts.push(format!("(n_tu={n_tu}, n_r={n_r}) d = {d:.2} vs {want}"));
    }
    outcome(pass, format!("{} (+-15%)", parts.join(", ")))
}

// 11 ------------------------------------------------------------------------

fn criterion_11() -> Outcome {
    let gsm = SystemConfig::new(4, 2, 1, 8, bpsk());
    let rho = CorrelationSpec { rho_a: 0.8, rho_m: 0.8 };
    let free = run(&sweep(Scheme::GsmMbm, gsm, grid(3.0, 10.0, 1.0), 300, 2_000_000));
    let corr = run(&sweep(Scheme::GsmMbm, gsm, grid(11.0, 18.0, 1.0), 300, 2_000_000).with_correlation(rho));
    let tcm_sys = SystemConfig::new(4, 2, 1, 8, AlphabetSpec::qam(4));
    let coded = run(&sweep(Scheme::TcmGsmMbm, tcm_sys, grid(6.0, 12.0, 1.0), 300, 200_000).with_correlation(rho));
    let (a, b, c) = (snr_at(&free, 1e-3), snr_at(&corr, 1e-3), snr_at(&coded, 1e-3));
    let pass = b - a >= 4.0 && b - c >= 2.0;
    outcome(pass, format!("1e-3 at {a:.2} dB (rho=0), {b:.2} dB (rho=0.8): loss {:.2} dB (>= 4); coded {c:.2} dB recovers {:.2} dB (>= 2)", b - a, b - c))
}

// 12 ------------------------------------------------------------------------

fn criterion_12() -> Outcome {
    let mut fails = Vec::new();
    let mut rng = RngStream::new(12, 0, 0, Purpose::Other(0)).rng();

    // ML search against a dense naive scan
    for sys in [SystemConfig::new(4, 2, 1, 3, AlphabetSpec::qam(4)), SystemConfig::new(1, 1, 2, 2, bpsk()), SystemConfig::new(2, 2, 1, 1, AlphabetSpec::TONE)] {
        let set = build_signal_set::<f64>(&sys).unwrap();
        for _ in 0..200 {
            let h = sample_iid_channel::<f64, _>(&sys, ColumnMode::Operational, &mut rng);
            let y: Vec<Complex<f64>> = (0..sys.n_r).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
            let mut best = (0, f64::INFINITY);
            for (i, x) in set.vectors().iter().enumerate() {
                let xd = x.dense();
                let mut d = 0.0;
                for r in 0..sys.n_r {
                    let hx: Complex<f64> = (0..xd.len()).map(|c| h.get(r, c) * xd[c]).sum();
                    d += (y[r] - hx).norm_sqr();
                }
                if d < best.1 {
                    best = (i, d);
                }
            }
            if ml_search(&y, &h, &set).0 != best.0 {
                fails.push("ML search differs from naive scan");
                break;
            }
        }
    }

    // Viterbi against exhaustive codeword enumeration on 3-use frames
    let code = default_code();
    let sys = SystemConfig::new(4, 2, 1, 2, AlphabetSpec::qam(4));
    let set = build_signal_set::<f64>(&sys).unwrap();
    for trial in 0..10 {
        let h = sample_iid_channel::<f64, _>(&sys, ColumnMode::Operational, &mut rng);
        let ys: Vec<Vec<Complex<f64>>> = (0..3).map(|_| (0..2).map(|_| complex_gaussian(&mut rng, 1.5)).collect()).collect();
        let sigma2 = 0.3 + 0.2 * trial as f64;
        let mut best = (f64::INFINITY, Vec::new());
        for word in 0..64usize {
            let bits: Vec<u8> = (0..6).rev().map(|b| ((word >> b) & 1) as u8).collect();
            let m: f64 = tcm_encode_labels(&bits, &code)
                .unwrap()
                .iter()
                .zip(&ys)
                .map(|(&l, y)| {
                    let hx = h.mul_dense(&set.vectors()[l].dense());
                    y.iter().zip(&hx).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() / sigma2
                })
                .sum();
            if m < best.0 {
                best = (m, bits);
            }
        }
        let out = tcm_viterbi(&ys, &h, &set, sigma2, &code).unwrap();
        if (out.metric - best.0).abs() > 1e-9 * best.0 || out.bits != best.1 {
            fails.push("Viterbi differs from brute force");
            break;
        }
    }

    // matrix form with H^(v) against the decomposed scheme-2 metric
    let sys = tone(2, 3);
    let set = build_signal_set::<f64>(&sys).unwrap();
    let g = set.amplitude();
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let h = sample_iid_channel::<f64, _>(&sys, ColumnMode::Operational, &mut rng);
        let k = rng.random_range(0..3);
        let cb = build_codebook(&PhaseBook::from_channel(&h), k, &set).unwrap();
        let y: Vec<Complex<f64>> = (0..3).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
        for (i, v) in cb.vectors().iter().enumerate() {
            let r = compensated_channel(&h, v, k).mul_dense(v);
            let matrix: f64 = y.iter().zip(&r).map(|(a, b)| (a - b * g).norm_sqr()).sum();
            worst = worst.max((matrix - scheme2_metric(&y, &h, &cb, i, g)).abs());
        }
    }
    if worst > 1e-12 {
        fails.push("scheme-2 metric identity off");
    }

    // PEP closed form against Monte Carlo averaging of the conditional Q
    let mut pep_z: f64 = 0.0;
    for (d2, sigma2, n_r) in [(4.0, 1.0, 1), (2.0, 0.5, 2), (0.5, 0.1, 3)] {
        let n = 400_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let g2: f64 = (0..n_r).map(|_| complex_gaussian::<f64, _>(&mut rng, 1.0).norm_sqr()).sum::<f64>() * d2;
            let q = q_function((g2 / (2.0 * sigma2)).sqrt());
            s += q;
            s2 += q * q;
        }
        let mean = s / n as f64;
        let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
        let z = (mean - pep_from_distance(d2, sigma2, n_r)).abs() / se;
        pep_z = pep_z.max(z);
    }
    if pep_z > 3.0 {
        fails.push("PEP closed form outside 3 standard errors");
    }
    let summary = format!(
        "ML scan, Viterbi brute force, scheme-2 identity (max diff {worst:.1e}), PEP vs Monte Carlo (max |z| {pep_z:.2}){}",
        if fails.is_empty() { String::new() } else { format!(": {}", fails.join("; ")) }
    );
    outcome(fails.is_empty(), summary)
}

// 13 ------------------------------------------------------------------------

fn criterion_13() -> Outcome {
    let cases = [
        (Scheme::SimoMbm, SystemConfig::new(1, 1, 2, 2, bpsk())),
        (Scheme::MimoMbm, SystemConfig::new(2, 2, 1, 2, bpsk())),
        (Scheme::SmMbm, SystemConfig::new(2, 1, 1, 2, bpsk())),
        (Scheme::GsmMbm, SystemConfig::new(4, 2, 1, 4, bpsk())),
        (Scheme::Mimo, SystemConfig::new(2, 2, 0, 2, AlphabetSpec::qam(4))),
        (Scheme::Sm, SystemConfig::new(4, 1, 0, 2, bpsk())),
        (Scheme::Gsm, SystemConfig::new(4, 2, 0, 2, bpsk())),
        (Scheme::MapselMi, SystemConfig::new(2, 2, 1, 2, bpsk()).with_mirrors_available(2)),
        (Scheme::MapselEd, SystemConfig::new(2, 2, 1, 2, bpsk()).with_mirrors_available(2)),
        (Scheme::PccrNr1, tone(2, 1)),
        (Scheme::PccrRx1, tone(2, 3)),
        (Scheme::PccrRx2, tone(2, 3)),
        (Scheme::TcmGsmMbm, SystemConfig::new(4, 2, 1, 4, AlphabetSpec::qam(4))),
    ];
    let mut mismatched = Vec::new();
    for (scheme, sys) in cases {
        let mut cfg = sweep(scheme, sys, vec![0.0, 4.0, 8.0], 150, 20_000);
        if scheme.is_pccr() {
            cfg = cfg.with_feedback(Feedback::Bits(3));
        }
        if scheme == Scheme::GsmMbm {
            cfg = cfg.with_correlation(CorrelationSpec { rho_a: 0.5, rho_m: 0.3 });
        }
        let reference = run_ber_sweep_with(&cfg, &EngineOptions { workers: 1 }).unwrap();
        for workers in [2, 4] {
            if run_ber_sweep_with(&cfg, &EngineOptions { workers }).unwrap() != reference {
                mismatched.push(format!("{scheme} with {workers} workers"));
            }
        }
        if run_ber_sweep_with(&cfg, &EngineOptions { workers: 1 }).unwrap() != reference {
            mismatched.push(format!("{scheme} rerun"));
        }
    }
    outcome(mismatched.is_empty(), format!("13 schemes x workers {{1, 2, 4}}: {} mismatches {}", mismatched.len(), mismatched.join(", ")))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 13] = [
        (1, "signal-set correctness", criterion_1),
        (2, "union bound vs simulation", criterion_2),
        (3, "GSM-MBM vs MIMO-MBM vs SIMO-MBM at 10 bpcu", criterion_3),
        (4, "ED MAP selection diversity", criterion_4),
        (5, "MI MAP selection diversity", criterion_5),
        (6, "d_min ordering full <= MI <= ED", criterion_6),
        (7, "PC-CR gain over open loop", criterion_7),
        (8, "quantized phase feedback", criterion_8),
        (9, "receiver scheme ordering", criterion_9),
        (10, "PC-CR diversity", criterion_10),
        (11, "correlation loss and TCM recovery", criterion_11),
        (12, "oracle equivalences", criterion_12),
        (13, "determinism across worker counts", criterion_13),
    ];
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        for (id, name, _) in criteria {
            println!("criterion {id}: {name}");
        }
        return;
    }
    let selected: Vec<u32> = args.iter().filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    let mut ran = 0;
    for (id, name, f) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let o = f();
        ran += 1;
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {id:>2} {} {name} [{:.1}s]: {}",
            if o.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            o.summary
        );
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
