use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use mbm::channel::{ColumnMode, Purpose, RngStream, KroneckerSampler, CorrelationSpec};
use mbm::curve_io::{read_curve_csv, write_curve, write_curve_csv};
use mbm::detect::union_bound_curve;
use mbm::diversity::{estimate_diversity, estimate_diversity_in_band};
use mbm::mapsel::dmin_triple;
use mbm::signalset::{build_signal_set, AlphabetSpec, SystemConfig};
use mbm::{run_ber_sweep_with, EngineOptions, SimConfig};

#[derive(Parser)]
#[command(name = "mbm", version, about = "Media-based modulation link simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo BER sweep from a JSON config.
    Ber {
        config: PathBuf,
        /// Write the curve here instead of stdout.
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Worker threads (0 = all cores). Results do not depend on it.
        #[arg(short, long, default_value_t = 0)]
        workers: usize,
    },
    /// Evaluate the analytic union bound on the config's SNR grid.
    Bound { config: PathBuf },
    /// Fit the diversity order of a BER curve stored as CSV.
    Diversity {
        csv: PathBuf,
        /// SNR window, e.g. `--snr 20 30`.
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], conflicts_with = "ber_band")]
        snr: Option<Vec<f64>>,
        /// BER band, e.g. `--ber-band 1e-5 1e-2`.
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        ber_band: Option<Vec<f64>>,
    },
    /// Print minimum received distances (full, MI, ED) over channel draws.
    Dmin {
        /// Mirrors available per TU.
        #[arg(long, default_value_t = 2)]
        mirrors: usize,
        /// Mirrors used per TU.
        #[arg(long, default_value_t = 1)]
        used: usize,
        #[arg(long, default_value_t = 1)]
        n_r: usize,
        #[arg(long, default_value_t = 200)]
        draws: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the built-in invariant checks.
    Selftest,
}

fn load(path: &PathBuf) -> Result<SimConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(SimConfig::from_json(&text)?)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Ber { config, out, workers } => {
            let cfg = load(&config)?;
            let curve = run_ber_sweep_with(&cfg, &EngineOptions { workers })?;
            match &out {
                Some(path) => {
                    for p in &curve.points {
                        println!(
                            "{} snr_db={} ber={:.3e} errors={} bits={} trials={}",
                            cfg.scheme, p.snr_db, p.ber, p.bit_errors, p.bits_simulated, p.trials
                        );
                    }
                    write_curve_csv(&curve, path)?;
                }
                None => write_curve(&curve, std::io::stdout().lock())?,
            }
            for i in curve.monotonicity_flags() {
                eprintln!("warning: BER rises at snr_db={}", curve.points[i].snr_db);
            }
        }
        Command::Bound { config } => {
            let cfg = load(&config)?;
            if !cfg.scheme.has_union_bound() {
                bail!("no union bound for {}", cfg.scheme);
            }
            let set = build_signal_set::<f64>(&cfg.system)?;
            let b = union_bound_curve(&set, &cfg.snr_db)?;
            println!("snr_db,bep");
            for (s, p) in b.snr_db.iter().zip(&b.bep) {
                println!("{s},{p}");
            }
        }
        Command::Diversity { csv, snr, ber_band } => {
            let curve = read_curve_csv(&csv)?;
            let est = match (snr, ber_band) {
                (_, Some(b)) => estimate_diversity_in_band(&curve, b[0], b[1])?,
                (Some(w), None) => estimate_diversity(&curve, Some((w[0], w[1])))?,
                (None, None) => estimate_diversity(&curve, None)?,
            };
            println!(
                "diversity={:.3} window=[{}, {}] dB points={} residual={:.3e}",
                est.diversity, est.window.0, est.window.1, est.points, est.residual
            );
        }
        Command::Dmin { mirrors, used, n_r, draws, seed } => {
            let cfg = SystemConfig::new(1, 1, used, n_r, AlphabetSpec::psk(2)).with_mirrors_available(mirrors);
            let set = build_signal_set::<f64>(&cfg)?;
            let full = build_signal_set::<f64>(&cfg.full_mirror_config())?;
            let sampler = KroneckerSampler::<f64>::new(&cfg, &CorrelationSpec::NONE, ColumnMode::Full)?;
            println!("draw,full,mi,ed");
            let mut violations = 0;
            for t in 0..draws {
                let h = sampler.sample(&mut RngStream::new(seed, 0, t, Purpose::Channel).rng());
                let d = dmin_triple(&h, &set, &full)?;
                if !(d.full <= d.mi && d.mi <= d.ed) {
                    violations += 1;
                }
                println!("{t},{},{},{}", d.full, d.mi, d.ed);
            }
            eprintln!("ordering violations: {violations}");
            return Ok(violations == 0);
        }
        Command::Selftest => {
            let results = mbm::selftest::run_all();
            for r in &results {
                let mark = if r.passed { "ok  " } else { "FAIL" };
                if r.detail.is_empty() {
                    println!("{mark} {}", r.name);
                } else {
                    println!("{mark} {}: {}", r.name, r.detail);
                }
            }
            return Ok(results.iter().all(|r| r.passed));
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
