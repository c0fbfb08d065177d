//! Command-line front end: validate scenarios, inspect numerology, run
//! single-band baselines and full frontier runs.
//!
//! Exit codes: 0 on success, 1 on parse/validation problems (including
//! command-line usage), 2 on runtime failures.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use ofdm_frontier::numerology::Numerology;
use ofdm_frontier::report::{export_cloud, export_report, render_summary, run_frontier};
use ofdm_frontier::scenario::{compile, load_scenario, ScenarioFile};

#[derive(Parser)]
#[command(name = "ofdm-frontier", version, about = "Portfolio-based power loading across OFDM sub-bands")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline: sample, evaluate, extract the frontier,
    /// refine the optimum and report improvement over single-band baselines.
    Frontier {
        /// Scenario file (JSON).
        scenario: PathBuf,
        /// Write the evaluated cloud as CSV.
        #[arg(long, value_name = "PATH")]
        out_cloud: Option<PathBuf>,
        /// Write the full report as JSON.
        #[arg(long, value_name = "PATH")]
        out_report: Option<PathBuf>,
        /// Override the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the scenario's portfolio count.
        #[arg(long)]
        portfolios: Option<usize>,
        /// Override the scenario's Monte Carlo draw count.
        #[arg(long)]
        draws: Option<usize>,
    },
    /// Load and validate a scenario, reporting the first problem found.
    Validate {
        /// Scenario file (JSON).
        scenario: PathBuf,
    },
    /// Print carrier and sub-band geometry for a numerology.
    Numerology {
        /// Spacing exponent: subcarrier spacing is 15 kHz * 2^mu.
        #[arg(long)]
        mu: u8,
        /// Payload subcarrier count.
        #[arg(long)]
        payload: u32,
        /// Number of equal sub-bands to partition into.
        #[arg(long)]
        bands: u32,
        /// FFT size (must be at least the payload count).
        #[arg(long, default_value_t = 2048)]
        fft_size: u32,
    },
    /// Evaluate only the single-band portfolios of a scenario.
    Baseline {
        /// Scenario file (JSON).
        scenario: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };

    match cli.command {
        Command::Frontier {
            scenario,
            out_cloud,
            out_report,
            seed,
            portfolios,
            draws,
        } => {
            let mut file = match load(&scenario) {
                Ok(file) => file,
                Err(code) => return code,
            };
            if let Some(seed) = seed {
                file.run.seed = seed;
            }
            if let Some(portfolios) = portfolios {
                file.run.portfolios = portfolios;
            }
            if let Some(draws) = draws {
                file.run.draws = draws;
            }
            if let Err(e) = compile(&file) {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }

            let started = Instant::now();
            let report = match run_frontier(&file) {
                Ok(report) => report,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let elapsed = started.elapsed();

            print!("{}", render_summary(&report));
            println!("elapsed: {:.2}s", elapsed.as_secs_f64());

            if let Some(path) = out_cloud {
                if let Err(e) = export_cloud(&report, &path) {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
                println!("cloud CSV written to {}", path.display());
            }
            if let Some(path) = out_report {
                if let Err(e) = export_report(&report, &path) {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
                println!("report JSON written to {}", path.display());
            }
            ExitCode::SUCCESS
        }
        Command::Validate { scenario } => match load(&scenario) {
            Ok(file) => {
                println!(
                    "OK: {} bands, {} portfolios, {} draws, seed {}",
                    file.bands.len(),
                    file.run.portfolios,
                    file.run.draws,
                    file.run.seed
                );
                ExitCode::SUCCESS
            }
            Err(code) => code,
        },
        Command::Numerology {
            mu,
            payload,
            bands,
            fft_size,
        } => {
            let numerology = match Numerology::new(mu, fft_size, payload) {
                Ok(n) => n,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            let geometry = match numerology.partition(bands) {
                Ok(g) => g,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            println!(
                "subcarrier spacing: {} kHz",
                numerology.subcarrier_spacing_hz() as f64 / 1e3
            );
            println!(
                "carrier bandwidth:  {} MHz ({} payload subcarriers)",
                numerology.carrier_bandwidth_hz() as f64 / 1e6,
                payload
            );
            println!(
                "sub-bands:          {} x {} MHz ({} subcarriers each)",
                geometry.count(),
                geometry.bandwidth_per_band_hz() as f64 / 1e6,
                geometry.subcarriers_per_band()
            );
            ExitCode::SUCCESS
        }
        Command::Baseline { scenario } => {
            let file = match load(&scenario) {
                Ok(file) => file,
                Err(code) => return code,
            };
            match baseline_table(&file) {
                Ok(table) => {
                    print!("{table}");
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
    }
}

fn load(path: &PathBuf) -> Result<ScenarioFile, ExitCode> {
    load_scenario(path).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(1)
    })
}

/// Evaluate only the single-band sweeps of a scenario.
fn baseline_table(file: &ScenarioFile) -> Result<String, Box<dyn std::error::Error>> {
    use ofdm_frontier::portfolio::{evaluate_portfolio, Portfolio};

    let compiled = compile(file)?;
    let samples = ofdm_frontier::interference::sample_interference(
        &compiled.interference,
        compiled.run.draws,
        compiled.run.seed,
    )?;
    let m = compiled.link.band_count();
    let mut out = String::new();
    let mut best: Option<(usize, f64)> = None;
    for band in 0..m {
        let portfolio = Portfolio::single_band(m, band)?;
        let stats = evaluate_portfolio(&portfolio, &compiled.link, &samples)?;
        out.push_str(&format!(
            "band {band}: mean {:.1} Mbps, sd {:.1} Mbps\n",
            stats.mean_bps / 1e6,
            stats.sd_bps / 1e6
        ));
        if best.is_none_or(|(_, b)| stats.mean_bps > b) {
            best = Some((band, stats.mean_bps));
        }
    }
    if let Some((band, mean)) = best {
        out.push_str(&format!(
            "best single band: {band} at {:.1} Mbps\n",
            mean / 1e6
        ));
    }
    Ok(out)
}
