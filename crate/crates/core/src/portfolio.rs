//! Power-allocation portfolios on the simplex and their Monte Carlo
//! throughput statistics.
//!
//! A portfolio stores normalised weights; the scenario carries the total
//! power, so the same portfolio is comparable across power budgets. All
//! portfolios in a run are evaluated against one shared [`SampleMatrix`]
//! (common random numbers), and every moment uses population normalisation
//! (divide by N). Under those two choices the combination formula
//! `sigma_C^2 = sum_i sigma_i^2 + sum_{i != j} sigma_i sigma_j rho_ij`
//! reproduces the directly computed variance of total throughput to float
//! precision, which the test suites use as an exact self-check.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::interference::SampleMatrix;
use crate::radio::{LinkScenario, RadioError};
use crate::stats;

/// Tolerance on `|sum(weights) - 1|` accepted by [`Portfolio::new`].
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// ChaCha8 stream id reserved for the portfolio sampler, clear of the
/// interference column streams (which use `0..M`).
const PORTFOLIO_STREAM: u64 = 1 << 32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PortfolioError {
    #[error("weights must sum to 1 within {WEIGHT_SUM_TOLERANCE:e}, got {0}")]
    WeightSum(f64),
    #[error("weight {index} must be finite and non-negative, got {value}")]
    InvalidWeight { index: usize, value: f64 },
    #[error("portfolio needs at least one weight")]
    Empty,
    #[error("band index {band} out of range for {bands} bands")]
    IndexOutOfRange { band: usize, bands: usize },
    #[error("shape mismatch: {context}")]
    ShapeMismatch { context: String },
    #[error(transparent)]
    Radio(#[from] RadioError),
}

/// Normalised power weights over the sub-bands: non-negative, summing to 1.
/// Band `i` transmits `weights[i] * P_total` watts.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Portfolio {
    weights: Vec<f64>,
}

impl Portfolio {
    pub fn new(weights: Vec<f64>) -> Result<Self, PortfolioError> {
        if weights.is_empty() {
            return Err(PortfolioError::Empty);
        }
        for (index, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(PortfolioError::InvalidWeight { index, value: w });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(PortfolioError::WeightSum(sum));
        }
        Ok(Self { weights })
    }

    /// Equal split across `m` bands.
    pub fn uniform(m: usize) -> Self {
        assert!(m >= 1, "portfolio needs at least one band");
        Self {
            weights: vec![1.0 / m as f64; m],
        }
    }

    /// All power on one band, the rest idle.
    pub fn single_band(m: usize, band: usize) -> Result<Self, PortfolioError> {
        if band >= m {
            return Err(PortfolioError::IndexOutOfRange { band, bands: m });
        }
        let mut weights = vec![0.0; m];
        weights[band] = 1.0;
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn band_count(&self) -> usize {
        self.weights.len()
    }

    /// Per-band transmit powers in watts.
    pub fn allocated_powers_w(&self, total_power_w: f64) -> Vec<f64> {
        self.weights.iter().map(|w| w * total_power_w).collect()
    }
}

/// Sample `n` portfolios uniformly on the `(m-1)`-simplex.
///
/// Uniformity comes from the flat Dirichlet construction: normalise `m`
/// unit-rate exponential draws. Deterministic for a given seed; the sampler
/// runs on its own ChaCha8 stream so it never collides with interference
/// generation under the same run seed.
pub fn sample_portfolios(m: usize, n: usize, seed: u64) -> Vec<Portfolio> {
    assert!(m >= 1, "portfolio needs at least one band");
    if m == 1 {
        return (0..n)
            .map(|_| Portfolio {
                weights: vec![1.0],
            })
            .collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(PORTFOLIO_STREAM);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let exps: Vec<f64> = (0..m)
            .map(|_| {
                let u: f64 = rng.random();
                -(-u).ln_1p() // -ln(1 - u), strictly positive for u in [0, 1)
            })
            .collect();
        let sum: f64 = exps.iter().sum();
        if sum <= 0.0 || !sum.is_finite() {
            continue; // astronomically unlikely all-zero row; redraw
        }
        out.push(Portfolio {
            weights: exps.iter().map(|e| e / sum).collect(),
        });
    }
    out
}

/// Monte Carlo statistics of total throughput for one portfolio: overall
/// mean/variance/SD plus per-band means, SDs and the sample correlation
/// matrix of per-band throughputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThroughputStats {
    pub mean_bps: f64,
    pub variance_bps2: f64,
    pub sd_bps: f64,
    pub band_means_bps: Vec<f64>,
    pub band_sds_bps: Vec<f64>,
    pub band_correlation: Vec<Vec<f64>>,
}

/// A portfolio with its evaluated statistics and its position in the run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluatedPortfolio {
    pub id: usize,
    pub portfolio: Portfolio,
    pub stats: ThroughputStats,
}

fn check_shapes(
    portfolio: &Portfolio,
    scenario: &LinkScenario,
    samples: &SampleMatrix,
) -> Result<(), PortfolioError> {
    let (p, s, d) = (
        portfolio.band_count(),
        scenario.band_count(),
        samples.band_count(),
    );
    if p != s || s != d {
        return Err(PortfolioError::ShapeMismatch {
            context: format!(
                "portfolio has {p} weights, scenario {s} sub-bands, sample matrix {d} columns"
            ),
        });
    }
    Ok(())
}

/// Per-band capacities for every draw, plus row totals.
fn capacity_table(
    portfolio: &Portfolio,
    scenario: &LinkScenario,
    samples: &SampleMatrix,
) -> Result<(Vec<f64>, Vec<f64>), PortfolioError> {
    let m = scenario.band_count();
    let n = samples.n_draws();
    let specs = scenario.subbands();
    let signals: Vec<f64> = portfolio
        .weights()
        .iter()
        .zip(specs)
        .map(|(w, spec)| w * scenario.total_power_w() * spec.channel_gain)
        .collect();

    let mut caps = vec![0.0_f64; n * m];
    let mut totals = vec![0.0_f64; n];
    for k in 0..n {
        let row = samples.row(k);
        let mut total = 0.0;
        for i in 0..m {
            let denominator = row[i] + specs[i].noise_power_w;
            if denominator == 0.0 {
                return Err(RadioError::DegenerateDenominator.into());
            }
            let c = specs[i].bandwidth_hz * (1.0 + signals[i] / denominator).log2();
            caps[k * m + i] = c;
            total += c;
        }
        totals[k] = total;
    }
    Ok((caps, totals))
}

/// Evaluate one portfolio against the shared interference draws.
///
/// Population-normalised moments throughout. A band whose capacity column is
/// constant (zero weight, or constant interference) reports an exact 0 SD
/// and zero correlation with every other band.
pub fn evaluate_portfolio(
    portfolio: &Portfolio,
    scenario: &LinkScenario,
    samples: &SampleMatrix,
) -> Result<ThroughputStats, PortfolioError> {
    check_shapes(portfolio, scenario, samples)?;
    let m = scenario.band_count();
    let n = samples.n_draws();
    let (caps, totals) = capacity_table(portfolio, scenario, samples)?;

    let columns: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..n).map(|k| caps[k * m + i]).collect())
        .collect();

    let (mean_bps, variance_bps2) = stats::mean_variance(&totals);
    let band_means_bps: Vec<f64> = columns.iter().map(|c| stats::mean(c)).collect();
    let band_vars: Vec<f64> = columns
        .iter()
        .zip(&band_means_bps)
        .map(|(c, &mu)| stats::covariance(c, mu, c, mu))
        .collect();
    let band_sds_bps: Vec<f64> = band_vars.iter().map(|v| v.sqrt()).collect();

    let mut band_correlation = vec![vec![0.0_f64; m]; m];
    for i in 0..m {
        band_correlation[i][i] = 1.0;
        for j in (i + 1)..m {
            let denom = band_sds_bps[i] * band_sds_bps[j];
            let rho = if denom == 0.0 {
                0.0
            } else {
                let cov = stats::covariance(
                    &columns[i],
                    band_means_bps[i],
                    &columns[j],
                    band_means_bps[j],
                );
                (cov / denom).clamp(-1.0, 1.0)
            };
            band_correlation[i][j] = rho;
            band_correlation[j][i] = rho;
        }
    }

    Ok(ThroughputStats {
        mean_bps,
        variance_bps2,
        sd_bps: variance_bps2.sqrt(),
        band_means_bps,
        band_sds_bps,
        band_correlation,
    })
}

/// Mean total throughput only — the fast path for optimisers that do not
/// need the second-order statistics.
pub fn portfolio_mean_bps(
    portfolio: &Portfolio,
    scenario: &LinkScenario,
    samples: &SampleMatrix,
) -> Result<f64, PortfolioError> {
    check_shapes(portfolio, scenario, samples)?;
    let m = scenario.band_count();
    let n = samples.n_draws();
    let specs = scenario.subbands();
    let signals: Vec<f64> = portfolio
        .weights()
        .iter()
        .zip(specs)
        .map(|(w, spec)| w * scenario.total_power_w() * spec.channel_gain)
        .collect();
    let mut sum = 0.0;
    for k in 0..n {
        let row = samples.row(k);
        for i in 0..m {
            let denominator = row[i] + specs[i].noise_power_w;
            if denominator == 0.0 {
                return Err(RadioError::DegenerateDenominator.into());
            }
            sum += specs[i].bandwidth_hz * (1.0 + signals[i] / denominator).log2();
        }
    }
    Ok(sum / n as f64)
}

/// Evaluate many portfolios in parallel over the shared sample matrix.
/// Output order follows input order; ids are the input positions.
pub fn evaluate_cloud(
    portfolios: &[Portfolio],
    scenario: &LinkScenario,
    samples: &SampleMatrix,
) -> Result<Vec<EvaluatedPortfolio>, PortfolioError> {
    portfolios
        .par_iter()
        .enumerate()
        .map(|(id, portfolio)| {
            evaluate_portfolio(portfolio, scenario, samples).map(|stats| EvaluatedPortfolio {
                id,
                portfolio: portfolio.clone(),
                stats,
            })
        })
        .collect()
}

/// The variance-combination formula over per-band SDs and correlations:
/// `sum_i sd_i^2 + sum_i sum_{j != i} sd_i sd_j rho_ij`.
pub fn combine_variance(band_sds: &[f64], correlation: &[Vec<f64>]) -> Result<f64, PortfolioError> {
    let m = band_sds.len();
    if correlation.len() != m || correlation.iter().any(|row| row.len() != m) {
        return Err(PortfolioError::ShapeMismatch {
            context: format!(
                "correlation must be {m}x{m} to match {m} band SDs, got {}x{}",
                correlation.len(),
                correlation.first().map_or(0, Vec::len)
            ),
        });
    }
    let mut variance: f64 = band_sds.iter().map(|sd| sd * sd).sum();
    for i in 0..m {
        for j in 0..m {
            if i != j {
                variance += band_sds[i] * band_sds[j] * correlation[i][j];
            }
        }
    }
    Ok(variance)
}
