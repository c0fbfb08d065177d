//! Portfolio-style power loading across OFDM sub-bands under stochastic
//! inter-cell interference.
//!
//! A transmitter splits one OFDM carrier into `M` sub-bands and must divide a
//! total power budget among them while neighbouring cells inject random
//! interference into each sub-band. Treating the per-band power shares as
//! asset weights, every allocation ("portfolio") maps to a point on the
//! mean/standard-deviation plane of total throughput, and the set of
//! non-dominated allocations forms an efficient frontier.
//!
//! The crate provides the full pipeline:
//!
//! - [`numerology`] — carrier and sub-band geometry from 5G-NR-style
//!   numerology parameters (subcarrier spacing, FFT size, payload count).
//! - [`radio`] — deterministic link math: SINR, Shannon sub-band capacity,
//!   total throughput.
//! - [`interference`] — configurable stochastic interference marginals with a
//!   Gaussian-copula dependence structure, materialised as a reproducible
//!   sample matrix shared by all portfolio evaluations.
//! - [`portfolio`] — uniform sampling of allocations on the simplex and
//!   Monte Carlo evaluation of throughput mean, variance and per-band
//!   correlations against the shared sample matrix.
//! - [`frontier`] — efficient-frontier extraction, max-mean / min-SD
//!   selection, derivative-free refinement of the max-mean allocation, a
//!   water-filling oracle for the deterministic limit, and the improvement
//!   ratio over single-band baselines.
//! - [`scenario`] / [`report`] — JSON scenario files, end-to-end runs, and
//!   plot-ready CSV/JSON exports that are byte-stable for a given seed.
//!
//! All randomness is driven by ChaCha8 streams derived from a single run
//! seed, so every output is a pure function of the scenario file contents.

pub mod frontier;
pub mod interference;
pub mod numerology;
pub mod portfolio;
pub mod radio;
pub mod report;
pub mod scenario;

mod stats;

pub use frontier::{
    efficient_frontier, improvement_ratio, refine_max_mean, water_filling, FrontierError,
    FrontierResult,
};
pub use interference::{
    load_empirical, sample_interference, CorrelationMatrix, InterferenceError,
    InterferenceMarginal, InterferenceModel, SampleMatrix,
};
pub use numerology::{Numerology, NumerologyError, SubbandGeometry};
pub use portfolio::{
    combine_variance, evaluate_cloud, evaluate_portfolio, portfolio_mean_bps, sample_portfolios,
    EvaluatedPortfolio, Portfolio, PortfolioError, ThroughputStats,
};
pub use radio::{
    sinr, subband_capacity_bps, total_throughput_bps, LinkScenario, RadioError, SubbandSpec,
};
pub use report::{export_cloud, export_report, run_frontier, RunError, RunReport};
pub use scenario::{load_scenario, write_scenario, ScenarioError, ScenarioFile};
