//! End-to-end runs and their machine-readable outputs.
//!
//! [`run_frontier`] executes the whole pipeline for one scenario: sample the
//! interference matrix once, sample the portfolio cloud, append the
//! single-band baseline portfolios, evaluate everything against the shared
//! draws, extract the efficient frontier, refine the max-mean portfolio and
//! compute the improvement ratio over the best baseline.
//!
//! Outputs are deterministic: for a fixed scenario file the report JSON and
//! the cloud CSV are byte-identical across runs, so they can be used as
//! golden files. Wall-clock timing is deliberately not part of the report;
//! callers that want it (the CLI does) measure around this call.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::frontier::{efficient_frontier, improvement_ratio, refine_max_mean};
use crate::interference::sample_interference;
use crate::portfolio::{
    evaluate_cloud, evaluate_portfolio, EvaluatedPortfolio, Portfolio,
    ThroughputStats,
};
use crate::scenario::{compile, ScenarioFile};

/// Step size at which max-mean refinement stops during [`run_frontier`].
pub const REFINE_TOL: f64 = 1e-4;

/// Sweep budget for max-mean refinement during [`run_frontier`].
pub const REFINE_MAX_SWEEPS: usize = 500;

/// An upstream failure wrapped with the pipeline stage that hit it.
#[derive(Debug, Error)]
#[error("{stage}: {source}")]
pub struct RunError {
    stage: &'static str,
    #[source]
    source: Box<dyn std::error::Error + Send + Sync>,
}

impl RunError {
    fn new(
        stage: &'static str,
        source: impl std::error::Error + Send + Sync + 'static,
    ) -> Self {
        Self {
            stage,
            source: Box::new(source),
        }
    }

    pub fn stage(&self) -> &'static str {
        self.stage
    }
}

trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T, RunError>;
}

impl<T, E: std::error::Error + Send + Sync + 'static> StageExt<T> for Result<T, E> {
    fn stage(self, stage: &'static str) -> Result<T, RunError> {
        self.map_err(|e| RunError::new(stage, e))
    }
}

/// One row of the evaluated cloud in plot-ready form.
#[derive(Debug, Clone, Serialize)]
pub struct CloudPoint {
    pub id: usize,
    pub weights: Vec<f64>,
    pub mean_bps: f64,
    pub sd_bps: f64,
    pub on_frontier: bool,
    pub is_single_band: bool,
}

/// A selected portfolio with its full statistics.
#[derive(Debug, Clone, Serialize)]
pub struct Selection {
    pub id: usize,
    pub weights: Vec<f64>,
    pub stats: ThroughputStats,
}

impl Selection {
    fn from_evaluated(ep: &EvaluatedPortfolio) -> Self {
        Self {
            id: ep.id,
            weights: ep.portfolio.weights().to_vec(),
            stats: ep.stats.clone(),
        }
    }
}

/// Single-band baseline: all power on `band`.
#[derive(Debug, Clone, Serialize)]
pub struct Baseline {
    pub band: usize,
    pub id: usize,
    pub stats: ThroughputStats,
}

/// The refined max-mean portfolio (not part of the sampled cloud).
#[derive(Debug, Clone, Serialize)]
pub struct Refined {
    pub start_id: usize,
    pub weights: Vec<f64>,
    pub stats: ThroughputStats,
}

/// Frontier membership in plot order (ascending SD).
#[derive(Debug, Clone, Serialize)]
pub struct FrontierPoint {
    pub id: usize,
    pub sd_bps: f64,
    pub mean_bps: f64,
}

/// Everything a run produces. Serialises to the report JSON.
///
/// The cloud contains the randomly sampled portfolios first, then the `M`
/// single-band baselines (flagged `is_single_band`); the frontier is
/// extracted over all of them, so a zero-variance baseline can claim the
/// minimum-SD endpoint.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub scenario: ScenarioFile,
    pub subband_bandwidth_hz: u64,
    pub seed: u64,
    pub n_portfolios: usize,
    pub n_draws: usize,
    /// Moment convention used throughout: divide by N, not N-1.
    pub variance_normalization: &'static str,
    pub cloud: Vec<CloudPoint>,
    pub frontier: Vec<FrontierPoint>,
    pub max_mean: Selection,
    pub min_sd: Selection,
    pub refined_max_mean: Refined,
    pub baselines: Vec<Baseline>,
    pub best_baseline_id: usize,
    pub improvement_pct: f64,
}

/// Run the full pipeline for a validated scenario.
pub fn run_frontier(scenario: &ScenarioFile) -> Result<RunReport, RunError> {
    let compiled = compile(scenario).stage("compiling scenario")?;
    let m = compiled.link.band_count();
    let run = compiled.run;

    let samples = sample_interference(&compiled.interference, run.draws, run.seed)
        .stage("sampling interference")?;

    let mut portfolios = crate::portfolio::sample_portfolios(m, run.portfolios, run.seed);
    let baseline_ids: Vec<usize> = (run.portfolios..run.portfolios + m).collect();
    for band in 0..m {
        portfolios.push(Portfolio::single_band(m, band).stage("building baselines")?);
    }

    let cloud = evaluate_cloud(&portfolios, &compiled.link, &samples)
        .stage("evaluating portfolios")?;

    let baselines: Vec<Baseline> = baseline_ids
        .iter()
        .enumerate()
        .map(|(band, &id)| Baseline {
            band,
            id,
            stats: cloud[id].stats.clone(),
        })
        .collect();
    let best_baseline = baselines
        .iter()
        .max_by(|a, b| {
            a.stats
                .mean_bps
                .total_cmp(&b.stats.mean_bps)
                .then(b.id.cmp(&a.id))
        })
        .expect("at least one band")
        .clone();

    let frontier = efficient_frontier(cloud).stage("extracting frontier")?;
    let max_mean = Selection::from_evaluated(frontier.max_mean());
    let min_sd = Selection::from_evaluated(frontier.min_sd());

    let refined_portfolio = refine_max_mean(
        &compiled.link,
        &samples,
        &frontier.max_mean().portfolio,
        REFINE_TOL,
        REFINE_MAX_SWEEPS,
    )
    .stage("refining max-mean portfolio")?;
    let refined_stats = evaluate_portfolio(&refined_portfolio, &compiled.link, &samples)
        .stage("evaluating refined portfolio")?;
    let refined = Refined {
        start_id: max_mean.id,
        weights: refined_portfolio.weights().to_vec(),
        stats: refined_stats,
    };

    let improvement_pct =
        improvement_ratio(refined.stats.mean_bps, best_baseline.stats.mean_bps)
            .stage("computing improvement ratio")?;

    let cloud_points: Vec<CloudPoint> = frontier
        .cloud()
        .iter()
        .enumerate()
        .map(|(idx, ep)| CloudPoint {
            id: ep.id,
            weights: ep.portfolio.weights().to_vec(),
            mean_bps: ep.stats.mean_bps,
            sd_bps: ep.stats.sd_bps,
            on_frontier: frontier.on_frontier(idx),
            is_single_band: ep.id >= run.portfolios,
        })
        .collect();
    let frontier_points: Vec<FrontierPoint> = frontier
        .frontier()
        .iter()
        .map(|ep| FrontierPoint {
            id: ep.id,
            sd_bps: ep.stats.sd_bps,
            mean_bps: ep.stats.mean_bps,
        })
        .collect();

    Ok(RunReport {
        scenario: scenario.clone(),
        subband_bandwidth_hz: compiled.geometry.bandwidth_per_band_hz(),
        seed: run.seed,
        n_portfolios: run.portfolios,
        n_draws: run.draws,
        variance_normalization: "population",
        cloud: cloud_points,
        frontier: frontier_points,
        max_mean,
        min_sd,
        refined_max_mean: refined,
        baselines,
        best_baseline_id: best_baseline.id,
        improvement_pct,
    })
}

/// Fixed 17-significant-digit scientific formatting: enough digits to
/// round-trip any f64, so exports are byte-stable goldens.
fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write the evaluated cloud as CSV: one row per portfolio, columns
/// `id,w_1..w_M,mean_bps,sd_bps,on_frontier,is_single_band`, ordered by id.
pub fn export_cloud(report: &RunReport, path: impl AsRef<Path>) -> Result<(), RunError> {
    let path = path.as_ref();
    let m = report.scenario.bands.len();
    let mut out = Vec::with_capacity(report.cloud.len() * 64);
    let weight_cols: Vec<String> = (1..=m).map(|i| format!("w_{i}")).collect();
    writeln!(
        out,
        "id,{},mean_bps,sd_bps,on_frontier,is_single_band",
        weight_cols.join(",")
    )
    .expect("writing to memory");
    for point in &report.cloud {
        let weights: Vec<String> = point.weights.iter().map(|&w| fmt17(w)).collect();
        writeln!(
            out,
            "{},{},{},{},{},{}",
            point.id,
            weights.join(","),
            fmt17(point.mean_bps),
            fmt17(point.sd_bps),
            u8::from(point.on_frontier),
            u8::from(point.is_single_band),
        )
        .expect("writing to memory");
    }
    std::fs::write(path, out).stage_path("writing cloud CSV", path)
}

/// Write the report as pretty JSON with a trailing newline.
pub fn export_report(report: &RunReport, path: impl AsRef<Path>) -> Result<(), RunError> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(report).expect("report serialises");
    text.push('\n');
    std::fs::write(path, text).stage_path("writing report JSON", path)
}

trait StagePathExt<T> {
    fn stage_path(self, stage: &'static str, path: &Path) -> Result<T, RunError>;
}

impl<T> StagePathExt<T> for Result<T, std::io::Error> {
    fn stage_path(self, stage: &'static str, path: &Path) -> Result<T, RunError> {
        self.map_err(|e| {
            RunError::new(
                stage,
                IoAt {
                    path: path.to_path_buf(),
                    source: e,
                },
            )
        })
    }
}

#[derive(Debug, Error)]
#[error("{path}: {source}")]
struct IoAt {
    path: PathBuf,
    source: std::io::Error,
}

/// Human-readable summary with rates in Mbps (one decimal).
pub fn render_summary(report: &RunReport) -> String {
    let mbps = |bps: f64| format!("{:.1}", bps / 1e6);
    let mut s = String::new();
    let m = report.scenario.bands.len();
    s.push_str(&format!(
        "{} sub-bands x {} Hz, {} portfolios, {} draws, seed {}\n",
        m, report.subband_bandwidth_hz, report.n_portfolios, report.n_draws, report.seed
    ));
    s.push_str(&format!(
        "frontier: {} of {} cloud points\n",
        report.frontier.len(),
        report.cloud.len()
    ));
    s.push_str(&format!(
        "max-mean portfolio  #{:<6} mean {} Mbps, sd {} Mbps\n",
        report.max_mean.id,
        mbps(report.max_mean.stats.mean_bps),
        mbps(report.max_mean.stats.sd_bps)
    ));
    s.push_str(&format!(
        "min-sd portfolio    #{:<6} mean {} Mbps, sd {} Mbps\n",
        report.min_sd.id,
        mbps(report.min_sd.stats.mean_bps),
        mbps(report.min_sd.stats.sd_bps)
    ));
    let w: Vec<String> = report
        .refined_max_mean
        .weights
        .iter()
        .map(|x| format!("{x:.4}"))
        .collect();
    s.push_str(&format!(
        "refined max-mean    [{}] mean {} Mbps, sd {} Mbps\n",
        w.join(", "),
        mbps(report.refined_max_mean.stats.mean_bps),
        mbps(report.refined_max_mean.stats.sd_bps)
    ));
    for b in &report.baselines {
        s.push_str(&format!(
            "baseline band {}     #{:<6} mean {} Mbps, sd {} Mbps{}\n",
            b.band,
            b.id,
            mbps(b.stats.mean_bps),
            mbps(b.stats.sd_bps),
            if b.id == report.best_baseline_id {
                "  (best)"
            } else {
                ""
            }
        ));
    }
    s.push_str(&format!(
        "improvement over best single band: {:.1}%\n",
        report.improvement_pct
    ));
    s
}
