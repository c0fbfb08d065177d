//! Efficient-frontier extraction and optimum selection on the mean-SD plane.
//!
//! Dominance is the usual Pareto rule for (maximise mean, minimise SD):
//! point A dominates B when A's mean is >= and A's SD is <= with at least
//! one strict inequality. The frontier keeps every non-dominated point;
//! exact (mean, SD) duplicates collapse to the lowest id so the output is
//! independent of evaluation order. Coordinates are mean and standard
//! deviation rather than variance — dominance is identical either way, the
//! reported numbers just match the plotting convention.
//!
//! Also here: derivative-free refinement of the max-mean portfolio (pairwise
//! weight transfers with a shrinking step, well-defined because common
//! random numbers make the Monte Carlo mean a deterministic function), the
//! classical water-filling solution as an oracle for the deterministic
//! limit, and the improvement ratio against single-band baselines.

use rayon::prelude::*;
use thiserror::Error;

use crate::interference::SampleMatrix;
use crate::portfolio::{portfolio_mean_bps, EvaluatedPortfolio, Portfolio, PortfolioError};
use crate::radio::LinkScenario;

#[derive(Debug, Error)]
pub enum FrontierError {
    #[error("portfolio cloud is empty")]
    EmptyCloud,
    #[error("cloud point {id} has a non-finite mean or SD")]
    NonFiniteCloudPoint { id: usize },
    #[error("objective evaluated to a non-finite value")]
    NonFinite,
    #[error("every sub-band has zero channel gain; no allocation can carry traffic")]
    AllBandsUnusable,
    #[error("baseline mean must be positive to form an improvement ratio, got {0}")]
    ZeroBaseline(f64),
    #[error("interference level {index} must be finite and non-negative, got {value}")]
    InvalidInterference { index: usize, value: f64 },
    #[error("scenario has {bands} sub-bands but {levels} interference levels were given")]
    LevelCountMismatch { bands: usize, levels: usize },
    #[error(transparent)]
    Portfolio(#[from] PortfolioError),
}

/// The evaluated cloud together with its efficient frontier.
///
/// `frontier` indexes into `cloud`, sorted by ascending SD; along that order
/// the mean is strictly increasing, so the first entry is the minimum-SD
/// point and the last is the maximum-mean point.
#[derive(Debug, Clone)]
pub struct FrontierResult {
    cloud: Vec<EvaluatedPortfolio>,
    frontier: Vec<usize>,
    membership: Vec<bool>,
}

impl FrontierResult {
    pub fn cloud(&self) -> &[EvaluatedPortfolio] {
        &self.cloud
    }

    /// Frontier members ordered by ascending SD.
    pub fn frontier(&self) -> Vec<&EvaluatedPortfolio> {
        self.frontier.iter().map(|&i| &self.cloud[i]).collect()
    }

    pub fn frontier_len(&self) -> usize {
        self.frontier.len()
    }

    /// Whether the cloud entry at `index` survived dominance.
    pub fn on_frontier(&self, index: usize) -> bool {
        self.membership[index]
    }

    /// The frontier point with the greatest mean (last in SD order). Its
    /// mean is the greatest in the whole cloud.
    pub fn max_mean(&self) -> &EvaluatedPortfolio {
        &self.cloud[*self.frontier.last().expect("frontier is never empty")]
    }

    /// The frontier point with the least SD (first in SD order). Its SD is
    /// the least in the whole cloud.
    pub fn min_sd(&self) -> &EvaluatedPortfolio {
        &self.cloud[*self.frontier.first().expect("frontier is never empty")]
    }
}

/// Extract the efficient frontier from an evaluated cloud.
///
/// A point survives iff no other point has mean >= and SD <= with at least
/// one strict inequality; exact (mean, SD) duplicates keep the lowest id.
pub fn efficient_frontier(cloud: Vec<EvaluatedPortfolio>) -> Result<FrontierResult, FrontierError> {
    if cloud.is_empty() {
        return Err(FrontierError::EmptyCloud);
    }
    for ep in &cloud {
        if !(ep.stats.mean_bps.is_finite() && ep.stats.sd_bps.is_finite()) {
            return Err(FrontierError::NonFiniteCloudPoint { id: ep.id });
        }
    }

    // Sweep in (SD asc, mean desc, id asc) order keeping a running best
    // mean: a point is dominated exactly when some earlier point in this
    // order has mean >= its own.
    let mut order: Vec<usize> = (0..cloud.len()).collect();
    order.sort_by(|&a, &b| {
        let (sa, sb) = (&cloud[a].stats, &cloud[b].stats);
        sa.sd_bps
            .total_cmp(&sb.sd_bps)
            .then(sb.mean_bps.total_cmp(&sa.mean_bps))
            .then(cloud[a].id.cmp(&cloud[b].id))
    });

    let mut frontier = Vec::new();
    let mut membership = vec![false; cloud.len()];
    let mut best_mean = f64::NEG_INFINITY;
    for &idx in &order {
        let mean = cloud[idx].stats.mean_bps;
        if mean > best_mean {
            frontier.push(idx);
            membership[idx] = true;
            best_mean = mean;
        }
    }

    Ok(FrontierResult {
        cloud,
        frontier,
        membership,
    })
}

/// Maximise the sample-mean throughput by projected pairwise transfers.
///
/// Starting from `start`, repeatedly move `step` of weight between band
/// pairs, keeping the transfer that improves the mean most; when no transfer
/// helps, halve the step. Terminates when no transfer of size `tol` improves
/// the mean, or after `max_sweeps` candidate sweeps. The returned portfolio
/// never has a lower mean than `start`.
pub fn refine_max_mean(
    scenario: &LinkScenario,
    samples: &SampleMatrix,
    start: &Portfolio,
    tol: f64,
    max_sweeps: usize,
) -> Result<Portfolio, FrontierError> {
    assert!(tol > 0.0, "transfer tolerance must be positive");
    let m = start.band_count();
    let mut weights = start.weights().to_vec();
    let mut best = objective(&weights, scenario, samples)?;

    let mut step = 0.25_f64.max(tol);
    let mut sweeps = 0;
    loop {
        sweeps += 1;
        if sweeps > max_sweeps {
            break;
        }

        // All ordered pairs with a non-trivial transfer at this step size.
        let candidates: Vec<(usize, usize, f64)> = (0..m)
            .flat_map(|from| (0..m).map(move |to| (from, to)))
            .filter(|&(from, to)| from != to && weights[from] > 0.0)
            .map(|(from, to)| (from, to, step.min(weights[from])))
            .collect();

        let means: Vec<Result<f64, FrontierError>> = candidates
            .par_iter()
            .map(|&(from, to, amount)| {
                let mut w = weights.clone();
                w[from] -= amount;
                w[to] += amount;
                renormalise(&mut w);
                objective(&w, scenario, samples)
            })
            .collect();

        // Deterministic argmax: strict improvement, lowest candidate index
        // wins ties.
        let mut winner: Option<(usize, f64)> = None;
        for (i, mean) in means.into_iter().enumerate() {
            let mean = mean?;
            if mean > best && winner.is_none_or(|(_, w)| mean > w) {
                winner = Some((i, mean));
            }
        }

        match winner {
            Some((i, mean)) => {
                let (from, to, amount) = candidates[i];
                weights[from] -= amount;
                weights[to] += amount;
                renormalise(&mut weights);
                best = mean;
            }
            None if step <= tol => break,
            None => step = (step / 2.0).max(tol),
        }
    }

    Ok(Portfolio::new(weights)?)
}

fn renormalise(weights: &mut [f64]) {
    for w in weights.iter_mut() {
        if *w < 0.0 {
            *w = 0.0;
        }
    }
    let sum: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= sum;
    }
}

fn objective(
    weights: &[f64],
    scenario: &LinkScenario,
    samples: &SampleMatrix,
) -> Result<f64, FrontierError> {
    let portfolio = Portfolio::new(weights.to_vec())?;
    let mean = portfolio_mean_bps(&portfolio, scenario, samples)?;
    if !mean.is_finite() {
        return Err(FrontierError::NonFinite);
    }
    Ok(mean)
}

/// Closed-form optimal allocation for deterministic (constant-interference)
/// scenarios: `p_i = max(0, nu - (I_i + N_i) / g_i)` with the water level
/// `nu` fixed by the power budget, solved by active-set elimination.
///
/// Returns the allocation as portfolio weights. Bands with zero gain are
/// never filled; if every band has zero gain there is nothing to optimise.
pub fn water_filling(
    scenario: &LinkScenario,
    interference_w: &[f64],
) -> Result<Portfolio, FrontierError> {
    let m = scenario.band_count();
    if interference_w.len() != m {
        return Err(FrontierError::LevelCountMismatch {
            bands: m,
            levels: interference_w.len(),
        });
    }
    for (index, &value) in interference_w.iter().enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(FrontierError::InvalidInterference { index, value });
        }
    }

    // Effective noise floor per band, in watts of transmit power.
    let floors: Vec<Option<f64>> = scenario
        .subbands()
        .iter()
        .zip(interference_w)
        .map(|(spec, &i_w)| {
            (spec.channel_gain > 0.0).then(|| (i_w + spec.noise_power_w) / spec.channel_gain)
        })
        .collect();

    let mut active: Vec<bool> = floors.iter().map(Option::is_some).collect();
    if !active.iter().any(|&a| a) {
        return Err(FrontierError::AllBandsUnusable);
    }

    let total = scenario.total_power_w();
    let mut powers = vec![0.0_f64; m];
    loop {
        let count = active.iter().filter(|&&a| a).count();
        let floor_sum: f64 = floors
            .iter()
            .zip(&active)
            .filter(|(_, &a)| a)
            .map(|(f, _)| f.unwrap())
            .sum();
        let level = (total + floor_sum) / count as f64;

        let mut removed = false;
        for i in 0..m {
            if !active[i] {
                continue;
            }
            let p = level - floors[i].unwrap();
            if p < 0.0 {
                active[i] = false;
                removed = true;
            } else {
                powers[i] = p;
            }
        }
        if !removed {
            for i in 0..m {
                if !active[i] {
                    powers[i] = 0.0;
                }
            }
            break;
        }
    }

    let sum: f64 = powers.iter().sum();
    Ok(Portfolio::new(powers.iter().map(|p| p / sum).collect())?)
}

/// Percentage gain of `candidate_mean_bps` over `baseline_mean_bps`.
pub fn improvement_ratio(candidate_mean_bps: f64, baseline_mean_bps: f64) -> Result<f64, FrontierError> {
    if baseline_mean_bps <= 0.0 || baseline_mean_bps.is_nan() {
        return Err(FrontierError::ZeroBaseline(baseline_mean_bps));
    }
    Ok(100.0 * (candidate_mean_bps - baseline_mean_bps) / baseline_mean_bps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interference::{sample_interference, InterferenceMarginal, InterferenceModel};
    use crate::portfolio::ThroughputStats;
    use crate::radio::SubbandSpec;

    /// Bare cloud point at the given (sd, mean) coordinates.
    fn point(id: usize, sd: f64, mean: f64) -> EvaluatedPortfolio {
        EvaluatedPortfolio {
            id,
            portfolio: Portfolio::new(vec![1.0]).unwrap(),
            stats: ThroughputStats {
                mean_bps: mean,
                variance_bps2: sd * sd,
                sd_bps: sd,
                band_means_bps: vec![mean],
                band_sds_bps: vec![sd],
                band_correlation: vec![vec![1.0]],
            },
        }
    }

    fn constant_samples(levels: &[f64], n_draws: usize) -> SampleMatrix {
        let model = InterferenceModel::independent(
            levels
                .iter()
                .map(|&level_w| InterferenceMarginal::Constant { level_w })
                .collect(),
        )
        .unwrap();
        sample_interference(&model, n_draws, 0).unwrap()
    }

    #[test]
    fn dominated_point_dropped() {
        let f = efficient_frontier(vec![point(0, 1.0, 5.0), point(1, 2.0, 4.0)]).unwrap();
        let ids: Vec<usize> = f.frontier().iter().map(|p| p.id).collect();
        assert_eq!(ids, vec![0]);
        assert!(f.on_frontier(0));
        assert!(!f.on_frontier(1));
    }

    #[test]
    fn trade_off_keeps_both() {
        let f = efficient_frontier(vec![point(0, 1.0, 5.0), point(1, 2.0, 6.0)]).unwrap();
        let ids: Vec<usize> = f.frontier().iter().map(|p| p.id).collect();
        assert_eq!(ids, vec![0, 1]);
        assert_eq!(f.max_mean().id, 1);
        assert_eq!(f.min_sd().id, 0);
    }

    #[test]
    fn empty_cloud_rejected() {
        assert!(matches!(
            efficient_frontier(vec![]),
            Err(FrontierError::EmptyCloud)
        ));
    }

    #[test]
    fn duplicates_keep_lowest_id() {
        let f = efficient_frontier(vec![
            point(3, 1.0, 5.0),
            point(1, 1.0, 5.0),
            point(2, 1.0, 5.0),
        ])
        .unwrap();
        let ids: Vec<usize> = f.frontier().iter().map(|p| p.id).collect();
        assert_eq!(ids, vec![1]);
    }

    #[test]
    fn frontier_mean_increases_along_sd() {
        let cloud: Vec<EvaluatedPortfolio> = (0..200)
            .map(|i| {
                let x = i as f64;
                point(i, (x * ramp(i)).sin().abs() * 10.0, (x * 0.77).cos() * 8.0)
            })
            .collect();
        let f = efficient_frontier(cloud).unwrap();
        let members = f.frontier();
        for pair in members.windows(2) {
            assert!(pair[0].stats.sd_bps <= pair[1].stats.sd_bps);
            assert!(pair[0].stats.mean_bps < pair[1].stats.mean_bps);
        }
    }

    fn ramp(i: usize) -> f64 {
        0.1 + (i % 7) as f64 * 0.09
    }

    #[test]
    fn frontier_is_idempotent_and_insert_invariant() {
        let cloud: Vec<EvaluatedPortfolio> = (0..100)
            .map(|i| point(i, ((i * 37) % 19) as f64, ((i * 53) % 23) as f64))
            .collect();
        let f = efficient_frontier(cloud.clone()).unwrap();
        let frontier_ids: Vec<usize> = f.frontier().iter().map(|p| p.id).collect();

        // Frontier of the frontier is itself.
        let again =
            efficient_frontier(f.frontier().into_iter().cloned().collect::<Vec<_>>()).unwrap();
        let again_ids: Vec<usize> = again.frontier().iter().map(|p| p.id).collect();
        assert_eq!(frontier_ids, again_ids);

        // Adding a clearly dominated point changes nothing.
        let mut extended = cloud;
        extended.push(point(1000, 1e9, -1e9));
        let f2 = efficient_frontier(extended).unwrap();
        let ids2: Vec<usize> = f2.frontier().iter().map(|p| p.id).collect();
        assert_eq!(frontier_ids, ids2);
    }

    #[test]
    fn water_filling_closed_forms() {
        // Identical bands share power equally.
        let even = LinkScenario::new(
            vec![SubbandSpec::new(96e6, 1.0, 1.0).unwrap(); 4],
            8.0,
        )
        .unwrap();
        let p = water_filling(&even, &[0.0; 4]).unwrap();
        for &w in p.weights() {
            assert!((w - 0.25).abs() < 1e-12);
        }

        // Tight budget shuts the noisier band off: nu = 2 puts band 1 at 0.
        let two = LinkScenario::new(
            vec![
                SubbandSpec::new(96e6, 1.0, 1.0).unwrap(),
                SubbandSpec::new(96e6, 1.0, 2.0).unwrap(),
            ],
            1.0,
        )
        .unwrap();
        let p = water_filling(&two, &[0.0, 0.0]).unwrap();
        assert!((p.weights()[0] - 1.0).abs() < 1e-12);
        assert_eq!(p.weights()[1], 0.0);

        // Larger budget: nu = 3 gives p = [2, 1], weights [2/3, 1/3].
        let two_loose = LinkScenario::new(
            vec![
                SubbandSpec::new(96e6, 1.0, 1.0).unwrap(),
                SubbandSpec::new(96e6, 1.0, 2.0).unwrap(),
            ],
            3.0,
        )
        .unwrap();
        let p = water_filling(&two_loose, &[0.0, 0.0]).unwrap();
        assert!((p.weights()[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((p.weights()[1] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn water_filling_guards() {
        let dead = LinkScenario::new(
            vec![
                SubbandSpec::new(96e6, 0.0, 1.0).unwrap(),
                SubbandSpec::new(96e6, 0.0, 1.0).unwrap(),
            ],
            1.0,
        )
        .unwrap();
        assert!(matches!(
            water_filling(&dead, &[0.0, 0.0]),
            Err(FrontierError::AllBandsUnusable)
        ));

        let one = LinkScenario::new(vec![SubbandSpec::new(96e6, 1.0, 1.0).unwrap()], 1.0).unwrap();
        assert!(matches!(
            water_filling(&one, &[0.0, 0.0]),
            Err(FrontierError::LevelCountMismatch { bands: 1, levels: 2 })
        ));
        assert!(matches!(
            water_filling(&one, &[-0.5]),
            Err(FrontierError::InvalidInterference { index: 0, .. })
        ));
    }

    #[test]
    fn refine_reaches_symmetric_optimum_from_a_corner() {
        let scenario = LinkScenario::new(
            vec![SubbandSpec::new(96e6, 1.0, 1.0).unwrap(); 3],
            3.0,
        )
        .unwrap();
        let samples = constant_samples(&[0.0; 3], 1);
        let start = Portfolio::single_band(3, 0).unwrap();
        let refined = refine_max_mean(&scenario, &samples, &start, 1e-4, 10_000).unwrap();
        for &w in refined.weights() {
            assert!(
                (w - 1.0 / 3.0).abs() < 1e-2,
                "expected near-equal split, got {:?}",
                refined.weights()
            );
        }
    }

    #[test]
    fn refine_matches_water_filling_on_two_bands() {
        let scenario = LinkScenario::new(
            vec![
                SubbandSpec::new(96e6, 1.0, 1.0).unwrap(),
                SubbandSpec::new(96e6, 1.0, 2.0).unwrap(),
            ],
            3.0,
        )
        .unwrap();
        let samples = constant_samples(&[0.0, 0.0], 1);
        let refined = refine_max_mean(
            &scenario,
            &samples,
            &Portfolio::uniform(2),
            1e-5,
            10_000,
        )
        .unwrap();
        assert!((refined.weights()[0] - 2.0 / 3.0).abs() < 1e-3);
        assert!((refined.weights()[1] - 1.0 / 3.0).abs() < 1e-3);
    }

    #[test]
    fn refine_never_regresses() {
        let scenario = LinkScenario::new(
            vec![
                SubbandSpec::new(96e6, 2.0, 0.5).unwrap(),
                SubbandSpec::new(96e6, 0.3, 1.0).unwrap(),
            ],
            1.0,
        )
        .unwrap();
        let samples = constant_samples(&[0.1, 0.4], 1);
        let start = water_filling(&scenario, &[0.1, 0.4]).unwrap();
        let start_mean = portfolio_mean_bps(&start, &scenario, &samples).unwrap();
        let refined = refine_max_mean(&scenario, &samples, &start, 1e-4, 10_000).unwrap();
        let refined_mean = portfolio_mean_bps(&refined, &scenario, &samples).unwrap();
        assert!(refined_mean >= start_mean);
    }

    #[test]
    fn refine_from_many_starts_matches_water_filling_mean() {
        // Deterministic limit: every start converges to the closed-form
        // optimum's mean.
        let scenario = LinkScenario::new(
            vec![
                SubbandSpec::new(96e6, 3.0, 0.3).unwrap(),
                SubbandSpec::new(96e6, 0.7, 0.15).unwrap(),
                SubbandSpec::new(96e6, 1.6, 0.6).unwrap(),
            ],
            2.0,
        )
        .unwrap();
        let levels = [0.05, 0.2, 0.0];
        let samples = constant_samples(&levels, 1);
        let wf = water_filling(&scenario, &levels).unwrap();
        let wf_mean = portfolio_mean_bps(&wf, &scenario, &samples).unwrap();
        for start in crate::portfolio::sample_portfolios(3, 10, 314) {
            let refined = refine_max_mean(&scenario, &samples, &start, 1e-5, 50_000).unwrap();
            let mean = portfolio_mean_bps(&refined, &scenario, &samples).unwrap();
            let rel = (wf_mean - mean).abs() / wf_mean;
            assert!(rel <= 1e-6, "start {:?}: mean off by {rel:e}", start.weights());
        }
    }

    #[test]
    fn non_finite_objective_is_reported() {
        // A representable-but-absurd gain overflows the SINR to infinity.
        let scenario = LinkScenario::new(
            vec![
                SubbandSpec::new(96e6, 1e308, 1e-3).unwrap(),
                SubbandSpec::new(96e6, 1.0, 1e-3).unwrap(),
            ],
            1e308,
        )
        .unwrap();
        let samples = constant_samples(&[0.0, 0.0], 1);
        let start = Portfolio::uniform(2);
        assert!(matches!(
            refine_max_mean(&scenario, &samples, &start, 1e-4, 100),
            Err(FrontierError::NonFinite)
        ));
    }

    #[test]
    fn improvement_ratio_cases() {
        let r = improvement_ratio(1350e6, 705e6).unwrap();
        assert!((r - 91.48936170212765).abs() < 1e-9);
        assert_eq!(r.round() as i64, 91);
        assert_eq!(improvement_ratio(288e6, 192e6).unwrap(), 50.0);
        assert_eq!(improvement_ratio(5.0, 5.0).unwrap(), 0.0);
        assert!(matches!(
            improvement_ratio(1.0, 0.0),
            Err(FrontierError::ZeroBaseline(_))
        ));
    }
}
