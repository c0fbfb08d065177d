//! Property tests over randomly generated inputs.

use proptest::collection::vec;
use proptest::prelude::*;

use ofdm_frontier::frontier::efficient_frontier;
use ofdm_frontier::interference::{sample_interference, InterferenceMarginal, InterferenceModel};
use ofdm_frontier::portfolio::{
    combine_variance, evaluate_portfolio, sample_portfolios, EvaluatedPortfolio, Portfolio,
    ThroughputStats,
};
use ofdm_frontier::radio::{LinkScenario, SubbandSpec};
use ofdm_frontier::scenario::{
    from_json_str, to_json_string, BandSection, InterferenceSpec, NumerologySection, RunSection,
    ScenarioFile,
};

fn cloud_point(id: usize, sd: f64, mean: f64) -> EvaluatedPortfolio {
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

fn dominates(a: &EvaluatedPortfolio, b: &EvaluatedPortfolio) -> bool {
    let (sa, sb) = (&a.stats, &b.stats);
    sa.mean_bps >= sb.mean_bps
        && sa.sd_bps <= sb.sd_bps
        && (sa.mean_bps > sb.mean_bps || sa.sd_bps < sb.sd_bps)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn frontier_members_are_undominated_and_stable(
        coords in vec((0u32..50, 0u32..50), 1..120),
        extra in (0u32..50, 0u32..50),
    ) {
        // Integer coordinates force plenty of exact ties and duplicates.
        let cloud: Vec<EvaluatedPortfolio> = coords
            .iter()
            .enumerate()
            .map(|(id, &(sd, mean))| cloud_point(id, sd as f64, mean as f64))
            .collect();
        let result = efficient_frontier(cloud.clone()).unwrap();
        let frontier = result.frontier();

        // No cloud point strictly dominates any frontier member.
        for member in &frontier {
            for other in &cloud {
                prop_assert!(
                    !dominates(other, member),
                    "cloud point {} dominates frontier member {}",
                    other.id,
                    member.id
                );
            }
        }

        // Frontier of the frontier is itself.
        let ids: Vec<usize> = frontier.iter().map(|p| p.id).collect();
        let again = efficient_frontier(frontier.into_iter().cloned().collect()).unwrap();
        let again_ids: Vec<usize> = again.frontier().iter().map(|p| p.id).collect();
        prop_assert_eq!(&ids, &again_ids);

        // Inserting a dominated point never changes the frontier.
        let anchor = &result.cloud()[0];
        let dominated = cloud_point(
            cloud.len(),
            anchor.stats.sd_bps + f64::from(extra.0) + 1.0,
            anchor.stats.mean_bps - f64::from(extra.1) - 1.0,
        );
        let mut extended = cloud;
        extended.push(dominated);
        let with_extra = efficient_frontier(extended).unwrap();
        let extra_ids: Vec<usize> = with_extra.frontier().iter().map(|p| p.id).collect();
        prop_assert_eq!(&ids, &extra_ids);
    }

    #[test]
    fn sampled_portfolios_are_valid_and_deterministic(
        m in 1usize..6,
        n in 1usize..40,
        seed in any::<u64>(),
    ) {
        let a = sample_portfolios(m, n, seed);
        let b = sample_portfolios(m, n, seed);
        prop_assert_eq!(&a, &b);
        for p in &a {
            prop_assert_eq!(p.band_count(), m);
            let sum: f64 = p.weights().iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-12);
            prop_assert!(p.weights().iter().all(|&w| w >= 0.0));
        }
    }

    #[test]
    fn variance_identity_holds_for_random_scenarios(
        seed in any::<u64>(),
        gains in vec(0.05f64..5.0, 2..5),
        log_sds in vec(0.2f64..1.5, 4),
    ) {
        let m = gains.len();
        let specs: Vec<SubbandSpec> = gains
            .iter()
            .map(|&g| SubbandSpec::new(96e6, g, 1e-3).unwrap())
            .collect();
        let scenario = LinkScenario::new(specs, 1.0).unwrap();
        let marginals: Vec<InterferenceMarginal> = (0..m)
            .map(|i| InterferenceMarginal::LogNormal {
                log_mean: -3.0,
                log_sd: log_sds[i],
            })
            .collect();
        let model = InterferenceModel::independent(marginals).unwrap();
        let samples = sample_interference(&model, 500, seed).unwrap();

        for p in sample_portfolios(m, 5, seed ^ 0x9e37) {
            let stats = evaluate_portfolio(&p, &scenario, &samples).unwrap();
            let combined = combine_variance(&stats.band_sds_bps, &stats.band_correlation).unwrap();
            let rel = (combined - stats.variance_bps2).abs()
                / stats.variance_bps2.max(f64::MIN_POSITIVE);
            prop_assert!(rel <= 1e-9, "relative error {}", rel);
        }
    }

    #[test]
    fn scenario_json_round_trips(
        mu in 0u8..=6,
        spb in 1u32..64,
        m in 1usize..4,
        gains in vec(0.01f64..10.0, 3),
        noises in vec(1e-6f64..1.0, 3),
        total_power in 0.1f64..10.0,
        seed in any::<u64>(),
        kinds in vec(0u8..4, 3),
    ) {
        let payload = spb * m as u32;
        let fft_size = payload.next_power_of_two().max(payload);
        let bands: Vec<BandSection> = (0..m)
            .map(|i| BandSection {
                channel_gain: gains[i],
                noise_power_w: noises[i],
                interference: match kinds[i] {
                    0 => InterferenceSpec::Constant { level_w: 0.01 * (i + 1) as f64 },
                    1 => InterferenceSpec::LogNormal { log_mean: -2.0 - i as f64, log_sd: 0.5 },
                    2 => InterferenceSpec::Gamma { shape: 1.0 + i as f64, scale_w: 0.02 },
                    _ => InterferenceSpec::Empirical {
                        samples_w: vec![0.01, 0.05, 0.4 / (i + 1) as f64],
                    },
                },
            })
            .collect();
        let mut correlation = vec![vec![0.0; m]; m];
        for (i, row) in correlation.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        let scenario = ScenarioFile {
            numerology: NumerologySection { mu, fft_size, payload_subcarriers: payload },
            bands,
            correlation,
            total_power_w: total_power,
            run: RunSection { portfolios: 10, draws: 10, seed },
        };
        let text = to_json_string(&scenario);
        let parsed = from_json_str(&text).unwrap();
        prop_assert_eq!(&scenario, &parsed);
        // And writing the parsed value reproduces the bytes.
        prop_assert_eq!(text, to_json_string(&parsed));
    }
}
