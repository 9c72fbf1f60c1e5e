//! Model invariants as property tests.

use greencell::association::{tier_stats, AssociationScheme, GainUsage};
use greencell::coverage::{Bound, CoverageAnalyzer, VoidModel};
use greencell::model::{ChannelModel, NetworkConfig, TierConfig, M2_PER_KM2};
use greencell::montecarlo::{simulate, SimConfig, TrialMode};
use greencell::specfun::{ell, gamma, hbar, upper_incomplete_gamma};
use proptest::prelude::*;

fn tier() -> impl Strategy<Value = TierConfig> {
    (0.5f64..60.0, 0.01f64..50.0, 0.5f64..150.0, 0.1f64..1.0, 1.0f64..8.0).prop_map(
        |(per_km2, power, hardware, dormant_share, scale)| {
            TierConfig::new(per_km2 / M2_PER_KM2, power, hardware, dormant_share * hardware, scale)
        },
    )
}

fn channel() -> impl Strategy<Value = ChannelModel> {
    prop_oneof![
        Just(ChannelModel::rayleigh()),
        (0.5f64..6.0).prop_map(ChannelModel::rayleigh_lognormal),
        (0.5f64..6.0).prop_map(ChannelModel::lognormal),
    ]
}

fn network() -> impl Strategy<Value = NetworkConfig> {
    (prop::collection::vec(tier(), 1..=4), 2.5f64..5.0, 1.0f64..1000.0, channel()).prop_map(
        |(tiers, alpha, users, channel)| NetworkConfig::new(tiers, alpha, users / M2_PER_KM2, channel).unwrap(),
    )
}

fn scheme() -> impl Strategy<Value = AssociationScheme> {
    prop_oneof![
        Just(AssociationScheme::gca()),
        Just(AssociationScheme::mrpa()),
        Just(AssociationScheme::nba()),
        Just(AssociationScheme { gain_usage: GainUsage::None, ..AssociationScheme::gca() }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn association_probabilities_sum_to_one(net in network(), scheme in scheme()) {
        let stats = tier_stats(&scheme, &net).unwrap();
        let total: f64 = stats.iter().map(|s| s.association_prob).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        for s in &stats {
            prop_assert!(s.association_prob > 0.0);
            prop_assert!(s.void_prob > 0.0 && s.void_prob <= 1.0);
        }
    }

    #[test]
    fn users_are_conserved(net in network(), scheme in scheme()) {
        let stats = tier_stats(&scheme, &net).unwrap();
        let carried: f64 = net.tiers().iter().zip(&stats).map(|(t, s)| t.intensity * s.mean_load).sum();
        prop_assert!((carried / net.user_intensity() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn common_bias_factor_changes_nothing(net in network(), factor in 0.01f64..100.0) {
        let biases: Vec<f64> = (0..net.num_tiers()).map(|k| AssociationScheme::gca().bias(&net, k)).collect();
        let scaled: Vec<f64> = biases.iter().map(|b| b * factor).collect();
        let a = tier_stats(&AssociationScheme::custom(biases, GainUsage::Full), &net).unwrap();
        let b = tier_stats(&AssociationScheme::custom(scaled, GainUsage::Full), &net).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x.association_prob - y.association_prob).abs() < 1e-12);
        }
    }

    #[test]
    fn more_users_fewer_voids(net in network(), scheme in scheme(), factor in 1.01f64..10.0) {
        let busier = net.with_user_intensity(net.user_intensity() * factor).unwrap();
        let a = tier_stats(&scheme, &net).unwrap();
        let b = tier_stats(&scheme, &busier).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!(y.void_prob < x.void_prob);
        }
    }

    #[test]
    fn hbar_bounds(x in 1e-4f64..1e4, y in 0.2f64..0.8) {
        let h = hbar(x, y).unwrap();
        prop_assert!(h >= 0.0);
        prop_assert!(h >= x.powf(y) * gamma(1.0 - y) - 1.0 - 1e-12 * h.max(1.0));
        // Averaging over unit-mean exponential gains lowers the concave kernel.
        prop_assert!(ell(x, y).unwrap() <= h * (1.0 + 1e-12));
        prop_assert!(hbar(x * 1.5, y).unwrap() > h);
    }

    #[test]
    fn incomplete_gamma_recurrence(a in -2.9f64..4.0, x in 0.05f64..25.0) {
        prop_assume!((a - a.round()).abs() > 1e-3);
        let lhs = upper_incomplete_gamma(a + 1.0, x).unwrap();
        let rhs = a * upper_incomplete_gamma(a, x).unwrap() + x.powf(a) * (-x).exp();
        prop_assert!((lhs - rhs).abs() <= 1e-11 * lhs.abs());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn coverage_is_a_sandwiched_survival_function(
        users in 5.0f64..800.0,
        eta in 0.005f64..1.0,
        step in 1.05f64..3.0,
        pick in 0usize..2,
    ) {
        let net = NetworkConfig::table_ii(users / M2_PER_KM2);
        let scheme = [AssociationScheme::gca(), AssociationScheme::mrpa()][pick].clone();
        let analyzer = CoverageAnalyzer::new(&scheme, &net).unwrap();
        let lo = analyzer.green_coverage(eta, Bound::Lower, VoidModel::Analytic).unwrap().rho;
        let hi = analyzer.green_coverage(eta, Bound::Upper, VoidModel::Analytic).unwrap().rho;
        let later = analyzer.green_coverage(eta * step, Bound::Lower, VoidModel::Analytic).unwrap().rho;
        let limit = analyzer.green_coverage(eta, Bound::Lower, VoidModel::NoVoid).unwrap().rho;
        prop_assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
        prop_assert!(lo <= hi + 1e-9);
        prop_assert!(later <= lo + 1e-9);
        prop_assert!(limit <= lo + 1e-9);
    }

    #[test]
    fn network_round_trips_through_json(net in network()) {
        let back = NetworkConfig::from_json(&net.to_json()).unwrap();
        prop_assert_eq!(back.num_tiers(), net.num_tiers());
        prop_assert!((back.user_intensity() / net.user_intensity() - 1.0).abs() < 1e-12);
        for (a, b) in back.tiers().iter().zip(net.tiers()) {
            prop_assert!((a.active_power() - b.active_power()).abs() < 1e-9 * b.active_power());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn simulation_is_reproducible(seed in any::<u64>(), users in 5.0f64..100.0) {
        let net = NetworkConfig::table_ii(users / M2_PER_KM2);
        let config = SimConfig::for_network(&net, 8, seed);
        let schemes = [AssociationScheme::gca(), AssociationScheme::nba()];
        let a = simulate(&net, &schemes, &config, TrialMode::WithUsers).unwrap();
        let b = simulate(&net, &schemes, &config, TrialMode::WithUsers).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!(&x.outcomes, &y.outcomes);
            for o in &x.outcomes {
                let total: u32 = o.interior.iter().map(|c| c.stations).sum();
                let void: u32 = o.interior.iter().map(|c| c.void).sum();
                prop_assert!(void <= total);
            }
        }
    }
}
