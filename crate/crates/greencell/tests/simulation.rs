//! Monte Carlo estimates against the analytic model.

use greencell::association::{tier_stats, AssociationScheme};
use greencell::model::{NetworkConfig, M2_PER_KM2};
use greencell::montecarlo::{estimate_scheme_cdf, simulate, SimConfig, TrialMode};

fn table2(users_per_km2: f64) -> NetworkConfig {
    NetworkConfig::table_ii(users_per_km2 / M2_PER_KM2)
}

/// The MRPA serving distance is the nearest-point distance of an equivalent
/// Poisson process.
#[test]
fn mrpa_serving_distance_law() {
    let net = table2(370.0);
    let config = SimConfig::for_network(&net, 100_000, 11);
    let cdf = estimate_scheme_cdf(&net, &AssociationScheme::mrpa(), &config).unwrap();
    assert!(cdf.ks_distance < 0.01, "KS distance {}", cdf.ks_distance);
}

/// GCA void probabilities at λ_u/λ_1 = 10 within 5% of the analytic values.
#[test]
fn gca_void_probabilities() {
    let net = table2(10.0);
    let config = SimConfig::for_network(&net, 300, 5);
    let runs = simulate(&net, &[AssociationScheme::gca()], &config, TrialMode::WithUsers).unwrap();
    let estimate = runs[0].association();
    let analytic = tier_stats(&AssociationScheme::gca(), &net).unwrap();
    for (k, (m, s)) in estimate.void_probability.iter().zip(&analytic).enumerate() {
        let err = (m.mean - s.void_prob).abs() / s.void_prob;
        assert!(err < 0.05, "tier {}: {:.4} vs {:.4}", k + 1, m.mean, s.void_prob);
    }
}

#[test]
fn schemes_share_layouts() {
    let net = table2(370.0);
    let config = SimConfig::for_network(&net, 50, 3);
    let schemes = [AssociationScheme::gca(), AssociationScheme::nba()];
    let runs = simulate(&net, &schemes, &config, TrialMode::OriginOnly).unwrap();
    let alone = simulate(&net, &schemes[1..], &config, TrialMode::OriginOnly).unwrap();
    assert_eq!(runs[1].outcomes, alone[0].outcomes);
}
