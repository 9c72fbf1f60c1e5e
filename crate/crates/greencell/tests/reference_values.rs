//! Reference values and hand-derived arithmetic.

use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use greencell::association::{tier_stats, AssociationScheme};
use greencell::coverage::{Bound, CoverageAnalyzer, VoidModel};
use greencell::model::{NetworkConfig, M2_PER_KM2};
use greencell::specfun::gamma;

fn table2(users_per_km2: f64) -> NetworkConfig {
    NetworkConfig::table_ii(users_per_km2 / M2_PER_KM2)
}

/// Reference value 0.601 for the no-void upper limit at η = 0.1 on the
/// caption network.
#[test]
fn caption_network_upper_limit() {
    let net = NetworkConfig::fig1_caption(370.0 / M2_PER_KM2);
    let gca = CoverageAnalyzer::new(&AssociationScheme::gca(), &net).unwrap();
    assert_abs_diff_eq!(gca.upper_limit_closed_form(0.1), 0.601, epsilon = 5e-4);
    let inverted = gca.green_coverage(0.1, Bound::Upper, VoidModel::NoVoid).unwrap().rho;
    assert_abs_diff_eq!(inverted, gca.upper_limit_closed_form(0.1), epsilon = 1e-6);
}

/// Upper limit summed by hand: `(α sin(2π/α) / 2π) Σ ϑ_k (Υ_k / τ_k)^{2/α} / Σ ϑ_m Υ_m^{2/α}`.
#[test]
fn upper_limit_arithmetic() {
    let net = table2(370.0);
    let stats = tier_stats(&AssociationScheme::gca(), &net).unwrap();
    let active = net.active_powers();
    let mut num = 0.0;
    let mut den = 0.0;
    for (s, u) in stats.iter().zip(&active) {
        let tau = 2f64.powf(0.1 * u) - 1.0;
        num += s.association_prob * (u / tau).sqrt();
        den += s.association_prob * u.sqrt();
    }
    let expected = 4.0 * (PI / 2.0).sin() / (2.0 * PI) * num / den;
    let gca = CoverageAnalyzer::new(&AssociationScheme::gca(), &net).unwrap();
    assert_abs_diff_eq!(gca.upper_limit_closed_form(0.1), expected, epsilon = 1e-12);
}

/// GCA tier probabilities and gamma shape on the reference network.
#[test]
fn gca_association_arithmetic() {
    let net = table2(10.0);
    let stats = tier_stats(&AssociationScheme::gca(), &net).unwrap();
    // ϑ_k ∝ λ_k (P_k / Υ_k)^{1/2}; the gain moments are common to all tiers.
    let raw: Vec<f64> = net.tiers().iter().map(|t| t.intensity * (t.tx_power / t.active_power()).sqrt()).collect();
    let total: f64 = raw.iter().sum();
    for (s, r) in stats.iter().zip(&raw) {
        assert_abs_diff_eq!(s.association_prob, r / total, epsilon = 1e-12);
    }
    assert_abs_diff_eq!(stats[0].association_prob, 0.0418, epsilon = 5e-5);
    assert_abs_diff_eq!(stats[1].association_prob, 0.366, epsilon = 5e-4);
    assert_abs_diff_eq!(stats[2].association_prob, 0.592, epsilon = 5e-4);
    let sigma = 0.3 * 10f64.ln();
    let shape = 3.5 * gamma(1.5) * gamma(0.5) * (sigma * sigma / 4.0).exp();
    for s in &stats {
        assert_abs_diff_eq!(s.shape, shape, epsilon = 1e-10);
        assert_abs_diff_eq!(s.shape, 6.19, epsilon = 5e-3);
        let lambda_u = 10.0 / M2_PER_KM2;
        let void = (1.0 + lambda_u / (s.shape * s.equivalent_intensity)).powf(-s.shape);
        assert_abs_diff_eq!(s.void_prob, void, epsilon = 1e-12);
    }
}

/// Single tier, no voids, α = 4, threshold with `2^{ηΥ} - 1 = 1`:
/// `1 / (1 + ℓ(1, 1/2)) = 1 / (1 + π/4)`.
#[test]
fn shadowing_only_single_tier() {
    let net = table2(370.0);
    let tier = net.tier(2).clone();
    let single = net.with_tiers(vec![tier.clone()]).unwrap();
    let eta = 1.0 / tier.active_power();
    let analyzer = CoverageAnalyzer::new(&AssociationScheme::gca_shadowing(), &single).unwrap();
    let rho = analyzer.green_coverage(eta, Bound::Lower, VoidModel::NoVoid).unwrap().rho;
    assert_abs_diff_eq!(rho, 1.0 / (1.0 + PI / 4.0), epsilon = 1e-12);
    assert_abs_diff_eq!(2f64.powf(eta * tier.active_power()) - 1.0, 1.0, epsilon = 1e-12);
}
