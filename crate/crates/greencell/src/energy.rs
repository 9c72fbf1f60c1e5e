//! Link and network energy efficiency.
//!
//! The mean spectrum efficiency of a tier-`k` link is
//! `C_k = E[ln(1 + w_k X / W)] = ∫_0^∞ G(z) (1 - L_X(w_k z)) / z dz`
//! where `W` is the normalised interference of [`crate::coverage`] with
//! transform `G`, and `X` is the part of the serving gain the association
//! rule did not observe: `X ≡ 1` for full-gain schemes, the exponential
//! fading for shadowing-only schemes and the whole gain for path-loss-only
//! schemes. This is the integral over thresholds of the green coverage
//! probability, so link efficiency and coverage bounds stay consistent.
//! Values are converted from nats to bits.
//!
//! Upper bounds replace `G` by the upper-bound transform. Unlike the coverage
//! upper bound they are not clamped per threshold, so they stay valid but are
//! looser than integrating the clamped coverage bound.

use std::f64::consts::LN_2;

use num_complex::Complex64;
use serde::Serialize;

use crate::association::{AssociationScheme, GainUsage};
use crate::coverage::{Bound, CoverageAnalyzer, VoidModel};
use crate::error::{Error, Result};
use crate::model::NetworkConfig;
use crate::specfun::{Domain, GainNodes, Quadrature};

/// `ln s` range of the spectrum-efficiency integrals. Below the lower end the
/// integrand is `O(s)`; above the upper end it decays like `s^{-2/α}` and the
/// remainder is added in closed form.
const LOG_LOWER: f64 = -40.0;
const TAIL_DECADES: f64 = 30.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyResult {
    /// Link energy efficiency `δ`, bits/Hz/joule.
    pub link_ee: f64,
    /// Mean spectrum efficiency of a tier-`k` link, bits/Hz.
    pub spectral_efficiency: Vec<f64>,
    pub association_prob: Vec<f64>,
    pub void_prob: Vec<f64>,
    /// `Σ λ_k (1 - p_k) C_k`, bits/Hz/m².
    pub area_spectral_efficiency: f64,
    /// `Σ λ_m [(1 - p_m) Υ_m^on + p_m Υ_m^off]`, watt/m².
    pub area_power: f64,
    /// Network energy efficiency `Δ`, bits/Hz/joule.
    pub network_ee: f64,
    /// Every BS is dormant, so no link sees interference and `δ` diverges.
    pub interference_free: bool,
}

/// Link and network energy efficiency of one scheme on one network.
pub fn link_ee(
    scheme: &AssociationScheme,
    network: &NetworkConfig,
    bound: Bound,
    void: VoidModel,
) -> Result<EnergyResult> {
    let analyzer = CoverageAnalyzer::new(scheme, network)?;
    energy_from(&analyzer, bound, void)
}

/// Same as [`link_ee`], reusing cached association statistics.
pub fn energy_from(analyzer: &CoverageAnalyzer, bound: Bound, void: VoidModel) -> Result<EnergyResult> {
    let network = analyzer.network();
    let void_probs = analyzer.void_probs(void);
    let theta: Vec<f64> = analyzer.stats().iter().map(|s| s.association_prob).collect();
    let active: f64 = theta.iter().zip(&void_probs).map(|(t, p)| t * (1.0 - p)).sum();
    let area_power: f64 = network
        .tiers()
        .iter()
        .zip(&void_probs)
        .map(|(t, p)| t.intensity * ((1.0 - p) * t.active_power() + p * t.dormant_power))
        .sum();
    if active == 0.0 {
        return Ok(EnergyResult {
            link_ee: f64::INFINITY,
            spectral_efficiency: vec![f64::INFINITY; theta.len()],
            association_prob: theta,
            void_prob: void_probs,
            area_spectral_efficiency: 0.0,
            area_power,
            network_ee: 0.0,
            interference_free: true,
        });
    }
    let mut spectral = Vec::with_capacity(theta.len());
    for k in 0..theta.len() {
        spectral.push(spectral_efficiency_nats(analyzer, k, bound, &void_probs)? / LN_2);
    }
    let link: f64 = (0..theta.len()).map(|k| theta[k] * spectral[k] / network.tier(k).active_power()).sum();
    let ase: f64 = network
        .tiers()
        .iter()
        .zip(&void_probs)
        .zip(&spectral)
        .map(|((t, p), c)| t.intensity * (1.0 - p) * c)
        .sum();
    Ok(EnergyResult {
        link_ee: link,
        spectral_efficiency: spectral,
        association_prob: theta,
        void_prob: void_probs,
        area_spectral_efficiency: ase,
        area_power,
        network_ee: ase / area_power,
        interference_free: false,
    })
}

/// `1 - L_X(x)` for the unobserved serving gain `X`.
fn signal_complement(analyzer: &CoverageAnalyzer, shadowing: &GainNodes, x: f64) -> f64 {
    let fading = analyzer.network().channel().has_fading();
    match analyzer.usage() {
        GainUsage::Full => -(-x).exp_m1(),
        GainUsage::ShadowingOnly => x / (1.0 + x),
        GainUsage::None if fading => shadowing.expect(|q| x * q / (1.0 + x * q)),
        GainUsage::None => shadowing.expect(|q| -(-x * q).exp_m1()),
    }
}

fn spectral_efficiency_nats(analyzer: &CoverageAnalyzer, k: usize, bound: Bound, void_probs: &[f64]) -> Result<f64> {
    let w = analyzer.weights()[k];
    let y = analyzer.network().delta();
    let shadowing = analyzer.network().channel().shadowing_nodes();
    let transform = |z: f64| {
        let z = Complex64::new(z, 0.0);
        match bound {
            Bound::Lower => analyzer.interference_transform(z, void_probs).re,
            Bound::Upper => analyzer.upper_transform(z, void_probs).re,
        }
    };
    // Integrate in u = ln(w z) so that the signal term is tier independent.
    let upper = TAIL_DECADES * std::f64::consts::LN_10 / y;
    let integrand = |u: f64| {
        let s = u.exp();
        transform(s / w) * signal_complement(analyzer, &shadowing, s)
    };
    let body = Quadrature::default()
        .with_abs_tol(1e-12)
        .with_rel_tol(1e-10)
        .integrate(integrand, Domain::Finite(LOG_LOWER, upper))
        .map_err(|e| Error::numerical("spectral_efficiency", format!("tier {k}: {e}")))?;
    // Beyond the range G(z) ≈ c z^{-y} and the signal term is one.
    let s_end = upper.exp();
    let tail = transform(s_end / w) / y;
    Ok(body.value + tail)
}

/// Closed form of the upper bound on `δ` without voids,
/// `Σ_k ϑ_k w_k^y / Υ_k / (y Σ_m ϑ_m w_m^y ln 2)` with `y = 2/α`. It depends
/// on the scheme only through `ϑ` and `w`, and these combine so that every
/// power-law scheme on the same network gives the same value.
pub fn link_ee_upper_limit(analyzer: &CoverageAnalyzer) -> f64 {
    let network = analyzer.network();
    let y = network.delta();
    let mut num = 0.0;
    let mut spread = 0.0;
    for (k, s) in analyzer.stats().iter().enumerate() {
        let wy = analyzer.weights()[k].powf(y);
        num += s.association_prob * wy / network.tier(k).active_power();
        spread += s.association_prob * wy;
    }
    num / (y * spread * LN_2)
}

pub fn link_ee_gca(network: &NetworkConfig, bound: Bound) -> Result<EnergyResult> {
    link_ee(&AssociationScheme::gca(), network, bound, VoidModel::Analytic)
}

/// Lower bound for GCA that observes shadowing only; needs Rayleigh fading.
pub fn link_ee_gca_shadowing(network: &NetworkConfig) -> Result<EnergyResult> {
    if !network.channel().has_fading() {
        return Err(Error::Unsupported("shadowing-only association analysis requires Rayleigh fading".into()));
    }
    link_ee(&AssociationScheme::gca_shadowing(), network, Bound::Lower, VoidModel::Analytic)
}

pub fn link_ee_mrpa(network: &NetworkConfig, bound: Bound) -> Result<EnergyResult> {
    link_ee(&AssociationScheme::mrpa(), network, bound, VoidModel::Analytic)
}

pub fn link_ee_nba(network: &NetworkConfig, bound: Bound) -> Result<EnergyResult> {
    link_ee(&AssociationScheme::nba(), network, bound, VoidModel::Analytic)
}

/// Network energy efficiency; the same result as [`link_ee`], which carries
/// the numerator and denominator of `Δ` alongside `δ`.
pub fn network_ee(scheme: &AssociationScheme, network: &NetworkConfig, bound: Bound) -> Result<EnergyResult> {
    link_ee(scheme, network, bound, VoidModel::Analytic)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ChannelModel;
    use crate::specfun::{ell, hbar};

    #[test]
    fn no_users_is_interference_free() {
        let r = link_ee_gca(&NetworkConfig::table_ii(0.0), Bound::Lower).unwrap();
        assert!(r.interference_free);
        assert!(r.link_ee.is_infinite());
        assert_eq!(r.network_ee, 0.0);
    }

    #[test]
    fn network_ratio_is_exact() {
        let r = link_ee_mrpa(&NetworkConfig::table_ii(200e-6), Bound::Lower).unwrap();
        assert_eq!(r.network_ee, r.area_spectral_efficiency / r.area_power);
    }

    fn single_tier(alpha: f64, active: f64) -> NetworkConfig {
        let tier = crate::model::TierConfig::new(1e-5, 1.0, active - 2.0, 0.5, 2.0);
        NetworkConfig::new(vec![tier], alpha, 1.0, ChannelModel::rayleigh()).unwrap()
    }

    #[test]
    fn single_tier_matches_direct_integral() {
        let net = single_tier(4.0, 10.0);
        let a = CoverageAnalyzer::new(&AssociationScheme::gca(), &net).unwrap();
        let r = energy_from(&a, Bound::Lower, VoidModel::NoVoid).unwrap();
        let direct = crate::specfun::integrate(
            |s| if s == 0.0 { 1.0 } else { -(-s).exp_m1() / (s * (1.0 + hbar(s, 0.5).unwrap())) },
            Domain::SemiInfinite(0.0),
            1e-11,
        )
        .unwrap();
        let expected = direct.value / (10.0 * LN_2);
        assert!((r.link_ee - expected).abs() < 1e-8 * expected, "{} vs {}", r.link_ee, expected);
    }

    #[test]
    fn shadowing_only_single_tier() {
        let net = single_tier(4.0, 10.0);
        let a = CoverageAnalyzer::new(&AssociationScheme::gca_shadowing(), &net).unwrap();
        let r = energy_from(&a, Bound::Lower, VoidModel::NoVoid).unwrap();
        let direct = crate::specfun::integrate(
            |s| 1.0 / ((1.0 + s) * (1.0 + ell(s, 0.5).unwrap())),
            Domain::SemiInfinite(0.0),
            1e-11,
        )
        .unwrap();
        let expected = direct.value / (10.0 * LN_2);
        assert!((r.link_ee - expected).abs() < 1e-8 * expected);
    }

    #[test]
    fn upper_limit_is_scheme_invariant() {
        let net = NetworkConfig::table_ii(0.1);
        let mut limits = Vec::new();
        for scheme in [AssociationScheme::gca(), AssociationScheme::mrpa(), AssociationScheme::nba()] {
            let a = CoverageAnalyzer::new(&scheme, &net).unwrap();
            let r = energy_from(&a, Bound::Upper, VoidModel::NoVoid).unwrap();
            let closed = link_ee_upper_limit(&a);
            assert!((r.link_ee - closed).abs() < 1e-7 * closed, "{}: {} vs {}", scheme.label(), r.link_ee, closed);
            limits.push(closed);
        }
        assert!((limits[0] - limits[1]).abs() < 1e-12 && (limits[0] - limits[2]).abs() < 1e-12);
    }

    #[test]
    fn mrpa_efficiency_is_tier_independent() {
        let r = link_ee_mrpa(&NetworkConfig::table_ii(370e-6), Bound::Lower).unwrap();
        let c = &r.spectral_efficiency;
        assert!(c.iter().all(|v| (v - c[0]).abs() < 1e-9 * c[0]));
    }

    #[test]
    fn scaling_consumption_lowers_efficiency() {
        let net = NetworkConfig::table_ii(370e-6);
        let base = link_ee_gca(&net, Bound::Lower).unwrap().link_ee;
        let scaled: Vec<_> = net
            .tiers()
            .iter()
            .map(|t| crate::model::TierConfig::new(t.intensity, t.tx_power, 2.0 * t.active_hw_power + t.power_scale * t.tx_power, t.dormant_power, t.power_scale))
            .collect();
        let net2 = net.with_tiers(scaled).unwrap();
        let r = link_ee_gca(&net2, Bound::Lower).unwrap().link_ee;
        assert!((r - base / 2.0).abs() < 1e-9 * base);
    }

    #[test]
    fn shadowing_only_below_full_gain() {
        let net = NetworkConfig::table_ii(370e-6);
        let s = link_ee_gca_shadowing(&net).unwrap().link_ee;
        let g = link_ee_gca(&net, Bound::Lower).unwrap().link_ee;
        assert!(s <= g);
        let det = net.with_channel(ChannelModel::lognormal(3.0)).unwrap();
        assert!(matches!(link_ee_gca_shadowing(&det), Err(Error::Unsupported(_))));
    }

    #[test]
    fn lower_below_upper() {
        let net = NetworkConfig::table_ii(200e-6).with_channel(ChannelModel::rayleigh()).unwrap();
        let lo = link_ee_gca(&net, Bound::Lower).unwrap();
        let hi = link_ee_gca(&net, Bound::Upper).unwrap();
        assert!(lo.link_ee <= hi.link_ee);
    }
}
