//! Green coverage probability.
//!
//! For a power-law scheme the typical link can be written in a normalised
//! form: serving BSs and interferers are mapped by their bias and observed
//! gain, and the normalised interference `W = I ‖B*‖^α / c*` has Laplace
//! transform
//!
//! ```text
//! G(z) = 1 / (1 + Σ_m (1 - p_m) ϑ_m κ(z w_m))
//! ```
//!
//! with `w_m = P_m / c_m` and a kernel `κ` fixed by the part of the gain the
//! scheme observes: `ħ` when it observes the whole gain, `ℓ` when it observes
//! shadowing only under Rayleigh fading, and `E_H[ħ(x H)]` when it observes
//! nothing. A tier-`k` link meets the threshold `τ_k = 2^{η Υ_k} - 1` with
//! probability `P[W ≤ w_k G_k / τ_k]`, obtained by numerical Laplace
//! inversion (or in closed form for the shadowing-only case).
//!
//! Void BSs are removed by independent thinning with the void probability,
//! which yields the tight lower bound. Replacing the kernel by its large
//! argument asymptote `A x^{2/α} - 1` yields the upper bound.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::association::{tier_stats, AssociationScheme, GainUsage, TierStats};
use crate::error::{Error, Result};
use crate::model::NetworkConfig;
use crate::specfun::{ell_complex, gamma, hbar_complex, inverse_laplace_cdf, GainNodes, IltSpec};

/// Which analytic bound to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    Lower,
    Upper,
}

/// How dormant (void) BSs enter the interference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VoidModel {
    /// Thin each tier by its void probability.
    Analytic,
    /// Every BS transmits: the limit of infinite user intensity.
    NoVoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct CoverageDiagnostics {
    pub inversions: usize,
    /// Largest weighted disagreement between the two inversion passes.
    pub max_error_estimate: f64,
    /// Inversions whose raw value left `[0, 1]`.
    pub clamped: usize,
}

impl CoverageDiagnostics {
    fn merge(&mut self, other: &CoverageDiagnostics) {
        self.inversions += other.inversions;
        self.max_error_estimate = self.max_error_estimate.max(other.max_error_estimate);
        self.clamped += other.clamped;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageResult {
    pub rho: f64,
    /// `ϑ_k ρ_k`; sums to `rho`.
    pub per_tier: Vec<f64>,
    pub diagnostics: CoverageDiagnostics,
}

/// Stop the expectation over the signal gain once the remaining probability
/// mass times the current conditional coverage falls below this.
const TAIL_CUTOFF: f64 = 1e-12;
const NEGLIGIBLE_INTERFERENCE: f64 = 1e-100;

/// Cached per-network quantities for one scheme.
#[derive(Debug, Clone)]
pub struct CoverageAnalyzer {
    network: NetworkConfig,
    scheme: AssociationScheme,
    usage: GainUsage,
    stats: Vec<TierStats>,
    weights: Vec<f64>,
    exponent: f64,
    /// Law of the signal gain left unobserved by the association rule.
    signal_nodes: GainNodes,
    /// Law over which the kernel of a path-loss-only scheme is averaged.
    interferer_nodes: GainNodes,
    ilt: IltSpec,
}

impl CoverageAnalyzer {
    pub fn new(scheme: &AssociationScheme, network: &NetworkConfig) -> Result<Self> {
        let stats = tier_stats(scheme, network)?;
        let channel = network.channel();
        let usage = scheme.effective_usage(channel);
        let (signal_nodes, interferer_nodes) = match usage {
            GainUsage::None => {
                let interferers =
                    if channel.has_fading() { channel.shadowing_nodes() } else { channel.gain_nodes() };
                (channel.gain_nodes(), interferers)
            }
            _ => (GainNodes::unit(), GainNodes::unit()),
        };
        Ok(CoverageAnalyzer {
            network: network.clone(),
            scheme: scheme.clone(),
            usage,
            weights: (0..network.num_tiers()).map(|k| scheme.weight(network, k)).collect(),
            exponent: network.delta(),
            stats,
            signal_nodes,
            interferer_nodes,
            ilt: IltSpec::default(),
        })
    }

    pub fn with_ilt(mut self, spec: IltSpec) -> Self {
        self.ilt = spec;
        self
    }

    pub fn network(&self) -> &NetworkConfig {
        &self.network
    }

    pub fn scheme(&self) -> &AssociationScheme {
        &self.scheme
    }

    pub fn stats(&self) -> &[TierStats] {
        &self.stats
    }

    /// Gain usage after reduction against the channel.
    pub fn usage(&self) -> GainUsage {
        self.usage
    }

    /// `P_k / c_k` per tier.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn void_probs(&self, void: VoidModel) -> Vec<f64> {
        match void {
            VoidModel::Analytic => self.stats.iter().map(|s| s.void_prob).collect(),
            VoidModel::NoVoid => vec![0.0; self.stats.len()],
        }
    }

    fn uses_ell(&self) -> bool {
        match self.usage {
            GainUsage::ShadowingOnly => true,
            GainUsage::None => self.network.channel().has_fading(),
            GainUsage::Full => false,
        }
    }

    /// Interference kernel `κ(x)`.
    pub fn kernel(&self, x: Complex64) -> Complex64 {
        let y = self.exponent;
        let base = |v: Complex64| if self.uses_ell() { ell_complex(v, y) } else { hbar_complex(v, y) };
        match self.usage {
            GainUsage::None => self.interferer_nodes.iter().map(|(h, w)| base(x * h) * w).sum(),
            _ => base(x),
        }
    }

    /// `A` in the asymptote `κ(x) ≈ A x^{2/α} - 1`.
    pub fn asymptote_factor(&self) -> f64 {
        let y = self.exponent;
        let fading_free = gamma(1.0 - y);
        match self.usage {
            GainUsage::Full => fading_free,
            GainUsage::ShadowingOnly => PI * y / (PI * y).sin(),
            GainUsage::None => {
                fading_free * self.network.channel().frac_moment(y).expect("exponent lies in (0,1)")
            }
        }
    }

    /// Laplace transform of the normalised interference.
    pub fn interference_transform(&self, z: Complex64, void_probs: &[f64]) -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        for (m, s) in self.stats.iter().enumerate() {
            let active = (1.0 - void_probs[m]) * s.association_prob;
            if active > 0.0 {
                acc += active * self.kernel(z * self.weights[m]);
            }
        }
        1.0 / acc
    }

    /// `(d, S)` of the upper-bound transform `1 / (d + A z^{2/α} S)`.
    fn upper_parameters(&self, void_probs: &[f64]) -> (f64, f64) {
        let y = self.exponent;
        let mut d = 0.0;
        let mut spread = 0.0;
        for (m, s) in self.stats.iter().enumerate() {
            d += void_probs[m] * s.association_prob;
            spread += (1.0 - void_probs[m]) * s.association_prob * self.weights[m].powf(y);
        }
        (d, self.asymptote_factor() * spread)
    }

    /// Upper-bound transform.
    pub fn upper_transform(&self, z: Complex64, void_probs: &[f64]) -> Complex64 {
        let (d, a) = self.upper_parameters(void_probs);
        1.0 / (d + a * z.powf(self.exponent))
    }

    /// `P[W ≤ t]` under the chosen bound.
    fn interference_cdf(&self, t: f64, bound: Bound, void_probs: &[f64]) -> Result<(f64, f64, bool)> {
        // Below this level even the algebraic left tail of the upper bound
        // is far below double precision, and the inversion would overflow.
        if t <= NEGLIGIBLE_INTERFERENCE {
            return Ok((0.0, 0.0, false));
        }
        if t.is_infinite() {
            return Ok((1.0, 0.0, false));
        }
        let out = match bound {
            Bound::Lower => inverse_laplace_cdf(|z| self.interference_transform(z, void_probs), t, &self.ilt)?,
            Bound::Upper => {
                let (d, a) = self.upper_parameters(void_probs);
                if a == 0.0 {
                    // Every interferer is dormant.
                    return Ok((1.0, 0.0, false));
                }
                inverse_laplace_cdf(|z| 1.0 / (d + a * z.powf(self.exponent)), t, &self.ilt)?
            }
        };
        Ok((out.value, out.error_estimate, out.clamped))
    }

    /// Coverage of a tier-`k` link at link threshold `tau`.
    fn tier_coverage(
        &self,
        k: usize,
        tau: f64,
        bound: Bound,
        void_probs: &[f64],
    ) -> Result<(f64, CoverageDiagnostics)> {
        let mut diag = CoverageDiagnostics::default();
        if tau <= 0.0 {
            return Ok((1.0, diag));
        }
        if tau.is_infinite() {
            return Ok((0.0, diag));
        }
        let w = self.weights[k];
        match self.usage {
            GainUsage::Full => {
                let (v, err, clamped) = self.interference_cdf(w / tau, bound, void_probs)?;
                diag.inversions = 1;
                diag.max_error_estimate = err;
                diag.clamped = clamped as usize;
                Ok((v, diag))
            }
            GainUsage::ShadowingOnly => {
                // The unobserved unit-mean exponential fading of the serving
                // link turns the coverage into the transform itself.
                let z = Complex64::new(tau / w, 0.0);
                let v = match bound {
                    Bound::Lower => self.interference_transform(z, void_probs).re,
                    Bound::Upper => self.upper_transform(z, void_probs).re.min(1.0),
                };
                Ok((v, diag))
            }
            GainUsage::None => {
                let nodes: Vec<(f64, f64)> = self.signal_nodes.iter().collect();
                let mut below: Vec<f64> = Vec::with_capacity(nodes.len());
                let mut acc = 0.0;
                for &(_, wt) in &nodes {
                    below.push(acc);
                    acc += wt;
                }
                let mut total = 0.0;
                let mut weighted_err = 0.0;
                for (i, &(h, wt)) in nodes.iter().enumerate().rev() {
                    let (v, err, clamped) = self.interference_cdf(w * h / tau, bound, void_probs)?;
                    diag.inversions += 1;
                    diag.clamped += clamped as usize;
                    weighted_err += wt * err;
                    total += wt * v;
                    if v * below[i] < TAIL_CUTOFF {
                        break;
                    }
                }
                diag.max_error_estimate = weighted_err;
                Ok((total.min(1.0), diag))
            }
        }
    }

    fn coverage_with_thresholds<F: Fn(usize) -> f64>(
        &self,
        threshold: F,
        bound: Bound,
        void: VoidModel,
    ) -> Result<CoverageResult> {
        let void_probs = self.void_probs(void);
        let mut per_tier = Vec::with_capacity(self.stats.len());
        let mut diagnostics = CoverageDiagnostics::default();
        for (k, s) in self.stats.iter().enumerate() {
            let (rho_k, d) = self.tier_coverage(k, threshold(k), bound, &void_probs)?;
            if d.max_error_estimate > self.ilt.precision_target {
                return Err(Error::numerical(
                    "green_coverage",
                    format!(
                        "Laplace inversion for tier {k} changed by {:.3e} on refinement (target {:.1e})",
                        d.max_error_estimate, self.ilt.precision_target
                    ),
                ));
            }
            diagnostics.merge(&d);
            per_tier.push(s.association_prob * rho_k);
        }
        Ok(CoverageResult { rho: per_tier.iter().sum::<f64>().min(1.0), per_tier, diagnostics })
    }

    /// `ρ(η)`, the probability that the serving link reaches spectrum
    /// efficiency per watt of at least `eta` (bits/Hz/joule).
    pub fn green_coverage(&self, eta: f64, bound: Bound, void: VoidModel) -> Result<CoverageResult> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::domain("green_coverage", format!("threshold must be finite and > 0, got {eta}")));
        }
        self.coverage_with_thresholds(|k| link_threshold(eta, self.network.tier(k).active_power()), bound, void)
    }

    /// Classical SIR coverage `P[SIR ≥ threshold]`.
    pub fn sir_coverage(&self, threshold: f64, bound: Bound, void: VoidModel) -> Result<CoverageResult> {
        if !(threshold > 0.0 && threshold.is_finite()) {
            return Err(Error::domain("sir_coverage", format!("threshold must be finite and > 0, got {threshold}")));
        }
        self.coverage_with_thresholds(|_| threshold, bound, void)
    }

    /// Closed form of the upper bound when no BS is dormant, before any
    /// clamping to one:
    /// `sin(πy)/(πy) Σ_k ϑ_k (w_k/τ_k)^y / Σ_m ϑ_m w_m^y`, `y = 2/α`.
    pub fn upper_limit_closed_form(&self, eta: f64) -> f64 {
        let y = self.exponent;
        let spread: f64 = self.stats.iter().zip(&self.weights).map(|(s, w)| s.association_prob * w.powf(y)).sum();
        let sum: f64 = self
            .stats
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let tau = link_threshold(eta, self.network.tier(k).active_power());
                s.association_prob * (self.weights[k] / tau).powf(y)
            })
            .sum();
        (PI * y).sin() / (PI * y) * sum / spread
    }
}

/// `2^{η Υ} - 1`.
pub fn link_threshold(eta: f64, active_power: f64) -> f64 {
    (eta * active_power * std::f64::consts::LN_2).exp_m1()
}

fn analyze(scheme: AssociationScheme, network: &NetworkConfig, eta: f64, bound: Bound) -> Result<f64> {
    Ok(CoverageAnalyzer::new(&scheme, network)?.green_coverage(eta, bound, VoidModel::Analytic)?.rho)
}

/// Tight lower bound on the GCA green coverage probability.
pub fn rho_gca_lower(network: &NetworkConfig, eta: f64) -> Result<f64> {
    analyze(AssociationScheme::gca(), network, eta, Bound::Lower)
}

/// Upper bound on the GCA green coverage probability.
pub fn rho_gca_upper(network: &NetworkConfig, eta: f64) -> Result<f64> {
    analyze(AssociationScheme::gca(), network, eta, Bound::Upper)
}

/// Lower bound for GCA that observes shadowing only; needs Rayleigh fading.
pub fn rho_gca_shadowing(network: &NetworkConfig, eta: f64) -> Result<f64> {
    if !network.channel().has_fading() {
        return Err(Error::Unsupported("shadowing-only association analysis requires Rayleigh fading".into()));
    }
    analyze(AssociationScheme::gca_shadowing(), network, eta, Bound::Lower)
}

pub fn rho_mrpa(network: &NetworkConfig, eta: f64, bound: Bound) -> Result<f64> {
    analyze(AssociationScheme::mrpa(), network, eta, bound)
}

pub fn rho_nba(network: &NetworkConfig, eta: f64, bound: Bound) -> Result<f64> {
    analyze(AssociationScheme::nba(), network, eta, bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ChannelModel, TierConfig};

    fn single_tier(channel: ChannelModel) -> NetworkConfig {
        let tier = TierConfig::new(1e-5, 1.0, 0.0, 0.0, 2.0);
        NetworkConfig::new(vec![tier], 4.0, 0.0, channel).unwrap()
    }

    #[test]
    fn shadowing_only_single_tier_quarter_pi() {
        // Threshold chosen so that 2^{ηΥ} - 1 = 1.
        let net = single_tier(ChannelModel::rayleigh_lognormal(3.0));
        let a = CoverageAnalyzer::new(&AssociationScheme::custom(vec![1.0], GainUsage::ShadowingOnly), &net).unwrap();
        let eta = 1.0 / net.tier(0).active_power();
        let r = a.green_coverage(eta, Bound::Lower, VoidModel::NoVoid).unwrap();
        assert!((r.rho - 1.0 / (1.0 + PI / 4.0)).abs() < 1e-12);
    }

    #[test]
    fn per_tier_sums_to_total() {
        let net = NetworkConfig::table_ii(100e-6);
        let a = CoverageAnalyzer::new(&AssociationScheme::gca(), &net).unwrap();
        let r = a.green_coverage(0.1, Bound::Lower, VoidModel::Analytic).unwrap();
        assert!((r.per_tier.iter().sum::<f64>() - r.rho).abs() < 1e-15);
        assert_eq!(r.diagnostics.inversions, 3);
    }

    #[test]
    fn threshold_limits() {
        let net = NetworkConfig::table_ii(100e-6);
        let a = CoverageAnalyzer::new(&AssociationScheme::mrpa(), &net).unwrap();
        assert!(a.green_coverage(1e-6, Bound::Lower, VoidModel::Analytic).unwrap().rho > 0.999);
        assert!(a.green_coverage(50.0, Bound::Lower, VoidModel::Analytic).unwrap().rho < 1e-9);
        assert!(a.green_coverage(0.0, Bound::Lower, VoidModel::Analytic).is_err());
    }

    #[test]
    fn shadowing_scheme_needs_fading() {
        let net = NetworkConfig::table_ii(0.0).with_channel(ChannelModel::lognormal(3.0)).unwrap();
        assert!(matches!(rho_gca_shadowing(&net, 0.1), Err(Error::Unsupported(_))));
    }
}
