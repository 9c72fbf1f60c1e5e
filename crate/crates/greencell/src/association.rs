//! Association-layer statistics.
//!
//! Every named scheme is a power-law association function
//! `Ψ_k(x) = c_k G x^{-α}`: a deterministic per-tier bias `c_k` times the part
//! `G` of the channel gain the scheme observes. From the fractional moments
//! of `c_k G` follow the tier association probabilities, the gamma-shaped
//! cell-load law and the void-cell probabilities.
//!
//! Arbitrary monotone association functions are handled by
//! [`general_association_probs`] and [`general_distance_cdf`], which integrate
//! the defining expressions numerically.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ChannelModel, NetworkConfig};
use crate::specfun::{integrate, ln_gamma, Domain, GainNodes};

/// Shape of the gamma law for a Voronoi cell area under a deterministic
/// association function.
pub const VORONOI_SHAPE: f64 = 3.5;

/// Per-tier bias rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    /// Received power per watt of active-mode consumption, `c_k = P_k / Υ_k^on`.
    Gca,
    /// Maximum received power, `c_k = P_k`.
    Mrpa,
    /// Nearest base station, `c_k = 1`.
    Nba,
    /// User-supplied per-tier biases.
    Custom(Vec<f64>),
}

/// Which part of the link gain enters the association decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GainUsage {
    /// Fading and shadowing.
    Full,
    /// Shadowing only; the fading realisation is unknown at association time.
    ShadowingOnly,
    /// Path loss and bias only.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssociationScheme {
    pub kind: SchemeKind,
    pub gain_usage: GainUsage,
}

impl AssociationScheme {
    pub fn gca() -> Self {
        AssociationScheme { kind: SchemeKind::Gca, gain_usage: GainUsage::Full }
    }

    /// GCA that sees only the shadowing gain.
    pub fn gca_shadowing() -> Self {
        AssociationScheme { kind: SchemeKind::Gca, gain_usage: GainUsage::ShadowingOnly }
    }

    pub fn mrpa() -> Self {
        AssociationScheme { kind: SchemeKind::Mrpa, gain_usage: GainUsage::Full }
    }

    pub fn nba() -> Self {
        AssociationScheme { kind: SchemeKind::Nba, gain_usage: GainUsage::None }
    }

    pub fn custom(biases: Vec<f64>, gain_usage: GainUsage) -> Self {
        AssociationScheme { kind: SchemeKind::Custom(biases), gain_usage }
    }

    /// Short identifier used in CSV output.
    pub fn label(&self) -> String {
        let base = match self.kind {
            SchemeKind::Gca => "gca",
            SchemeKind::Mrpa => "mrpa",
            SchemeKind::Nba => "nba",
            SchemeKind::Custom(_) => "custom",
        };
        let named_usage = match self.kind {
            SchemeKind::Nba => GainUsage::None,
            _ => GainUsage::Full,
        };
        match self.gain_usage {
            u if u == named_usage => base.to_string(),
            GainUsage::Full => format!("{base}-full"),
            GainUsage::ShadowingOnly => format!("{base}-shadowing"),
            GainUsage::None => format!("{base}-pathloss"),
        }
    }

    pub fn validate(&self, network: &NetworkConfig) -> Result<()> {
        if let SchemeKind::Custom(b) = &self.kind {
            if b.len() != network.num_tiers() {
                return Err(Error::Config(format!(
                    "custom scheme has {} biases for {} tiers",
                    b.len(),
                    network.num_tiers()
                )));
            }
            if let Some(bad) = b.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
                return Err(Error::Config(format!("custom bias must be finite and > 0, got {bad}")));
            }
        }
        Ok(())
    }

    /// Deterministic bias `c_k`.
    pub fn bias(&self, network: &NetworkConfig, k: usize) -> f64 {
        let tier = network.tier(k);
        match &self.kind {
            SchemeKind::Gca => tier.tx_power / tier.active_power(),
            SchemeKind::Mrpa => tier.tx_power,
            SchemeKind::Nba => 1.0,
            SchemeKind::Custom(b) => b[k],
        }
    }

    /// Ratio `P_k / c_k` of transmit power to bias. A tier-`m` interferer seen
    /// from a tier-`k` link scales with `weight(m) / weight(k)`.
    pub fn weight(&self, network: &NetworkConfig, k: usize) -> f64 {
        network.tier(k).tx_power / self.bias(network, k)
    }

    /// The gain usage reduced to its simplest equivalent on `channel`:
    /// shadowing-only association without fading observes the whole gain, and
    /// without shadowing it observes nothing.
    pub fn effective_usage(&self, channel: &ChannelModel) -> GainUsage {
        match self.gain_usage {
            GainUsage::ShadowingOnly if !channel.has_fading() => GainUsage::Full,
            GainUsage::ShadowingOnly if !channel.has_shadowing() => GainUsage::None,
            GainUsage::Full if channel.is_deterministic() => GainUsage::None,
            u => u,
        }
    }

    /// `E[G^t]` for the observed gain `G`.
    pub fn observed_gain_moment(&self, channel: &ChannelModel, t: f64) -> Result<f64> {
        match self.effective_usage(channel) {
            GainUsage::Full => channel.frac_moment(t),
            GainUsage::ShadowingOnly => channel.shadowing_frac_moment(t),
            GainUsage::None => {
                channel.frac_moment(t)?;
                Ok(1.0)
            }
        }
    }

    /// Expectation nodes for the observed gain `G`.
    pub fn observed_gain_nodes(&self, channel: &ChannelModel) -> GainNodes {
        match self.effective_usage(channel) {
            GainUsage::Full => channel.gain_nodes(),
            GainUsage::ShadowingOnly => channel.shadowing_nodes(),
            GainUsage::None => GainNodes::unit(),
        }
    }
}

impl std::str::FromStr for AssociationScheme {
    type Err = Error;

    /// Parses the labels produced by [`AssociationScheme::label`] for the
    /// named schemes, such as `gca`, `gca-shadowing` or `mrpa-pathloss`.
    fn from_str(s: &str) -> Result<Self> {
        let (base, usage) = match s.split_once('-') {
            Some((b, u)) => (b, Some(u)),
            None => (s, None),
        };
        let kind = match base {
            "gca" => SchemeKind::Gca,
            "mrpa" => SchemeKind::Mrpa,
            "nba" => SchemeKind::Nba,
            _ => return Err(Error::Config(format!("unknown scheme '{s}' (expected gca, mrpa or nba with an optional -full, -shadowing or -pathloss suffix)"))),
        };
        let gain_usage = match usage {
            None if kind == SchemeKind::Nba => GainUsage::None,
            None | Some("full") => GainUsage::Full,
            Some("shadowing") => GainUsage::ShadowingOnly,
            Some("pathloss") => GainUsage::None,
            Some(other) => return Err(Error::Config(format!("unknown gain usage '{other}' in scheme '{s}'"))),
        };
        Ok(AssociationScheme { kind, gain_usage })
    }
}

/// `E[ψ_k^t]` with `ψ_k = c_k G`.
///
/// # Example
///
/// ```
/// use greencell::association::{bias_moments, AssociationScheme};
/// use greencell::model::{ChannelModel, NetworkConfig};
/// let net = NetworkConfig::table_ii(0.0).with_channel(ChannelModel::DETERMINISTIC).unwrap();
/// let m = bias_moments(&AssociationScheme::gca(), &net, 0, 0.5).unwrap();
/// assert!((m - (40.0f64 / 331.5).sqrt()).abs() < 1e-12);
/// ```
pub fn bias_moments(scheme: &AssociationScheme, network: &NetworkConfig, k: usize, t: f64) -> Result<f64> {
    scheme.validate(network)?;
    if k >= network.num_tiers() {
        return Err(Error::domain("bias_moments", format!("tier {k} out of range")));
    }
    Ok(scheme.bias(network, k).powf(t) * scheme.observed_gain_moment(network.channel(), t)?)
}

/// Per-tier association and load statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TierStats {
    /// Probability that the typical user is served by this tier.
    pub association_prob: f64,
    /// `λ_k / ϑ_k`, BS per m².
    pub equivalent_intensity: f64,
    /// Gamma shape of the association-region area.
    pub shape: f64,
    /// Mean users per BS.
    pub mean_load: f64,
    pub void_prob: f64,
}

impl TierStats {
    /// Negative-binomial probability of exactly `n` users, in log space.
    pub fn load_pmf(&self, user_intensity: f64, n: u64) -> f64 {
        if user_intensity == 0.0 {
            return if n == 0 { 1.0 } else { 0.0 };
        }
        let zl = self.shape * self.equivalent_intensity;
        let nf = n as f64;
        let ln_p = ln_gamma(nf + self.shape) - ln_gamma(nf + 1.0) - ln_gamma(self.shape)
            + nf * (user_intensity / zl).ln()
            + (nf + self.shape) * (zl / (zl + user_intensity)).ln();
        ln_p.exp()
    }
}

fn void_prob(user_intensity: f64, shape: f64, equivalent_intensity: f64) -> f64 {
    (1.0 + user_intensity / (shape * equivalent_intensity)).powf(-shape)
}

/// Association statistics for every tier.
pub fn tier_stats(scheme: &AssociationScheme, network: &NetworkConfig) -> Result<Vec<TierStats>> {
    scheme.validate(network)?;
    let y = network.delta();
    let channel = network.channel();
    let pos = scheme.observed_gain_moment(channel, y)?;
    let neg = scheme.observed_gain_moment(channel, -y)?;
    let shape = VORONOI_SHAPE * pos * neg;
    let mass: Vec<f64> = (0..network.num_tiers())
        .map(|k| network.tier(k).intensity * scheme.bias(network, k).powf(y) * pos)
        .collect();
    let total: f64 = mass.iter().sum();
    let lu = network.user_intensity();
    Ok(mass
        .iter()
        .enumerate()
        .map(|(k, m)| {
            let lambda = network.tier(k).intensity;
            let theta = m / total;
            let eq = lambda / theta;
            TierStats {
                association_prob: theta,
                equivalent_intensity: eq,
                shape,
                mean_load: lu * theta / lambda,
                void_prob: void_prob(lu, shape, eq),
            }
        })
        .collect())
}

/// `ϑ_k` for every tier.
///
/// # Example
///
/// ```
/// use greencell::association::{tier_association_prob, AssociationScheme};
/// use greencell::model::NetworkConfig;
/// let theta = tier_association_prob(&AssociationScheme::nba(), &NetworkConfig::table_ii(0.0)).unwrap();
/// assert!((theta[2] - 50.0 / 61.0).abs() < 1e-12);
/// ```
pub fn tier_association_prob(scheme: &AssociationScheme, network: &NetworkConfig) -> Result<Vec<f64>> {
    Ok(tier_stats(scheme, network)?.iter().map(|s| s.association_prob).collect())
}

/// Probability that a tier-`k` BS carries `n` users.
pub fn cell_load_pmf(scheme: &AssociationScheme, network: &NetworkConfig, k: usize, n: u64) -> Result<f64> {
    let stats = tier_stats(scheme, network)?;
    let s = stats
        .get(k)
        .ok_or_else(|| Error::domain("cell_load_pmf", format!("tier {k} out of range")))?;
    Ok(s.load_pmf(network.user_intensity(), n))
}

/// Mean users per BS in every tier.
pub fn mean_cell_load(scheme: &AssociationScheme, network: &NetworkConfig) -> Result<Vec<f64>> {
    Ok(tier_stats(scheme, network)?.iter().map(|s| s.mean_load).collect())
}

/// Void-cell probability of every tier.
pub fn void_probability(scheme: &AssociationScheme, network: &NetworkConfig) -> Result<Vec<f64>> {
    Ok(tier_stats(scheme, network)?.iter().map(|s| s.void_prob).collect())
}

/// `P[max_j ψ_j ‖B_j‖^{-α} ≤ level]` over all BSs.
pub fn max_assoc_cdf(scheme: &AssociationScheme, network: &NetworkConfig, level: f64) -> Result<f64> {
    if !(level >= 0.0) {
        return Err(Error::domain("max_assoc_cdf", format!("level must be >= 0, got {level}")));
    }
    if level == 0.0 {
        return Ok(0.0);
    }
    let y = network.delta();
    let mut mass = 0.0;
    for k in 0..network.num_tiers() {
        mass += network.tier(k).intensity * bias_moments(scheme, network, k, y)?;
    }
    Ok((-PI * mass * level.powf(-y)).exp())
}

/// CDF of the distance from the typical user to its serving BS.
///
/// # Example
///
/// ```
/// use greencell::association::{assoc_distance_cdf, AssociationScheme};
/// use greencell::model::NetworkConfig;
/// let net = NetworkConfig::table_ii(0.0);
/// let median = (std::f64::consts::LN_2 / (std::f64::consts::PI * net.total_intensity())).sqrt();
/// let f = assoc_distance_cdf(&AssociationScheme::nba(), &net, median).unwrap();
/// assert!((f - 0.5).abs() < 1e-12);
/// ```
pub fn assoc_distance_cdf(scheme: &AssociationScheme, network: &NetworkConfig, x: f64) -> Result<f64> {
    ServingDistance::new(scheme, network)?.cdf(x)
}

/// Serving-distance law with its gain nodes precomputed, for repeated
/// evaluation.
#[derive(Debug, Clone)]
pub struct ServingDistance {
    /// `(λ_k (c_k g)^y / Σ, (c_k g)^y)` pairs weighted by the node weight.
    terms: Vec<(f64, f64)>,
    total: f64,
}

impl ServingDistance {
    pub fn new(scheme: &AssociationScheme, network: &NetworkConfig) -> Result<Self> {
        scheme.validate(network)?;
        let y = network.delta();
        let pos = scheme.observed_gain_moment(network.channel(), y)?;
        let total: f64 = (0..network.num_tiers())
            .map(|k| network.tier(k).intensity * scheme.bias(network, k).powf(y) * pos)
            .sum();
        let nodes = scheme.observed_gain_nodes(network.channel());
        let mut terms = Vec::with_capacity(network.num_tiers() * nodes.len());
        for k in 0..network.num_tiers() {
            let c = scheme.bias(network, k);
            let lambda = network.tier(k).intensity;
            for (g, w) in nodes.iter() {
                let p = (c * g).powf(y);
                terms.push((w * lambda * p / total, p));
            }
        }
        Ok(ServingDistance { terms, total })
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::domain("assoc_distance_cdf", format!("distance must be >= 0, got {x}")));
        }
        let area = PI * self.total * x * x;
        let cdf: f64 = self.terms.iter().map(|&(share, p)| share * -(-area / p).exp_m1()).sum();
        Ok(cdf.clamp(0.0, 1.0))
    }
}

/// A monotone decreasing association function with random marks.
pub trait AssociationFunction: Sync {
    /// `Ψ(x)` for a given mark.
    fn value(&self, mark: f64, distance: f64) -> f64;
    /// Distance at which `Ψ` equals `level` for a given mark.
    fn inverse(&self, mark: f64, level: f64) -> f64;
    /// Law of the mark; a single unit node for deterministic functions.
    fn marks(&self) -> GainNodes;
}

/// `Ψ(x) = bias · mark · x^{-α}`.
#[derive(Debug, Clone)]
pub struct PowerLaw {
    pub bias: f64,
    pub alpha: f64,
    pub marks: GainNodes,
}

impl AssociationFunction for PowerLaw {
    fn value(&self, mark: f64, distance: f64) -> f64 {
        self.bias * mark * distance.powf(-self.alpha)
    }

    fn inverse(&self, mark: f64, level: f64) -> f64 {
        (self.bias * mark / level).powf(1.0 / self.alpha)
    }

    fn marks(&self) -> GainNodes {
        self.marks.clone()
    }
}

impl PowerLaw {
    /// The association functions of `scheme` on `network`, one per tier.
    pub fn for_scheme(scheme: &AssociationScheme, network: &NetworkConfig) -> Result<Vec<PowerLaw>> {
        scheme.validate(network)?;
        let marks = scheme.observed_gain_nodes(network.channel());
        Ok((0..network.num_tiers())
            .map(|k| PowerLaw { bias: scheme.bias(network, k), alpha: network.pathloss_exponent(), marks: marks.clone() })
            .collect())
    }
}

fn check_general(functions: &[&dyn AssociationFunction], intensities: &[f64]) -> Result<f64> {
    if functions.is_empty() || functions.len() != intensities.len() {
        return Err(Error::Config("one association function and intensity per tier required".into()));
    }
    if intensities.iter().any(|l| !(*l > 0.0)) {
        return Err(Error::Config("intensities must be > 0".into()));
    }
    for f in functions {
        let (mark, _) = f.marks().iter().next_back().expect("mark law has nodes");
        let a = f.value(mark, 1.0);
        let b = f.value(mark, 2.0);
        let c = f.value(mark, 4.0);
        if !(a > b && b > c) {
            return Err(Error::Unsupported("association function is not monotone decreasing".into()));
        }
    }
    // Typical nearest-neighbour distance, used to scale the radial integral.
    Ok(1.0 / (PI * intensities.iter().sum::<f64>()).sqrt())
}

/// Mean number of points, over all tiers, whose association value exceeds
/// `level`, divided by `π`.
fn exceedance(functions: &[&dyn AssociationFunction], marks: &[GainNodes], intensities: &[f64], level: f64) -> f64 {
    functions
        .iter()
        .zip(marks)
        .zip(intensities)
        .map(|((f, m), l)| l * m.expect(|mark| f.inverse(mark, level).powi(2)))
        .sum()
}

/// Tier association probabilities for arbitrary monotone association
/// functions, by radial quadrature over the serving distance.
pub fn general_association_probs(functions: &[&dyn AssociationFunction], intensities: &[f64]) -> Result<Vec<f64>> {
    let scale = check_general(functions, intensities)?;
    let all_marks: Vec<GainNodes> = functions.iter().map(|f| f.marks()).collect();
    let mut probs = Vec::with_capacity(functions.len());
    for ((f, lambda), marks) in functions.iter().zip(intensities).zip(&all_marks) {
        let integral = integrate(
            |u| {
                let r = scale * u;
                marks.expect(|mark| {
                    let level = f.value(mark, r);
                    (-PI * exceedance(functions, &all_marks, intensities, level)).exp()
                }) * 2.0
                    * PI
                    * lambda
                    * r
                    * scale
            },
            Domain::SemiInfinite(0.0),
            1e-10,
        )?;
        probs.push(integral.value);
    }
    Ok(probs)
}

/// Serving-distance CDF for deterministic monotone association functions.
pub fn general_distance_cdf(functions: &[&dyn AssociationFunction], intensities: &[f64], x: f64) -> Result<f64> {
    check_general(functions, intensities)?;
    if functions.iter().any(|f| f.marks().len() != 1) {
        return Err(Error::Unsupported("distance CDF requires deterministic association functions".into()));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let probs = general_association_probs(functions, intensities)?;
    let all_marks: Vec<GainNodes> = functions.iter().map(|f| f.marks()).collect();
    let mut tail = 0.0;
    for (f, theta) in functions.iter().zip(&probs) {
        let (mark, _) = f.marks().iter().next().expect("one node");
        let level = f.value(mark, x);
        tail += theta * (-PI * exceedance(functions, &all_marks, intensities, level)).exp();
    }
    Ok(1.0 - tail)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_round_trip() {
        for s in [AssociationScheme::gca(), AssociationScheme::gca_shadowing(), AssociationScheme::mrpa(), AssociationScheme::nba()] {
            assert_eq!(s.label().parse::<AssociationScheme>().unwrap(), s);
        }
        let p: AssociationScheme = "gca-pathloss".parse().unwrap();
        assert_eq!(p.gain_usage, GainUsage::None);
        assert!("max-sinr".parse::<AssociationScheme>().is_err());
    }

    #[test]
    fn labels() {
        assert_eq!(AssociationScheme::gca().label(), "gca");
        assert_eq!(AssociationScheme::gca_shadowing().label(), "gca-shadowing");
        assert_eq!(AssociationScheme::nba().label(), "nba");
        assert_eq!(AssociationScheme::custom(vec![1.0], GainUsage::None).label(), "custom-pathloss");
        assert_eq!(AssociationScheme::mrpa().label(), "mrpa");
    }

    #[test]
    fn usage_normalisation() {
        let s = AssociationScheme::gca_shadowing();
        assert_eq!(s.effective_usage(&ChannelModel::lognormal(3.0)), GainUsage::Full);
        assert_eq!(s.effective_usage(&ChannelModel::rayleigh()), GainUsage::None);
        assert_eq!(s.effective_usage(&ChannelModel::rayleigh_lognormal(3.0)), GainUsage::ShadowingOnly);
    }

    #[test]
    fn nba_load_and_void() {
        let net = NetworkConfig::table_ii(370e-6);
        let stats = tier_stats(&AssociationScheme::nba(), &net).unwrap();
        for s in &stats {
            assert_eq!(s.shape, VORONOI_SHAPE);
            assert!((s.mean_load - 370.0 / 61.0).abs() < 1e-9);
            let expected = (1.0f64 + 370.0 / (3.5 * 61.0)).powf(-3.5);
            assert!((s.void_prob - expected).abs() < 1e-12);
            assert!((s.load_pmf(370e-6, 0) - s.void_prob).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_users_means_all_void() {
        let net = NetworkConfig::table_ii(0.0);
        for p in void_probability(&AssociationScheme::gca(), &net).unwrap() {
            assert_eq!(p, 1.0);
        }
    }

    #[test]
    fn custom_bias_count_checked() {
        let net = NetworkConfig::table_ii(0.0);
        let s = AssociationScheme::custom(vec![1.0, 2.0], GainUsage::Full);
        assert!(tier_stats(&s, &net).is_err());
    }
}
