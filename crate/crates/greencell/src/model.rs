//! Network, channel and power-consumption model.
//!
//! Intensities are stored per square metre. The JSON file format uses
//! per-square-kilometre values because that is how deployments are usually
//! quoted; [`NetworkFile`] performs the conversion.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{gamma, GainNodes};

/// Square metres per square kilometre.
pub const M2_PER_KM2: f64 = 1.0e6;

/// One tier of base stations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TierConfig {
    /// BS intensity in BS per m².
    pub intensity: f64,
    /// Transmit power in watt.
    pub tx_power: f64,
    /// Hardware power drawn while active, in watt.
    pub active_hw_power: f64,
    /// Power drawn while dormant (void), in watt.
    pub dormant_power: f64,
    /// Scaling applied to the transmit power in the active power budget.
    pub power_scale: f64,
}

impl TierConfig {
    pub fn new(
        intensity: f64,
        tx_power: f64,
        active_hw_power: f64,
        dormant_power: f64,
        power_scale: f64,
    ) -> Self {
        TierConfig { intensity, tx_power, active_hw_power, dormant_power, power_scale }
    }

    /// Total active-mode consumption `P_on + ω·P` in watt.
    pub fn active_power(&self) -> f64 {
        self.active_hw_power + self.power_scale * self.tx_power
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.intensity,
            self.tx_power,
            self.active_hw_power,
            self.dormant_power,
            self.power_scale,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Config("tier parameters must be finite".into()));
        }
        if self.intensity <= 0.0 {
            return Err(Error::Config(format!("BS intensity must be > 0, got {}", self.intensity)));
        }
        if self.tx_power <= 0.0 {
            return Err(Error::Config(format!("transmit power must be > 0, got {}", self.tx_power)));
        }
        if self.active_hw_power < 0.0 || self.dormant_power < 0.0 {
            return Err(Error::Config("hardware and dormant powers must be >= 0".into()));
        }
        if self.power_scale <= 1.0 {
            return Err(Error::Config(format!(
                "power scaling factor must be > 1, got {}",
                self.power_scale
            )));
        }
        let on = self.active_power();
        if on <= 1.0 {
            return Err(Error::Config(format!("active power consumption must be > 1 W, got {on}")));
        }
        if self.dormant_power > on {
            return Err(Error::Config(format!(
                "dormant power {} exceeds active power {on}",
                self.dormant_power
            )));
        }
        Ok(())
    }
}

/// `P_on + ω·P` for one tier.
pub fn active_power(tier: &TierConfig) -> f64 {
    tier.active_power()
}

/// Small-scale fading power law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fading {
    None,
    /// Unit-mean exponential power gain (Rayleigh amplitude).
    Exponential,
}

/// Large-scale shadowing law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Shadowing {
    None,
    /// Zero-mean log-normal shadowing with the given standard deviation in dB.
    LogNormal { sigma_db: f64 },
}

/// Composite channel power gain `H = H_f · Q`, i.i.d. across links.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    pub fading: Fading,
    pub shadowing: Shadowing,
}

impl ChannelModel {
    pub const DETERMINISTIC: ChannelModel =
        ChannelModel { fading: Fading::None, shadowing: Shadowing::None };

    pub fn rayleigh() -> Self {
        ChannelModel { fading: Fading::Exponential, shadowing: Shadowing::None }
    }

    pub fn rayleigh_lognormal(sigma_db: f64) -> Self {
        ChannelModel { fading: Fading::Exponential, shadowing: Shadowing::LogNormal { sigma_db } }
    }

    pub fn lognormal(sigma_db: f64) -> Self {
        ChannelModel { fading: Fading::None, shadowing: Shadowing::LogNormal { sigma_db } }
    }

    /// Natural-log standard deviation of the shadowing, zero without shadowing.
    pub fn shadowing_sigma(&self) -> f64 {
        match self.shadowing {
            Shadowing::None => 0.0,
            Shadowing::LogNormal { sigma_db } => sigma_db * std::f64::consts::LN_10 / 10.0,
        }
    }

    pub fn has_fading(&self) -> bool {
        self.fading == Fading::Exponential
    }

    pub fn has_shadowing(&self) -> bool {
        self.shadowing_sigma() > 0.0
    }

    pub fn is_deterministic(&self) -> bool {
        !self.has_fading() && !self.has_shadowing()
    }

    /// `E[H_f^t]`.
    pub fn fading_frac_moment(&self, t: f64) -> Result<f64> {
        check_moment_order(t)?;
        Ok(match self.fading {
            Fading::None => 1.0,
            Fading::Exponential => gamma(1.0 + t),
        })
    }

    /// `E[Q^t]`.
    pub fn shadowing_frac_moment(&self, t: f64) -> Result<f64> {
        check_moment_order(t)?;
        let s = self.shadowing_sigma();
        Ok((0.5 * t * t * s * s).exp())
    }

    /// `E[H^t]` for the composite gain.
    pub fn frac_moment(&self, t: f64) -> Result<f64> {
        Ok(self.fading_frac_moment(t)? * self.shadowing_frac_moment(t)?)
    }

    /// Expectation nodes for the composite gain `H`.
    pub fn gain_nodes(&self) -> GainNodes {
        let s = self.shadowing_sigma();
        match self.fading {
            Fading::None => GainNodes::lognormal(s),
            Fading::Exponential => GainNodes::exponential_lognormal(s),
        }
    }

    /// Expectation nodes for the shadowing factor `Q` alone.
    pub fn shadowing_nodes(&self) -> GainNodes {
        GainNodes::lognormal(self.shadowing_sigma())
    }

    pub fn validate(&self) -> Result<()> {
        if let Shadowing::LogNormal { sigma_db } = self.shadowing {
            if !(sigma_db.is_finite() && sigma_db >= 0.0) {
                return Err(Error::Config(format!(
                    "shadowing standard deviation must be finite and >= 0 dB, got {sigma_db}"
                )));
            }
        }
        Ok(())
    }
}

fn check_moment_order(t: f64) -> Result<()> {
    if !(t.abs() < 1.0) {
        return Err(Error::domain("gain_frac_moment", format!("|t| must be < 1, got {t}")));
    }
    Ok(())
}

/// `E[H^t]` for `|t| < 1`.
pub fn gain_frac_moment(channel: &ChannelModel, t: f64) -> Result<f64> {
    channel.frac_moment(t)
}

/// A validated K-tier network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    tiers: Vec<TierConfig>,
    alpha: f64,
    user_intensity: f64,
    channel: ChannelModel,
}

impl NetworkConfig {
    pub fn new(
        tiers: Vec<TierConfig>,
        pathloss_exponent: f64,
        user_intensity: f64,
        channel: ChannelModel,
    ) -> Result<Self> {
        let net = NetworkConfig { tiers, alpha: pathloss_exponent, user_intensity, channel };
        net.validate()?;
        Ok(net)
    }

    fn validate(&self) -> Result<()> {
        if self.tiers.is_empty() {
            return Err(Error::Config("at least one tier is required".into()));
        }
        for (k, t) in self.tiers.iter().enumerate() {
            t.validate().map_err(|e| Error::Config(format!("tier {}: {e}", k + 1)))?;
        }
        if !(self.alpha.is_finite() && self.alpha > 2.0) {
            return Err(Error::Config(format!(
                "pathloss exponent must satisfy alpha > 2, got {}",
                self.alpha
            )));
        }
        if !(self.user_intensity.is_finite() && self.user_intensity >= 0.0) {
            return Err(Error::Config(format!(
                "user intensity must be finite and >= 0, got {}",
                self.user_intensity
            )));
        }
        self.channel.validate()
    }

    /// The reference three-tier macro/pico/femto network (preset `table2`)
    /// with Rayleigh fading and 3 dB log-normal shadowing, at the given user
    /// intensity (per m²).
    pub fn table_ii(user_intensity: f64) -> Self {
        let l1 = 1.0e-6;
        NetworkConfig::new(
            vec![
                TierConfig::new(l1, 40.0, 118.7, 93.0, 5.32),
                TierConfig::new(10.0 * l1, 1.0, 6.8, 4.3, 4.0),
                TierConfig::new(50.0 * l1, 0.05, 4.8, 2.9, 7.5),
            ],
            4.0,
            user_intensity,
            ChannelModel::rayleigh_lognormal(3.0),
        )
        .expect("reference parameters are valid")
    }

    /// The reference network with macro power scale 2.66 and femto transmit
    /// power 0.5 W (preset `fig1_caption`).
    pub fn fig1_caption(user_intensity: f64) -> Self {
        let mut tiers = NetworkConfig::table_ii(user_intensity).tiers;
        tiers[0].power_scale = 2.66;
        tiers[2].tx_power = 0.5;
        NetworkConfig::new(tiers, 4.0, user_intensity, ChannelModel::rayleigh_lognormal(3.0))
            .expect("caption parameters are valid")
    }

    pub fn tiers(&self) -> &[TierConfig] {
        &self.tiers
    }

    pub fn tier(&self, k: usize) -> &TierConfig {
        &self.tiers[k]
    }

    pub fn num_tiers(&self) -> usize {
        self.tiers.len()
    }

    pub fn pathloss_exponent(&self) -> f64 {
        self.alpha
    }

    /// `2/α`, the exponent that appears throughout the analysis.
    pub fn delta(&self) -> f64 {
        2.0 / self.alpha
    }

    pub fn user_intensity(&self) -> f64 {
        self.user_intensity
    }

    pub fn channel(&self) -> &ChannelModel {
        &self.channel
    }

    pub fn total_intensity(&self) -> f64 {
        self.tiers.iter().map(|t| t.intensity).sum()
    }

    pub fn active_powers(&self) -> Vec<f64> {
        self.tiers.iter().map(TierConfig::active_power).collect()
    }

    pub fn with_user_intensity(&self, user_intensity: f64) -> Result<Self> {
        NetworkConfig::new(self.tiers.clone(), self.alpha, user_intensity, self.channel)
    }

    pub fn with_channel(&self, channel: ChannelModel) -> Result<Self> {
        NetworkConfig::new(self.tiers.clone(), self.alpha, self.user_intensity, channel)
    }

    pub fn with_pathloss_exponent(&self, alpha: f64) -> Result<Self> {
        NetworkConfig::new(self.tiers.clone(), alpha, self.user_intensity, self.channel)
    }

    pub fn with_tiers(&self, tiers: Vec<TierConfig>) -> Result<Self> {
        NetworkConfig::new(tiers, self.alpha, self.user_intensity, self.channel)
    }

    /// Every BS intensity multiplied by `factor`, users unchanged.
    pub fn with_scaled_intensities(&self, factor: f64) -> Result<Self> {
        let tiers = self
            .tiers
            .iter()
            .map(|t| TierConfig { intensity: t.intensity * factor, ..*t })
            .collect();
        self.with_tiers(tiers)
    }

    /// Tier `k` intensity replaced, others unchanged.
    pub fn with_tier_intensity(&self, k: usize, intensity: f64) -> Result<Self> {
        let mut tiers = self.tiers.clone();
        tiers
            .get_mut(k)
            .ok_or_else(|| Error::Config(format!("tier index {k} out of range")))?
            .intensity = intensity;
        self.with_tiers(tiers)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: NetworkFile = serde_json::from_str(text)?;
        file.into_network()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&NetworkFile::from_network(self)).expect("serializable")
    }
}

/// On-disk network description (intensities per km²).
///
/// ```json
/// {
///   "alpha": 4.0,
///   "user_intensity": 370.0,
///   "channel": { "fading": "exponential", "shadowing_db": 3.0 },
///   "tiers": [
///     { "name": "macro", "intensity": 1.0, "tx_power": 40.0,
///       "active_hw_power": 118.7, "dormant_power": 93.0, "power_scale": 5.32 }
///   ]
/// }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub tiers: Vec<TierFile>,
    pub alpha: f64,
    /// Users per km².
    pub user_intensity: f64,
    pub channel: ChannelFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TierFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// BS per km².
    pub intensity: f64,
    pub tx_power: f64,
    pub active_hw_power: f64,
    pub dormant_power: f64,
    pub power_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub fading: Fading,
    /// Standard deviation in dB; `null` or 0 disables shadowing.
    #[serde(default)]
    pub shadowing_db: Option<f64>,
}

impl NetworkFile {
    pub fn into_network(self) -> Result<NetworkConfig> {
        let tiers = self
            .tiers
            .iter()
            .map(|t| {
                TierConfig::new(
                    t.intensity / M2_PER_KM2,
                    t.tx_power,
                    t.active_hw_power,
                    t.dormant_power,
                    t.power_scale,
                )
            })
            .collect();
        let shadowing = match self.channel.shadowing_db {
            None => Shadowing::None,
            Some(s) if s == 0.0 => Shadowing::None,
            Some(sigma_db) => Shadowing::LogNormal { sigma_db },
        };
        NetworkConfig::new(
            tiers,
            self.alpha,
            self.user_intensity / M2_PER_KM2,
            ChannelModel { fading: self.channel.fading, shadowing },
        )
    }

    pub fn from_network(net: &NetworkConfig) -> Self {
        let names = ["macro", "pico", "femto"];
        NetworkFile {
            tiers: net
                .tiers
                .iter()
                .enumerate()
                .map(|(k, t)| TierFile {
                    name: (net.num_tiers() == 3).then(|| names[k].to_string()),
                    intensity: t.intensity * M2_PER_KM2,
                    tx_power: t.tx_power,
                    active_hw_power: t.active_hw_power,
                    dormant_power: t.dormant_power,
                    power_scale: t.power_scale,
                })
                .collect(),
            alpha: net.alpha,
            user_intensity: net.user_intensity * M2_PER_KM2,
            channel: ChannelFile {
                fading: net.channel.fading,
                shadowing_db: match net.channel.shadowing {
                    Shadowing::None => None,
                    Shadowing::LogNormal { sigma_db } => Some(sigma_db),
                },
            },
        }
    }
}

/// The bundled `table2` network file.
pub const TABLE_II_JSON: &str = include_str!("../presets/table2.json");

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_ii_active_powers() {
        let net = NetworkConfig::table_ii(0.0);
        let on = net.active_powers();
        assert!((on[0] - 331.5).abs() < 1e-12);
        assert!((on[1] - 10.8).abs() < 1e-12);
        assert!((on[2] - 5.175).abs() < 1e-12);
    }

    #[test]
    fn preset_file_matches_builtin() {
        let from_file = NetworkConfig::from_json(TABLE_II_JSON).unwrap();
        let builtin = NetworkConfig::table_ii(370.0e-6);
        assert_eq!(from_file.num_tiers(), 3);
        for (a, b) in from_file.tiers().iter().zip(builtin.tiers()) {
            assert!((a.intensity - b.intensity).abs() < 1e-18);
            assert_eq!(a.tx_power, b.tx_power);
            assert_eq!(a.power_scale, b.power_scale);
        }
        assert_eq!(from_file.channel(), builtin.channel());
        assert!((from_file.user_intensity() - 370.0e-6).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let net = NetworkConfig::table_ii(123.0e-6);
        let back = NetworkConfig::from_json(&net.to_json()).unwrap();
        assert_eq!(back.channel(), net.channel());
        assert!((back.user_intensity() - net.user_intensity()).abs() < 1e-18);
    }

    #[test]
    fn rejects_bad_alpha_and_empty_tiers() {
        let net = NetworkConfig::table_ii(0.0);
        assert!(matches!(net.with_pathloss_exponent(2.0), Err(Error::Config(_))));
        assert!(matches!(net.with_tiers(vec![]), Err(Error::Config(_))));
    }

    #[test]
    fn frac_moment_domain() {
        let ch = ChannelModel::rayleigh();
        assert!(ch.frac_moment(1.0).is_err());
        assert!(ch.frac_moment(-1.0).is_err());
        assert!((ch.frac_moment(0.5).unwrap() - 0.886_226_925_452_758).abs() < 1e-13);
    }
}
