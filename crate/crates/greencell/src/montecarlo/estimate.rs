//! Trial loop and estimators.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::layout::{origin_powers, origin_sir, Associator, Layout, SimWindow, StationIndex};
use super::rng::LinkGains;
use crate::association::{max_assoc_cdf, AssociationScheme, ServingDistance};
use crate::error::{Error, Result};
use crate::model::NetworkConfig;

/// Normal quantile for two-sided 95% intervals.
const Z95: f64 = 1.959_963_984_540_054;
/// Batches used for the interval of the network energy efficiency.
const BATCHES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub window: SimWindow,
    pub trials: usize,
    pub seed: u64,
}

impl SimConfig {
    /// Window sized for `network` by the Campbell check.
    pub fn for_network(network: &NetworkConfig, trials: usize, seed: u64) -> Self {
        SimConfig { window: SimWindow::for_network(network), trials, seed }
    }

    fn validate(&self, network: &NetworkConfig) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        self.window.check(network)
    }
}

/// What each trial samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialMode {
    /// Base stations only; every station is active. Enough for tier
    /// association and serving-distance statistics.
    OriginOnly,
    /// Base stations and users; stations nobody else selects are void.
    WithUsers,
}

/// Monte Carlo mean with a 95% half-width, optionally paired with analytic
/// bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricEstimate {
    pub name: String,
    pub mean: f64,
    pub samples: usize,
    pub ci95: f64,
    pub analytic_lower: Option<f64>,
    pub analytic_upper: Option<f64>,
}

impl MetricEstimate {
    /// Sample mean and normal-approximation half-width.
    pub fn from_samples<I: IntoIterator<Item = f64>>(name: impl Into<String>, samples: I) -> Self {
        let mut n = 0usize;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for x in samples {
            n += 1;
            sum += x;
            sum_sq += x * x;
        }
        let mean = if n > 0 { sum / n as f64 } else { f64::NAN };
        let ci95 = if n > 1 {
            let var = ((sum_sq - n as f64 * mean * mean) / (n - 1) as f64).max(0.0);
            Z95 * (var / n as f64).sqrt()
        } else {
            f64::NAN
        };
        MetricEstimate { name: name.into(), mean, samples: n, ci95, analytic_lower: None, analytic_upper: None }
    }

    /// Ratio `Σ a / Σ b` of paired per-trial totals with a delta-method
    /// half-width.
    pub fn from_ratio<I: IntoIterator<Item = (f64, f64)>>(name: impl Into<String>, pairs: I) -> Self {
        let pairs: Vec<(f64, f64)> = pairs.into_iter().collect();
        let n = pairs.len();
        let (sa, sb) = pairs.iter().fold((0.0, 0.0), |(x, y), (a, b)| (x + a, y + b));
        let ratio = if sb > 0.0 { sa / sb } else { f64::NAN };
        let ci95 = if n > 1 && sb > 0.0 {
            let mean_b = sb / n as f64;
            let resid: f64 = pairs.iter().map(|(a, b)| (a - ratio * b).powi(2)).sum();
            Z95 * (resid / (n * (n - 1)) as f64).sqrt() / mean_b
        } else {
            f64::NAN
        };
        MetricEstimate { name: name.into(), mean: ratio, samples: n, ci95, analytic_lower: None, analytic_upper: None }
    }

    pub fn with_bounds(mut self, lower: Option<f64>, upper: Option<f64>) -> Self {
        self.analytic_lower = lower;
        self.analytic_upper = upper;
        self
    }

    /// The analytic lower bound exceeds the estimate by more than its
    /// half-width.
    pub fn lower_violated(&self) -> bool {
        self.analytic_lower.is_some_and(|lo| lo > self.mean + self.ci95)
    }

    pub fn upper_violated(&self) -> bool {
        self.analytic_upper.is_some_and(|hi| hi < self.mean - self.ci95)
    }
}

/// Counts over the stations of one tier in the interior disk.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InteriorCount {
    pub stations: u32,
    pub void: u32,
    pub users: u64,
}

/// What the typical user saw in one trial under one scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub serving_tier: Option<usize>,
    pub serving_distance: f64,
    /// `ψ ‖B*‖^{-α}` of the serving station.
    pub serving_value: f64,
    pub signal: f64,
    pub interference: f64,
    pub interior: Vec<InteriorCount>,
}

impl TrialOutcome {
    /// Trials with no serving station, or no active interferer and hence an
    /// infinite SIR, are left out of SIR-based estimates.
    pub fn excluded(&self) -> bool {
        self.serving_tier.is_none() || self.interference == 0.0
    }

    pub fn sir(&self) -> f64 {
        self.signal / self.interference
    }
}

/// Outcomes of one scheme over all trials.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeSamples {
    pub scheme: AssociationScheme,
    pub network: NetworkConfig,
    pub mode: TrialMode,
    pub config: SimConfig,
    pub outcomes: Vec<TrialOutcome>,
}

fn run_trial(
    network: &NetworkConfig,
    schemes: &[AssociationScheme],
    config: &SimConfig,
    mode: TrialMode,
    trial: u64,
) -> Result<Vec<TrialOutcome>> {
    let with_users = mode == TrialMode::WithUsers;
    let layout = Layout::sample(network, config.window, config.seed, trial, with_users)?;
    let gains = LinkGains::new(network.channel(), config.seed, trial);
    let index = StationIndex::new(&layout, network);
    let (_, rx) = origin_powers(&layout, network, &gains);
    let interior_sq = config.window.interior_radius().powi(2);
    let mut out = Vec::with_capacity(schemes.len());
    for scheme in schemes {
        let assoc = Associator::new(&layout, &index, &gains, scheme, network);
        let serving = assoc.origin();
        let loads = with_users.then(|| assoc.loads());
        let (signal, interference) = origin_sir(&rx, serving, loads.as_deref());
        let mut interior = vec![InteriorCount::default(); network.num_tiers()];
        if let Some(loads) = &loads {
            for (s, &n) in layout.stations.iter().zip(loads) {
                if s.distance_sq([0.0, 0.0]) <= interior_sq {
                    let c = &mut interior[s.tier];
                    c.stations += 1;
                    c.void += (n == 0) as u32;
                    c.users += n as u64;
                }
            }
        }
        let (serving_tier, serving_distance, serving_value) = match serving {
            Some(c) => {
                let s = &layout.stations[c.station];
                (Some(s.tier), s.distance_sq([0.0, 0.0]).sqrt(), c.value)
            }
            None => (None, f64::INFINITY, 0.0),
        };
        out.push(TrialOutcome { serving_tier, serving_distance, serving_value, signal, interference, interior });
    }
    Ok(out)
}

/// Runs `config.trials` trials and associates the typical user under every
/// scheme on the same layouts and link gains. Trials run in parallel; the
/// output is the same for any number of workers.
pub fn simulate(
    network: &NetworkConfig,
    schemes: &[AssociationScheme],
    config: &SimConfig,
    mode: TrialMode,
) -> Result<Vec<SchemeSamples>> {
    config.validate(network)?;
    for s in schemes {
        s.validate(network)?;
    }
    let per_trial: Vec<Vec<TrialOutcome>> = (0..config.trials as u64)
        .into_par_iter()
        .map(|t| run_trial(network, schemes, config, mode, t))
        .collect::<Result<_>>()?;
    let mut samples: Vec<SchemeSamples> = schemes
        .iter()
        .map(|s| SchemeSamples {
            scheme: s.clone(),
            network: network.clone(),
            mode,
            config: *config,
            outcomes: Vec::with_capacity(config.trials),
        })
        .collect();
    for trial in per_trial {
        for (s, o) in samples.iter_mut().zip(trial) {
            s.outcomes.push(o);
        }
    }
    Ok(samples)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssociationEstimate {
    /// Share of trials served by each tier.
    pub tier_probability: Vec<MetricEstimate>,
    /// Users per station in the interior disk, per tier.
    pub mean_load: Vec<MetricEstimate>,
    /// Void share of interior stations, per tier.
    pub void_probability: Vec<MetricEstimate>,
    /// Void share over all interior stations.
    pub void_probability_pooled: MetricEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageEstimate {
    pub thresholds: Vec<f64>,
    pub coverage: Vec<MetricEstimate>,
    pub excluded: usize,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyEstimate {
    /// Mean of `log2(1 + SIR) / Υ_serving`, bits/Hz/joule.
    pub link_ee: MetricEstimate,
    /// Mean `log2(1 + SIR)` given the serving tier, bits/Hz.
    pub spectral_efficiency: Vec<MetricEstimate>,
    /// Network energy efficiency from the interior void shares and the
    /// per-tier spectral efficiencies, bits/Hz/joule. The half-width comes
    /// from batch means.
    pub network_ee: MetricEstimate,
    pub excluded: usize,
    pub trials: usize,
}

fn network_ratio(network: &NetworkConfig, void: &[f64], spectral: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (k, t) in network.tiers().iter().enumerate() {
        num += t.intensity * (1.0 - void[k]) * spectral[k];
        den += t.intensity * ((1.0 - void[k]) * t.active_power() + void[k] * t.dormant_power);
    }
    num / den
}

impl SchemeSamples {
    pub fn trials(&self) -> usize {
        self.outcomes.len()
    }

    pub fn excluded(&self) -> usize {
        self.outcomes.iter().filter(|o| o.excluded()).count()
    }

    pub fn excluded_rate(&self) -> f64 {
        self.excluded() as f64 / self.trials() as f64
    }

    fn included(&self) -> impl Iterator<Item = &TrialOutcome> {
        self.outcomes.iter().filter(|o| !o.excluded())
    }

    fn tiers(&self) -> usize {
        self.network.num_tiers()
    }

    pub fn association(&self) -> AssociationEstimate {
        let label = self.scheme.label();
        let tier_probability = (0..self.tiers())
            .map(|k| {
                MetricEstimate::from_samples(
                    format!("{label}/tier_probability/{}", k + 1),
                    self.outcomes.iter().map(|o| (o.serving_tier == Some(k)) as u8 as f64),
                )
            })
            .collect();
        let mean_load = (0..self.tiers())
            .map(|k| {
                MetricEstimate::from_ratio(
                    format!("{label}/mean_load/{}", k + 1),
                    self.outcomes.iter().map(|o| (o.interior[k].users as f64, o.interior[k].stations as f64)),
                )
            })
            .collect();
        let void_probability = (0..self.tiers())
            .map(|k| {
                MetricEstimate::from_ratio(
                    format!("{label}/void_probability/{}", k + 1),
                    self.outcomes.iter().map(|o| (o.interior[k].void as f64, o.interior[k].stations as f64)),
                )
            })
            .collect();
        let void_probability_pooled = MetricEstimate::from_ratio(
            format!("{label}/void_probability/all"),
            self.outcomes.iter().map(|o| {
                o.interior.iter().fold((0.0, 0.0), |(v, s), c| (v + c.void as f64, s + c.stations as f64))
            }),
        );
        AssociationEstimate { tier_probability, mean_load, void_probability, void_probability_pooled }
    }

    /// Share of included trials whose serving link reaches `eta` bits/Hz
    /// per joule.
    pub fn green_coverage(&self, thresholds: &[f64]) -> CoverageEstimate {
        let label = self.scheme.label();
        let coverage = thresholds
            .iter()
            .map(|&eta| {
                MetricEstimate::from_samples(
                    format!("{label}/green_coverage/{eta}"),
                    self.included().map(|o| {
                        let active = self.network.tier(o.serving_tier.unwrap_or(0)).active_power();
                        ((o.sir().ln_1p() / std::f64::consts::LN_2) / active >= eta) as u8 as f64
                    }),
                )
            })
            .collect();
        CoverageEstimate { thresholds: thresholds.to_vec(), coverage, excluded: self.excluded(), trials: self.trials() }
    }

    /// Share of included trials with SIR at least `threshold`.
    pub fn sir_coverage(&self, threshold: f64) -> MetricEstimate {
        MetricEstimate::from_samples(
            format!("{}/sir_coverage/{threshold}", self.scheme.label()),
            self.included().map(|o| (o.sir() >= threshold) as u8 as f64),
        )
    }

    fn spectral_by_tier(&self, outcomes: &[TrialOutcome]) -> Vec<MetricEstimate> {
        let label = self.scheme.label();
        (0..self.tiers())
            .map(|k| {
                MetricEstimate::from_samples(
                    format!("{label}/spectral_efficiency/{}", k + 1),
                    outcomes
                        .iter()
                        .filter(|o| !o.excluded() && o.serving_tier == Some(k))
                        .map(|o| o.sir().ln_1p() / std::f64::consts::LN_2),
                )
            })
            .collect()
    }

    fn void_by_tier(&self, outcomes: &[TrialOutcome]) -> Vec<f64> {
        (0..self.tiers())
            .map(|k| {
                let (v, s) = outcomes
                    .iter()
                    .fold((0u64, 0u64), |(v, s), o| (v + o.interior[k].void as u64, s + o.interior[k].stations as u64));
                if s > 0 {
                    v as f64 / s as f64
                } else {
                    0.0
                }
            })
            .collect()
    }

    pub fn energy(&self) -> EnergyEstimate {
        let label = self.scheme.label();
        let link_ee = MetricEstimate::from_samples(
            format!("{label}/link_ee"),
            self.included().map(|o| {
                let active = self.network.tier(o.serving_tier.unwrap_or(0)).active_power();
                o.sir().ln_1p() / std::f64::consts::LN_2 / active
            }),
        );
        let spectral_efficiency = self.spectral_by_tier(&self.outcomes);
        let pooled_c: Vec<f64> = spectral_efficiency.iter().map(|m| if m.samples > 0 { m.mean } else { 0.0 }).collect();
        let network_mean = network_ratio(&self.network, &self.void_by_tier(&self.outcomes), &pooled_c);
        let batches = BATCHES.min(self.outcomes.len());
        let size = self.outcomes.len() / batches.max(1);
        let batch_values: Vec<f64> = (0..batches)
            .map(|b| {
                let chunk = &self.outcomes[b * size..(b + 1) * size];
                let c: Vec<f64> = self
                    .spectral_by_tier(chunk)
                    .iter()
                    .zip(&pooled_c)
                    .map(|(m, &fallback)| if m.samples > 0 { m.mean } else { fallback })
                    .collect();
                network_ratio(&self.network, &self.void_by_tier(chunk), &c)
            })
            .collect();
        let spread = MetricEstimate::from_samples("", batch_values);
        let network_ee = MetricEstimate {
            name: format!("{label}/network_ee"),
            mean: network_mean,
            samples: self.outcomes.len(),
            ci95: spread.ci95,
            analytic_lower: None,
            analytic_upper: None,
        };
        EnergyEstimate { link_ee, spectral_efficiency, network_ee, excluded: self.excluded(), trials: self.trials() }
    }

    /// Empirical serving distance and serving association value with their
    /// Kolmogorov–Smirnov distances to the analytic distributions.
    pub fn scheme_cdf(&self) -> Result<SchemeCdf> {
        let mut distances: Vec<f64> = self.outcomes.iter().filter(|o| o.serving_tier.is_some()).map(|o| o.serving_distance).collect();
        let mut values: Vec<f64> = self.outcomes.iter().filter(|o| o.serving_tier.is_some()).map(|o| o.serving_value).collect();
        distances.sort_by(f64::total_cmp);
        values.sort_by(f64::total_cmp);
        let law = ServingDistance::new(&self.scheme, &self.network)?;
        let ks_distance = ks_statistic(&distances, |x| law.cdf(x))?;
        let ks_value = ks_statistic(&values, |x| max_assoc_cdf(&self.scheme, &self.network, x))?;
        Ok(SchemeCdf { distances, values, ks_distance, ks_value })
    }
}

/// Sorted samples of the serving distance and serving association value.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeCdf {
    pub distances: Vec<f64>,
    pub values: Vec<f64>,
    pub ks_distance: f64,
    pub ks_value: f64,
}

/// `sup |F_n - F|` for sorted samples.
pub fn ks_statistic<F: Fn(f64) -> Result<f64>>(sorted: &[f64], cdf: F) -> Result<f64> {
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x)?;
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

fn single(network: &NetworkConfig, scheme: &AssociationScheme, config: &SimConfig, mode: TrialMode) -> Result<SchemeSamples> {
    Ok(simulate(network, std::slice::from_ref(scheme), config, mode)?.remove(0))
}

/// Tier association shares, interior loads and void shares.
pub fn estimate_association(network: &NetworkConfig, scheme: &AssociationScheme, config: &SimConfig) -> Result<AssociationEstimate> {
    Ok(single(network, scheme, config, TrialMode::WithUsers)?.association())
}

pub fn estimate_green_coverage(
    network: &NetworkConfig,
    scheme: &AssociationScheme,
    config: &SimConfig,
    thresholds: &[f64],
) -> Result<CoverageEstimate> {
    Ok(single(network, scheme, config, TrialMode::WithUsers)?.green_coverage(thresholds))
}

pub fn estimate_energy(network: &NetworkConfig, scheme: &AssociationScheme, config: &SimConfig) -> Result<EnergyEstimate> {
    Ok(single(network, scheme, config, TrialMode::WithUsers)?.energy())
}

/// Serving distance and association value distributions; voids play no
/// part, so trials sample base stations only.
pub fn estimate_scheme_cdf(network: &NetworkConfig, scheme: &AssociationScheme, config: &SimConfig) -> Result<SchemeCdf> {
    single(network, scheme, config, TrialMode::OriginOnly)?.scheme_cdf()
}

/// Comparison of the green association rule with the rule that maximises
/// the serving link's spectrum efficiency per watt given each candidate's
/// own interference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RuleAgreement {
    pub realizations: usize,
    pub mismatches: usize,
    /// Realizations with a candidate that would see no interference.
    pub skipped: usize,
}

impl RuleAgreement {
    pub fn mismatch_rate(&self) -> f64 {
        self.mismatches as f64 / self.realizations as f64
    }
}

/// For each trial, compares the station chosen by GCA, the maximiser of
/// `P_k H ‖B‖^{-α} / Υ_k^on`, with the maximiser of
/// `log2(1 + S_j / I_j) / Υ_j^on`, where `S_j` is the power received from
/// candidate `j` and `I_j` the power from all other active stations.
pub fn compare_green_rules(network: &NetworkConfig, config: &SimConfig, mode: TrialMode) -> Result<RuleAgreement> {
    config.validate(network)?;
    let gca = AssociationScheme::gca();
    let results: Vec<Option<bool>> = (0..config.trials as u64)
        .into_par_iter()
        .map(|trial| -> Result<Option<bool>> {
            let layout = Layout::sample(network, config.window, config.seed, trial, mode == TrialMode::WithUsers)?;
            let gains = LinkGains::new(network.channel(), config.seed, trial);
            let index = StationIndex::new(&layout, network);
            let assoc = Associator::new(&layout, &index, &gains, &gca, network);
            let Some(green) = assoc.origin() else {
                return Ok(None);
            };
            let loads = (mode == TrialMode::WithUsers).then(|| assoc.loads());
            let active = |i: usize| loads.as_ref().is_none_or(|l| l[i] > 0);
            let (_, rx) = origin_powers(&layout, network, &gains);
            let total: f64 = (0..rx.len()).filter(|&i| active(i)).map(|i| rx[i]).sum();
            let mut best = (f64::NEG_INFINITY, usize::MAX);
            for (j, s) in layout.stations.iter().enumerate() {
                let others = if active(j) { total - rx[j] } else { total };
                if others <= 0.0 {
                    return Ok(None);
                }
                let score = (rx[j] / others).ln_1p() / network.tier(s.tier).active_power();
                if score > best.0 {
                    best = (score, j);
                }
            }
            Ok(Some(best.1 == green.station))
        })
        .collect::<Result<_>>()?;
    let skipped = results.iter().filter(|r| r.is_none()).count();
    let mismatches = results.iter().filter(|r| **r == Some(false)).count();
    Ok(RuleAgreement { realizations: results.len() - skipped, mismatches, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_interval_matches_binomial() {
        let pairs = (0..1000).map(|i| (((i % 4) == 0) as u8 as f64, 1.0));
        let m = MetricEstimate::from_ratio("r", pairs);
        assert!((m.mean - 0.25).abs() < 1e-12);
        let plain = MetricEstimate::from_samples("p", (0..1000).map(|i| ((i % 4) == 0) as u8 as f64));
        assert!((m.ci95 - plain.ci95).abs() < 1e-12);
    }

    #[test]
    fn bound_flags() {
        let m = MetricEstimate::from_samples("x", [1.0, 2.0, 3.0]).with_bounds(Some(5.0), Some(2.5));
        assert!(m.lower_violated());
        assert!(!m.upper_violated());
    }

    #[test]
    fn ks_of_exact_quantiles_is_small() {
        let n = 1000;
        let sorted: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic(&sorted, |x| Ok(x)).unwrap();
        assert!((d - 0.5 / n as f64).abs() < 1e-12);
    }

    #[test]
    fn parallel_runs_are_identical() {
        let net = NetworkConfig::table_ii(100e-6);
        let cfg = SimConfig::for_network(&net, 8, 42);
        let schemes = [AssociationScheme::gca(), AssociationScheme::nba()];
        let a = simulate(&net, &schemes, &cfg, TrialMode::WithUsers).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| simulate(&net, &schemes, &cfg, TrialMode::WithUsers)).unwrap();
        assert_eq!(a, b);
    }
}
