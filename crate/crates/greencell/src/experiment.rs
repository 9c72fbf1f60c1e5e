//! Experiment descriptions, figure presets and CSV output.
//!
//! An experiment sweeps one variable over a grid, and at every point
//! evaluates the requested metrics for each scheme, analytically and by
//! Monte Carlo. Each metric becomes one CSV row per (scheme, point, tier).

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::association::{tier_stats, AssociationScheme};
use crate::coverage::{Bound, CoverageAnalyzer, VoidModel};
use crate::energy::energy_from;
use crate::error::{Error, Result};
use crate::model::{NetworkConfig, NetworkFile, M2_PER_KM2, TABLE_II_JSON};
use crate::montecarlo::{simulate, SchemeSamples, SimConfig, SimWindow, TrialMode};
use crate::specfun::{inverse_laplace_cdf, IltSpec};

/// Version tag written into every CSV header comment.
pub const CSV_SCHEMA: &str = "greencell-csv/1";
pub const CSV_COLUMNS: [&str; 12] = [
    "experiment",
    "scheme",
    "sweep_var",
    "sweep_value",
    "metric",
    "estimate",
    "ci95",
    "analytic_lower",
    "analytic_upper",
    "excluded_rate",
    "trials",
    "seed",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepVariable {
    /// User intensity over macro intensity.
    #[serde(rename = "lambda_u/lambda_1")]
    UsersPerMacro,
    /// User intensity over femto (third tier) intensity.
    #[serde(rename = "lambda_u/lambda_3")]
    UsersPerFemto,
    /// Third-tier intensity over macro intensity.
    #[serde(rename = "lambda_3/lambda_1")]
    FemtoPerMacro,
    /// Green coverage threshold in bits/Hz/joule.
    #[serde(rename = "eta")]
    Eta,
}

impl SweepVariable {
    pub fn label(&self) -> &'static str {
        match self {
            SweepVariable::UsersPerMacro => "lambda_u/lambda_1",
            SweepVariable::UsersPerFemto => "lambda_u/lambda_3",
            SweepVariable::FemtoPerMacro => "lambda_3/lambda_1",
            SweepVariable::Eta => "eta",
        }
    }

    /// The network at sweep value `value`.
    pub fn apply(&self, base: &NetworkConfig, value: f64) -> Result<NetworkConfig> {
        let third = || {
            if base.num_tiers() < 3 {
                return Err(Error::Config(format!("sweep {} needs at least three tiers", self.label())));
            }
            Ok(base.tier(2).intensity)
        };
        match self {
            SweepVariable::UsersPerMacro => base.with_user_intensity(value * base.tier(0).intensity),
            SweepVariable::UsersPerFemto => base.with_user_intensity(value * third()?),
            SweepVariable::FemtoPerMacro => {
                third()?;
                base.with_tier_intensity(2, value * base.tier(0).intensity)
            }
            SweepVariable::Eta => Ok(base.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    TierProbability,
    MeanLoad,
    VoidProbability,
    GreenCoverage,
    LinkEe,
    NetworkEe,
    /// Derived per-tier parameters: active power, gain moments, association
    /// statistics. Analytic only.
    ModelSummary,
}

impl Metric {
    fn needs_users(&self) -> bool {
        !matches!(self, Metric::TierProbability | Metric::ModelSummary)
    }
}

/// A bundled preset name, a path to a network file, or an inline network
/// description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NetworkSource {
    Preset(String),
    Inline(NetworkFile),
}

impl NetworkSource {
    pub fn resolve(&self) -> Result<NetworkConfig> {
        match self {
            NetworkSource::Preset(name) => match name.as_str() {
                "table2" => NetworkConfig::from_json(TABLE_II_JSON),
                "fig1_caption" => Ok(NetworkConfig::fig1_caption(370.0 / M2_PER_KM2)),
                path if path.ends_with(".json") => {
                    let text = std::fs::read_to_string(path)
                        .map_err(|e| Error::Config(format!("cannot read network file {path}: {e}")))?;
                    NetworkConfig::from_json(&text)
                }
                other => Err(Error::Config(format!(
                    "unknown network '{other}' (expected table2, fig1_caption or a .json file)"
                ))),
            },
            NetworkSource::Inline(file) => file.clone().into_network(),
        }
    }
}

/// A scheme given by label (`"gca-shadowing"`) or in full.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SchemeEntry {
    Label(String),
    Full(AssociationScheme),
}

impl SchemeEntry {
    pub fn resolve(&self) -> Result<AssociationScheme> {
        match self {
            SchemeEntry::Label(s) => s.parse(),
            SchemeEntry::Full(s) => Ok(s.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub variable: SweepVariable,
    pub grid: Vec<f64>,
}

fn default_eta() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub network: NetworkSource,
    pub schemes: Vec<SchemeEntry>,
    pub metrics: Vec<Metric>,
    pub sweep: Sweep,
    /// Green coverage threshold when the sweep is not over it.
    #[serde(default = "default_eta")]
    pub eta: f64,
    pub trials: usize,
    pub seed: u64,
    /// Simulation window radius in metres; sized by the Campbell check when
    /// absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_radius: Option<f64>,
    /// CSV file name, relative to the output directory.
    pub output: String,
}

/// Which halves of an experiment to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub analytic: bool,
    pub monte_carlo: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { analytic: true, monte_carlo: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CsvRow {
    pub experiment: String,
    pub scheme: String,
    pub sweep_var: String,
    pub sweep_value: f64,
    pub metric: String,
    pub estimate: Option<f64>,
    pub ci95: Option<f64>,
    pub analytic_lower: Option<f64>,
    pub analytic_upper: Option<f64>,
    pub excluded_rate: Option<f64>,
    pub trials: usize,
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ExperimentSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::Config("experiment name is empty".into()));
        }
        if self.schemes.is_empty() || self.metrics.is_empty() {
            return Err(Error::Config("an experiment needs at least one scheme and one metric".into()));
        }
        if self.sweep.grid.is_empty() {
            return Err(Error::Config("sweep grid is empty".into()));
        }
        if let Some(bad) = self.sweep.grid.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::Config(format!("sweep values must be finite and > 0, got {bad}")));
        }
        if self.sweep.grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("sweep grid must be strictly increasing".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return Err(Error::Config(format!("eta must be finite and > 0, got {}", self.eta)));
        }
        if let Some(r) = self.window_radius {
            SimWindow::new(r)?;
        }
        Ok(())
    }

    pub fn preset(name: &str) -> Result<Self> {
        let canonical = match name {
            "fig1" => "fig1_void",
            "fig2" => "fig2_gca_channels",
            "fig3" => "fig3_coverage",
            "fig4" => "fig4_load",
            "fig5" => "fig5_link_ee",
            "fig6" => "fig6_network_ee",
            "table2" | "tableII" => "tableII_check",
            other => other,
        };
        let users_per_femto = vec![0.04, 0.1, 0.2, 0.4, 1.0, 2.0, 4.0, 8.0];
        let three = || ["gca", "mrpa", "nba"].map(|s| SchemeEntry::Label(s.into())).to_vec();
        let spec = |metric: Metric, schemes: Vec<SchemeEntry>, sweep: Sweep, trials: usize| ExperimentSpec {
            name: canonical.to_string(),
            network: NetworkSource::Preset("table2".into()),
            schemes,
            metrics: vec![metric],
            sweep,
            eta: default_eta(),
            trials,
            seed: 1,
            window_radius: None,
            output: format!("{canonical}.csv"),
        };
        let over_users = Sweep { variable: SweepVariable::UsersPerFemto, grid: users_per_femto };
        Ok(match canonical {
            "fig1_void" => spec(
                Metric::VoidProbability,
                three(),
                Sweep { variable: SweepVariable::UsersPerMacro, grid: vec![10.0, 20.0, 50.0, 100.0, 200.0, 370.0, 500.0, 1000.0] },
                500,
            ),
            "fig2_gca_channels" => spec(
                Metric::GreenCoverage,
                ["gca", "gca-shadowing", "gca-pathloss"].map(|s| SchemeEntry::Label(s.into())).to_vec(),
                over_users,
                2000,
            ),
            "fig3_coverage" => spec(Metric::GreenCoverage, three(), over_users, 2000),
            "fig4_load" => spec(
                Metric::MeanLoad,
                three(),
                Sweep { variable: SweepVariable::FemtoPerMacro, grid: vec![5.0, 10.0, 20.0, 50.0, 100.0, 200.0] },
                200,
            ),
            "fig5_link_ee" => spec(Metric::LinkEe, three(), over_users, 2000),
            "fig6_network_ee" => spec(Metric::NetworkEe, three(), over_users, 2000),
            "tableII_check" => spec(
                Metric::ModelSummary,
                three(),
                Sweep { variable: SweepVariable::UsersPerMacro, grid: vec![370.0] },
                1,
            ),
            other => return Err(Error::Config(format!("unknown preset '{other}'; known: {}", PRESETS.join(", ")))),
        })
    }
}

pub const PRESETS: [&str; 7] =
    ["fig1_void", "fig2_gca_channels", "fig3_coverage", "fig4_load", "fig5_link_ee", "fig6_network_ee", "tableII_check"];

struct RowContext<'a> {
    spec: &'a ExperimentSpec,
    scheme: String,
    sweep_value: f64,
}

impl RowContext<'_> {
    fn row(&self, metric: String) -> CsvRow {
        CsvRow {
            experiment: self.spec.name.clone(),
            scheme: self.scheme.clone(),
            sweep_var: self.spec.sweep.variable.label().to_string(),
            sweep_value: self.sweep_value,
            metric,
            estimate: None,
            ci95: None,
            analytic_lower: None,
            analytic_upper: None,
            excluded_rate: None,
            trials: 0,
            seed: self.spec.seed,
        }
    }
}

fn tiered(name: &str, k: usize) -> String {
    format!("{name}_{}", k + 1)
}

/// Analytic rows for one scheme at one point.
fn analytic_rows(
    ctx: &RowContext,
    network: &NetworkConfig,
    scheme: &AssociationScheme,
    metric: Metric,
    eta: f64,
) -> Result<Vec<CsvRow>> {
    let both = |mut r: CsvRow, v: f64| {
        r.analytic_lower = Some(v);
        r.analytic_upper = Some(v);
        r
    };
    let k_tiers = network.num_tiers();
    let mut rows = Vec::new();
    match metric {
        Metric::TierProbability | Metric::MeanLoad | Metric::VoidProbability => {
            let stats = tier_stats(scheme, network)?;
            for (k, s) in stats.iter().enumerate() {
                let (name, v) = match metric {
                    Metric::TierProbability => ("tier_probability", s.association_prob),
                    Metric::MeanLoad => ("mean_load", s.mean_load),
                    _ => ("void_probability", s.void_prob),
                };
                rows.push(both(ctx.row(tiered(name, k)), v));
            }
        }
        Metric::GreenCoverage => {
            let a = CoverageAnalyzer::new(scheme, network)?;
            let mut r = ctx.row("green_coverage".into());
            r.analytic_lower = Some(a.green_coverage(eta, Bound::Lower, VoidModel::Analytic)?.rho);
            r.analytic_upper = Some(a.green_coverage(eta, Bound::Upper, VoidModel::Analytic)?.rho);
            rows.push(r);
        }
        Metric::LinkEe | Metric::NetworkEe => {
            let a = CoverageAnalyzer::new(scheme, network)?;
            let lo = energy_from(&a, Bound::Lower, VoidModel::Analytic)?;
            let hi = energy_from(&a, Bound::Upper, VoidModel::Analytic)?;
            let finite = |v: f64| v.is_finite().then_some(v);
            if metric == Metric::LinkEe {
                let mut r = ctx.row("link_ee".into());
                r.analytic_lower = finite(lo.link_ee);
                r.analytic_upper = finite(hi.link_ee);
                rows.push(r);
                for k in 0..k_tiers {
                    let mut r = ctx.row(tiered("spectral_efficiency", k));
                    r.analytic_lower = finite(lo.spectral_efficiency[k]);
                    r.analytic_upper = finite(hi.spectral_efficiency[k]);
                    rows.push(r);
                }
            } else {
                let mut r = ctx.row("network_ee".into());
                r.analytic_lower = finite(lo.network_ee);
                r.analytic_upper = finite(hi.network_ee);
                rows.push(r);
            }
        }
        Metric::ModelSummary => {
            let stats = tier_stats(scheme, network)?;
            let y = network.delta();
            for (k, s) in stats.iter().enumerate() {
                let tier = network.tier(k);
                let observed_pos = scheme.observed_gain_moment(network.channel(), y)?;
                let observed_neg = scheme.observed_gain_moment(network.channel(), -y)?;
                for (name, v) in [
                    ("active_power", tier.active_power()),
                    ("bias", scheme.bias(network, k)),
                    ("gain_moment_pos", observed_pos),
                    ("gain_moment_neg", observed_neg),
                    ("tier_probability", s.association_prob),
                    ("equivalent_intensity_per_km2", s.equivalent_intensity * M2_PER_KM2),
                    ("shape", s.shape),
                    ("mean_load", s.mean_load),
                    ("void_probability", s.void_prob),
                ] {
                    rows.push(both(ctx.row(tiered(name, k)), v));
                }
            }
        }
    }
    Ok(rows)
}

/// Fills the Monte Carlo columns of `rows` produced for one scheme and
/// metric, adding rows when the analytic half was skipped.
fn merge_mc(ctx: &RowContext, rows: &mut Vec<CsvRow>, samples: &SchemeSamples, metric: Metric, eta: f64) {
    let mut estimates: Vec<(String, f64, f64, Option<f64>)> = Vec::new();
    match metric {
        Metric::TierProbability | Metric::MeanLoad | Metric::VoidProbability => {
            let a = samples.association();
            let (name, list) = match metric {
                Metric::TierProbability => ("tier_probability", a.tier_probability),
                Metric::MeanLoad => ("mean_load", a.mean_load),
                _ => ("void_probability", a.void_probability),
            };
            for (k, m) in list.iter().enumerate() {
                estimates.push((tiered(name, k), m.mean, m.ci95, None));
            }
        }
        Metric::GreenCoverage => {
            let c = samples.green_coverage(&[eta]);
            estimates.push(("green_coverage".into(), c.coverage[0].mean, c.coverage[0].ci95, Some(samples.excluded_rate())));
        }
        Metric::LinkEe => {
            let e = samples.energy();
            estimates.push(("link_ee".into(), e.link_ee.mean, e.link_ee.ci95, Some(samples.excluded_rate())));
            for (k, m) in e.spectral_efficiency.iter().enumerate() {
                estimates.push((tiered("spectral_efficiency", k), m.mean, m.ci95, Some(samples.excluded_rate())));
            }
        }
        Metric::NetworkEe => {
            let e = samples.energy();
            estimates.push(("network_ee".into(), e.network_ee.mean, e.network_ee.ci95, Some(samples.excluded_rate())));
        }
        Metric::ModelSummary => {}
    }
    let finite = |v: f64| v.is_finite().then_some(v);
    for (name, mean, ci, excluded) in estimates {
        let idx = match rows.iter().position(|r| r.metric == name) {
            Some(i) => i,
            None => {
                rows.push(ctx.row(name));
                rows.len() - 1
            }
        };
        let r = &mut rows[idx];
        r.estimate = finite(mean);
        r.ci95 = finite(ci);
        r.excluded_rate = excluded;
        r.trials = samples.trials();
    }
}

/// Runs every sweep point of `spec`. Monte Carlo trials at a point are
/// shared by all schemes.
pub fn run_experiment(spec: &ExperimentSpec, options: RunOptions) -> Result<Vec<CsvRow>> {
    spec.validate()?;
    let base = spec.network.resolve()?;
    let schemes: Vec<AssociationScheme> = spec.schemes.iter().map(SchemeEntry::resolve).collect::<Result<_>>()?;
    for s in &schemes {
        s.validate(&base)?;
    }
    let mc_metrics: Vec<Metric> = spec.metrics.iter().copied().filter(|m| *m != Metric::ModelSummary).collect();
    let run_mc = options.monte_carlo && !mc_metrics.is_empty();
    let mode = if mc_metrics.iter().any(Metric::needs_users) { TrialMode::WithUsers } else { TrialMode::OriginOnly };
    let simulate_at = |network: &NetworkConfig| -> Result<Vec<SchemeSamples>> {
        let window = match spec.window_radius {
            Some(r) => SimWindow::new(r)?,
            None => SimWindow::for_network(network),
        };
        simulate(network, &schemes, &SimConfig { window, trials: spec.trials, seed: spec.seed }, mode)
    };
    let shared = if run_mc && spec.sweep.variable == SweepVariable::Eta { Some(simulate_at(&base)?) } else { None };
    let mut out = Vec::new();
    for &value in &spec.sweep.grid {
        let network = spec.sweep.variable.apply(&base, value)?;
        let eta = if spec.sweep.variable == SweepVariable::Eta { value } else { spec.eta };
        let local;
        let samples = match (&shared, run_mc) {
            (Some(s), _) => Some(s),
            (None, true) => {
                local = simulate_at(&network)?;
                Some(&local)
            }
            (None, false) => None,
        };
        for (i, scheme) in schemes.iter().enumerate() {
            let ctx = RowContext { spec, scheme: scheme.label(), sweep_value: value };
            for &metric in &spec.metrics {
                let mut rows =
                    if options.analytic || metric == Metric::ModelSummary { analytic_rows(&ctx, &network, scheme, metric, eta)? } else { Vec::new() };
                if let Some(samples) = samples {
                    merge_mc(&ctx, &mut rows, &samples[i], metric, eta);
                }
                out.extend(rows);
            }
        }
    }
    Ok(out)
}

/// Writes the header comment and rows as CSV.
pub fn write_csv<W: Write>(spec: &ExperimentSpec, rows: &[CsvRow], mut out: W) -> Result<()> {
    writeln!(out, "# schema: {CSV_SCHEMA}")?;
    writeln!(out, "# experiment: {}", spec.name)?;
    writeln!(out, "# columns: {}", CSV_COLUMNS.join(", "))?;
    writeln!(out, "# estimate, ci95: Monte Carlo mean and 95% half-width; empty when not simulated")?;
    writeln!(out, "# analytic_lower, analytic_upper: analytic bounds, equal when the analytic value is a single approximation")?;
    writeln!(out, "# excluded_rate: share of trials without interference, left out of SIR-based estimates")?;
    writeln!(out, "# units: link_ee, network_ee bits/Hz/J; spectral_efficiency bits/Hz; mean_load users per BS")?;
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer.serialize(row).map_err(|e| Error::Io(e.to_string()))?;
    }
    writer.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Dry run: parses and checks the spec, every network on the sweep grid,
/// the simulation window and the Laplace inversion, without evaluating
/// anything expensive.
pub fn validate(spec: &ExperimentSpec) -> ValidationReport {
    let mut checks = Vec::new();
    let mut push = |name: &str, result: Result<String>| {
        let (passed, detail) = match result {
            Ok(d) => (true, d),
            Err(e) => (false, e.to_string()),
        };
        checks.push(Check { name: name.to_string(), passed, detail });
    };
    push("spec", spec.validate().map(|_| format!("{} points, {} trials", spec.sweep.grid.len(), spec.trials)));
    let networks: Result<Vec<NetworkConfig>> = spec
        .network
        .resolve()
        .and_then(|base| spec.sweep.grid.iter().map(|&v| spec.sweep.variable.apply(&base, v)).collect());
    let networks = match networks {
        Ok(n) => {
            push("network", Ok(format!("{} tiers, alpha {}", n[0].num_tiers(), n[0].pathloss_exponent())));
            n
        }
        Err(e) => {
            push("network", Err(e));
            Vec::new()
        }
    };
    let schemes: Result<Vec<AssociationScheme>> = spec.schemes.iter().map(SchemeEntry::resolve).collect();
    push(
        "schemes",
        schemes.and_then(|s| {
            for scheme in &s {
                for n in &networks {
                    scheme.validate(n)?;
                }
            }
            Ok(s.iter().map(|x| x.label()).collect::<Vec<_>>().join(", "))
        }),
    );
    if !networks.is_empty() {
        push(
            "window",
            (|| {
                let mut worst = 0.0f64;
                for n in &networks {
                    let window = match spec.window_radius {
                        Some(r) => SimWindow::new(r)?,
                        None => SimWindow::for_network(n),
                    };
                    window.check(n)?;
                    worst = worst.max(window.campbell_ratio(n));
                }
                Ok(format!("largest share of interference outside the window {:.3}%", 100.0 * worst))
            })(),
        );
    }
    push("ilt", ilt_self_test());
    ValidationReport { checks }
}

/// Recovers the exponential and Erlang-2 distribution functions.
pub fn ilt_self_test() -> Result<String> {
    let spec = IltSpec::default();
    let exp = inverse_laplace_cdf(|s| 1.0 / (1.0 + s), 1.0, &spec)?.value;
    let erlang = inverse_laplace_cdf(|s| 1.0 / ((1.0 + s) * (1.0 + s)), 2.0, &spec)?.value;
    let err = (exp - (1.0 - (-1.0f64).exp())).abs().max((erlang - (1.0 - 3.0 * (-2.0f64).exp())).abs());
    if err > 1e-8 {
        return Err(Error::numerical("ilt_self_test", format!("error {err:.2e} exceeds 1e-8")));
    }
    Ok(format!("max error {err:.1e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        for name in PRESETS {
            let spec = ExperimentSpec::preset(name).unwrap();
            spec.validate().unwrap();
            let back = ExperimentSpec::from_json(&spec.to_json()).unwrap();
            assert_eq!(back, spec);
        }
        assert_eq!(ExperimentSpec::preset("fig3").unwrap().name, "fig3_coverage");
        assert!(ExperimentSpec::preset("fig9").is_err());
    }

    #[test]
    fn grid_must_increase() {
        let mut spec = ExperimentSpec::preset("fig1").unwrap();
        spec.sweep.grid = vec![2.0, 1.0];
        assert!(spec.validate().is_err());
    }

    #[test]
    fn sweep_variables_apply() {
        let base = NetworkConfig::table_ii(0.0);
        let n = SweepVariable::UsersPerFemto.apply(&base, 2.0).unwrap();
        assert!((n.user_intensity() - 100e-6).abs() < 1e-18);
        let n = SweepVariable::FemtoPerMacro.apply(&base, 20.0).unwrap();
        assert!((n.tier(2).intensity - 20e-6).abs() < 1e-18);
    }

    #[test]
    fn small_window_fails_validation() {
        let mut spec = ExperimentSpec::preset("fig3").unwrap();
        spec.window_radius = Some(300.0);
        let report = validate(&spec);
        assert!(!report.passed());
        let window = report.checks.iter().find(|c| c.name == "window").unwrap();
        assert!(window.detail.contains("use at least"));
    }

    #[test]
    fn table_summary_rows() {
        let spec = ExperimentSpec::preset("tableII_check").unwrap();
        let rows = run_experiment(&spec, RunOptions { analytic: true, monte_carlo: false }).unwrap();
        let macro_power = rows.iter().find(|r| r.metric == "active_power_1").unwrap();
        assert!((macro_power.analytic_lower.unwrap() - 331.5).abs() < 1e-9);
    }
}
