//! Finite-window realisations of the network and per-user association.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::rng::{LinkGains, ORIGIN_USER};
use crate::association::{AssociationScheme, GainUsage};
use crate::error::{Error, Result};
use crate::model::NetworkConfig;

/// Share of the mean interference allowed to come from outside the window.
pub const CAMPBELL_TOLERANCE: f64 = 1e-3;
/// Grid side limit per tier.
const MAX_GRID_SIDE: usize = 1024;

/// Disk of radius `radius` metres centred on the typical user.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimWindow {
    pub radius: f64,
}

impl SimWindow {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Config(format!("window radius must be finite and > 0, got {radius}")));
        }
        Ok(SimWindow { radius })
    }

    /// Reference distance for the interference check: the mean distance
    /// from a point to the nearest BS of any tier.
    pub fn reference_distance(network: &NetworkConfig) -> f64 {
        0.5 / network.total_intensity().sqrt()
    }

    /// Mean interference from beyond the window over mean interference from
    /// beyond the reference distance. By Campbell's formula each tier
    /// contributes `2π λ P r^{2-α} / (α - 2)` beyond `r`, so the ratio is
    /// `(r_0 / R)^{α-2}` whatever the tier mix.
    pub fn campbell_ratio(&self, network: &NetworkConfig) -> f64 {
        (Self::reference_distance(network) / self.radius).powf(network.pathloss_exponent() - 2.0)
    }

    /// Smallest radius meeting [`CAMPBELL_TOLERANCE`], rounded up to 100 m.
    pub fn for_network(network: &NetworkConfig) -> Self {
        let r0 = Self::reference_distance(network);
        let radius = r0 * CAMPBELL_TOLERANCE.powf(-1.0 / (network.pathloss_exponent() - 2.0));
        SimWindow { radius: (radius / 100.0).ceil() * 100.0 }
    }

    pub fn check(&self, network: &NetworkConfig) -> Result<()> {
        let ratio = self.campbell_ratio(network);
        if ratio > CAMPBELL_TOLERANCE {
            return Err(Error::Config(format!(
                "window radius {:.0} m leaves {:.2}% of the mean interference outside; use at least {:.0} m",
                self.radius,
                100.0 * ratio,
                Self::for_network(network).radius
            )));
        }
        Ok(())
    }

    /// Interior disk used for void and load statistics.
    pub fn interior_radius(&self) -> f64 {
        0.5 * self.radius
    }

    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.radius * self.radius
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Station {
    pub tier: usize,
    pub position: [f64; 2],
}

impl Station {
    pub fn distance_sq(&self, p: [f64; 2]) -> f64 {
        let dx = self.position[0] - p[0];
        let dy = self.position[1] - p[1];
        dx * dx + dy * dy
    }
}

/// BS and user positions of one trial. The typical user at the origin is
/// implicit and not in `users`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub stations: Vec<Station>,
    pub users: Vec<[f64; 2]>,
    pub window: SimWindow,
}

fn uniform_in_disk(rng: &mut ChaCha8Rng, radius: f64) -> [f64; 2] {
    let r = radius * rng.random::<f64>().sqrt();
    let angle = std::f64::consts::TAU * rng.random::<f64>();
    [r * angle.cos(), r * angle.sin()]
}

fn poisson_count(rng: &mut ChaCha8Rng, mean: f64) -> Result<usize> {
    if mean == 0.0 {
        return Ok(0);
    }
    let law = Poisson::new(mean).map_err(|e| Error::Config(format!("Poisson mean {mean}: {e}")))?;
    Ok(law.sample(rng) as usize)
}

impl Layout {
    /// Poisson BS tiers and, if `with_users`, Poisson users in the window.
    /// Trial `t` of seed `s` always yields the same layout.
    pub fn sample(network: &NetworkConfig, window: SimWindow, seed: u64, trial: u64, with_users: bool) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        let mut stations = Vec::new();
        for (k, tier) in network.tiers().iter().enumerate() {
            let n = poisson_count(&mut rng, tier.intensity * window.area())?;
            stations.extend((0..n).map(|_| Station { tier: k, position: uniform_in_disk(&mut rng, window.radius) }));
        }
        let users = if with_users {
            let n = poisson_count(&mut rng, network.user_intensity() * window.area())?;
            (0..n).map(|_| uniform_in_disk(&mut rng, window.radius)).collect()
        } else {
            Vec::new()
        };
        Ok(Layout { stations, users, window })
    }

    /// A layout with given points, for tests and hand-built scenarios.
    pub fn from_points(stations: Vec<Station>, users: Vec<[f64; 2]>, window: SimWindow) -> Self {
        Layout { stations, users, window }
    }
}

/// Bucket grid over one tier's stations.
#[derive(Debug, Clone)]
struct TierGrid {
    cell: f64,
    side: usize,
    low: f64,
    starts: Vec<u32>,
    ids: Vec<u32>,
}

impl TierGrid {
    fn build(layout: &Layout, tier: usize, intensity: f64) -> Self {
        let span = 2.0 * layout.window.radius;
        let target = (1.0 / intensity.sqrt()).max(span / MAX_GRID_SIDE as f64);
        let side = ((span / target).ceil() as usize).max(1);
        let cell = span / side as f64;
        let low = -layout.window.radius;
        let mut counts = vec![0u32; side * side + 1];
        let members: Vec<(usize, u32)> = layout
            .stations
            .iter()
            .enumerate()
            .filter(|(_, s)| s.tier == tier)
            .map(|(i, s)| (Self::index_of(low, cell, side, s.position), i as u32))
            .collect();
        for &(c, _) in &members {
            counts[c + 1] += 1;
        }
        for c in 0..side * side {
            counts[c + 1] += counts[c];
        }
        let mut fill = counts.clone();
        let mut ids = vec![0u32; members.len()];
        for &(c, i) in &members {
            ids[fill[c] as usize] = i;
            fill[c] += 1;
        }
        TierGrid { cell, side, low, starts: counts, ids }
    }

    fn coord(low: f64, cell: f64, side: usize, v: f64) -> usize {
        (((v - low) / cell).floor().max(0.0) as usize).min(side - 1)
    }

    fn index_of(low: f64, cell: f64, side: usize, p: [f64; 2]) -> usize {
        Self::coord(low, cell, side, p[1]) * side + Self::coord(low, cell, side, p[0])
    }

    fn cell_of(&self, p: [f64; 2]) -> (usize, usize) {
        (Self::coord(self.low, self.cell, self.side, p[0]), Self::coord(self.low, self.cell, self.side, p[1]))
    }

    fn members(&self, cx: usize, cy: usize) -> &[u32] {
        let c = cy * self.side + cx;
        &self.ids[self.starts[c] as usize..self.starts[c + 1] as usize]
    }

    /// Calls `visit` on every station in cells at Chebyshev ring `ring`
    /// around `(cx, cy)`.
    fn for_ring<F: FnMut(u32)>(&self, (cx, cy): (usize, usize), ring: usize, mut visit: F) {
        let (cx, cy, r, side) = (cx as isize, cy as isize, ring as isize, self.side as isize);
        let mut cell = |x: isize, y: isize| {
            if x >= 0 && y >= 0 && x < side && y < side {
                for &i in self.members(x as usize, y as usize) {
                    visit(i);
                }
            }
        };
        if r == 0 {
            cell(cx, cy);
            return;
        }
        for x in cx - r..=cx + r {
            cell(x, cy - r);
            cell(x, cy + r);
        }
        for y in cy - r + 1..cy + r {
            cell(cx - r, y);
            cell(cx + r, y);
        }
    }

    fn max_ring(&self, (cx, cy): (usize, usize)) -> usize {
        cx.max(self.side - 1 - cx).max(cy).max(self.side - 1 - cy)
    }
}

/// Stations of a layout indexed for association searches.
#[derive(Debug, Clone)]
pub(crate) struct StationIndex {
    grids: Vec<TierGrid>,
}

impl StationIndex {
    pub(crate) fn new(layout: &Layout, network: &NetworkConfig) -> Self {
        let grids = network.tiers().iter().enumerate().map(|(k, t)| TierGrid::build(layout, k, t.intensity)).collect();
        StationIndex { grids }
    }
}

/// `d^α` from `d²`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PathLoss {
    half_alpha: f64,
    integer: Option<i32>,
}

impl PathLoss {
    pub(crate) fn new(alpha: f64) -> Self {
        let half_alpha = 0.5 * alpha;
        let integer = (half_alpha.fract() == 0.0 && half_alpha < 16.0).then_some(half_alpha as i32);
        PathLoss { half_alpha, integer }
    }

    pub(crate) fn of_sq(&self, d2: f64) -> f64 {
        match self.integer {
            Some(n) => d2.powi(n),
            None => d2.powf(self.half_alpha),
        }
    }
}

/// Association search for one scheme on one layout.
pub(crate) struct Associator<'a> {
    layout: &'a Layout,
    index: &'a StationIndex,
    gains: &'a LinkGains,
    bias: Vec<f64>,
    usage: GainUsage,
    path: PathLoss,
    max_gain: f64,
    max_second: f64,
}

/// Serving station and the association value `ψ ‖B‖^{-α}` it achieved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Choice {
    pub station: usize,
    pub value: f64,
}

impl<'a> Associator<'a> {
    pub(crate) fn new(
        layout: &'a Layout,
        index: &'a StationIndex,
        gains: &'a LinkGains,
        scheme: &AssociationScheme,
        network: &NetworkConfig,
    ) -> Self {
        let usage = scheme.effective_usage(network.channel());
        let (max_first, max_second) = match usage {
            GainUsage::Full => (gains.max_fading(), gains.max_shadowing()),
            GainUsage::ShadowingOnly => (1.0, gains.max_shadowing()),
            GainUsage::None => (1.0, 1.0),
        };
        Associator {
            layout,
            index,
            gains,
            bias: (0..network.num_tiers()).map(|k| scheme.bias(network, k)).collect(),
            usage,
            path: PathLoss::new(network.pathloss_exponent()),
            max_gain: max_first * max_second,
            max_second,
        }
    }

    /// Observed gain of a link, or `None` when it cannot exceed `needed`.
    fn observed_gain(&self, user: u64, station: u64, needed: f64) -> Option<f64> {
        match self.usage {
            GainUsage::None => (1.0 > needed).then_some(1.0),
            GainUsage::ShadowingOnly => {
                let g = self.gains.shadowing(user, station);
                (g > needed).then_some(g)
            }
            GainUsage::Full => {
                let f = self.gains.fading(user, station);
                if f * self.max_second <= needed {
                    return None;
                }
                let g = f * self.gains.shadowing(user, station);
                (g > needed).then_some(g)
            }
        }
    }

    /// Station maximising `c_k G ‖B - p‖^{-α}` for the user at `p`.
    pub(crate) fn best(&self, user: u64, p: [f64; 2]) -> Option<Choice> {
        let mut best: Option<Choice> = None;
        let mut best_value = 0.0f64;
        let tiers = self.index.grids.len();
        let cells: Vec<(usize, usize)> = self.index.grids.iter().map(|g| g.cell_of(p)).collect();
        let mut done = vec![false; tiers];
        let mut ring = 0usize;
        loop {
            let mut active = false;
            for k in 0..tiers {
                if done[k] {
                    continue;
                }
                let grid = &self.index.grids[k];
                if ring > grid.max_ring(cells[k]) {
                    done[k] = true;
                    continue;
                }
                if ring >= 1 && best.is_some() {
                    let nearest = (ring - 1) as f64 * grid.cell;
                    let bound = self.bias[k] * self.max_gain / self.path.of_sq(nearest * nearest);
                    if bound <= best_value {
                        done[k] = true;
                        continue;
                    }
                }
                active = true;
                let bias = self.bias[k];
                grid.for_ring(cells[k], ring, |i| {
                    let d2 = self.layout.stations[i as usize].distance_sq(p);
                    let loss = self.path.of_sq(d2);
                    let needed = best_value * loss / bias;
                    if let Some(g) = self.observed_gain(user, i as u64, needed) {
                        let value = bias * g / loss;
                        if value > best_value || best.is_none() {
                            best_value = value;
                            best = Some(Choice { station: i as usize, value });
                        }
                    }
                });
            }
            if !active {
                return best;
            }
            ring += 1;
        }
    }

    /// Users (other than the typical one) served by each station.
    pub(crate) fn loads(&self) -> Vec<u32> {
        let mut loads = vec![0u32; self.layout.stations.len()];
        for (u, &p) in self.layout.users.iter().enumerate() {
            if let Some(c) = self.best(u as u64, p) {
                loads[c.station] += 1;
            }
        }
        loads
    }

    pub(crate) fn origin(&self) -> Option<Choice> {
        self.best(ORIGIN_USER, [0.0, 0.0])
    }
}

/// One network snapshot under one scheme, seen from the typical user.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub layout: Layout,
    /// Full channel gain from each station to the typical user.
    pub origin_gains: Vec<f64>,
    pub serving: Option<Choice>,
    /// Users other than the typical one served by each station. A station
    /// with none is void and dormant.
    pub station_users: Vec<u32>,
    pub signal: f64,
    /// Received power from non-void stations other than the serving one.
    pub interference: f64,
}

impl Realization {
    pub fn sir(&self) -> f64 {
        self.signal / self.interference
    }

    pub fn is_void(&self, station: usize) -> bool {
        self.station_users[station] == 0
    }

    pub fn serving_tier(&self) -> Option<usize> {
        self.serving.map(|c| self.layout.stations[c.station].tier)
    }
}

/// Received power at the origin from every station, full gain.
pub(crate) fn origin_powers(layout: &Layout, network: &NetworkConfig, gains: &LinkGains) -> (Vec<f64>, Vec<f64>) {
    let path = PathLoss::new(network.pathloss_exponent());
    let h: Vec<f64> = (0..layout.stations.len()).map(|i| gains.gain(ORIGIN_USER, i as u64)).collect();
    let rx = layout
        .stations
        .iter()
        .zip(&h)
        .map(|(s, g)| network.tier(s.tier).tx_power * g / path.of_sq(s.distance_sq([0.0, 0.0])))
        .collect();
    (h, rx)
}

/// Signal and interference at the origin. Without users every station is
/// treated as active.
pub(crate) fn origin_sir(rx: &[f64], serving: Option<Choice>, loads: Option<&[u32]>) -> (f64, f64) {
    let Some(c) = serving else {
        return (0.0, 0.0);
    };
    let interference = rx
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != c.station && loads.is_none_or(|l| l[i] > 0))
        .map(|(_, p)| p)
        .sum();
    (rx[c.station], interference)
}

/// Layout, association of every user and the typical user's SIR for trial
/// `trial` of `seed`.
pub fn sample_realization(
    network: &NetworkConfig,
    scheme: &AssociationScheme,
    window: SimWindow,
    seed: u64,
    trial: u64,
) -> Result<Realization> {
    scheme.validate(network)?;
    window.check(network)?;
    let layout = Layout::sample(network, window, seed, trial, true)?;
    Ok(realize(layout, network, scheme, seed, trial))
}

/// Associates every user of a given layout.
pub fn realize(layout: Layout, network: &NetworkConfig, scheme: &AssociationScheme, seed: u64, trial: u64) -> Realization {
    let gains = LinkGains::new(network.channel(), seed, trial);
    let index = StationIndex::new(&layout, network);
    let assoc = Associator::new(&layout, &index, &gains, scheme, network);
    let serving = assoc.origin();
    let station_users = assoc.loads();
    let (origin_gains, rx) = origin_powers(&layout, network, &gains);
    let (signal, interference) = origin_sir(&rx, serving, Some(&station_users));
    Realization { layout, origin_gains, serving, station_users, signal, interference }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ChannelModel;

    fn brute_force(layout: &Layout, net: &NetworkConfig, scheme: &AssociationScheme, gains: &LinkGains, user: u64, p: [f64; 2]) -> usize {
        let usage = scheme.effective_usage(net.channel());
        let path = PathLoss::new(net.pathloss_exponent());
        let value = |i: usize| {
            let s = &layout.stations[i];
            let g = match usage {
                GainUsage::Full => gains.gain(user, i as u64),
                GainUsage::ShadowingOnly => gains.shadowing(user, i as u64),
                GainUsage::None => 1.0,
            };
            scheme.bias(net, s.tier) * g / path.of_sq(s.distance_sq(p))
        };
        (0..layout.stations.len()).max_by(|&a, &b| value(a).total_cmp(&value(b))).unwrap()
    }

    #[test]
    fn grid_search_matches_brute_force() {
        let net = NetworkConfig::table_ii(100e-6);
        let window = SimWindow::new(1500.0).unwrap();
        for scheme in [AssociationScheme::gca(), AssociationScheme::gca_shadowing(), AssociationScheme::mrpa(), AssociationScheme::nba()] {
            for trial in 0..3 {
                let layout = Layout::sample(&net, window, 11, trial, true).unwrap();
                let gains = LinkGains::new(net.channel(), 11, trial);
                let index = StationIndex::new(&layout, &net);
                let assoc = Associator::new(&layout, &index, &gains, &scheme, &net);
                for (u, &p) in layout.users.iter().enumerate().take(150) {
                    let fast = assoc.best(u as u64, p).unwrap().station;
                    assert_eq!(fast, brute_force(&layout, &net, &scheme, &gains, u as u64, p), "{}", scheme.label());
                }
            }
        }
    }

    #[test]
    fn nearest_for_nba() {
        let net = NetworkConfig::table_ii(50e-6).with_channel(ChannelModel::rayleigh()).unwrap();
        let r = sample_realization(&net, &AssociationScheme::nba(), SimWindow::for_network(&net), 3, 0).unwrap();
        let nearest = (0..r.layout.stations.len())
            .min_by(|&a, &b| r.layout.stations[a].distance_sq([0.0; 2]).total_cmp(&r.layout.stations[b].distance_sq([0.0; 2])))
            .unwrap();
        assert_eq!(r.serving.unwrap().station, nearest);
    }

    #[test]
    fn same_seed_same_realization() {
        let net = NetworkConfig::table_ii(50e-6);
        let w = SimWindow::for_network(&net);
        let a = sample_realization(&net, &AssociationScheme::gca(), w, 5, 9).unwrap();
        let b = sample_realization(&net, &AssociationScheme::gca(), w, 5, 9).unwrap();
        assert_eq!(a, b);
        let c = sample_realization(&net, &AssociationScheme::gca(), w, 5, 10).unwrap();
        assert_ne!(a.layout, c.layout);
    }

    #[test]
    fn campbell_sizing() {
        let net = NetworkConfig::table_ii(0.0);
        let w = SimWindow::for_network(&net);
        assert!(w.check(&net).is_ok());
        assert!(w.campbell_ratio(&net) <= CAMPBELL_TOLERANCE);
        let small = SimWindow::new(0.5 * w.radius).unwrap();
        let err = small.check(&net).unwrap_err().to_string();
        assert!(err.contains(&format!("{:.0} m", w.radius)), "{err}");
    }

    #[test]
    fn lone_station_serves() {
        let net = NetworkConfig::table_ii(0.0);
        let window = SimWindow::new(1000.0).unwrap();
        let layout = Layout::from_points(vec![Station { tier: 2, position: [30.0, 40.0] }], vec![[1.0, 1.0]], window);
        let r = realize(layout, &net, &AssociationScheme::gca(), 0, 0);
        assert_eq!(r.serving.unwrap().station, 0);
        assert_eq!(r.station_users, vec![1]);
        assert_eq!(r.interference, 0.0);
        assert!(r.sir().is_infinite());
    }
}
