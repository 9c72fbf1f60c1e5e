//! Quadrature nodes for expectations over a non-negative channel gain.
//!
//! Every rule integrates in the logarithm of the gain, where the densities
//! involved are smooth and decay at least like a Gaussian or a double
//! exponential, so the trapezoid rule converges geometrically.

use std::f64::consts::PI;

/// Step of the log-domain trapezoid for gains with an exponential factor.
const LOG_STEP: f64 = 0.25;
/// `ln` of the smallest exponential gain kept. Low enough that moments of
/// order down to -1/2 lose less than `e^{-35}`.
const LOG_EXP_MIN: f64 = -70.0;
/// `ln` of the largest exponential gain kept; the mass above is `e^{-40}`.
const LOG_EXP_MAX: f64 = 3.7;
/// Standard normal range and steps.
const NORMAL_HALF_RANGE: f64 = 9.0;
const NORMAL_STEP: f64 = 0.5;
const NORMAL_INNER_STEP: f64 = 0.1;
const NEGLIGIBLE: f64 = 1e-300;

/// Gain values and weights, sorted by increasing gain; weights sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct GainNodes {
    values: Vec<f64>,
    weights: Vec<f64>,
}

/// Log-density of `ln E` for `E ~ Exp(1)`.
fn log_exp_density(v: f64) -> f64 {
    (v - v.exp()).exp()
}

fn normal_density(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

fn grid(lo: f64, hi: f64, step: f64) -> impl Iterator<Item = f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(move |i| lo + i as f64 * step)
}

impl GainNodes {
    /// A gain that is identically one.
    pub fn unit() -> Self {
        GainNodes { values: vec![1.0], weights: vec![1.0] }
    }

    /// `H ~ Exp(1)`.
    pub fn exponential() -> Self {
        Self::from_log_density(LOG_EXP_MIN, LOG_EXP_MAX, log_exp_density)
    }

    /// `Q = e^{σ X}`, `X ~ N(0,1)`.
    pub fn lognormal(sigma: f64) -> Self {
        if sigma == 0.0 {
            return Self::unit();
        }
        let mut values = Vec::new();
        let mut weights = Vec::new();
        for x in grid(-NORMAL_HALF_RANGE, NORMAL_HALF_RANGE, NORMAL_STEP) {
            values.push((sigma * x).exp());
            weights.push(NORMAL_STEP * normal_density(x));
        }
        let mut nodes = GainNodes { values, weights };
        nodes.sort();
        nodes
    }

    /// `H Q` with `H ~ Exp(1)` and `Q = e^{σ X}` independent. The density of
    /// `ln(H Q)` is a Gaussian smoothing of the double-exponential density,
    /// computed by an inner trapezoid in `X`.
    pub fn exponential_lognormal(sigma: f64) -> Self {
        if sigma == 0.0 {
            return Self::exponential();
        }
        let spread = NORMAL_HALF_RANGE * sigma;
        let inner: Vec<(f64, f64)> = grid(-NORMAL_HALF_RANGE, NORMAL_HALF_RANGE, NORMAL_INNER_STEP)
            .map(|x| (sigma * x, NORMAL_INNER_STEP * normal_density(x)))
            .collect();
        let density = |v: f64| inner.iter().map(|&(shift, w)| w * log_exp_density(v - shift)).sum();
        Self::from_log_density(LOG_EXP_MIN - spread, LOG_EXP_MAX + spread, density)
    }

    fn from_log_density<F: Fn(f64) -> f64>(lo: f64, hi: f64, density: F) -> Self {
        let mut values = Vec::new();
        let mut weights = Vec::new();
        for v in grid(lo, hi, LOG_STEP) {
            let w = LOG_STEP * density(v);
            if w > NEGLIGIBLE {
                values.push(v.exp());
                weights.push(w);
            }
        }
        GainNodes { values, weights }
    }

    fn sort(&mut self) {
        let mut pairs: Vec<(f64, f64)> = self.values.iter().copied().zip(self.weights.iter().copied()).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        (self.values, self.weights) = pairs.into_iter().unzip();
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `(gain, weight)` pairs in increasing gain order.
    pub fn iter(&self) -> impl DoubleEndedIterator<Item = (f64, f64)> + '_ {
        self.values.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn expect<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.iter().map(|(g, w)| w * f(g)).sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::gamma;

    #[test]
    fn weights_sum_to_one() {
        for nodes in [
            GainNodes::unit(),
            GainNodes::exponential(),
            GainNodes::lognormal(0.69),
            GainNodes::exponential_lognormal(0.69),
        ] {
            assert!((nodes.total_weight() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn fractional_moments() {
        let sigma: f64 = 0.690_775_527_898_213_7;
        for &t in &[0.5, -0.5, 0.25] {
            let e = GainNodes::exponential().expect(|g| g.powf(t));
            assert!((e - gamma(1.0 + t)).abs() < 1e-12, "t={t}");
            let q = GainNodes::lognormal(sigma).expect(|g| g.powf(t));
            assert!((q - (0.5 * t * t * sigma * sigma).exp()).abs() < 1e-12);
            let v = GainNodes::exponential_lognormal(sigma).expect(|g| g.powf(t));
            assert!((v - gamma(1.0 + t) * (0.5 * t * t * sigma * sigma).exp()).abs() < 1e-11);
        }
    }

    #[test]
    fn sorted_ascending() {
        let n = GainNodes::exponential_lognormal(0.5);
        assert!(n.iter().zip(n.iter().skip(1)).all(|(a, b)| a.0 < b.0));
    }
}
