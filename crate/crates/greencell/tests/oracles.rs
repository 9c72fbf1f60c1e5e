//! Special functions checked against independent routes built on statrs.

use approx::assert_relative_eq;
use greencell::specfun::{ell, gamma, hbar, ln_gamma, upper_incomplete_gamma};
use statrs::function::beta::{beta, beta_reg};
use statrs::function::gamma as reference;

#[test]
fn gamma_matches_reference() {
    for x in [0.1, 0.5, 1.0, 1.5, 2.5, 7.25, 30.0, 120.0] {
        assert_relative_eq!(gamma(x), reference::gamma(x), max_relative = 1e-13);
        assert_relative_eq!(ln_gamma(x), reference::ln_gamma(x), epsilon = 1e-12, max_relative = 1e-13);
    }
}

#[test]
fn upper_incomplete_gamma_matches_reference() {
    for a in [0.25, 0.5, 1.0, 2.5, 6.0] {
        for x in [0.01, 0.5, 1.0, 3.0, 12.0, 40.0] {
            let expected = reference::gamma_ur(a, x) * reference::gamma(a);
            assert_relative_eq!(upper_incomplete_gamma(a, x).unwrap(), expected, max_relative = 1e-11);
        }
    }
}

/// `ħ(x, y) = x^y γ(1 - y, x) - (1 - e^{-x})`.
#[test]
fn hbar_via_lower_incomplete_gamma() {
    for y in [1.0 / 3.0, 0.4, 0.5, 0.8] {
        for x in [1e-3, 0.1, 1.0, 2.5, 10.0, 100.0] {
            let lower = reference::gamma_lr(1.0 - y, x) * reference::gamma(1.0 - y);
            let expected = x.powf(y) * lower + (-x).exp_m1();
            assert_relative_eq!(hbar(x, y).unwrap(), expected, epsilon = 1e-12, max_relative = 1e-10);
        }
    }
}

/// `ℓ(x, z) = x^z z B(x / (1 + x); 1 - z, z)`.
#[test]
fn ell_via_incomplete_beta() {
    for z in [0.25, 0.5, 2.0 / 3.0] {
        for x in [1e-3, 0.2, 1.0, 5.0, 300.0] {
            let incomplete = beta_reg(1.0 - z, z, x / (1.0 + x)) * beta(1.0 - z, z);
            let expected = x.powf(z) * z * incomplete;
            assert_relative_eq!(ell(x, z).unwrap(), expected, epsilon = 1e-12, max_relative = 1e-10);
        }
    }
}

#[test]
fn hbar_dominates_its_asymptote() {
    let y = 0.5;
    let x: f64 = 10.0;
    let asymptote = x.powf(y) * gamma(1.0 - y) - 1.0;
    let value = hbar(x, y).unwrap();
    assert!(value >= asymptote);
    assert!(value - asymptote < 1e-3);
}
