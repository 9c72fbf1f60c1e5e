//! Interference kernels.
//!
//! `hbar(x, y) = x^y [Γ(1-y) + y Γ(-y, x)] - 1 = ∫_1^∞ (1 - e^{-x u^{-1/y}}) du`
//! is the Laplace functional of a PPP of unit-gain interferers beyond the
//! serving distance; `ell(x, z) = ∫_1^∞ x u^{-1/z} / (1 + x u^{-1/z}) du` is
//! the same functional once each interferer carries an exponential gain.
//!
//! Both kernels are analytic off the negative real axis. The complex
//! versions are what the numerical Laplace inversion evaluates, at points
//! with positive real part.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::gamma::gamma;
use super::quad::{integrate, Domain};
use crate::error::{Error, Result};

const SERIES_RADIUS: f64 = 2.5;
/// Beyond this real part `e^{-z}` is below 1e-17 and the correction term of
/// `hbar` is dropped.
const ASYMPTOTIC_RE: f64 = 40.0;
const MAX_TERMS: usize = 2000;

pub(crate) fn check_exponent(op: &'static str, y: f64) -> Result<()> {
    if !(y > 0.0 && y < 1.0) {
        return Err(Error::domain(op, format!("exponent must lie in (0,1), got {y}")));
    }
    Ok(())
}

fn check_argument(op: &'static str, x: f64) -> Result<()> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::domain(op, format!("argument must be finite and >= 0, got {x}")));
    }
    Ok(())
}

/// `ħ(x, y)` for `x ≥ 0`, `y ∈ (0,1)`.
///
/// # Example
///
/// ```
/// use greencell::specfun::hbar;
/// assert_eq!(hbar(0.0, 0.5).unwrap(), 0.0);
/// // Large arguments approach x^y Γ(1-y) - 1 from above.
/// let x: f64 = 1.0e4;
/// let approx = x.sqrt() * std::f64::consts::PI.sqrt() - 1.0;
/// assert!(hbar(x, 0.5).unwrap() >= approx);
/// ```
pub fn hbar(x: f64, y: f64) -> Result<f64> {
    check_exponent("hbar", y)?;
    check_argument("hbar", x)?;
    Ok(hbar_complex(Complex64::new(x, 0.0), y).re)
}

/// `ħ(z, y)` continued to `Re z ≥ 0`. The caller guarantees `y ∈ (0,1)`.
pub fn hbar_complex(z: Complex64, y: f64) -> Complex64 {
    if z == Complex64::new(0.0, 0.0) {
        return z;
    }
    if z.norm() < SERIES_RADIUS {
        return hbar_series(z, y);
    }
    let lead = z.powf(y) * gamma(1.0 - y) - 1.0;
    if z.re > ASYMPTOTIC_RE {
        return lead;
    }
    // y z^y Γ(-y, z) = y e^{-z} h(z), with h the continued fraction.
    lead + y * (-z).exp() * incomplete_gamma_cf(-y, z)
}

/// `z e^{-z} Σ (r_n - 1) z^n / (n+1)!` with `r_n = Π_{k=1}^{n+1} k/(k-y)`.
/// Combining the two series term by term avoids the cancellation between
/// `z^y γ(1-y, z)` and `1 - e^{-z}` at small `|z|`.
fn hbar_series(z: Complex64, y: f64) -> Complex64 {
    let mut ratio = 1.0 / (1.0 - y);
    let mut power = Complex64::new(1.0, 0.0);
    let mut fact = 1.0;
    let mut sum = Complex64::new(ratio - 1.0, 0.0);
    for n in 1..MAX_TERMS {
        let nf = n as f64;
        ratio *= (nf + 1.0) / (nf + 1.0 - y);
        power *= z;
        fact *= nf + 1.0;
        let term = power * ((ratio - 1.0) / fact);
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    z * (-z).exp() * sum
}

/// Continued fraction `h` with `Γ(a, z) = e^{-z} z^a h`, modified Lentz.
fn incomplete_gamma_cf(a: f64, z: Complex64) -> Complex64 {
    let tiny = Complex64::new(1e-300, 0.0);
    let mut b = z + (1.0 - a);
    let mut c = Complex64::new(1e300, 0.0);
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_TERMS {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = b + d * an;
        if d.norm() < 1e-300 {
            d = tiny;
        }
        c = b + an / c;
        if c.norm() < 1e-300 {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).norm() < 4.0 * f64::EPSILON {
            break;
        }
    }
    h
}

/// `ℓ(x, z)` for `x ≥ 0`, `z ∈ (0,1)`.
///
/// Evaluated by convergent series; [`ell_first_form`] and
/// [`ell_second_form`] evaluate the two printed integral forms by quadrature.
///
/// # Example
///
/// ```
/// use greencell::specfun::ell;
/// let v = ell(1.0, 0.5).unwrap();
/// assert!((v - std::f64::consts::FRAC_PI_4).abs() < 1e-14);
/// ```
pub fn ell(x: f64, z: f64) -> Result<f64> {
    check_exponent("ell", z)?;
    check_argument("ell", x)?;
    Ok(ell_complex(Complex64::new(x, 0.0), z).re)
}

/// `ℓ(w, z)` continued to `Re w ≥ 0`. The caller guarantees `z ∈ (0,1)`.
pub fn ell_complex(w: Complex64, z: f64) -> Complex64 {
    let r = w.norm();
    if r == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    if r <= 0.7 {
        // Σ_{n≥1} (-1)^{n+1} w^n / (n/z - 1)
        let mut sum = Complex64::new(0.0, 0.0);
        let mut power = Complex64::new(1.0, 0.0);
        for n in 1..MAX_TERMS {
            power *= -w;
            let term = -power / (n as f64 / z - 1.0);
            sum += term;
            if term.norm() <= 1e-17 * sum.norm() {
                break;
            }
        }
        sum
    } else if r >= 1.4 {
        // w^z πz/sin(πz) - Σ_{n≥0} (-1)^n z/(n+z) w^{-n}
        let inv = -1.0 / w;
        let mut sum = Complex64::new(1.0, 0.0);
        let mut power = Complex64::new(1.0, 0.0);
        for n in 1..MAX_TERMS {
            power *= inv;
            let term = power * (z / (n as f64 + z));
            sum += term;
            if term.norm() <= 1e-17 * sum.norm() {
                break;
            }
        }
        w.powf(z) * (PI * z / (PI * z).sin()) - sum
    } else {
        // z w (1+w)^{z-1} Σ_n (1-z)_n/n! · u^n/(n+1-z), u = w/(1+w)
        let one_plus = w + 1.0;
        let u = w / one_plus;
        let mut coeff = 1.0;
        let mut power = Complex64::new(1.0, 0.0);
        let mut sum = Complex64::new(1.0 / (1.0 - z), 0.0);
        for n in 1..MAX_TERMS {
            let nf = n as f64;
            coeff *= (nf - z) / nf;
            power *= u;
            let term = power * (coeff / (nf + 1.0 - z));
            sum += term;
            if term.norm() <= 1e-17 * sum.norm() {
                break;
            }
        }
        w * one_plus.powf(z - 1.0) * sum * z
    }
}

const FORM_TOL: f64 = 1e-15;

/// `x^z (πz/sin πz - ∫_0^{x^{-z}} dt / (1 + t^{1/z}))`, by quadrature.
pub fn ell_first_form(x: f64, z: f64) -> Result<f64> {
    check_exponent("ell", z)?;
    check_argument("ell", x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    let upper = x.powf(-z);
    let inner = integrate(|t| 1.0 / (1.0 + t.powf(1.0 / z)), Domain::Finite(0.0, upper), FORM_TOL)?;
    Ok(x.powf(z) * (PI * z / (PI * z).sin() - inner.value))
}

/// `x^z (πz/sin πz + ∫_0^{x^{-z}} t^{1/z} / (1 + t^{1/z}) dt) - 1`, by quadrature.
pub fn ell_second_form(x: f64, z: f64) -> Result<f64> {
    check_exponent("ell", z)?;
    check_argument("ell", x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    let upper = x.powf(-z);
    let inner = integrate(
        |t| {
            let p = t.powf(1.0 / z);
            p / (1.0 + p)
        },
        Domain::Finite(0.0, upper),
        FORM_TOL,
    )?;
    Ok(x.powf(z) * (PI * z / (PI * z).sin() + inner.value) - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ell_quarter_pi() {
        assert!((ell(1.0, 0.5).unwrap() - PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn ell_bands_are_continuous() {
        for &z in &[0.3, 0.5, 0.8] {
            for &r in &[0.7, 1.4] {
                for &phase in &[0.0, 0.7, 1.5] {
                    let w = Complex64::from_polar(r, phase);
                    let eps = Complex64::from_polar(1e-12, phase);
                    let a = ell_complex(w - eps, z);
                    let b = ell_complex(w + eps, z);
                    assert!((a - b).norm() < 1e-10, "z={z} r={r} phase={phase}");
                }
            }
        }
    }

    #[test]
    fn hbar_small_argument_slope() {
        // ħ(x, y) ≈ x y/(1-y) as x → 0.
        let y = 0.5;
        let x = 1e-9;
        assert!((hbar(x, y).unwrap() / x - 1.0).abs() < 1e-8);
    }

    #[test]
    fn hbar_series_and_fraction_agree_at_switch() {
        for &y in &[0.25, 0.5, 0.8] {
            for &phase in &[0.0, 0.5, 1.4] {
                let w = Complex64::from_polar(SERIES_RADIUS, phase);
                let a = hbar_series(w, y);
                let lead = w.powf(y) * gamma(1.0 - y) - 1.0;
                let b = lead + y * (-w).exp() * incomplete_gamma_cf(-y, w);
                assert!((a - b).norm() < 1e-12 * a.norm().max(1.0), "y={y} phase={phase}");
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(hbar(1.0, 1.0).is_err());
        assert!(hbar(-1.0, 0.5).is_err());
        assert!(ell(1.0, 0.0).is_err());
    }
}
