//! Counter-based link gains.
//!
//! Every (trial, user, station) link gets its own fading and shadowing draw,
//! computed by hashing the key rather than by advancing a stream, so a link's
//! gain does not depend on the order links are visited or on how many other
//! links exist. Schemes simulated on the same trial see the same gains.

use crate::model::ChannelModel;

const STREAM_A: u64 = 0x9E37_79B9_7F4A_7C15;
const STREAM_B: u64 = 0xD1B5_4A32_D192_ED03;
const STREAM_C: u64 = 0x8CB9_2BA7_2F3D_8DD7;
/// Uniforms carry 53 bits, so `-ln u ≤ 53 ln 2`.
const UNIT_BITS: i32 = 53;

/// User id of the typical user at the origin.
pub const ORIGIN_USER: u64 = u64::MAX;

/// SplitMix64 finaliser.
pub(crate) fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform on `(0, 1]`.
fn unit(bits: u64) -> f64 {
    ((bits >> 11) + 1) as f64 * 2f64.powi(-UNIT_BITS)
}

#[derive(Debug, Clone)]
pub struct LinkGains {
    key: u64,
    sigma: f64,
    fading: bool,
    shadowing: bool,
}

impl LinkGains {
    pub fn new(channel: &ChannelModel, seed: u64, trial: u64) -> Self {
        LinkGains {
            key: mix(mix(seed ^ STREAM_A).wrapping_add(trial.wrapping_mul(STREAM_B))),
            sigma: channel.shadowing_sigma(),
            fading: channel.has_fading(),
            shadowing: channel.has_shadowing(),
        }
    }

    fn bits(&self, user: u64, station: u64, lane: u64) -> u64 {
        let h = mix(self.key.wrapping_add(user.wrapping_mul(STREAM_A)));
        let h = mix(h ^ station.wrapping_mul(STREAM_B));
        mix(h.wrapping_add(lane.wrapping_mul(STREAM_C)))
    }

    /// Unit-mean exponential fading, or one without fading.
    pub fn fading(&self, user: u64, station: u64) -> f64 {
        if self.fading {
            -unit(self.bits(user, station, 0)).ln()
        } else {
            1.0
        }
    }

    /// Log-normal shadowing with zero log-mean, or one without shadowing.
    pub fn shadowing(&self, user: u64, station: u64) -> f64 {
        if !self.shadowing {
            return 1.0;
        }
        let r = (-2.0 * unit(self.bits(user, station, 1)).ln()).sqrt();
        let angle = std::f64::consts::TAU * unit(self.bits(user, station, 2));
        (self.sigma * r * angle.cos()).exp()
    }

    pub fn gain(&self, user: u64, station: u64) -> f64 {
        self.fading(user, station) * self.shadowing(user, station)
    }

    /// Largest value [`LinkGains::fading`] can return.
    pub fn max_fading(&self) -> f64 {
        if self.fading {
            UNIT_BITS as f64 * std::f64::consts::LN_2
        } else {
            1.0
        }
    }

    /// Largest value [`LinkGains::shadowing`] can return.
    pub fn max_shadowing(&self) -> f64 {
        if self.shadowing {
            (self.sigma * (2.0 * UNIT_BITS as f64 * std::f64::consts::LN_2).sqrt()).exp()
        } else {
            1.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_match_the_channel() {
        let gains = LinkGains::new(&ChannelModel::rayleigh_lognormal(3.0), 7, 0);
        let n = 200_000u64;
        let mut fade = 0.0;
        let mut log_q = 0.0;
        let mut log_q2 = 0.0;
        for i in 0..n {
            fade += gains.fading(i, i % 97);
            let l = gains.shadowing(i % 1013, i).ln();
            log_q += l;
            log_q2 += l * l;
        }
        let nf = n as f64;
        assert!((fade / nf - 1.0).abs() < 0.01);
        assert!((log_q / nf).abs() < 0.01);
        let sigma = ChannelModel::rayleigh_lognormal(3.0).shadowing_sigma();
        assert!((log_q2 / nf - sigma * sigma).abs() < 0.01);
    }

    #[test]
    fn deterministic_and_keyed() {
        let c = ChannelModel::rayleigh_lognormal(3.0);
        let a = LinkGains::new(&c, 1, 2);
        assert_eq!(a.gain(3, 4), LinkGains::new(&c, 1, 2).gain(3, 4));
        assert_ne!(a.gain(3, 4), LinkGains::new(&c, 1, 3).gain(3, 4));
        assert_ne!(a.gain(3, 4), a.gain(4, 3));
        assert!(a.gain(ORIGIN_USER, 0) <= a.max_fading() * a.max_shadowing());
    }

    #[test]
    fn deterministic_channel_is_unity() {
        let g = LinkGains::new(&ChannelModel::DETERMINISTIC, 1, 1);
        assert_eq!(g.gain(5, 6), 1.0);
        assert_eq!(g.max_fading() * g.max_shadowing(), 1.0);
    }
}
