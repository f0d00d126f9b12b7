//! The intermittent maps `T_gamma` with return set `Omega = [1/2, 1]`: orbits,
//! return times, an Ulam approximation of the invariant density and Monte
//! Carlo occupation statistics.

mod orbits;
mod ulam;

pub use orbits::{empirical_return_sequence, return_time_tail, verify_umbrella_mc, ReturnSequence, UmbrellaConfig};
pub use ulam::{ulam_density, LsvSystem, UlamOptions};

use crate::error::{domain, Result};
use crate::paths::Censored;
use crate::processes::GammaIndex;

/// Default iteration cap for return times.
pub const DEFAULT_RETURN_CAP: u64 = 10_000_000;

/// `T x = x (1 + (2x)^(1/gamma))` on `[0, 1/2)` and `2x - 1` on `[1/2, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LsvMap {
    gamma: GammaIndex,
    inv: f64,
    int_exp: Option<i32>,
}

impl LsvMap {
    pub fn new(gamma: GammaIndex) -> Self {
        let inv = 1.0 / gamma.get();
        let int_exp = (inv.fract() == 0.0 && inv <= 64.0).then_some(inv as i32);
        LsvMap { gamma, inv, int_exp }
    }

    pub fn gamma(&self) -> GammaIndex {
        self.gamma
    }

    /// Branch evaluation without the domain check.
    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        if x < 0.5 {
            let y = 2.0 * x;
            let p = match self.int_exp {
                Some(k) => y.powi(k),
                None => y.powf(self.inv),
            };
            (x * (1.0 + p)).min(1.0)
        } else {
            2.0 * x - 1.0
        }
    }

    /// Inverse of the left branch: the `x in [0, 1/2]` with `T x = y`.
    pub(crate) fn left_inverse(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        if y >= 1.0 {
            return 0.5;
        }
        let (mut lo, mut hi) = (0.0f64, 0.5f64);
        let mut x = y.min(0.5);
        for _ in 0..200 {
            let fx = x * (1.0 + (2.0 * x).powf(self.inv)) - y;
            if fx == 0.0 {
                return x;
            }
            if fx > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let d = 1.0 + (1.0 + self.inv) * (2.0 * x).powf(self.inv);
            let next = x - fx / d;
            x = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
            if hi - lo <= 4.0 * f64::EPSILON * hi {
                break;
            }
        }
        x
    }
}

/// `T_gamma(x)` for `x in [0, 1]`.
pub fn lsv_map(gamma: f64, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return domain(format!("x = {x} outside [0, 1]"));
    }
    Ok(LsvMap::new(GammaIndex::new(gamma)?).apply(x))
}

/// First `j >= 1` with `T^j x in Omega`; censored at `cap`.
pub fn return_time(gamma: f64, x: f64, cap: u64) -> Result<Censored<u64>> {
    if !(0.5..=1.0).contains(&x) {
        return domain(format!("x = {x} outside Omega = [1/2, 1]"));
    }
    Ok(return_time_with(&LsvMap::new(GammaIndex::new(gamma)?), x, cap))
}

pub(crate) fn return_time_with(map: &LsvMap, mut x: f64, cap: u64) -> Censored<u64> {
    for j in 1..=cap {
        x = map.apply(x);
        if x >= 0.5 {
            return Censored { value: j, censored: false };
        }
    }
    Censored { value: cap, censored: true }
}

#[cfg(test)]
mod tests;
