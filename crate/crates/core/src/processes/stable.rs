//! One-sided stable variates and densities.
//!
//! `S` denotes the standard law with Laplace transform `exp(-lambda^gamma)` and
//! `Z = S / Gamma(1+gamma)^(1/gamma)` the normalized law with `E Z^(-gamma) = 1`.

use super::GammaIndex;
use crate::error::{domain, Result};
use crate::numeric::{gamma as gamma_fn, integrate, ln_gamma};
use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, Open01};
use std::f64::consts::PI;

/// `Gamma(1+gamma)^(1/gamma)`, the factor with `Z = S / c`.
pub fn z_scale(g: GammaIndex) -> f64 {
    gamma_fn(1.0 + g.get()).powf(1.0 / g.get())
}

/// Standard one-sided stable variate by the Kanter / Chambers-Mallows-Stuck transform.
pub fn sample_standard_stable<R: Rng + ?Sized>(g: GammaIndex, rng: &mut R) -> f64 {
    let g = g.get();
    let u = PI * Distribution::<f64>::sample(&Open01, rng);
    let e: f64 = Exp1.sample(rng);
    (g * u).sin() / u.sin().powf(1.0 / g) * (((1.0 - g) * u).sin() / e).powf((1.0 - g) / g)
}

/// `q(u) = sin u / (sin(gamma u)^gamma sin((1-gamma) u)^(1-gamma))` on `(0, pi)`.
/// With `U` uniform on `(0, pi)` and `E ~ Exp(1)`, `S^(-gamma) = E^(1-gamma) q(U)`.
#[inline]
pub(crate) fn kanter_q(g: f64, u: f64) -> f64 {
    u.sin() / ((g * u).sin().powf(g) * ((1.0 - g) * u).sin().powf(1.0 - g))
}

/// Exact sampler of the Mittag-Leffler marginal `m(1) = Gamma(1+gamma) S^(-gamma)` and of
/// its size-biased version, the tied-down marginal `w(1)`.
#[derive(Debug, Clone)]
pub struct MarginalSampler {
    gamma: f64,
    factor: f64,
    envelope: f64,
    shape: Gamma<f64>,
}

impl MarginalSampler {
    pub fn new(g: GammaIndex) -> Self {
        let gamma = g.get();
        // q decreases on (0, pi) from its limit at 0; the grid maximum guards the envelope
        let at_zero = 1.0 / (gamma.powf(gamma) * (1.0 - gamma).powf(1.0 - gamma));
        let grid_max = (1..4096)
            .map(|k| kanter_q(gamma, PI * k as f64 / 4096.0))
            .fold(at_zero, f64::max);
        MarginalSampler {
            gamma,
            factor: gamma_fn(1.0 + gamma),
            envelope: 1.01 * grid_max,
            shape: Gamma::new(2.0 - gamma, 1.0).expect("valid shape"),
        }
    }

    /// A draw of `m(1)`.
    pub fn ml<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u = PI * Distribution::<f64>::sample(&Open01, rng);
        let e: f64 = Exp1.sample(rng);
        self.factor * e.powf(1.0 - self.gamma) * kanter_q(self.gamma, u)
    }

    /// A draw of the size-biased law `x P(m(1) in dx)`.
    pub fn tied<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u = loop {
            let u = PI * Distribution::<f64>::sample(&Open01, rng);
            let v: f64 = rng.random();
            let q = kanter_q(self.gamma, u);
            if v * self.envelope < q {
                break q;
            }
        };
        let e = self.shape.sample(rng);
        self.factor * e.powf(1.0 - self.gamma) * u
    }
}

fn zolotarev_a(g: f64, u: f64) -> f64 {
    let r = 1.0 / (1.0 - g);
    (g * u).sin().powf(g * r) * ((1.0 - g) * u).sin() / u.sin().powf(r)
}

fn check_x(x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("stable density needs finite x > 0, got {x}"));
    }
    Ok(())
}

// Beyond this value of x^(-gamma) the tail series converges fast; below it the
// Zolotarev integrand is smooth enough for adaptive quadrature.
const SERIES_THRESHOLD: f64 = 0.3;

// sum over k >= 1 of (-1)^(k+1) Gamma(k g + shift) / k! sin(k pi g) x^(-k g)
fn tail_series(g: f64, x: f64, shift: f64) -> f64 {
    let lnx = x.ln();
    let mut sum = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        let ln_mag = ln_gamma(kf * g + shift) - ln_gamma(kf + 1.0) - kf * g * lnx;
        let term = ln_mag.exp() * (kf * PI * g).sin();
        sum += if k % 2 == 1 { term } else { -term };
        if ln_mag < -40.0 + sum.abs().max(1e-300).ln() {
            break;
        }
    }
    sum / PI
}

/// Density of the standard law `S`: Zolotarev's integral, or the convergent tail
/// series for large `x`.
pub fn standard_stable_density(g: GammaIndex, x: f64) -> Result<f64> {
    check_x(x)?;
    let g = g.get();
    if x.powf(-g) <= SERIES_THRESHOLD {
        return Ok(tail_series(g, x, 1.0) / x);
    }
    let alpha = g / (1.0 - g);
    let y = x.powf(-alpha);
    let q = integrate(
        |u| {
            let a = zolotarev_a(g, u);
            let v = a * (-a * y).exp();
            if v.is_finite() { v } else { 0.0 }
        },
        0.0,
        PI,
        1e-300,
        1e-11,
        64,
    )?;
    Ok(alpha * x.powf(-1.0 / (1.0 - g)) * q.value / PI)
}

/// Distribution function of the standard law `S`.
pub fn standard_stable_cdf(g: GammaIndex, x: f64) -> Result<f64> {
    check_x(x)?;
    let g = g.get();
    if x.powf(-g) <= SERIES_THRESHOLD {
        return Ok(1.0 - tail_series(g, x, 0.0));
    }
    let y = x.powf(-g / (1.0 - g));
    let q = integrate(|u| (-zolotarev_a(g, u) * y).exp(), 0.0, PI, 1e-300, 1e-11, 64)?;
    Ok(q.value / PI)
}

/// Density of the normalized law `Z` with `E Z^(-gamma) = 1`.
pub fn stable_density(g: GammaIndex, x: f64) -> Result<f64> {
    check_x(x)?;
    let c = z_scale(g);
    Ok(c * standard_stable_density(g, c * x)?)
}

/// Closed-form density of `S` at `gamma = 1/2`, the Levy law.
pub fn levy_density(x: f64) -> f64 {
    x.powf(-1.5) * (-0.25 / x).exp() / (2.0 * PI.sqrt())
}

/// Closed-form distribution function of `S` at `gamma = 1/2`.
pub fn levy_cdf(x: f64) -> f64 {
    statrs::function::erf::erfc(0.5 / x.sqrt())
}
