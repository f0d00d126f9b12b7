//! Special functions and quadrature shared by the samplers and exact engines.

use num_complex::Complex64;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub use statrs::function::gamma::{gamma, ln_gamma};

/// Compensated (Neumaier) summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<NeumaierSum>().value()
}

// B_2, B_4, ..., B_24
const BERNOULLI_EVEN: [f64; 12] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
];

/// Hurwitz zeta `sum_{k>=0} (k+q)^(-s)` for real `s > 0`, `s != 1`, `q > 0`, by
/// Euler–Maclaurin summation (analytic continuation for `s < 1`).
pub fn hurwitz_zeta(s: f64, q: f64) -> f64 {
    const N: usize = 24;
    let head: f64 = compensated_sum((0..N).map(|k| (k as f64 + q).powf(-s)));
    let n = N as f64 + q;
    let mut tail = n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s);
    // rising factorial s (s+1) ... (s+2j-2) and (2j)!
    let mut rising = s;
    let mut fact = 2.0;
    let mut npow = n.powf(-s - 1.0);
    for (j, b) in BERNOULLI_EVEN.iter().enumerate() {
        let term = b / fact * rising * npow;
        tail += term;
        if term.abs() < 1e-18 * head.abs() {
            break;
        }
        let k = 2.0 * (j as f64 + 1.0);
        rising *= (s + k - 1.0) * (s + k);
        fact *= (k + 1.0) * (k + 2.0);
        npow /= n * n;
    }
    head + tail
}

fn zeta_em(s: f64) -> f64 {
    hurwitz_zeta(s, 1.0)
}

/// `sin(pi x / 2)` with exact argument reduction modulo 4.
fn sin_half_pi(x: f64) -> f64 {
    let r = x.rem_euclid(4.0);
    if r.fract() == 0.0 {
        return [0.0, 1.0, 0.0, -1.0][r as usize];
    }
    (PI * r / 2.0).sin()
}

/// Sign and natural log of `|zeta(s)|` for real `s != 1`.
pub fn zeta_signed_ln(s: f64) -> (f64, f64) {
    if s > 0.0 {
        let z = zeta_em(s);
        (z.signum(), z.abs().ln())
    } else if s == 0.0 {
        (-1.0, 0.5f64.ln())
    } else {
        // zeta(s) = 2^s pi^(s-1) sin(pi s / 2) Gamma(1-s) zeta(1-s)
        let sn = sin_half_pi(s);
        if sn == 0.0 {
            return (0.0, f64::NEG_INFINITY);
        }
        let ln = s * 2f64.ln() + (s - 1.0) * PI.ln() + sn.abs().ln() + ln_gamma(1.0 - s)
            + zeta_em(1.0 - s).ln();
        (sn.signum(), ln)
    }
}

/// Riemann zeta for real `s != 1`.
pub fn zeta(s: f64) -> f64 {
    let (sign, ln) = zeta_signed_ln(s);
    sign * ln.exp()
}

/// `Li_s(e^{i theta})` for a fixed real non-integer order `s > 1` and `|theta| <= pi`,
/// via the expansion around `mu = 0`:
/// `Gamma(1-s) (-mu)^(s-1) + sum_k zeta(s-k) mu^k / k!` with `mu = i theta`.
#[derive(Debug, Clone)]
pub struct UnitCirclePolylog {
    s: f64,
    zeta_s: f64,
    gamma_1ms: f64,
    // sign and ln |zeta(s-k) / k!| for k >= 1
    coeffs: Vec<(f64, f64)>,
}

impl UnitCirclePolylog {
    pub fn new(s: f64) -> Self {
        assert!(s > 1.0 && s.fract() != 0.0, "order must be a non-integer > 1");
        let mut ln_fact = 0.0;
        let coeffs = (1..400usize)
            .map(|k| {
                ln_fact += (k as f64).ln();
                let (sign, ln_z) = zeta_signed_ln(s - k as f64);
                (sign, ln_z - ln_fact)
            })
            .collect();
        UnitCirclePolylog { s, zeta_s: zeta(s), gamma_1ms: gamma(1.0 - s), coeffs }
    }

    pub fn zeta_s(&self) -> f64 {
        self.zeta_s
    }

    /// `Li_s(e^{i theta}) - zeta(s)`, free of cancellation for small `theta`.
    pub fn eval_minus_zeta(&self, theta: f64) -> Complex64 {
        assert!(theta.abs() <= PI + 1e-12, "argument must lie in [-pi, pi]");
        if theta == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let mu = Complex64::new(0.0, theta);
        let singular = self.gamma_1ms * (-mu).powf(self.s - 1.0);
        let ln_abs_theta = theta.abs().ln();
        let mut series = Complex64::new(0.0, 0.0);
        // i^k cycles through 1, i, -1, -i; the sign of theta enters through theta^k
        for (i, &(sign, ln_c)) in self.coeffs.iter().enumerate() {
            let k = i + 1;
            if sign == 0.0 {
                continue;
            }
            let ln_mag = ln_c + k as f64 * ln_abs_theta;
            let mag = sign * ln_mag.exp();
            let tsign = if theta < 0.0 && k % 2 == 1 { -1.0 } else { 1.0 };
            let term = match k % 4 {
                0 => Complex64::new(mag, 0.0),
                1 => Complex64::new(0.0, mag),
                2 => Complex64::new(-mag, 0.0),
                _ => Complex64::new(0.0, -mag),
            } * tsign;
            series += term;
            if k > 4 && ln_mag < -40.0 {
                break;
            }
        }
        singular + series
    }

    pub fn eval(&self, theta: f64) -> Complex64 {
        self.eval_minus_zeta(theta) + self.zeta_s
    }
}

/// `Li_s(e^{i theta})`; see [`UnitCirclePolylog`].
pub fn polylog_unit_circle(s: f64, theta: f64) -> Complex64 {
    UnitCirclePolylog::new(s).eval(theta)
}

// Gauss-Kronrod 7-15 nodes and weights on [-1, 1].
const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
const G_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = GK_WEIGHTS[7] * fc;
    let mut gauss = G_WEIGHTS[3] * fc;
    for i in 0..7 {
        let x = h * GK_NODES[i];
        let s = f(c - x) + f(c + x);
        kronrod += GK_WEIGHTS[i] * s;
        if i % 2 == 1 {
            gauss += G_WEIGHTS[i / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// The 15 Kronrod nodes and weights mapped to `[a, b]`.
pub(crate) fn kronrod_nodes(a: f64, b: f64) -> [(f64, f64); 15] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut out = [(c, GK_WEIGHTS[7] * h); 15];
    for i in 0..7 {
        let x = h * GK_NODES[i];
        out[2 * i] = (c - x, GK_WEIGHTS[i] * h);
        out[2 * i + 1] = (c + x, GK_WEIGHTS[i] * h);
    }
    out
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Result of an adaptive quadrature.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

/// Globally adaptive Gauss–Kronrod quadrature of `f` over `[a, b]`, starting from
/// `initial_panels` equal panels.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    initial_panels: usize,
) -> Result<Quadrature> {
    const MAX_PANELS: usize = 20_000;
    let mut heap = BinaryHeap::new();
    let n0 = initial_panels.max(1);
    let w = (b - a) / n0 as f64;
    for i in 0..n0 {
        let lo = a + w * i as f64;
        let hi = if i + 1 == n0 { b } else { lo + w };
        let (value, err) = gk15(&f, lo, hi);
        heap.push(Panel { a: lo, b: hi, value, err });
    }
    loop {
        let total: f64 = compensated_sum(heap.iter().map(|p| p.value));
        let err: f64 = heap.iter().map(|p| p.err).sum();
        if !total.is_finite() {
            return Err(Error::Numeric {
                message: "non-finite integrand".into(),
                diagnostic: total,
            });
        }
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(Quadrature { value: total, error: err });
        }
        if heap.len() >= MAX_PANELS {
            return Err(Error::Numeric {
                message: "quadrature did not converge".into(),
                diagnostic: err,
            });
        }
        let worst = heap.pop().expect("nonempty");
        let mid = 0.5 * (worst.a + worst.b);
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let (value, err) = gk15(&f, lo, hi);
            heap.push(Panel { a: lo, b: hi, value, err });
        }
    }
}

/// Greatest common divisor.
pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
