//! Local limit theorem checks for sums of iid lifetimes.

use super::conv::convolution_power;
use super::{Family, LifetimeDist};
use crate::error::{config, domain, Error, Result};
use crate::numeric::{gamma as gamma_fn, integrate, kronrod_nodes, UnitCirclePolylog};
use crate::processes::{stable_density, GammaIndex};
use crate::stats::{ComparisonReport, Estimate};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Compact window of `kappa = k / b(n)` values and the number of grid points in it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaWindow {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl KappaWindow {
    pub fn new(lo: f64, hi: f64, points: usize) -> Result<Self> {
        if !(lo > 0.0 && lo < hi && hi.is_finite()) || points < 2 {
            return domain(format!("invalid kappa window [{lo}, {hi}] with {points} points"));
        }
        Ok(KappaWindow { lo, hi, points })
    }

    fn grid(&self) -> impl Iterator<Item = f64> + '_ {
        let step = (self.hi - self.lo) / (self.points - 1) as f64;
        (0..self.points).map(move |i| self.lo + step * i as f64)
    }
}

/// `b(n)`: solves `P(phi > b) = 1 / (n Gamma(1+gamma) Gamma(1-gamma))`, so that
/// `phi_n / b(n)` converges to the normalized stable law.
pub fn llt_scale(f: &LifetimeDist, gamma: f64, n: usize) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return config(format!("the LLT needs gamma in (0, 1), got {gamma}"));
    }
    let target = 1.0 / (n as f64 * gamma_fn(1.0 + gamma) * gamma_fn(1.0 - gamma));
    let mut hi = 1.0;
    while f.tail_smooth(hi) >= target {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::Numeric { message: "tail does not reach the LLT target".into(), diagnostic: target });
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f.tail_smooth(mid) >= target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

// Node budget for the characteristic-function quadrature.
const MAX_NODES: usize = 4_000_000;

/// Law of the sum of `n` iid zeta(`gamma`) lifetimes, by inversion of the characteristic
/// function `Li_{1+gamma}(e^{i theta}) / zeta(1+gamma)` on the rescaled frequency
/// `v = b theta`, `b` a reference scale. Quadrature panels resolve `pmf(k)` for
/// `k / b <= kappa_max`.
#[derive(Debug, Clone)]
pub struct ZetaSumLaw {
    b: f64,
    nodes: Vec<f64>,
    // quadrature weight times the characteristic function at each node
    values: Vec<Complex64>,
}

impl ZetaSumLaw {
    pub fn new(gamma: f64, n: usize, b: f64, kappa_max: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) || n == 0 || !(b > 0.0) || !(kappa_max > 0.0) {
            return domain("zeta sum law needs gamma in (0, 1), n >= 1, b > 0 and kappa_max > 0");
        }
        let li = UnitCirclePolylog::new(1.0 + gamma);
        let zs = li.zeta_s();
        let v_end = PI * b;
        let cf = |v: f64| -> Complex64 {
            let z = li.eval_minus_zeta(v / b) / zs;
            // n log(1 + z) without cancellation
            let re = 0.5 * (2.0 * z.re + z.norm_sqr()).ln_1p();
            let im = z.im.atan2(1.0 + z.re);
            (Complex64::new(re, im) * n as f64).exp()
        };
        // about a quarter period of the fastest oscillation per panel
        let width = 0.5f64.min(1.5 / kappa_max);
        let mut edges = vec![0.0];
        let mut v = 1e-10 * width;
        while v < width && v < v_end {
            edges.push(v);
            v *= 10.0;
        }
        let mut nodes = Vec::new();
        let mut values = Vec::new();
        let push_panel = |a: f64, c: f64, nodes: &mut Vec<f64>, values: &mut Vec<Complex64>| {
            for (x, w) in kronrod_nodes(a, c) {
                nodes.push(x);
                values.push(cf(x) * w);
            }
        };
        for w in edges.windows(2) {
            push_panel(w[0], w[1], &mut nodes, &mut values);
        }
        let mut a = *edges.last().expect("nonempty");
        while a < v_end {
            let c = (a + width).min(v_end);
            push_panel(a, c, &mut nodes, &mut values);
            a = c;
            if cf(a).norm() < 1e-18 {
                break;
            }
            if nodes.len() > MAX_NODES {
                return Err(Error::MemoryBound {
                    message: "characteristic function decays too slowly".into(),
                    suggested: n.saturating_mul(4),
                });
            }
        }
        Ok(ZetaSumLaw { b, nodes, values })
    }

    /// Reference scale `b` used for the frequency variable.
    pub fn scale(&self) -> f64 {
        self.b
    }

    /// `P(S_n = k)`.
    pub fn pmf(&self, k: u64) -> f64 {
        let kappa = k as f64 / self.b;
        let s: f64 = self
            .nodes
            .iter()
            .zip(&self.values)
            .map(|(&v, c)| {
                let (sn, cs) = (kappa * v).sin_cos();
                c.re * cs + c.im * sn
            })
            .sum();
        s / (PI * self.b)
    }

    /// `P(lo <= S_n <= hi)`.
    pub fn mass_between(&self, lo: u64, hi: u64) -> f64 {
        if hi < lo {
            return 0.0;
        }
        let len = (hi - lo + 1) as f64;
        let s: f64 = self
            .nodes
            .iter()
            .zip(&self.values)
            .map(|(&v, c)| {
                let theta = v / self.b;
                // sum_{k=lo}^{hi} e^{-ik theta}
                let half = 0.5 * theta;
                let dir = if half.sin() == 0.0 { len } else { (len * half).sin() / half.sin() };
                let phase = -(lo as f64 + 0.5 * (len - 1.0)) * theta;
                let k = Complex64::from_polar(dir, phase);
                (c * k).re
            })
            .sum();
        s / (PI * self.b)
    }
}

/// Scaled masses `b P(phi_n = k)` against the stable density on a kappa grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LltProfile {
    pub n: usize,
    pub b: f64,
    pub span: u64,
    pub ks: Vec<u64>,
    pub scaled: Vec<f64>,
    pub reference: Vec<f64>,
    pub sup_error: f64,
    pub peak_density: f64,
    /// `P(phi_n in window)`.
    pub window_mass: f64,
    /// Integral of the limit density over the window.
    pub window_reference: f64,
    /// Largest `|P(phi_n = k)|` over checked inadmissible residues (arithmetic case).
    pub off_lattice_max: f64,
}

enum SumLaw {
    Zeta { law: ZetaSumLaw, span: u64, residue: u64 },
    Exact(Vec<f64>),
}

impl SumLaw {
    fn pmf(&self, n: usize, k: u64) -> f64 {
        match self {
            SumLaw::Zeta { law, span, residue } => {
                // phi = span psi + residue with psi + 1 zeta-distributed
                let shift = n as u64 * residue;
                if k < shift || !(k - shift).is_multiple_of(*span) {
                    return 0.0;
                }
                law.pmf((k - shift) / span + n as u64)
            }
            SumLaw::Exact(p) => p.get(k as usize).copied().unwrap_or(0.0),
        }
    }

    fn mass_between(&self, n: usize, lo: u64, hi: u64) -> f64 {
        match self {
            SumLaw::Zeta { law, span, residue } => {
                let shift = n as u64 * residue;
                // admissible k = shift + span j  maps to  m = j + n
                let j_lo = lo.saturating_sub(shift).div_ceil(*span);
                if hi < shift {
                    return 0.0;
                }
                let j_hi = (hi - shift) / span;
                law.mass_between(j_lo + n as u64, j_hi + n as u64)
            }
            SumLaw::Exact(p) => p[lo as usize..=(hi as usize).min(p.len() - 1)].iter().sum(),
        }
    }
}

fn peak_density(g: GammaIndex) -> Result<f64> {
    let mut best = (0.0, 0.0);
    for i in 0..=400 {
        let x = 10f64.powf(-3.0 + 4.0 * i as f64 / 400.0);
        let d = stable_density(g, x)?;
        if d > best.1 {
            best = (x, d);
        }
    }
    // golden-section refinement around the grid maximum
    let (mut a, mut c) = (best.0 / 1.03, best.0 * 1.03);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let x1 = c - r * (c - a);
        let x2 = a + r * (c - a);
        if stable_density(g, x1)? > stable_density(g, x2)? {
            c = x2;
        } else {
            a = x1;
        }
    }
    Ok(stable_density(g, 0.5 * (a + c))?.max(best.1))
}

/// Computes the LLT profile of `f` at `n`; arithmetic laws are compared against
/// `span * 1{k admissible} * f_Z(k / b)`.
pub fn llt_profile(f: &LifetimeDist, gamma: f64, n: usize, window: &KappaWindow) -> Result<LltProfile> {
    let g = GammaIndex::new(gamma)?;
    if n == 0 {
        return domain("n must be positive");
    }
    let b = llt_scale(f, gamma, n)?;
    let span = f.lattice_span();
    let (law, span, residue) = match *f.family() {
        Family::Zeta { gamma: g0 } if g0 < 1.0 => {
            let law = ZetaSumLaw::new(g0, n, b, window.hi + 1.0)?;
            (SumLaw::Zeta { law, span: 1, residue: 0 }, 1, 0)
        }
        Family::Arithmetic { gamma: g0, span, residue } => {
            let base = LifetimeDist::zeta(g0, 1)?;
            let bz = llt_scale(&base, g0, n)?;
            // k <= hi b maps to m <= hi b / span + n
            let law = ZetaSumLaw::new(g0, n, bz, (window.hi * b / span as f64 + n as f64) / bz + 1.0)?;
            (SumLaw::Zeta { law, span, residue }, span, residue)
        }
        _ => {
            let k_max = (window.hi * b).ceil() as usize + 2;
            if k_max > f.exact_up_to() {
                return Err(Error::MemoryBound {
                    message: format!("exact convolution needs the law up to {k_max}, truncated at {}", f.n_max()),
                    suggested: n / 2,
                });
            }
            if k_max > 1 << 24 {
                return Err(Error::MemoryBound { message: "convolution power too long".into(), suggested: n / 2 });
            }
            let p = convolution_power(f, n, k_max)?;
            let residue = f.probs().iter().position(|p| *p > 0.0).unwrap_or(0) as u64 % span.max(1);
            (SumLaw::Exact(p.probs), span.max(1), residue)
        }
    };
    let admissible = |k: u64| span <= 1 || (k + span * n as u64 - (n as u64 * residue) % span).is_multiple_of(span);
    let mut ks = Vec::new();
    let mut off_lattice_max = 0.0f64;
    for kappa in window.grid() {
        let mut k = (kappa * b).round().max(1.0) as u64;
        if span > 1 {
            let wrong = if admissible(k) { k + 1 } else { k };
            off_lattice_max = off_lattice_max.max(law.pmf(n, wrong).abs());
            while !admissible(k) {
                k += 1;
            }
        }
        if ks.last() != Some(&k) {
            ks.push(k);
        }
    }
    let mut scaled = Vec::with_capacity(ks.len());
    let mut reference = Vec::with_capacity(ks.len());
    let mut sup_error = 0.0f64;
    for &k in &ks {
        let s = b * law.pmf(n, k);
        let r = span as f64 * stable_density(g, k as f64 / b)?;
        sup_error = sup_error.max((s - r).abs());
        scaled.push(s);
        reference.push(r);
    }
    let k_lo = (window.lo * b).ceil() as u64;
    let k_hi = (window.hi * b).floor() as u64;
    let window_mass = law.mass_between(n, k_lo, k_hi);
    let window_reference = integrate(|x| stable_density(g, x).unwrap_or(0.0), window.lo, window.hi, 1e-12, 1e-10, 16)?.value;
    Ok(LltProfile {
        n,
        b,
        span,
        ks,
        scaled,
        reference,
        sup_error,
        peak_density: peak_density(g)?,
        window_mass,
        window_reference,
        off_lattice_max,
    })
}

/// Sup-window LLT error at each `n` in `ns`: passes when the error at the largest `n` is at
/// most `rel_tol * peak density`, the error decreases along `ns`, and the window mass is at most 1.
pub fn llt_check(f: &LifetimeDist, gamma: f64, ns: &[usize], window: &KappaWindow, rel_tol: f64) -> Result<ComparisonReport> {
    if f.lattice_span() != 1 {
        return config("arithmetic lifetimes are checked by llt_check_arithmetic");
    }
    llt_report("llt", f, gamma, ns, window, rel_tol)
}

/// Arithmetic variant: also requires exactly zero mass off the lattice `n residue + span Z`.
pub fn llt_check_arithmetic(f: &LifetimeDist, gamma: f64, ns: &[usize], window: &KappaWindow, rel_tol: f64) -> Result<ComparisonReport> {
    if f.lattice_span() < 2 {
        return config("span detection failed: the lifetime law is not arithmetic");
    }
    llt_report("llt-arithmetic", f, gamma, ns, window, rel_tol)
}

fn llt_report(name: &str, f: &LifetimeDist, gamma: f64, ns: &[usize], window: &KappaWindow, rel_tol: f64) -> Result<ComparisonReport> {
    if ns.is_empty() {
        return domain("need at least one n");
    }
    let profiles: Vec<LltProfile> = ns.iter().map(|&n| llt_profile(f, gamma, n, window)).collect::<Result<_>>()?;
    let last = profiles.last().expect("nonempty");
    let decreasing = profiles.windows(2).all(|w| w[1].sup_error < w[0].sup_error);
    let mut r = ComparisonReport::new(name, Estimate::exact(last.sup_error), Estimate::exact(0.0), rel_tol * last.peak_density, 0.0)
        .param("gamma", gamma)
        .param("ns", ns.to_vec())
        .param("window", vec![window.lo, window.hi])
        .param("points", window.points)
        .check("error_decreasing", decreasing)
        .check("window_mass_at_most_one", profiles.iter().all(|p| p.window_mass <= 1.0 + 1e-9))
        .diagnostic("peak_density", last.peak_density)
        .diagnostic("span", last.span as f64);
    if last.span > 1 {
        r = r.check("off_lattice_zero", profiles.iter().all(|p| p.off_lattice_max == 0.0));
    }
    for p in &profiles {
        r = r
            .diagnostic(&format!("sup_error_{}", p.n), p.sup_error)
            .diagnostic(&format!("b_{}", p.n), p.b)
            .diagnostic(&format!("window_mass_{}", p.n), p.window_mass)
            .diagnostic(&format!("window_reference_{}", p.n), p.window_reference);
    }
    Ok(r)
}
