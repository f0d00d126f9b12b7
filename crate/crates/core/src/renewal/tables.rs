use super::conv::convolve;
use super::LifetimeDist;
use crate::error::{config, domain, Error, Result};
use crate::numeric::{gamma as gamma_fn, ls_slope, NeumaierSum};
use crate::stats::{ComparisonReport, Estimate};
use serde::Serialize;

// Blocks at most this long are finished by the direct recursion.
const CDQ_LEAF: usize = 64;

/// `u(0..=n)` by the direct recursion `u(m) = sum_k f_k u(m-k)` with compensated sums.
pub fn naive_renewal(f: &LifetimeDist, n: usize) -> Vec<f64> {
    let p = f.probs();
    let mut u = vec![0.0; n + 1];
    u[0] = 1.0;
    for m in 1..=n {
        let mut s = NeumaierSum::new();
        for k in 1..=m.min(p.len() - 1) {
            s.add(p[k] * u[m - k]);
        }
        u[m] = s.value();
    }
    u
}

/// `u(0..=n)` by divide-and-conquer online convolution: the left half of every block
/// is finished first and pushed into the right half with one FFT product.
pub fn fft_renewal(f: &LifetimeDist, n: usize) -> Vec<f64> {
    let p: Vec<f64> = f.probs().iter().take(n + 1).copied().collect();
    let mut u = vec![0.0; n + 1];
    u[0] = 1.0;
    cdq(&p, &mut u, 0, n + 1);
    u
}

fn cdq(p: &[f64], u: &mut [f64], lo: usize, hi: usize) {
    if hi - lo <= CDQ_LEAF {
        for m in lo.max(1)..hi {
            let mut s = u[m];
            for k in lo..m {
                if let Some(pk) = p.get(m - k) {
                    s += u[k] * pk;
                }
            }
            u[m] = s;
        }
        return;
    }
    let mid = (lo + hi) / 2;
    cdq(p, u, lo, mid);
    let kernel = &p[..(hi - lo).min(p.len())];
    let c = convolve(&u[lo..mid], kernel, hi - lo);
    for m in mid..hi {
        u[m] += c[m - lo];
    }
    cdq(p, u, mid, hi);
}

/// Renewal, return and tail sequences of a lifetime law up to `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RenewalTables {
    u: Vec<f64>,
    a: Vec<f64>,
    c: Vec<f64>,
    gamma: Option<f64>,
    periodic: bool,
}

impl RenewalTables {
    /// Builds the tables on `0..=n`; requires `n <= f.n_max()` so truncation is invisible.
    pub fn build(f: &LifetimeDist, n: usize) -> Result<Self> {
        if n == 0 {
            return domain("tables need n >= 1");
        }
        if n > f.exact_up_to() {
            return config(format!("n = {n} exceeds the lifetime truncation n_max = {}", f.n_max()));
        }
        let u = fft_renewal(f, n);
        Ok(Self::from_u(f, u))
    }

    /// Tables from a precomputed renewal sequence.
    pub fn from_u(f: &LifetimeDist, mut u: Vec<f64>) -> Self {
        for v in u.iter_mut() {
            *v = v.clamp(0.0, 1.0);
        }
        let n = u.len() - 1;
        let mut a = vec![0.0; n + 1];
        let mut acc = NeumaierSum::new();
        for m in 1..=n {
            acc.add(u[m]);
            a[m] = acc.value();
        }
        // c(m) = P(phi >= m) from the top so that small tails keep full precision
        let p = f.probs();
        let mut c = vec![0.0; n + 2];
        let mut tail = NeumaierSum::new();
        tail.add(f.tail_mass());
        for k in (n + 1..p.len()).rev() {
            tail.add(p[k]);
        }
        for m in (1..=n + 1).rev() {
            c[m] = tail.value();
            if m > 1 {
                tail.add(p.get(m - 1).copied().unwrap_or(0.0));
            }
        }
        c[1] = 1.0;
        c[0] = 1.0;
        RenewalTables { u, a, c, gamma: f.declared_gamma(), periodic: f.period() != 1 }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn max_n(&self) -> usize {
        self.u.len() - 1
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    /// `a(m) = u(1) + ... + u(m)`.
    pub fn a(&self) -> &[f64] {
        &self.a
    }

    /// `c(m) = P(phi >= m)` for `m in 0..=max_n + 1`.
    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn declared_gamma(&self) -> Option<f64> {
        self.gamma
    }

    /// `a^{-1}(x)` for the piecewise-linear interpolation of `a` through `(m, a(m))`.
    pub fn b(&self, x: f64) -> Result<f64> {
        let top = *self.a.last().expect("nonempty");
        if !(x >= 0.0 && x <= top) {
            return domain(format!("b({x}) needs 0 <= x <= a(max_n) = {top}"));
        }
        let i = self.a.partition_point(|v| *v < x);
        if i == 0 {
            return Ok(0.0);
        }
        let (a0, a1) = (self.a[i - 1], self.a[i]);
        Ok((i - 1) as f64 + if a1 > a0 { (x - a0) / (a1 - a0) } else { 0.0 })
    }

    /// `1 / (Gamma(1+gamma) Gamma(1-gamma) P(phi > m))`: the return sequence implied by the tail.
    pub fn a_tail(&self, m: usize) -> Result<f64> {
        let g = self.require_gamma(None)?;
        if g >= 1.0 {
            return config("the tail normalization needs gamma < 1");
        }
        if m > self.max_n() {
            return domain(format!("m = {m} exceeds the table"));
        }
        Ok(1.0 / (gamma_fn(1.0 + g) * gamma_fn(1.0 - g) * self.c[m + 1]))
    }

    fn require_gamma(&self, gamma: Option<f64>) -> Result<f64> {
        gamma
            .or(self.gamma)
            .ok_or_else(|| Error::Config("no tail index declared for this lifetime law".into()))
    }

    /// `u(n) n / (gamma a(n))`.
    pub fn srt_ratio(&self, gamma: Option<f64>, n: usize) -> Result<SrtRatio> {
        let g = self.require_gamma(gamma)?;
        if n == 0 || n > self.max_n() {
            return domain(format!("n must lie in 1..={}", self.max_n()));
        }
        Ok(SrtRatio {
            n,
            ratio: self.u[n] * n as f64 / (g * self.a[n]),
            in_regime: self.gamma.is_some_and(|d| d < 1.0) && !self.periodic,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SrtRatio {
    pub n: usize,
    pub ratio: f64,
    /// False when the law declares no tail index in `(0, 1)` or is periodic.
    pub in_regime: bool,
}

/// `max_{m <= n} m f_m / c(m)`; bounded values support the Doney condition `f_m << c(m) / m`.
pub fn doney_statistic(f: &LifetimeDist, tables: &RenewalTables, n: usize) -> f64 {
    (1..=n.min(tables.max_n()))
        .map(|m| m as f64 * f.pmf(m) / tables.c()[m])
        .fold(0.0, f64::max)
}

/// Strong renewal theorem diagnostics at the decades `ns`.
pub fn srt_report(f: &LifetimeDist, tables: &RenewalTables, gamma: Option<f64>, ns: &[usize]) -> Result<ComparisonReport> {
    if ns.is_empty() {
        return domain("need at least one n");
    }
    let ratios: Vec<SrtRatio> = ns.iter().map(|&n| tables.srt_ratio(gamma, n)).collect::<Result<_>>()?;
    let last = ratios.last().expect("nonempty");
    let gaps: Vec<f64> = ratios.iter().map(|r| (r.ratio - 1.0).abs()).collect();
    let monotone = gaps.windows(2).all(|w| w[1] <= w[0]);
    let n_top = *ns.iter().max().expect("nonempty");
    let doney = doney_statistic(f, tables, n_top);
    let mut report = ComparisonReport::new("srt", Estimate::exact(last.ratio), Estimate::exact(1.0), 0.1, 0.0)
        .param("ns", ns.to_vec())
        .check("trend_towards_one", monotone)
        .check("in_regime", last.in_regime)
        .diagnostic("doney_statistic", doney);
    for r in &ratios {
        report = report.diagnostic(&format!("ratio_{}", r.n), r.ratio);
    }
    Ok(report)
}

/// Karamata diagnostics over `[lo, hi]`: spread `max/min` of `a(m) c(m)` and the
/// log-log slope of `a`.
pub fn karamata_check(tables: &RenewalTables, lo: usize, hi: usize) -> Result<(f64, f64)> {
    if !(1 <= lo && lo < hi && hi <= tables.max_n()) {
        return domain("need 1 <= lo < hi <= max_n");
    }
    let ms: Vec<usize> = (0..=40)
        .map(|i| (lo as f64 * (hi as f64 / lo as f64).powf(i as f64 / 40.0)).round() as usize)
        .collect();
    let prod: Vec<f64> = ms.iter().map(|&m| tables.a()[m] * tables.c()[m]).collect();
    let spread = prod.iter().copied().fold(0.0, f64::max) / prod.iter().copied().fold(f64::INFINITY, f64::min);
    let x: Vec<f64> = ms.iter().map(|&m| (m as f64).ln()).collect();
    let y: Vec<f64> = ms.iter().map(|&m| tables.a()[m].ln()).collect();
    Ok((spread, ls_slope(&x, &y)))
}
