use super::{return_time_with, LsvSystem};
use crate::error::{domain, Result};
use crate::exec::{map_indexed, stream_rng, sub_seed, ExecMode};
use crate::numeric::ls_slope;
use crate::paths::{Censored, ProductFunctional};
use crate::processes::{tied_expectation, MonteCarlo};
use crate::stats::{ComparisonReport, Estimate};
use serde::Serialize;

// Orbits are simulated in this many chunks (fixed so results do not depend on the thread count).
const CHUNKS: usize = 64;

fn chunk_range(samples: usize, c: usize) -> std::ops::Range<usize> {
    let per = samples.div_ceil(CHUNKS);
    (c * per).min(samples)..((c + 1) * per).min(samples)
}

/// `u_hat(k)`: fraction of `m_Omega`-distributed starting points with `T^k x in Omega`,
/// and its prefix sums `a_hat(n) = sum_{1 <= k <= n} u_hat(k)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReturnSequence {
    pub u_hat: Vec<f64>,
    pub a_hat: Vec<f64>,
    pub samples: usize,
}

impl ReturnSequence {
    pub fn n_max(&self) -> usize {
        self.u_hat.len() - 1
    }

    /// Log-log slope of `a_hat` over log-spaced `n` in `[lo, hi]`.
    pub fn a_slope(&self, lo: usize, hi: usize) -> Result<f64> {
        if !(1 <= lo && lo < hi && hi <= self.n_max()) {
            return domain(format!("slope window [{lo}, {hi}] outside 1..={}", self.n_max()));
        }
        let pts = 40;
        let (xs, ys): (Vec<f64>, Vec<f64>) = (0..=pts)
            .map(|i| {
                let n = ((lo as f64).ln() + ((hi as f64).ln() - (lo as f64).ln()) * i as f64 / pts as f64).exp().round() as usize;
                ((n as f64).ln(), self.a_hat[n].ln())
            })
            .unzip();
        Ok(ls_slope(&xs, &ys))
    }

    /// Smoothed strong-renewal ratio at `k`: `u_hat(k) k / (gamma a_hat(k))` with `u_hat(k) k / a_hat(k)`
    /// replaced by the local log-slope `log(a_hat(k) / a_hat(k/2)) / log 2`.
    pub fn srt_ratio(&self, gamma: f64, k: usize) -> f64 {
        let lo = (k / 2).max(1);
        (self.a_hat[k] / self.a_hat[lo]).ln() / (k as f64 / lo as f64).ln() / gamma
    }

    /// `k,u_hat,a_hat` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,u_hat,a_hat\n");
        for (k, (u, a)) in self.u_hat.iter().zip(&self.a_hat).enumerate() {
            s.push_str(&format!("{k},{u:e},{a:e}\n"));
        }
        s
    }
}

/// Orbit of length `n` from a fresh `m_Omega` draw; calls `visit(k)` for each `k` with `T^k x in Omega`.
fn run_orbit(sys: &LsvSystem, seed: u64, i: usize, n: usize, mut visit: impl FnMut(usize)) {
    let mut rng = stream_rng(seed, i as u64);
    let map = sys.map();
    let mut x = sys.sample_omega(&mut rng);
    for k in 1..=n {
        x = map.apply(x);
        if x >= 0.5 {
            visit(k);
        }
    }
}

/// Empirical return sequence from `samples` orbits of length `n_max`.
pub fn empirical_return_sequence(sys: &LsvSystem, n_max: usize, samples: usize, seed: u64, mode: ExecMode) -> Result<ReturnSequence> {
    if n_max == 0 || samples == 0 {
        return domain("need n_max >= 1 and samples >= 1");
    }
    let parts = map_indexed(mode, CHUNKS, |c| {
        let mut counts = vec![0u32; n_max + 1];
        for i in chunk_range(samples, c) {
            run_orbit(sys, seed, i, n_max, |k| counts[k] += 1);
        }
        counts
    });
    let mut counts = vec![0u64; n_max + 1];
    for p in parts {
        for (c, v) in counts.iter_mut().zip(p) {
            *c += v as u64;
        }
    }
    counts[0] = samples as u64;
    let u_hat: Vec<f64> = counts.iter().map(|&c| c as f64 / samples as f64).collect();
    let mut a_hat = vec![0.0; n_max + 1];
    for k in 1..=n_max {
        a_hat[k] = a_hat[k - 1] + u_hat[k];
    }
    Ok(ReturnSequence { u_hat, a_hat, samples })
}

/// Return times of `samples` draws from `m_Omega`, censored at `cap`.
pub fn return_time_tail(sys: &LsvSystem, samples: usize, cap: u64, seed: u64, mode: ExecMode) -> Vec<Censored<u64>> {
    map_indexed(mode, samples, |i| {
        let mut rng = stream_rng(seed, i as u64);
        let x = sys.sample_omega(&mut rng);
        return_time_with(sys.map(), x, cap)
    })
}

/// Settings for [`verify_umbrella_mc`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UmbrellaConfig {
    /// Orbit length.
    pub n: usize,
    /// Number of orbits.
    pub samples: usize,
    pub seed: u64,
    /// Sampler budget for the reference `E pf(w)`.
    pub reference: MonteCarlo,
    /// Relative tolerance against the reference.
    pub rel_tol: f64,
    pub mode: ExecMode,
}

/// Per-orbit statistic `(1/a_hat(m)) sum_{k <= m} pf(psi_k) 1_Omega(T^k x)` at `m = n` and `m = n/2`,
/// with `psi_k(t) = s_{floor(k t)} / a_hat(k)` and `s_j` the number of visits at times `1..=j`.
fn umbrella_values(sys: &LsvSystem, pf: &ProductFunctional, returns: &ReturnSequence, cfg: &UmbrellaConfig) -> Vec<(f64, f64)> {
    let n = cfg.n;
    let half = n / 2;
    let a = &returns.a_hat;
    let times = pf.times();
    let factors = pf.factors();
    let h = pf.terminal();
    let t_last = pf.last_time();
    let parts = map_indexed(cfg.mode, CHUNKS, |c| {
        let mut s = vec![0u32; n + 1];
        let mut out = Vec::new();
        for i in chunk_range(cfg.samples, c) {
            s.iter_mut().for_each(|v| *v = 0);
            let mut hits = Vec::new();
            run_orbit(sys, cfg.seed, i, n, |k| {
                s[k] = 1;
                hits.push(k);
            });
            for k in 1..=n {
                s[k] += s[k - 1];
            }
            let (mut full, mut part) = (0.0, 0.0);
            for &k in &hits {
                let ak = a[k];
                if ak <= 0.0 {
                    continue;
                }
                let kf = k as f64;
                let mut v = 1.0;
                for (t, g) in times.iter().zip(factors) {
                    v *= g.eval(s[(kf * t).floor() as usize] as f64 / ak);
                }
                let last = s[(kf * t_last).floor() as usize];
                v *= h.eval((s[k] - last) as f64 / ak);
                full += v;
                if k <= half {
                    part += v;
                }
            }
            out.push((full / a[n], if half > 0 { part / a[half] } else { 0.0 }));
        }
        out
    });
    parts.into_iter().flatten().collect()
}

/// Monte Carlo check of the umbrella limit for `f = 1_Omega` against the tied-down sampler.
pub fn verify_umbrella_mc(sys: &LsvSystem, pf: &ProductFunctional, cfg: &UmbrellaConfig) -> Result<ComparisonReport> {
    if cfg.n < 2 || cfg.samples < 2 {
        return domain("umbrella check needs n >= 2 and at least two orbits");
    }
    let returns = empirical_return_sequence(sys, cfg.n, cfg.samples, cfg.seed, cfg.mode)?;
    let vals = umbrella_values(sys, pf, &returns, cfg);
    let full: Vec<f64> = vals.iter().map(|v| v.0).collect();
    let half: Vec<f64> = vals.iter().map(|v| v.1).collect();
    let lhs = Estimate::mean_of(&full)?;
    let lhs_half = Estimate::mean_of(&half)?;
    let rhs = if pf.is_constant_one() {
        Estimate::exact(1.0)
    } else {
        let mut mc = cfg.reference;
        mc.seed = sub_seed(cfg.seed, 3);
        tied_expectation(sys.gamma(), pf, &mc)?
    };
    let doubling_gap = (lhs.value - lhs_half.value).abs();
    let doubling_se = (lhs.se.powi(2) + lhs_half.se.powi(2)).sqrt();
    let g = sys.gamma().get();
    Ok(ComparisonReport::new("umbrella-lsv", lhs, rhs, cfg.rel_tol * rhs.value.abs(), 0.0)
        .param("gamma", g)
        .param("n", cfg.n)
        .param("samples", cfg.samples)
        .param("grid", sys.grid())
        .param("reference_samples", cfg.reference.samples)
        .param("resolution", cfg.reference.resolution)
        .param("functional", serde_json::to_value(pf).expect("serializable"))
        .seed(cfg.seed)
        .check("stable_under_doubling", doubling_gap <= 2.0 * doubling_se)
        .diagnostic("half_n_estimate", lhs_half.value)
        .diagnostic("doubling_gap", doubling_gap)
        .diagnostic("doubling_se", doubling_se)
        .diagnostic("a_hat_n", returns.a_hat[cfg.n])
        .diagnostic("ulam_residual", sys.residual()))
}
