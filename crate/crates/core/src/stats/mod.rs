//! Empirical CDFs, KS distances, moment estimates, bootstrap intervals and the
//! comparison report emitted by every experiment.

mod ks;
mod report;

pub use ks::{ecdf_csv, ks_critical, ks_distance, ks_one_sample, weighted_ks_distance};
pub use report::{ComparisonReport, REPORT_SCHEMA};

use crate::error::{domain, Result};
use crate::exec::{map_seeded, ExecMode};
use crate::numeric::NeumaierSum;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// A point estimate with its standard error and sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
    pub n: usize,
}

impl Estimate {
    /// An exact reference value.
    pub fn exact(value: f64) -> Self {
        Estimate { value, se: 0.0, n: 0 }
    }

    /// Sample mean with the usual `sd / sqrt(n)` standard error.
    pub fn mean_of(xs: &[f64]) -> Result<Self> {
        if xs.is_empty() {
            return domain("empty sample");
        }
        let n = xs.len();
        let mean = xs.iter().copied().collect::<NeumaierSum>().value() / n as f64;
        let se = if n > 1 {
            let ss: NeumaierSum = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
            (ss.value() / (n - 1) as f64 / n as f64).sqrt()
        } else {
            0.0
        };
        Ok(Estimate { value: mean, se, n })
    }
}

/// Sample `p`-th raw moment with a jackknife standard error.
pub fn moment_report(xs: &[f64], p: u32) -> Result<Estimate> {
    if xs.is_empty() {
        return domain("empty sample");
    }
    if p == 0 {
        return domain("moment order must be >= 1");
    }
    let n = xs.len();
    let pw: Vec<f64> = xs.iter().map(|x| x.powi(p as i32)).collect();
    let total = pw.iter().copied().collect::<NeumaierSum>().value();
    let estimate = total / n as f64;
    if n == 1 {
        return Ok(Estimate { value: estimate, se: 0.0, n });
    }
    let m = (n - 1) as f64;
    // leave-one-out estimates (total - x_i^p) / (n - 1) have mean equal to the full estimate
    let ss: NeumaierSum = pw
        .iter()
        .map(|v| {
            let d = (total - v) / m - estimate;
            d * d
        })
        .collect();
    let se = (m / n as f64 * ss.value()).sqrt();
    Ok(Estimate { value: estimate, se, n })
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Percentile bootstrap interval for `statistic` at confidence `level`.
pub fn bootstrap_ci<F>(
    xs: &[f64],
    statistic: F,
    level: f64,
    reps: usize,
    seed: u64,
    mode: ExecMode,
) -> Result<(f64, f64)>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    if xs.is_empty() {
        return domain("empty sample");
    }
    if reps < 100 {
        return domain("bootstrap needs at least 100 replicates");
    }
    if !(level > 0.0 && level < 1.0) {
        return domain("level must lie in (0, 1)");
    }
    let n = xs.len();
    let mut stats = map_seeded(mode, reps, seed, |_, rng| {
        let resample: Vec<f64> = (0..n).map(|_| xs[rng.random_range(0..n)]).collect();
        statistic(&resample)
    });
    stats.sort_by(f64::total_cmp);
    let alpha = (1.0 - level) / 2.0;
    Ok((quantile_sorted(&stats, alpha), quantile_sorted(&stats, 1.0 - alpha)))
}

#[cfg(test)]
mod tests;
