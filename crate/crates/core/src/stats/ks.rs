use crate::error::{domain, Result};
use std::fmt::Write;

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn ks_distance(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let wx = vec![1.0; xs.len()];
    weighted_ks_distance(xs, &wx, ys)
}

/// KS distance between the `wx`-weighted ECDF of `xs` and the plain ECDF of `ys`.
pub fn weighted_ks_distance(xs: &[f64], wx: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.is_empty() || ys.is_empty() {
        return domain("KS distance needs two nonempty samples");
    }
    if wx.len() != xs.len() {
        return domain("weights and sample differ in length");
    }
    if wx.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return domain("weights must be finite and nonnegative");
    }
    let mut xw: Vec<(f64, f64)> = xs.iter().copied().zip(wx.iter().copied()).collect();
    xw.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = wx.iter().sum();
    if total <= 0.0 {
        return domain("weights sum to zero");
    }
    let ys = sorted(ys);
    let m = ys.len() as f64;
    let (mut i, mut j) = (0, 0);
    let (mut fx, mut d) = (0.0, 0.0f64);
    while i < xw.len() || j < ys.len() {
        let t = match (xw.get(i), ys.get(j)) {
            (Some(a), Some(b)) => a.0.min(*b),
            (Some(a), None) => a.0,
            (None, Some(b)) => *b,
            (None, None) => unreachable!(),
        };
        while i < xw.len() && xw[i].0 <= t {
            fx += xw[i].1;
            i += 1;
        }
        while j < ys.len() && ys[j] <= t {
            j += 1;
        }
        d = d.max((fx / total - j as f64 / m).abs());
    }
    Ok(d.min(1.0))
}

/// One-sample KS distance against a continuous CDF.
pub fn ks_one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if xs.is_empty() {
        return domain("empty sample");
    }
    let xs = sorted(xs);
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (k, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((k as f64 + 1.0) / n - f).max(f - k as f64 / n);
    }
    Ok(d)
}

// Asymptotic Kolmogorov quantiles c(alpha).
const KS_TABLE: [(f64, f64); 4] = [(0.1, 1.224), (0.05, 1.358), (0.01, 1.628), (0.001, 1.949)];

/// Critical KS distance at level `alpha` for sample sizes `n` and `m`
/// (`m = 0` for the one-sample test), with Stephens' finite-size correction.
pub fn ks_critical(n: usize, m: usize, alpha: f64) -> Result<f64> {
    let c = KS_TABLE
        .iter()
        .find(|(a, _)| (a - alpha).abs() < 1e-12)
        .map(|(_, c)| *c);
    let Some(c) = c else {
        return domain(format!("no KS table entry for alpha = {alpha}"));
    };
    if n == 0 {
        return domain("sample size must be positive");
    }
    let ne = if m == 0 { n as f64 } else { (n * m) as f64 / (n + m) as f64 };
    let s = ne.sqrt();
    Ok(c / (s + 0.12 + 0.11 / s))
}

/// CSV of the two ECDFs on the pooled sample points: `x,F_xs,F_ys`.
pub fn ecdf_csv(xs: &[f64], ys: &[f64]) -> String {
    let a = sorted(xs);
    let b = sorted(ys);
    let mut pooled: Vec<f64> = a.iter().chain(b.iter()).copied().collect();
    pooled.sort_by(f64::total_cmp);
    pooled.dedup();
    let mut out = String::from("x,ecdf_lhs,ecdf_rhs\n");
    for x in pooled {
        let fa = a.partition_point(|v| *v <= x) as f64 / a.len().max(1) as f64;
        let fb = b.partition_point(|v| *v <= x) as f64 / b.len().max(1) as f64;
        let _ = writeln!(out, "{x:?},{fa:?},{fb:?}");
    }
    out
}
