//! Exact tied-down expectations for the renewal counting process.

use super::conv::KernelConvolver;
use super::{LifetimeDist, RenewalTables};
use crate::error::{config, domain, Error, Result};
use crate::exec::{map_indexed, ExecMode};
use crate::numeric::NeumaierSum;
use crate::paths::{Factor, ProductFunctional};
use crate::stats::{ComparisonReport, Estimate};

/// Largest horizon accepted by the dynamic program.
pub const MAX_TIED_N: usize = 1 << 22;

// Relative size of the neglected tail of the layer recursion.
const STOP_TOL: f64 = 1e-18;

fn check_size(n: usize) -> Result<()> {
    if n > MAX_TIED_N {
        return Err(Error::MemoryBound { message: format!("N = {n} exceeds {MAX_TIED_N}"), suggested: MAX_TIED_N });
    }
    Ok(())
}

fn check_input(f: &LifetimeDist, n: usize, tables: &RenewalTables) -> Result<()> {
    if n == 0 {
        return domain("N must be at least 1");
    }
    check_size(n)?;
    if f.period() != 1 {
        return config(format!("lifetime law has period {}; the tied-down expectation needs an aperiodic law", f.period()));
    }
    if n > f.exact_up_to() {
        return config(format!("N = {n} exceeds the truncation point {} of the lifetime law", f.n_max()));
    }
    if n > tables.max_n() {
        return config(format!("renewal tables stop at {}, N = {n}", tables.max_n()));
    }
    Ok(())
}

/// Checkpoints `floor(n t)` of a product functional.
fn checkpoints(times: &[f64], n: usize) -> Vec<usize> {
    times.iter().map(|t| ((n as f64) * t).floor() as usize).collect()
}

/// `(1/u(N)) E[prod_nu g_nu(s_{tau_nu} / a(N)) h((s_N - s_T) / a(N)); renewal at N]` with
/// `tau_nu = floor(N t_nu)`, `T = tau_last` and `s_m` the number of renewal epochs in `(0, m]`.
pub fn tied_down_exact(f: &LifetimeDist, n: usize, pf: &ProductFunctional) -> Result<f64> {
    check_size(n)?;
    let tables = RenewalTables::build(f, n)?;
    tied_down_with_tables(f, &tables, n, pf)
}

/// [`tied_down_exact`] against prebuilt tables covering `n`.
pub fn tied_down_with_tables(f: &LifetimeDist, tables: &RenewalTables, n: usize, pf: &ProductFunctional) -> Result<f64> {
    check_input(f, n, tables)?;
    if pf.is_constant_one() {
        return Ok(1.0);
    }
    let factors = pf.factors();
    let h = pf.terminal();
    let bound = factors.iter().chain(std::iter::once(h)).map(|g| g.sup_norm().max(1.0)).product::<f64>();
    let dp = TiedDp::new(f, tables, n, pf.times());
    Ok(dp.run(|nu, x| factors[nu].eval(x), |x| h.eval(x), Some(bound)))
}

/// Closure-based variant: `g(nu, x)` is the factor at checkpoint `nu`, `h` the terminal
/// factor. No early stopping, so the result is exact up to rounding for any bounded factors.
pub fn tied_down_exact_fn<G, H>(f: &LifetimeDist, n: usize, times: &[f64], g: G, h: H) -> Result<f64>
where
    G: Fn(usize, f64) -> f64,
    H: Fn(f64) -> f64,
{
    validate_times(times)?;
    let tables = RenewalTables::build(f, n)?;
    check_input(f, n, &tables)?;
    Ok(TiedDp::new(f, &tables, n, times).run(g, h, None))
}

fn validate_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return domain("need at least one checkpoint");
    }
    let ok = times.windows(2).all(|w| w[0] < w[1]) && times[0] >= 0.0 && *times.last().expect("nonempty") < 1.0;
    if !ok {
        return domain("checkpoint times must be increasing in [0, 1)");
    }
    Ok(())
}

struct TiedDp<'a> {
    n: usize,
    f: &'a [f64],
    u_n: f64,
    a_n: f64,
    taus: Vec<usize>,
}

impl<'a> TiedDp<'a> {
    fn new(f: &'a LifetimeDist, tables: &RenewalTables, n: usize, times: &[f64]) -> Self {
        TiedDp { n, f: f.probs(), u_n: tables.u()[n], a_n: tables.a()[n], taus: checkpoints(times, n) }
    }

    fn run<G, H>(&self, g: G, h: H, bound: Option<f64>) -> f64
    where
        G: Fn(usize, f64) -> f64,
        H: Fn(f64) -> f64,
    {
        let n = self.n;
        let a = self.a_n;
        let taus = &self.taus;
        let big_t = *taus.last().expect("nonempty");
        let l = taus.len();
        // block index of an epoch e: #{nu : tau_nu < e}
        let block_of = |e: usize| taus.partition_point(|&t| t < e);
        let conv_t = KernelConvolver::new(self.f, big_t + 1);
        let stop = |mass: f64, width: usize| match bound {
            Some(b) => mass * b * (width as f64 + 1.0) < STOP_TOL * self.u_n,
            None => mass == 0.0,
        };

        // v[e]: weight of paths whose c-th epoch is e <= T, with the factors of
        // checkpoints before e applied
        let mut v = vec![0.0; big_t + 1];
        v[0] = 1.0;
        let mut y = vec![0.0; big_t + 1];
        for c in 0..=big_t + 1 {
            let x = c as f64 / a;
            let gs: Vec<f64> = (0..l).map(|nu| g(nu, x)).collect();
            // suffix products prod_{nu >= i} g_nu
            let mut suffix = vec![1.0; l + 1];
            for i in (0..l).rev() {
                suffix[i] = suffix[i + 1] * gs[i];
            }
            let mut mass = 0.0;
            for (e, &w) in v.iter().enumerate() {
                if w != 0.0 {
                    y[e] += w * suffix[block_of(e)];
                    mass += w.abs();
                }
            }
            if stop(mass, big_t) || c == big_t + 1 {
                break;
            }
            let mut next = vec![0.0; big_t + 1];
            let mut start = 0;
            while start <= big_t {
                let i = block_of(start);
                let end = if i < l { taus[i].min(big_t) } else { big_t };
                let mut masked = vec![0.0; big_t + 1];
                masked[start..=end].copy_from_slice(&v[start..=end]);
                if masked.iter().any(|&w| w != 0.0) {
                    let out = conv_t.apply(&masked);
                    // prefix products prod_{nu = i}^{j-1} g_nu
                    let mut prod = 1.0;
                    let mut j = i;
                    for (e2, &o) in out.iter().enumerate().skip(start + 1) {
                        while j < l && taus[j] < e2 {
                            prod *= gs[j];
                            j += 1;
                        }
                        next[e2] += o * prod;
                    }
                }
                start = end + 1;
            }
            v = next;
        }

        // first epoch after T, then any number of further epochs up to n
        let d_max = n - big_t - 1;
        let conv_n = KernelConvolver::new(self.f, n + 1);
        let mut y_full = vec![0.0; n + 1];
        y_full[..=big_t].copy_from_slice(&y);
        let x_after = conv_n.apply(&y_full);
        let conv_d = KernelConvolver::new(self.f, d_max + 1);
        let mut power = vec![0.0; d_max + 1];
        power[0] = 1.0;
        let mut tail = vec![0.0; d_max + 1];
        for j in 0..=d_max {
            let hv = h((1 + j) as f64 / a);
            let mut mass = 0.0;
            for (t, &p) in tail.iter_mut().zip(&power) {
                *t += p * hv;
                mass += p.abs();
            }
            if stop(mass, 0) {
                break;
            }
            power = conv_d.apply(&power);
        }
        let mut total = NeumaierSum::default();
        for e2 in big_t + 1..=n {
            total.add(x_after[e2] * tail[n - e2]);
        }
        total.value() / self.u_n
    }
}

/// Brute-force oracle over all renewal sets `A ⊆ {1, ..., n-1}` (with `n` appended).
/// `a(n)` and `u(n)` are recomputed from the enumeration itself. Limited to `n <= 20`.
pub fn tied_down_enumerate<G, H>(f: &LifetimeDist, n: usize, times: &[f64], g: G, h: H) -> Result<f64>
where
    G: Fn(usize, f64) -> f64,
    H: Fn(f64) -> f64,
{
    if n == 0 || n > 20 {
        return domain("enumeration needs 1 <= n <= 20");
    }
    validate_times(times)?;
    let pmf = |k: usize| f.pmf(k);
    let weight = |m: usize, mask: u32| -> f64 {
        let mut prev = 0;
        let mut w = 1.0;
        for e in (1..m).filter(|e| mask >> (e - 1) & 1 == 1).chain(std::iter::once(m)) {
            w *= pmf(e - prev);
            prev = e;
        }
        w
    };
    let u = |m: usize| -> f64 { (0..1u32 << (m - 1)).map(|mask| weight(m, mask)).sum() };
    let a: f64 = (1..=n).map(u).sum();
    let taus = checkpoints(times, n);
    let big_t = *taus.last().expect("nonempty");
    let mut num = 0.0;
    let mut den = 0.0;
    for mask in 0..1u32 << (n - 1) {
        let w = weight(n, mask);
        if w == 0.0 {
            continue;
        }
        let count = |m: usize| (1..=m.min(n)).filter(|&e| e == n || mask >> (e - 1) & 1 == 1).count();
        let mut val = h((count(n) - count(big_t)) as f64 / a);
        for (nu, &tau) in taus.iter().enumerate() {
            val *= g(nu, count(tau) as f64 / a);
        }
        num += w * val;
        den += w;
    }
    Ok(num / den)
}

/// [`tied_down_enumerate`] for a product functional.
pub fn tied_down_enumerate_pf(f: &LifetimeDist, n: usize, pf: &ProductFunctional) -> Result<f64> {
    tied_down_enumerate(f, n, pf.times(), |nu, x| pf.factors()[nu].eval(x), |x| pf.terminal().eval(x))
}

/// Cesàro average of tied-down expectations and the per-`n` values.
#[derive(Debug, Clone, PartialEq)]
pub struct CesaroValue {
    pub value: f64,
    /// `tied_down_exact(f, n, pf)` for `n = 1..=N` (index `n - 1`).
    pub per_n: Vec<f64>,
}

/// `(1/a(N)) sum_{n=1}^N u(n) tied_down_exact(f, n, pf)`.
pub fn cesaro_tied_down(f: &LifetimeDist, big_n: usize, pf: &ProductFunctional, mode: ExecMode) -> Result<CesaroValue> {
    check_size(big_n)?;
    let tables = RenewalTables::build(f, big_n)?;
    check_input(f, big_n, &tables)?;
    let per_n: Vec<f64> = map_indexed(mode, big_n, |i| tied_down_with_tables(f, &tables, i + 1, pf))
        .into_iter()
        .collect::<Result<_>>()?;
    let mut s = NeumaierSum::default();
    for (i, v) in per_n.iter().enumerate() {
        s.add(tables.u()[i + 1] * v);
    }
    Ok(CesaroValue { value: s.value() / tables.a()[big_n], per_n })
}

/// `(1/a(N)) sum_{n=1}^N |sum_{k=1}^n g(k/a(n)) P(s_k = n) - g(1) u(n)|`, with `s_k` the
/// `k`-th renewal epoch. Convolution powers are streamed over `k`.
pub fn corollary7_check(f: &LifetimeDist, big_n: usize, g: &Factor) -> Result<f64> {
    if big_n == 0 {
        return domain("N must be at least 1");
    }
    check_size(big_n)?;
    if big_n > f.exact_up_to() {
        return config(format!("N = {big_n} exceeds the truncation point {} of the lifetime law", f.n_max()));
    }
    let tables = RenewalTables::build(f, big_n)?;
    let a = tables.a();
    let conv = KernelConvolver::new(f.probs(), big_n + 1);
    let mut power: Vec<f64> = conv.kernel().to_vec();
    power.resize(big_n + 1, 0.0);
    let mut acc: Vec<NeumaierSum> = vec![NeumaierSum::default(); big_n + 1];
    let sup = g.sup_norm().max(1.0);
    for k in 1..=big_n {
        let mut mass = 0.0;
        for (nn, &p) in power.iter().enumerate().skip(k) {
            if p != 0.0 {
                acc[nn].add(g.eval(k as f64 / a[nn]) * p);
                mass += p.abs();
            }
        }
        // remaining powers can only add at most mass * sup per n
        if mass * sup * (big_n as f64) < STOP_TOL || k == big_n {
            break;
        }
        power = conv.apply(&power);
        for p in &mut power {
            if *p < 0.0 {
                *p = 0.0;
            }
        }
    }
    let g1 = g.eval(1.0);
    let mut total = NeumaierSum::default();
    for nn in 1..=big_n {
        total.add((acc[nn].value() - g1 * tables.u()[nn]).abs());
    }
    Ok(total.value() / a[big_n])
}

/// [`corollary7_check`] at each `N` in `ns`; passes when strictly decreasing.
pub fn corollary7_report(f: &LifetimeDist, ns: &[usize], g: &Factor) -> Result<ComparisonReport> {
    if ns.is_empty() {
        return domain("need at least one N");
    }
    let values: Vec<f64> = ns.iter().map(|&n| corollary7_check(f, n, g)).collect::<Result<_>>()?;
    let decreasing = values.windows(2).all(|w| w[1] < w[0]);
    let last = *values.last().expect("nonempty");
    let mut r = ComparisonReport::new("cor7", Estimate::exact(last), Estimate::exact(0.0), values[0], 0.0)
        .param("ns", ns.to_vec())
        .check("strictly_decreasing", decreasing)
        .check("nonnegative", values.iter().all(|v| *v >= 0.0));
    for (n, v) in ns.iter().zip(&values) {
        r = r.diagnostic(&format!("value_{n}"), *v);
    }
    Ok(r)
}
