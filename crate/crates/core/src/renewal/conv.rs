use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

// forward plan, inverse plan, kernel spectrum
type FftPlan = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>, Vec<Complex64>);

// Below this many multiply-adds the direct product is used.
const DIRECT_LIMIT: usize = 1 << 15;

/// Linear convolution of `a` and `b` truncated to `out_len` entries.
pub fn convolve(a: &[f64], b: &[f64], out_len: usize) -> Vec<f64> {
    let la = a.len().min(out_len);
    let lb = b.len().min(out_len);
    if la == 0 || lb == 0 {
        return vec![0.0; out_len];
    }
    if la.saturating_mul(lb) <= DIRECT_LIMIT {
        return convolve_direct(&a[..la], &b[..lb], out_len);
    }
    let size = (la + lb - 1).next_power_of_two();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    let mut fa = padded(&a[..la], size);
    let mut fb = padded(&b[..lb], size);
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    inv.process(&mut fa);
    let scale = 1.0 / size as f64;
    (0..out_len).map(|i| if i < size { fa[i].re * scale } else { 0.0 }).collect()
}

/// Direct `O(len a * len b)` convolution, skipping zero entries of `a`.
pub fn convolve_direct(a: &[f64], b: &[f64], out_len: usize) -> Vec<f64> {
    let mut out = vec![0.0; out_len];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 || i >= out_len {
            continue;
        }
        for (o, &y) in out[i..].iter_mut().zip(b) {
            *o += x * y;
        }
    }
    out
}

fn padded(x: &[f64], size: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); size];
    for (c, &r) in v.iter_mut().zip(x) {
        c.re = r;
    }
    v
}

/// Repeated convolution against a fixed kernel on `[0, len)`.
pub(crate) struct KernelConvolver {
    len: usize,
    kernel: Vec<f64>,
    plan: Option<FftPlan>,
    nonzero: Vec<(usize, f64)>,
}

impl KernelConvolver {
    pub fn new(kernel: &[f64], len: usize) -> Self {
        let kernel: Vec<f64> = kernel.iter().take(len).copied().collect();
        let nonzero: Vec<(usize, f64)> = kernel.iter().copied().enumerate().filter(|(_, v)| *v != 0.0).collect();
        let plan = if nonzero.len().saturating_mul(len) <= 2 * DIRECT_LIMIT || len <= 64 {
            None
        } else {
            let size = (2 * len).next_power_of_two();
            let mut planner = FftPlanner::new();
            let fwd = planner.plan_fft_forward(size);
            let inv = planner.plan_fft_inverse(size);
            let mut spec = padded(&kernel, size);
            fwd.process(&mut spec);
            Some((fwd, inv, spec))
        };
        KernelConvolver { len, kernel, plan, nonzero }
    }

    /// `(x * kernel)[0..len)`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        match &self.plan {
            None => {
                let mut out = vec![0.0; self.len];
                for (i, &v) in x.iter().enumerate().take(self.len) {
                    if v == 0.0 {
                        continue;
                    }
                    for &(k, w) in &self.nonzero {
                        if i + k >= self.len {
                            break;
                        }
                        out[i + k] += v * w;
                    }
                }
                out
            }
            Some((fwd, inv, spec)) => {
                let size = spec.len();
                let mut buf = padded(&x[..x.len().min(self.len)], size);
                fwd.process(&mut buf);
                for (b, s) in buf.iter_mut().zip(spec) {
                    *b *= s;
                }
                inv.process(&mut buf);
                let scale = 1.0 / size as f64;
                buf[..self.len].iter().map(|c| c.re * scale).collect()
            }
        }
    }

    pub fn kernel(&self) -> &[f64] {
        &self.kernel
    }
}

/// Distribution of the `k`-fold sum on `{0, ..., n}` together with the retained mass.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvolutionPower {
    pub probs: Vec<f64>,
    pub retained_mass: f64,
}

/// `f^{*k}` truncated to `[0, n]` by binary powering.
pub fn convolution_power(f: &super::LifetimeDist, k: usize, n: usize) -> Result<ConvolutionPower> {
    if k == 0 {
        return Err(Error::Domain("convolution power needs k >= 1".into()));
    }
    let len = n + 1;
    let base: Vec<f64> = f.probs().iter().take(len).copied().collect();
    let mut result: Option<Vec<f64>> = None;
    let mut square = base;
    let mut e = k;
    loop {
        if e & 1 == 1 {
            result = Some(match result {
                None => square.clone(),
                Some(r) => clamp(convolve(&r, &square, len)),
            });
        }
        e >>= 1;
        if e == 0 {
            break;
        }
        square = clamp(convolve(&square, &square, len));
    }
    let mut probs = result.expect("k >= 1");
    probs.resize(len, 0.0);
    let retained_mass = crate::numeric::compensated_sum(probs.iter().copied());
    Ok(ConvolutionPower { probs, retained_mass })
}

// FFT round-off can leave tiny negative values where the exact result is 0
fn clamp(mut v: Vec<f64>) -> Vec<f64> {
    for x in &mut v {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
    v
}
