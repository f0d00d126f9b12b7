//! Nondecreasing càdlàg step paths on a bounded horizon.
//!
//! A [`StepPath`] is a finite staircase: a base value at time 0 followed by
//! upward jumps at strictly increasing epochs. Paths on `[0, inf)` are
//! represented by truncation; functionals whose answer depends on what happens
//! past the horizon return a [`Censored`] value.

mod functional;
mod io;
mod j1;
pub mod selftest;

pub use functional::{stieltjes_functional, Factor, PathFunctional, ProductFunctional, StieltjesValue};
pub use j1::{j1_distance, j1_distance_banded, uniform_distance};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// A value that may have been cut off at the truncation horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Censored<T> {
    pub value: T,
    /// True when the exact answer lies beyond the horizon and `value` is the
    /// horizon-capped stand-in.
    pub censored: bool,
}

/// Nondecreasing right-continuous step function on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPath", into = "RawPath")]
pub struct StepPath {
    horizon: f64,
    base: f64,
    epochs: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawPath {
    horizon: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    base: f64,
    epochs: Vec<f64>,
    values: Vec<f64>,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0 && x.is_sign_positive()
}

impl TryFrom<RawPath> for StepPath {
    type Error = Error;
    fn try_from(raw: RawPath) -> Result<Self> {
        StepPath::with_base(raw.horizon, raw.base, raw.epochs, raw.values)
    }
}

impl From<StepPath> for RawPath {
    fn from(p: StepPath) -> Self {
        RawPath { horizon: p.horizon, base: p.base, epochs: p.epochs, values: p.values }
    }
}

impl StepPath {
    /// Path with base value 0 and jumps to `values[i]` at `epochs[i]`.
    pub fn new(horizon: f64, epochs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::with_base(horizon, 0.0, epochs, values)
    }

    /// Path starting from `base` at time 0. Zero-size jumps are dropped so the
    /// stored values are strictly increasing.
    pub fn with_base(horizon: f64, base: f64, epochs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return domain(format!("horizon must be positive and finite, got {horizon}"));
        }
        if !(base.is_finite() && base >= 0.0) {
            return domain(format!("base value must be finite and nonnegative, got {base}"));
        }
        if epochs.len() != values.len() {
            return domain("epochs and values differ in length");
        }
        let mut e_out = Vec::with_capacity(epochs.len());
        let mut v_out = Vec::with_capacity(values.len());
        let mut prev_e = 0.0;
        let mut prev_v = base;
        for (&e, &v) in epochs.iter().zip(&values) {
            if !(e > prev_e) || !e.is_finite() {
                return domain(format!("epochs must be positive and strictly increasing (at {e})"));
            }
            if e > horizon {
                return domain(format!("epoch {e} exceeds horizon {horizon}"));
            }
            if !(v >= prev_v) || !v.is_finite() {
                return domain(format!("values must be finite and nondecreasing (at epoch {e})"));
            }
            if v > prev_v {
                e_out.push(e);
                v_out.push(v);
            }
            prev_e = e;
            prev_v = v;
        }
        Ok(StepPath { horizon, base, epochs: e_out, values: v_out })
    }

    /// Builds a path from `(epoch, jump size)` pairs.
    pub fn from_jumps(horizon: f64, jumps: &[(f64, f64)]) -> Result<Self> {
        let mut acc = 0.0;
        let mut epochs = Vec::with_capacity(jumps.len());
        let mut values = Vec::with_capacity(jumps.len());
        for &(e, dx) in jumps {
            if !(dx >= 0.0) {
                return domain("jump sizes must be nonnegative");
            }
            acc += dx;
            epochs.push(e);
            values.push(acc);
        }
        Self::new(horizon, epochs, values)
    }

    /// The staircase `s -> floor(s)` on `[0, horizon]`.
    pub fn staircase(horizon: f64) -> Self {
        let n = horizon.floor() as usize;
        let epochs: Vec<f64> = (1..=n).map(|k| k as f64).collect();
        let values = epochs.clone();
        StepPath { horizon, base: 0.0, epochs, values }
    }

    pub(crate) fn from_parts_unchecked(horizon: f64, base: f64, epochs: Vec<f64>, values: Vec<f64>) -> Self {
        debug_assert!(epochs.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(epochs.last().is_none_or(|&e| e <= horizon));
        StepPath { horizon, base, epochs, values }
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn epochs(&self) -> &[f64] {
        &self.epochs
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn num_jumps(&self) -> usize {
        self.epochs.len()
    }

    /// `(epoch, jump size)` pairs.
    pub fn jumps(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let prev = std::iter::once(self.base).chain(self.values.iter().copied());
        self.epochs.iter().zip(self.values.iter().zip(prev)).map(|(&e, (&v, p))| (e, v - p))
    }

    pub fn final_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(self.base)
    }

    /// Number of jump epochs `<= t`.
    #[inline]
    fn rank(&self, t: f64) -> usize {
        self.epochs.partition_point(|&e| e <= t)
    }

    /// Value at `t` without the domain check (times past the horizon read the
    /// final value).
    #[inline]
    pub fn value_at(&self, t: f64) -> f64 {
        match self.rank(t) {
            0 => self.base,
            k => self.values[k - 1],
        }
    }

    /// Càdlàg evaluation at `t` in `[0, horizon]`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(self.value_at(t))
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(0.0..=self.horizon).contains(&t) {
            return domain(format!("time {t} outside [0, {}]", self.horizon));
        }
        Ok(())
    }

    /// Last jump epoch `<= t`, if any.
    pub fn last_epoch_at_or_before(&self, t: f64) -> Option<f64> {
        match self.rank(t) {
            0 => None,
            k => Some(self.epochs[k - 1]),
        }
    }

    /// Left end of the flat stretch containing `t`.
    pub fn waiting_g(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(self.last_epoch_at_or_before(t).unwrap_or(0.0))
    }

    /// Right end of the flat stretch containing `t`; censored at the horizon.
    pub fn waiting_d(&self, t: f64) -> Result<Censored<f64>> {
        if !(0.0..self.horizon).contains(&t) {
            return domain(format!("time {t} outside [0, {})", self.horizon));
        }
        Ok(match self.epochs.get(self.rank(t)) {
            Some(&e) => Censored { value: e, censored: false },
            None => Censored { value: self.horizon, censored: true },
        })
    }

    /// The right-continuous inverse `t -> inf{s > 0 : path(s) > t}` over the
    /// value range `[0, range]`. Where no jump above `t` exists inside the
    /// horizon the output is capped at the horizon and flagged as censored.
    pub fn inverse(&self, range: f64) -> Result<Censored<StepPath>> {
        if !(range > 0.0 && range.is_finite()) {
            return domain("inverse range must be positive");
        }
        if range > self.final_value() {
            return domain(format!(
                "inverse range {range} exceeds final value {} (path(inf-) = inf cannot be certified)",
                self.final_value()
            ));
        }
        // Distinct levels are base, values[0], values[1], ...; the inverse at t is
        // the epoch of the first level strictly above t.
        let next_epoch = |i: usize| -> (f64, bool) {
            match self.epochs.get(i) {
                Some(&e) => (e, false),
                None => (self.horizon, true),
            }
        };
        let mut censored = false;
        let out_base = if self.base > 0.0 {
            0.0
        } else {
            let (e, c) = next_epoch(0);
            censored |= c;
            e
        };
        let mut epochs = Vec::new();
        let mut values = Vec::new();
        let levels = std::iter::once(self.base).chain(self.values.iter().copied());
        for (i, level) in levels.enumerate() {
            if level <= 0.0 {
                continue;
            }
            if level > range {
                break;
            }
            let (e, c) = next_epoch(i);
            censored |= c;
            epochs.push(level);
            values.push(e);
        }
        Ok(Censored {
            value: StepPath::with_base(range, out_base, epochs, values)?,
            censored,
        })
    }

    /// `t -> path(a t) / a^gamma` on `[0, horizon / a]`.
    pub fn scale(&self, a: f64, gamma: f64) -> Result<StepPath> {
        if !(a > 0.0 && a.is_finite()) {
            return domain(format!("scale factor must be positive, got {a}"));
        }
        if !(gamma > 0.0 && gamma <= 1.0) {
            return domain(format!("gamma must lie in (0, 1], got {gamma}"));
        }
        let c = a.powf(gamma);
        Ok(StepPath {
            horizon: self.horizon / a,
            base: self.base / c,
            epochs: self.epochs.iter().map(|e| e / a).collect(),
            values: self.values.iter().map(|v| v / c).collect(),
        })
    }

    /// Restriction to `[0, horizon]`.
    pub fn restrict(&self, horizon: f64) -> Result<StepPath> {
        if !(horizon > 0.0) || horizon > self.horizon {
            return domain(format!("cannot restrict horizon {} to {horizon}", self.horizon));
        }
        let k = self.rank(horizon);
        Ok(StepPath {
            horizon,
            base: self.base,
            epochs: self.epochs[..k].to_vec(),
            values: self.values[..k].to_vec(),
        })
    }

    /// `t -> path(s + t) - path(s)` on `[0, horizon - s]`.
    pub fn increment_shift(&self, s: f64) -> Result<StepPath> {
        if !(s >= 0.0 && s < self.horizon) {
            return domain(format!("shift {s} outside [0, {})", self.horizon));
        }
        let k = self.rank(s);
        let v0 = self.value_at(s);
        Ok(StepPath {
            horizon: self.horizon - s,
            base: 0.0,
            epochs: self.epochs[k..].iter().map(|e| e - s).collect(),
            values: self.values[k..].iter().map(|v| v - v0).collect(),
        })
    }

    /// Rescales by the last point of increase `G <= 1` so that it lands at 1:
    /// `t -> path(G t) / G^gamma` on `[0, 1]`.
    pub fn tie_down(&self, gamma: f64) -> Result<StepPath> {
        if self.horizon < 1.0 {
            return domain("tie-down needs a path defined on [0, 1]");
        }
        let g = match self.last_epoch_at_or_before(1.0) {
            Some(g) => g,
            None => return Err(Error::Degenerate("no point of increase in (0, 1]".into())),
        };
        self.scale(g, gamma)?.restrict(1.0)
    }
}
