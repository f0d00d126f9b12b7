//! Stable subordinators, Mittag-Leffler and tied-down Mittag-Leffler processes.
//!
//! Normalization: the subordinator `eta` satisfies `E eta(1)^(-gamma) = 1`, so the
//! Mittag-Leffler process `m = eta^{-1}` has `E m(1) = 1`.

mod identities;
mod stable;

pub use identities::{estimate_prop_c, estimate_prop_d, tied_expectation, MonteCarlo};
pub use stable::{
    levy_cdf, levy_density, sample_standard_stable, stable_density, standard_stable_cdf,
    standard_stable_density, z_scale, MarginalSampler,
};

use crate::error::{config, domain, Error, Result};
use crate::exec::{map_seeded, stream_rng, ExecMode};
use crate::numeric::{gamma as gamma_fn, ln_gamma};
use crate::paths::StepPath;
use crate::stats::{ComparisonReport, Estimate};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Stability index strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct GammaIndex(f64);

impl GammaIndex {
    pub fn new(gamma: f64) -> Result<Self> {
        if gamma > 0.0 && gamma < 1.0 {
            Ok(GammaIndex(gamma))
        } else {
            domain(format!("gamma must lie in (0, 1), got {gamma}"))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for GammaIndex {
    type Error = Error;
    fn try_from(g: f64) -> Result<Self> {
        GammaIndex::new(g)
    }
}

impl From<GammaIndex> for f64 {
    fn from(g: GammaIndex) -> f64 {
        g.0
    }
}

/// A grid-sampled stable subordinator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubordinatorSpec {
    pub gamma: GammaIndex,
    /// Multiplier applied to standard stable variates.
    pub scale: f64,
    pub grid_step: f64,
    pub seed: u64,
    pub stream: u64,
}

impl SubordinatorSpec {
    /// Spec with the normalizing scale `Gamma(1+gamma)^(-1/gamma)`.
    pub fn normalized(gamma: GammaIndex, grid_step: f64, seed: u64, stream: u64) -> Self {
        SubordinatorSpec { gamma, scale: 1.0 / z_scale(gamma), grid_step, seed, stream }
    }

    fn validate(&self) -> Result<()> {
        if !(self.grid_step > 0.0 && self.grid_step.is_finite()) {
            return config(format!("grid step must be positive, got {}", self.grid_step));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return config(format!("scale must be positive, got {}", self.scale));
        }
        Ok(())
    }

    /// Increment of the subordinator over one grid cell.
    #[inline]
    fn increment<R: Rng + ?Sized>(&self, rng: &mut R, cell_scale: f64) -> f64 {
        cell_scale * sample_standard_stable(self.gamma, rng)
    }
}

/// Samples `eta` on the grid `k * grid_step` for `k = 1..=ceil(horizon / grid_step)`.
pub fn sample_subordinator(spec: &SubordinatorSpec, horizon: f64) -> Result<StepPath> {
    spec.validate()?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return domain(format!("horizon must be positive, got {horizon}"));
    }
    let mut rng = stream_rng(spec.seed, spec.stream);
    let k_max = (horizon / spec.grid_step).ceil().max(1.0) as usize;
    let cell = spec.scale * spec.grid_step.powf(1.0 / spec.gamma.get());
    let mut eta = 0.0;
    let mut epochs = Vec::with_capacity(k_max);
    let mut values = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        eta += spec.increment(&mut rng, cell);
        epochs.push(k as f64 * spec.grid_step);
        values.push(eta);
    }
    let h = epochs[k_max - 1];
    StepPath::new(h, epochs, values)
}

/// Samples the grid subordinator until it exceeds `horizon` and returns its inverse on
/// `[0, horizon]`: the step approximation of `m` with step height `grid_step`.
pub fn sample_ml_path_rng<R: Rng + ?Sized>(spec: &SubordinatorSpec, horizon: f64, rng: &mut R) -> StepPath {
    let delta = spec.grid_step;
    let cell = spec.scale * delta.powf(1.0 / spec.gamma.get());
    let guess = (horizon.powf(spec.gamma.get()) / delta) as usize + 16;
    let mut epochs = Vec::with_capacity(guess);
    let mut values = Vec::with_capacity(guess);
    let mut eta = 0.0;
    let mut k = 1usize;
    loop {
        eta += spec.increment(rng, cell);
        if eta > horizon {
            break;
        }
        // eta(k delta) <= horizon: the inverse jumps there to (k + 1) delta
        k += 1;
        epochs.push(eta);
        values.push(k as f64 * delta);
    }
    StepPath::from_parts_unchecked(horizon, delta, epochs, values)
}

/// Step approximation of `m` on `[0, horizon]` with `resolution` grid steps per unit of `m`.
pub fn sample_ml_path(gamma: GammaIndex, horizon: f64, resolution: f64, seed: u64, stream: u64) -> Result<StepPath> {
    let spec = ml_spec(gamma, resolution, seed, stream)?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return domain(format!("horizon must be positive, got {horizon}"));
    }
    let mut rng = stream_rng(seed, stream);
    Ok(sample_ml_path_rng(&spec, horizon, &mut rng))
}

fn ml_spec(gamma: GammaIndex, resolution: f64, seed: u64, stream: u64) -> Result<SubordinatorSpec> {
    if !(resolution >= 1.0 && resolution.is_finite()) {
        return config(format!("resolution must be at least 1, got {resolution}"));
    }
    let spec = SubordinatorSpec::normalized(gamma, 1.0 / resolution, seed, stream);
    spec.validate()?;
    Ok(spec)
}

/// A tied-down path on `[0, 1]` and the number of degenerate draws that were rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct TiedSample {
    pub path: StepPath,
    pub resampled: usize,
}

pub fn sample_tied_path_rng<R: Rng + ?Sized>(spec: &SubordinatorSpec, rng: &mut R) -> TiedSample {
    let mut resampled = 0;
    loop {
        let m = sample_ml_path_rng(spec, 1.0, rng);
        match m.tie_down(spec.gamma.get()) {
            Ok(path) => return TiedSample { path, resampled },
            Err(_) => resampled += 1,
        }
    }
}

/// Samples `m` on `[0, 1]` and ties it down at its last point of increase before 1.
pub fn sample_tied_path(gamma: GammaIndex, resolution: f64, seed: u64, stream: u64) -> Result<TiedSample> {
    let spec = ml_spec(gamma, resolution, seed, stream)?;
    let mut rng = stream_rng(seed, stream);
    Ok(sample_tied_path_rng(&spec, &mut rng))
}

/// Samples of `w(1)` drawn through the tied-down sampler.
#[derive(Debug, Clone, PartialEq)]
pub struct TiedMarginal {
    pub gamma: GammaIndex,
    pub samples: Vec<f64>,
    pub resampled: usize,
}

/// `samples` independent draws of `m(1)` from discretized paths.
pub fn ml_marginals(gamma: GammaIndex, resolution: f64, samples: usize, seed: u64, mode: ExecMode) -> Result<Vec<f64>> {
    ml_scaled_marginals(gamma, 1.0, resolution, samples, seed, mode)
}

/// Draws of `scale(m, a, gamma)(1) = m(a) / a^gamma` from discretized paths.
pub fn ml_scaled_marginals(
    gamma: GammaIndex,
    a: f64,
    resolution: f64,
    samples: usize,
    seed: u64,
    mode: ExecMode,
) -> Result<Vec<f64>> {
    if !(a > 0.0 && a.is_finite()) {
        return domain(format!("scale factor must be positive, got {a}"));
    }
    let spec = ml_spec(gamma, resolution, seed, 0)?;
    Ok(map_seeded(mode, samples, seed, |_, rng| {
        let m = sample_ml_path_rng(&spec, a, rng);
        m.scale(a, gamma.get()).map(|p| p.value_at(1.0)).expect("horizon matches")
    }))
}

/// `samples` draws of `w(1)` through [`sample_tied_path`].
pub fn tied_marginals(gamma: GammaIndex, resolution: f64, samples: usize, seed: u64, mode: ExecMode) -> Result<TiedMarginal> {
    let spec = ml_spec(gamma, resolution, seed, 0)?;
    let draws = map_seeded(mode, samples, seed, |_, rng| {
        let t = sample_tied_path_rng(&spec, rng);
        (t.path.value_at(1.0), t.resampled)
    });
    Ok(TiedMarginal {
        gamma,
        resampled: draws.iter().map(|d| d.1).sum(),
        samples: draws.into_iter().map(|d| d.0).collect(),
    })
}

/// Coupled grid refinement: `m(1)` from a subordinator on the grid `delta / 2` and from the
/// same subordinator read on the grid `delta`. The report passes when the two means differ
/// by less than one standard error of the fine estimate.
pub fn refinement_study(gamma: GammaIndex, resolution: f64, samples: usize, seed: u64, mode: ExecMode) -> Result<ComparisonReport> {
    let fine = ml_spec(gamma, 2.0 * resolution, seed, 0)?;
    let delta = 1.0 / resolution;
    let cell = fine.scale * fine.grid_step.powf(1.0 / gamma.get());
    let pairs = map_seeded(mode, samples, seed, |_, rng| {
        let (mut eta, mut k) = (0.0, 0usize);
        loop {
            eta += fine.increment(rng, cell);
            if eta > 1.0 {
                break;
            }
            k += 1;
        }
        // coarse grid points are the even fine indices, so m_delta(1) = delta (1 + floor(k / 2))
        let coarse = delta * (1 + k / 2) as f64;
        (coarse, fine.grid_step * (1 + k) as f64)
    });
    let coarse: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let fine_m: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let c = Estimate::mean_of(&coarse)?;
    let f = Estimate::mean_of(&fine_m)?;
    Ok(ComparisonReport::new("ml-refinement", c, Estimate::exact(f.value), f.se, 0.0)
        .param("gamma", gamma.get())
        .param("resolution", resolution)
        .param("samples", samples)
        .seed(seed)
        .diagnostic("fine_se", f.se))
}

/// `p!` times `Gamma(1+gamma)^p / Gamma(1+p gamma)`: the `p`-th moment of `m(1)`.
pub fn ml_moment(gamma: GammaIndex, p: u32) -> f64 {
    let g = gamma.get();
    let p = p as f64;
    (ln_gamma(p + 1.0) + p * ln_gamma(1.0 + g) - ln_gamma(1.0 + p * g)).exp()
}

/// `E w(1)^p`, equal to `ml_moment(gamma, p + 1)` by size-biasing.
pub fn tied_marginal_moment(gamma: GammaIndex, p: u32) -> f64 {
    ml_moment(gamma, p + 1)
}

/// `E S^(-gamma)` for the standard law, `1 / Gamma(1+gamma)`.
pub fn standard_negative_moment(gamma: GammaIndex) -> f64 {
    1.0 / gamma_fn(1.0 + gamma.get())
}

#[cfg(test)]
mod tests;
