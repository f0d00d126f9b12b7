//! Monte Carlo estimators for the two sides of the tied-down characterizations.

use super::{ml_spec, sample_ml_path_rng, sample_tied_path_rng, GammaIndex, MarginalSampler};
use crate::error::{domain, Result};
use crate::exec::{map_seeded, sub_seed, ExecMode};
use crate::paths::{stieltjes_functional, PathFunctional, ProductFunctional};
use crate::stats::{ComparisonReport, Estimate};
use serde::{Deserialize, Serialize};

/// Sample budget shared by the Monte Carlo estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarlo {
    pub samples: usize,
    /// Grid steps per unit of `m`.
    pub resolution: f64,
    pub seed: u64,
    #[serde(skip)]
    pub mode: ExecMode,
}

impl MonteCarlo {
    pub fn new(samples: usize, resolution: f64, seed: u64) -> Self {
        MonteCarlo { samples, resolution, seed, mode: ExecMode::default() }
    }

    pub fn with_mode(mut self, mode: ExecMode) -> Self {
        self.mode = mode;
        self
    }

    fn check(&self) -> Result<()> {
        if self.samples < 2 {
            return domain("Monte Carlo needs at least two samples");
        }
        Ok(())
    }
}

/// `E pf(w)` by direct sampling of tied-down paths.
pub fn tied_expectation(gamma: GammaIndex, pf: &ProductFunctional, mc: &MonteCarlo) -> Result<Estimate> {
    mc.check()?;
    let spec = ml_spec(gamma, mc.resolution, mc.seed, 0)?;
    let draws = map_seeded(mc.mode, mc.samples, sub_seed(mc.seed, 1), |_, rng| {
        let t = sample_tied_path_rng(&spec, rng);
        pf.eval(&t.path).expect("tied paths live on [0, 1]")
    });
    Estimate::mean_of(&draws)
}

/// Compares `E h(w)` (tied-down sampler) with `E int_(eps,1] h(Delta_{t,gamma} m) dm(t)`
/// (Stieltjes sums over independent Mittag-Leffler paths).
pub fn estimate_prop_c(gamma: GammaIndex, h: &PathFunctional, mc: &MonteCarlo, eps: f64, z: f64) -> Result<ComparisonReport> {
    mc.check()?;
    let spec = ml_spec(gamma, mc.resolution, mc.seed, 0)?;
    let g = gamma.get();
    let lhs_draws = map_seeded(mc.mode, mc.samples, sub_seed(mc.seed, 1), |_, rng| {
        let t = sample_tied_path_rng(&spec, rng);
        (h.eval(&t.path).expect("tied paths live on [0, 1]"), t.resampled)
    });
    let rhs_draws = map_seeded(mc.mode, mc.samples, sub_seed(mc.seed, 2), |_, rng| {
        let m = sample_ml_path_rng(&spec, 1.0, rng);
        let s = stieltjes_functional(h, &m, g, eps).expect("validated arguments");
        (s.value, s.cutoff_bound)
    });
    let lhs: Vec<f64> = lhs_draws.iter().map(|d| d.0).collect();
    let rhs: Vec<f64> = rhs_draws.iter().map(|d| d.0).collect();
    let resampled: usize = lhs_draws.iter().map(|d| d.1).sum();
    let bound = Estimate::mean_of(&rhs_draws.iter().map(|d| d.1).collect::<Vec<_>>())?;
    Ok(ComparisonReport::new("prop-c", Estimate::mean_of(&lhs)?, Estimate::mean_of(&rhs)?, bound.value, z)
        .param("gamma", g)
        .param("samples", mc.samples)
        .param("resolution", mc.resolution)
        .param("epsilon", eps)
        .seed(mc.seed)
        .diagnostic("cutoff_bound", bound.value)
        .diagnostic("tied_resampled", resampled as f64))
}

/// Compares `E g(w)` for a product functional (tied-down sampler) with the
/// first-passage representation
/// `E[ prod g_nu(m(t_nu)) 1{D <= 1} (1 - D)^(gamma-1) h((1 - D)^gamma W) ]`,
/// `D` the first jump of `m` after `t_N` and `W` an independent draw of `w(1)`.
pub fn estimate_prop_d(gamma: GammaIndex, pf: &ProductFunctional, mc: &MonteCarlo, z: f64) -> Result<ComparisonReport> {
    mc.check()?;
    let spec = ml_spec(gamma, mc.resolution, mc.seed, 0)?;
    let g = gamma.get();
    let t_last = pf.last_time();
    let marginal = MarginalSampler::new(gamma);
    let lhs_draws = map_seeded(mc.mode, mc.samples, sub_seed(mc.seed, 1), |_, rng| {
        let t = sample_tied_path_rng(&spec, rng);
        (pf.eval(&t.path).expect("tied paths live on [0, 1]"), t.resampled)
    });
    let rhs_draws = map_seeded(mc.mode, mc.samples, sub_seed(mc.seed, 2), |_, rng| {
        let m = sample_ml_path_rng(&spec, 1.0, rng);
        let w = marginal.tied(rng);
        let d = m.waiting_d(t_last).expect("t_N < 1");
        if d.censored || d.value >= 1.0 {
            return (0.0, 0.0);
        }
        let rest = 1.0 - d.value;
        let weight = rest.powf(g - 1.0);
        (pf.eval_checkpoints(&m) * weight * pf.terminal().eval(rest.powf(g) * w), weight)
    });
    let lhs: Vec<f64> = lhs_draws.iter().map(|d| d.0).collect();
    let rhs: Vec<f64> = rhs_draws.iter().map(|d| d.0).collect();
    let retained = rhs_draws.iter().filter(|d| d.1 > 0.0).count();
    let min_weight = rhs_draws.iter().map(|d| d.1).filter(|w| *w > 0.0).fold(f64::INFINITY, f64::min);
    let max_weight = rhs_draws.iter().map(|d| d.1).fold(0.0, f64::max);
    Ok(ComparisonReport::new("prop-d", Estimate::mean_of(&lhs)?, Estimate::mean_of(&rhs)?, 0.0, z)
        .param("gamma", g)
        .param("samples", mc.samples)
        .param("resolution", mc.resolution)
        .param("functional", serde_json::to_value(pf).expect("serializable"))
        .seed(mc.seed)
        .check("weights_at_least_one", retained == 0 || min_weight >= 1.0)
        .diagnostic("retained_fraction", retained as f64 / mc.samples as f64)
        .diagnostic("max_weight", max_weight)
        .diagnostic("tied_resampled", lhs_draws.iter().map(|d| d.1).sum::<usize>() as f64))
}
