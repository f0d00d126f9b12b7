//! Experiment configuration: a JSON file merged with command-line flags.

use clap::Args;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "TIEDOWN_OUT";

/// Every field is optional; experiments fill in their own defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Experiment name when running from a config file alone.
    #[arg(skip)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<String>,
    /// Tail index gamma in (0, 1).
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Lifetime law: zeta:G, geom:Q, arith:SPAN:RESIDUE:G, custom:W1,W2,... or file:PATH.
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lifetime: Option<String>,
    /// Size parameter n (table length, LLT index, orbit length).
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Conditioning time N for tied-down and Cesàro computations.
    #[arg(long = "big-n", global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub big_n: Option<usize>,
    /// Monte Carlo sample count.
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Subordinator grid steps per unit of the Mittag-Leffler value.
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<f64>,
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Worker thread cap.
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Product functional `T:G;T:G|H`, e.g. `0.5:exp:1|exp:1`.
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functional: Option<String>,
    /// Single factor g, e.g. `exp:1` (cor7 statistic).
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factor: Option<String>,
    /// Override of the experiment's absolute or relative tolerance.
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    /// Ulam grid size.
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    /// Output directory (default: $TIEDOWN_OUT or ./tiedown-out).
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($f:ident),*) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f.clone(); } )*
    };
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// `self` with every value set in `flags` replaced.
    pub fn overridden_by(mut self, flags: &ExperimentConfig) -> Self {
        overlay!(self, flags, experiment, gamma, lifetime, n, big_n, samples, resolution, seed, threads, functional, factor, tolerance, grid, out);
        self
    }

    /// Reads the file named by `--config` (if any) and applies the flags on top.
    pub fn resolve(flags: &ExperimentConfig) -> Result<Self, String> {
        let base = match &flags.config {
            Some(p) => Self::from_file(p)?,
            None => ExperimentConfig::default(),
        };
        let cfg = base.overridden_by(flags);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), String> {
        let bad = |what: &str| Err(format!("invalid {what}"));
        if let Some(g) = self.gamma {
            if !(g > 0.0 && g < 1.0) {
                return bad(&format!("--gamma {g}: must lie in (0, 1)"));
            }
        }
        if let Some(s) = self.samples {
            if s < 2 {
                return bad("--samples: need at least 2");
            }
        }
        if let Some(r) = self.resolution {
            if !(r.is_finite() && r >= 1.0) {
                return bad("--resolution: must be at least 1");
            }
        }
        if self.n == Some(0) || self.big_n == Some(0) {
            return bad("--n/--big-n: must be positive");
        }
        if self.threads == Some(0) {
            return bad("--threads: must be positive");
        }
        if let Some(t) = self.tolerance {
            if !(t.is_finite() && t >= 0.0) {
                return bad("--tolerance: must be nonnegative");
            }
        }
        Ok(())
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out
            .clone()
            .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("tiedown-out"))
    }

    pub fn gamma_or(&self, d: f64) -> f64 {
        self.gamma.unwrap_or(d)
    }

    pub fn seed_or(&self, d: u64) -> u64 {
        self.seed.unwrap_or(d)
    }
}
