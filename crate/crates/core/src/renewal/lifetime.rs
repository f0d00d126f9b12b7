use crate::error::{config, Error, Result};
use crate::numeric::{compensated_sum, gcd, hurwitz_zeta, zeta};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Parametric family a lifetime law was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// `f_n = n^-(1+gamma) / zeta(1+gamma)`, `gamma in (0, 1]`.
    Zeta { gamma: f64 },
    /// `f_n = q (1-q)^(n-1)`.
    Geometric { q: f64 },
    /// `phi = span * psi + residue` with `psi + 1` zeta-distributed.
    Arithmetic { gamma: f64, span: u64, residue: u64 },
    Custom,
}

/// Lifetime distribution on `{1, ..., n_max}`; mass beyond `n_max` is kept in
/// `tail_mass` and never enters exact computations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifetimeDist {
    family: Family,
    /// `probs[n] = f_n`, with `probs[0] = 0`.
    probs: Vec<f64>,
    tail_mass: f64,
    gamma: Option<f64>,
}

fn check_gamma(gamma: f64, allow_one: bool) -> Result<()> {
    let ok = gamma > 0.0 && (gamma < 1.0 || (allow_one && gamma == 1.0));
    if !ok {
        return config(format!("tail index must lie in (0, 1{}, got {gamma}", if allow_one { "]" } else { ")" }));
    }
    Ok(())
}

impl LifetimeDist {
    /// Builds a member of `family` truncated at `n_max`.
    pub fn new(family: Family, n_max: usize) -> Result<Self> {
        if n_max == 0 {
            return config("n_max must be positive");
        }
        let mut probs = vec![0.0; n_max + 1];
        let (tail_mass, gamma) = match family {
            Family::Zeta { gamma } => {
                check_gamma(gamma, true)?;
                let s = 1.0 + gamma;
                let z = zeta(s);
                for (n, p) in probs.iter_mut().enumerate().skip(1) {
                    *p = (n as f64).powf(-s) / z;
                }
                (hurwitz_zeta(s, n_max as f64 + 1.0) / z, Some(gamma))
            }
            Family::Geometric { q } => {
                if !(q > 0.0 && q <= 1.0) {
                    return config(format!("geometric parameter must lie in (0, 1], got {q}"));
                }
                for (n, p) in probs.iter_mut().enumerate().skip(1) {
                    *p = q * (1.0 - q).powi(n as i32 - 1);
                }
                ((1.0 - q).powi(n_max as i32), None)
            }
            Family::Arithmetic { gamma, span, residue } => {
                check_gamma(gamma, false)?;
                if span < 2 {
                    return config("arithmetic lifetimes need span >= 2");
                }
                if residue == 0 || residue >= span {
                    return config("the residue must lie in 1..span");
                }
                let s = 1.0 + gamma;
                let z = zeta(s);
                let mut j = 0u64;
                while (span * j + residue) as usize <= n_max {
                    probs[(span * j + residue) as usize] = ((j + 1) as f64).powf(-s) / z;
                    j += 1;
                }
                (hurwitz_zeta(s, j as f64 + 1.0) / z, Some(gamma))
            }
            Family::Custom => return config("custom lifetimes are built from weights"),
        };
        Ok(LifetimeDist { family, probs, tail_mass, gamma })
    }

    pub fn zeta(gamma: f64, n_max: usize) -> Result<Self> {
        Self::new(Family::Zeta { gamma }, n_max)
    }

    pub fn geometric(q: f64, n_max: usize) -> Result<Self> {
        Self::new(Family::Geometric { q }, n_max)
    }

    pub fn arithmetic(gamma: f64, span: u64, residue: u64, n_max: usize) -> Result<Self> {
        Self::new(Family::Arithmetic { gamma, span, residue }, n_max)
    }

    /// Normalizes nonnegative `weights[i]` for `n = i + 1`.
    pub fn custom(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return config("custom lifetime needs at least one weight");
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return config("weights must be finite and nonnegative");
        }
        let total = compensated_sum(weights.iter().copied());
        if !(total > 0.0) {
            return config("weights sum to zero");
        }
        let mut probs = vec![0.0];
        probs.extend(weights.iter().map(|w| w / total));
        while probs.len() > 2 && *probs.last().expect("nonempty") == 0.0 {
            probs.pop();
        }
        Ok(LifetimeDist { family: Family::Custom, probs, tail_mass: 0.0, gamma: None })
    }

    /// Declares a tail index for a custom law.
    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        check_gamma(gamma, true)?;
        self.gamma = Some(gamma);
        Ok(self)
    }

    /// Reads `n,weight` rows (or one weight per row for `n = 1, 2, ...`); `#` starts a comment.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_table(&text)
    }

    pub fn from_table(text: &str) -> Result<Self> {
        let mut weights: Vec<f64> = Vec::new();
        let mut next = 1usize;
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() || line.starts_with(|c: char| c.is_ascii_alphabetic()) {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = || Error::Parse(format!("line {}: {line:?}", i + 1));
            let (n, w) = match cols.as_slice() {
                [w] => (next, w.parse::<f64>().map_err(|_| bad())?),
                [n, w] => (n.parse::<usize>().map_err(|_| bad())?, w.parse::<f64>().map_err(|_| bad())?),
                _ => return Err(bad()),
            };
            if n == 0 || n < next {
                return Err(Error::Parse(format!("line {}: support points must increase from 1", i + 1)));
            }
            weights.resize(n - 1, 0.0);
            weights.push(w);
            next = n + 1;
        }
        Self::custom(&weights)
    }

    /// Parses `zeta:G`, `geom:Q`, `arith:P:XI:G`, `custom:w1,w2,...` or `file:PATH`,
    /// truncating parametric families at `n_max`.
    pub fn parse(spec: &str, n_max: usize) -> Result<Self> {
        let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad number {s:?} in lifetime {spec:?}")));
        match kind {
            "zeta" => Self::zeta(num(rest)?, n_max),
            "geom" => Self::geometric(num(rest)?, n_max),
            "arith" => {
                let parts: Vec<&str> = rest.split(':').collect();
                let [p, xi, g] = parts.as_slice() else {
                    return config(format!("expected arith:SPAN:RESIDUE:GAMMA, got {spec:?}"));
                };
                Self::arithmetic(num(g)?, num(p)? as u64, num(xi)? as u64, n_max)
            }
            "custom" => {
                let w: Result<Vec<f64>> = rest.split(',').map(num).collect();
                Self::custom(&w?)
            }
            "file" => Self::from_file(Path::new(rest)),
            _ => config(format!("unknown lifetime family {kind:?}; expected zeta, geom, arith, custom or file")),
        }
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn n_max(&self) -> usize {
        self.probs.len() - 1
    }

    /// Largest `n` for which the truncation cannot affect exact computations.
    pub fn exact_up_to(&self) -> usize {
        if self.tail_mass == 0.0 {
            usize::MAX
        } else {
            self.n_max()
        }
    }

    /// `probs()[n] = f_n` for `n <= n_max`, with `probs()[0] = 0`.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn pmf(&self, n: usize) -> f64 {
        self.probs.get(n).copied().unwrap_or(0.0)
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn declared_gamma(&self) -> Option<f64> {
        self.gamma
    }

    /// Total mass including the tail sentinel.
    pub fn total_mass(&self) -> f64 {
        compensated_sum(self.probs.iter().copied()) + self.tail_mass
    }

    fn support(&self) -> impl Iterator<Item = u64> + '_ {
        self.probs.iter().enumerate().filter(|(_, p)| **p > 0.0).map(|(n, _)| n as u64)
    }

    /// gcd of the support; the renewal sequence is aperiodic iff this is 1.
    pub fn period(&self) -> u64 {
        self.support().fold(0, gcd)
    }

    /// gcd of differences of support points (the lattice span of sums).
    pub fn lattice_span(&self) -> u64 {
        let first = self.support().next().unwrap_or(0);
        self.support().fold(0, |g, n| gcd(g, n - first))
    }

    /// `P(phi > t)` for real `t >= 0`; parametric families use a smooth extension
    /// agreeing with the step function at integers, custom laws interpolate linearly.
    pub fn tail_smooth(&self, t: f64) -> f64 {
        let t = t.max(0.0);
        match self.family {
            Family::Zeta { gamma } => {
                let s = 1.0 + gamma;
                hurwitz_zeta(s, t + 1.0) / zeta(s)
            }
            Family::Geometric { q } => (1.0 - q).powf(t),
            Family::Arithmetic { gamma, span, residue } => {
                // phi > t  iff  psi + 1 > (t - residue) / span + 1
                let x = (t - residue as f64) / span as f64;
                let s = 1.0 + gamma;
                if x < 0.0 {
                    1.0
                } else {
                    hurwitz_zeta(s, x + 1.0) / zeta(s)
                }
            }
            Family::Custom => {
                let step = |n: usize| -> f64 {
                    if n >= self.n_max() {
                        self.tail_mass
                    } else {
                        compensated_sum(self.probs[n + 1..].iter().copied()) + self.tail_mass
                    }
                };
                let lo = t.floor() as usize;
                let w = t - lo as f64;
                (1.0 - w) * step(lo) + w * step(lo + 1)
            }
        }
    }
}
