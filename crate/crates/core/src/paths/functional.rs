//! Test functions on paths: the registered factor family, product functionals
//! and the Stieltjes functional `int_eps^1 g(scaled path) d path`.

use serde::{Deserialize, Serialize};

use super::StepPath;
use crate::error::{config, domain, Result};

/// A nonnegative continuous function on `[0, inf]` from a closed family, so
/// that the finite limit at infinity holds by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Factor {
    /// Constant `value`.
    Const { value: f64 },
    /// `exp(-rate x)`.
    Exp { rate: f64 },
    /// `(1 + x)^(-beta)`.
    PowerDecay { beta: f64 },
    /// Piecewise-linear interpolation through `(knots[i], values[i])`,
    /// constant before the first and after the last knot.
    Spline { knots: Vec<f64>, values: Vec<f64> },
}

impl Factor {
    pub fn one() -> Self {
        Factor::Const { value: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Factor::Const { value } if !(value.is_finite() && *value >= 0.0) => {
                config(format!("constant factor must be finite and >= 0, got {value}"))
            }
            Factor::Exp { rate } if !(rate.is_finite() && *rate >= 0.0) => {
                config(format!("exp rate must be finite and >= 0, got {rate}"))
            }
            Factor::PowerDecay { beta } if !(beta.is_finite() && *beta >= 0.0) => {
                config(format!("power decay exponent must be finite and >= 0, got {beta}"))
            }
            Factor::Spline { knots, values } => {
                if knots.is_empty() || knots.len() != values.len() {
                    return config("spline needs equally many (>= 1) knots and values");
                }
                if knots.windows(2).any(|w| !(w[0] < w[1])) || knots.iter().any(|k| !k.is_finite()) {
                    return config("spline knots must be finite and strictly increasing");
                }
                if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return config("spline values must be finite and >= 0");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Factor::Const { value } => *value,
            Factor::Exp { rate } => (-rate * x).exp(),
            Factor::PowerDecay { beta } => (1.0 + x).powf(-beta),
            Factor::Spline { knots, values } => {
                let k = knots.partition_point(|&t| t <= x);
                if k == 0 {
                    values[0]
                } else if k == knots.len() {
                    values[k - 1]
                } else {
                    let w = (x - knots[k - 1]) / (knots[k] - knots[k - 1]);
                    values[k - 1] + w * (values[k] - values[k - 1])
                }
            }
        }
    }

    /// The value at `+inf`.
    pub fn limit_at_infinity(&self) -> f64 {
        match self {
            Factor::Const { value } => *value,
            Factor::Exp { rate } | Factor::PowerDecay { beta: rate } => {
                if *rate == 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Factor::Spline { values, .. } => *values.last().expect("validated"),
        }
    }

    /// `sup_{x >= 0} |g(x)|`.
    pub fn sup_norm(&self) -> f64 {
        match self {
            Factor::Const { value } => value.abs(),
            Factor::Exp { .. } | Factor::PowerDecay { .. } => 1.0,
            Factor::Spline { values, .. } => values.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Factor::Const { value } if *value == 1.0)
    }

    /// Parses `one`, `const:C`, `exp:RATE`, `pow:BETA` or
    /// `spline:X0/Y0,X1/Y1,...`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (kind, arg) = spec.split_once(':').unwrap_or((spec, ""));
        let num = |s: &str| -> Result<f64> {
            s.trim().parse::<f64>().or_else(|_| config(format!("bad number '{s}' in factor '{spec}'")))
        };
        let f = match kind.trim() {
            "one" => Factor::one(),
            "const" => Factor::Const { value: num(arg)? },
            "exp" => Factor::Exp { rate: num(arg)? },
            "pow" => Factor::PowerDecay { beta: num(arg)? },
            "spline" => {
                let mut knots = Vec::new();
                let mut values = Vec::new();
                for pair in arg.split(',') {
                    let (x, y) = pair
                        .split_once('/')
                        .ok_or_else(|| crate::Error::Config(format!("bad spline knot '{pair}'")))?;
                    knots.push(num(x)?);
                    values.push(num(y)?);
                }
                Factor::Spline { knots, values }
            }
            other => return config(format!("unknown factor kind '{other}'")),
        };
        f.validate()?;
        Ok(f)
    }
}

/// `xi -> prod_nu g_nu(xi(t_nu)) * h(xi(1) - xi(t_N))` with
/// `0 <= t_1 < ... < t_N < 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductFunctional {
    times: Vec<f64>,
    factors: Vec<Factor>,
    terminal: Factor,
}

impl ProductFunctional {
    pub fn new(times: Vec<f64>, factors: Vec<Factor>, terminal: Factor) -> Result<Self> {
        if times.is_empty() || times.len() != factors.len() {
            return config("a product functional needs N >= 1 times and as many factors");
        }
        if !(times[0] >= 0.0) {
            return config("times must be >= 0");
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return config("times must be strictly increasing");
        }
        if !(*times.last().expect("nonempty") < 1.0) {
            return config("times must be < 1");
        }
        for f in factors.iter().chain(std::iter::once(&terminal)) {
            f.validate()?;
        }
        Ok(ProductFunctional { times, factors, terminal })
    }

    /// The functional identically equal to 1.
    pub fn constant_one() -> Self {
        ProductFunctional { times: vec![0.0], factors: vec![Factor::one()], terminal: Factor::one() }
    }

    /// Single checkpoint `t` with factor `g` and terminal `h`.
    pub fn single(t: f64, g: Factor, h: Factor) -> Result<Self> {
        Self::new(vec![t], vec![g], h)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn terminal(&self) -> &Factor {
        &self.terminal
    }

    pub fn last_time(&self) -> f64 {
        *self.times.last().expect("nonempty")
    }

    pub fn is_constant_one(&self) -> bool {
        self.factors.iter().all(Factor::is_one) && self.terminal.is_one()
    }

    pub fn sup_norm(&self) -> f64 {
        self.factors.iter().map(Factor::sup_norm).product::<f64>() * self.terminal.sup_norm()
    }

    /// The product of the checkpoint factors only (no terminal factor).
    pub fn eval_checkpoints(&self, path: &StepPath) -> f64 {
        self.times.iter().zip(&self.factors).map(|(&t, g)| g.eval(path.value_at(t))).product()
    }

    /// Evaluates on a path defined on (at least) `[0, 1]`.
    pub fn eval(&self, path: &StepPath) -> Result<f64> {
        if path.horizon() < 1.0 {
            return domain("product functionals need a path on [0, 1]");
        }
        Ok(self.eval_scaled_unchecked(path, 1.0, 1.0))
    }

    /// Evaluates on `t -> path(a t) / a^gamma` without materializing it.
    #[inline]
    fn eval_scaled_unchecked(&self, path: &StepPath, a: f64, gamma: f64) -> f64 {
        let c = if a == 1.0 { 1.0 } else { a.powf(gamma) };
        let mut acc = 1.0;
        for (&t, g) in self.times.iter().zip(&self.factors) {
            acc *= g.eval(path.value_at(a * t) / c);
        }
        let last = path.value_at(a * self.last_time());
        acc * self.terminal.eval((path.value_at(a) - last) / c)
    }
}

/// Bounded functionals on paths over `[0, 1]` from the registered family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PathFunctional {
    /// `xi -> H(xi(1))`.
    Terminal { h: Factor },
    Product { pf: ProductFunctional },
}

impl PathFunctional {
    pub fn terminal(h: Factor) -> Self {
        PathFunctional::Terminal { h }
    }

    pub fn sup_norm(&self) -> f64 {
        match self {
            PathFunctional::Terminal { h } => h.sup_norm(),
            PathFunctional::Product { pf } => pf.sup_norm(),
        }
    }

    pub fn eval(&self, path: &StepPath) -> Result<f64> {
        if path.horizon() < 1.0 {
            return domain("path functionals need a path on [0, 1]");
        }
        Ok(self.eval_scaled(path, 1.0, 1.0))
    }

    /// Value on the rescaled path `s -> path(a s) / a^gamma`, `s in [0, 1]`.
    /// Requires `a <= path.horizon()`.
    #[inline]
    pub fn eval_scaled(&self, path: &StepPath, a: f64, gamma: f64) -> f64 {
        match self {
            PathFunctional::Terminal { h } => {
                let c = if a == 1.0 { 1.0 } else { a.powf(gamma) };
                h.eval(path.value_at(a) / c)
            }
            PathFunctional::Product { pf } => pf.eval_scaled_unchecked(path, a, gamma),
        }
    }
}

/// Stieltjes sum with the size of the neglected `[0, eps]` contribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StieltjesValue {
    pub value: f64,
    /// `||g|| * path(eps)`, an upper bound on the omitted mass near 0.
    pub cutoff_bound: f64,
}

/// `sum over jump epochs t in (eps, 1] of g(Delta_{t,gamma} path) * jump(t)`:
/// the exact Stieltjes integral `int_(eps,1] g(Delta_{t,gamma} path) d path(t)`.
pub fn stieltjes_functional(g: &PathFunctional, path: &StepPath, gamma: f64, eps: f64) -> Result<StieltjesValue> {
    if path.horizon() < 1.0 {
        return domain("the Stieltjes functional needs a path on [0, 1]");
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return domain(format!("gamma must lie in (0, 1), got {gamma}"));
    }
    if !(0.0..1.0).contains(&eps) {
        return domain(format!("cutoff must lie in [0, 1), got {eps}"));
    }
    let mut value = 0.0;
    for (t, dx) in path.jumps() {
        if t > 1.0 {
            break;
        }
        if t > eps {
            value += g.eval_scaled(path, t, gamma) * dx;
        }
    }
    Ok(StieltjesValue { value, cutoff_bound: g.sup_norm() * path.value_at(eps) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p() -> StepPath {
        StepPath::new(1.0, vec![0.5, 0.8], vec![1.0, 2.5]).unwrap()
    }

    #[test]
    fn product_examples() {
        let one = ProductFunctional::constant_one();
        assert_eq!(one.eval(&p()).unwrap(), 1.0);
        let pf = ProductFunctional::single(0.5, Factor::Exp { rate: 1.0 }, Factor::one()).unwrap();
        assert_relative_eq!(pf.eval(&p()).unwrap(), (-1.0f64).exp(), max_relative = 1e-15);
        let pf = ProductFunctional::single(0.5, Factor::Exp { rate: 1.0 }, Factor::PowerDecay { beta: 1.0 }).unwrap();
        assert_relative_eq!(pf.eval(&p()).unwrap(), 0.4 * (-1.0f64).exp(), max_relative = 1e-15);
    }

    #[test]
    fn product_validation() {
        assert!(ProductFunctional::new(vec![0.5, 0.5], vec![Factor::one(), Factor::one()], Factor::one()).is_err());
        assert!(ProductFunctional::single(1.0, Factor::one(), Factor::one()).is_err());
        assert!(ProductFunctional::single(-0.1, Factor::one(), Factor::one()).is_err());
        assert!(ProductFunctional::new(vec![0.1], vec![], Factor::one()).is_err());
        assert!(ProductFunctional::single(0.2, Factor::Exp { rate: -1.0 }, Factor::one()).is_err());
    }

    #[test]
    fn factor_family() {
        let s = Factor::parse("spline:0/1,1/0.5,2/0.25").unwrap();
        assert_eq!(s.eval(-1.0), 1.0);
        assert_eq!(s.eval(0.5), 0.75);
        assert_eq!(s.eval(10.0), 0.25);
        assert_eq!(s.limit_at_infinity(), 0.25);
        assert_eq!(Factor::parse("exp:2").unwrap(), Factor::Exp { rate: 2.0 });
        assert_eq!(Factor::parse("pow:1.5").unwrap().limit_at_infinity(), 0.0);
        assert!(Factor::parse("sin:1").is_err());
        assert!(Factor::parse("spline:1/1,0/1").is_err());
    }

    #[test]
    fn stieltjes_examples() {
        let path = StepPath::from_jumps(1.0, &[(0.5, 2.0)]).unwrap();
        let g = PathFunctional::terminal(Factor::Exp { rate: 1.0 });
        let v = stieltjes_functional(&g, &path, 0.5, 0.1).unwrap();
        assert_relative_eq!(v.value, 2.0 * (-2.0 * 2f64.sqrt()).exp(), max_relative = 1e-14);
        let v = stieltjes_functional(&g, &path, 0.5, 0.6).unwrap();
        assert_eq!(v.value, 0.0);
        let one = PathFunctional::terminal(Factor::one());
        let v = stieltjes_functional(&one, &p(), 0.3, 0.1).unwrap();
        assert_eq!(v.value, p().value_at(1.0) - p().value_at(0.1));
    }

    #[test]
    fn scaled_evaluation_matches_materialized_path() {
        let path = StepPath::new(2.0, vec![0.1, 0.3, 0.55, 0.9, 1.4], vec![0.2, 0.5, 0.9, 1.7, 2.0]).unwrap();
        let pf = ProductFunctional::new(
            vec![0.2, 0.6],
            vec![Factor::Exp { rate: 0.7 }, Factor::PowerDecay { beta: 2.0 }],
            Factor::Exp { rate: 1.3 },
        )
        .unwrap();
        let g = PathFunctional::Product { pf };
        for a in [0.35, 0.6, 0.95, 1.0] {
            let scaled = path.scale(a, 0.4).unwrap().restrict(1.0).unwrap();
            assert_relative_eq!(g.eval_scaled(&path, a, 0.4), g.eval(&scaled).unwrap(), max_relative = 1e-14);
        }
    }
}
