//! Randomized check of the path-calculus invariants, shared by the CLI
//! `paths-selftest` experiment and the test suites.
//!
//! Paths are drawn on dyadic grids (epochs in multiples of 2^-12, values in
//! multiples of 2^-10) so that shifts and sums are exact in binary floating
//! point and the semiflow and Stieltjes laws can be checked bit-for-bit.

use rand::Rng;
use serde::Serialize;

use super::{j1_distance, stieltjes_functional, uniform_distance, Factor, PathFunctional, StepPath};
use crate::exec::{map_seeded, ExecMode};

const EPOCH_GRID: f64 = 1.0 / 4096.0;
const VALUE_GRID: f64 = 1.0 / 1024.0;
const HORIZON: f64 = 4.0;

/// Outcome of one invariant over all sampled paths.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct InvariantOutcome {
    pub name: &'static str,
    pub checked: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SelftestReport {
    pub paths: usize,
    pub seed: u64,
    pub invariants: Vec<InvariantOutcome>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.invariants.iter().all(|o| o.failed == 0 && o.checked > 0)
    }
}

const NAMES: [&str; 7] = [
    "involution",
    "semiflow",
    "scaling_composition",
    "sandwich",
    "tie_down_endpoint",
    "stieltjes_total_mass",
    "j1_bounds",
];

/// Random dyadic step path with `1..=max_jumps` jumps on `[0, 4]`, at least
/// one of them in `(0, 1]`.
pub fn random_dyadic_path<R: Rng>(rng: &mut R, max_jumps: usize) -> StepPath {
    let n = rng.random_range(1..=max_jumps);
    let slots = (HORIZON / EPOCH_GRID) as u32;
    let mut ticks: Vec<u32> = Vec::with_capacity(n);
    ticks.push(rng.random_range(1..=slots / 4));
    while ticks.len() < n {
        let t = rng.random_range(1..=slots);
        if !ticks.contains(&t) {
            ticks.push(t);
        }
    }
    ticks.sort_unstable();
    let mut acc = 0.0;
    let mut epochs = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for t in ticks {
        acc += rng.random_range(1..=2048u32) as f64 * VALUE_GRID;
        epochs.push(t as f64 * EPOCH_GRID);
        values.push(acc);
    }
    StepPath::new(HORIZON, epochs, values).expect("valid by construction")
}

fn check_path<R: Rng>(rng: &mut R, p: &StepPath, q: &StepPath) -> [(bool, bool); 7] {
    let mut out = [(false, true); 7];
    let gamma = rng.random_range(0.05..0.95);

    // involution, away from the jump epochs
    out[0] = (true, {
        let last = *p.epochs().last().expect("nonempty");
        let inv = p.inverse(p.final_value()).expect("range is the final value");
        let back = inv.value.inverse(last.min(inv.value.final_value()));
        match back {
            Ok(b) => {
                let mut probes: Vec<f64> = p.epochs().windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
                probes.push(0.5 * p.epochs()[0]);
                probes.extend((0..8).map(|_| rng.random_range(0.0..last)));
                probes
                    .into_iter()
                    .filter(|t| !p.epochs().contains(t) && *t <= b.value.horizon())
                    .all(|t| b.value.value_at(t) == p.value_at(t))
            }
            Err(_) => false,
        }
    });

    // semiflow on grid points
    out[1] = (true, {
        let s = rng.random_range(0..8192u32) as f64 * EPOCH_GRID;
        let r = rng.random_range(0..4096u32) as f64 * EPOCH_GRID;
        if s + r < HORIZON {
            let two = p.increment_shift(s).and_then(|x| x.increment_shift(r));
            let one = p.increment_shift(s + r);
            matches!((two, one), (Ok(a), Ok(b)) if a == b)
        } else {
            true
        }
    });

    // scaling composition with dyadic factors
    out[2] = (true, {
        let a = 2f64.powi(rng.random_range(-3..=3));
        let b = 2f64.powi(rng.random_range(-3..=3));
        let two = p.scale(a, gamma).and_then(|x| x.scale(b, gamma)).expect("valid scale");
        let one = p.scale(a * b, gamma).expect("valid scale");
        two.epochs() == one.epochs()
            && two.horizon() == one.horizon()
            && two.values().iter().zip(one.values()).all(|(x, y)| (x - y).abs() <= 1e-14 * y.abs())
    });

    // G(t) <= t <= D(t) and the path is flat on [G, D)
    out[3] = (true, {
        let t = rng.random_range(0.0..HORIZON);
        let g = p.waiting_g(t).expect("in range");
        let d = p.waiting_d(t).expect("in range").value;
        let v = p.value_at(t);
        let mid = 0.5 * (g + d);
        g <= t && t <= d && p.value_at(g) == v && p.value_at(mid) == v && (d >= HORIZON || p.value_at(d) > v)
    });

    out[4] = (true, {
        let w = p.tie_down(gamma).expect("a jump lies in (0, 1]");
        w.epochs().last() == Some(&1.0) && w.horizon() == 1.0
    });

    out[5] = (true, {
        let eps = rng.random_range(0..4096u32) as f64 * EPOCH_GRID / 4.0;
        let one = PathFunctional::terminal(Factor::one());
        let s = stieltjes_functional(&one, p, gamma, eps).expect("valid");
        s.value == p.value_at(1.0) - p.value_at(eps)
    });

    out[6] = (true, {
        let d_pq = j1_distance(p, q, HORIZON).expect("same horizon");
        let d_qp = j1_distance(q, p, HORIZON).expect("same horizon");
        let d_pp = j1_distance(p, p, HORIZON).expect("same horizon");
        let u = uniform_distance(p, q, HORIZON).expect("same horizon");
        d_pq == d_qp && d_pp == 0.0 && d_pq <= u
    });
    out
}

/// Checks every path invariant on `paths` random dyadic paths.
pub fn run_selftest(paths: usize, seed: u64, mode: ExecMode) -> SelftestReport {
    let results = map_seeded(mode, paths, seed, |_, rng| {
        let p = random_dyadic_path(rng, 12);
        let q = random_dyadic_path(rng, 12);
        check_path(rng, &p, &q)
    });
    let invariants = NAMES
        .iter()
        .enumerate()
        .map(|(k, &name)| InvariantOutcome {
            name,
            checked: results.iter().filter(|r| r[k].0).count(),
            failed: results.iter().filter(|r| r[k].0 && !r[k].1).count(),
        })
        .collect();
    SelftestReport { paths, seed, invariants }
}
