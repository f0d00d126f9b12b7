//! Upper bounds on the Skorokhod J1 distance between step paths.
//!
//! The time change is restricted to piecewise-linear homeomorphisms whose knots
//! pair jump epochs of one path with jump epochs of the other. For a fixed
//! matching both the sup-distance term and the log-slope term are maxima over
//! segments, so a dynamic program over matchings keeps a Pareto front of
//! `(sup term, slope term)` per matched pair.

use super::StepPath;
use crate::error::{domain, Result};

/// Default width of the matching search.
pub const DEFAULT_BAND: usize = 6;

/// `sup_{t in [0, r]} |p(t) - q(t)|`.
pub fn uniform_distance(p: &StepPath, q: &StepPath, r: f64) -> Result<f64> {
    check(p, q, r)?;
    let mut d = (p.base() - q.base()).abs();
    let mut ts: Vec<f64> = p.epochs().iter().chain(q.epochs()).copied().filter(|&t| t <= r).collect();
    ts.sort_by(f64::total_cmp);
    for t in ts {
        d = d.max((p.value_at(t) - q.value_at(t)).abs());
    }
    Ok(d)
}

fn check(p: &StepPath, q: &StepPath, r: f64) -> Result<()> {
    if !(r > 0.0) || p.horizon() < r || q.horizon() < r {
        return domain(format!("both paths must be defined on [0, {r}]"));
    }
    Ok(())
}

/// Upper bound on `J1^(r)(p, q)` with the default search band.
pub fn j1_distance(p: &StepPath, q: &StepPath, r: f64) -> Result<f64> {
    j1_distance_banded(p, q, r, DEFAULT_BAND)
}

/// Upper bound on `J1^(r)(p, q)`. Matched pairs `(i, j)` satisfy
/// `|i - j| <= band` and each segment skips at most `band` epochs of either
/// path; widening the band can only lower the bound.
pub fn j1_distance_banded(p: &StepPath, q: &StepPath, r: f64, band: usize) -> Result<f64> {
    check(p, q, r)?;
    let a = Staircase::new(p, r);
    let b = Staircase::new(q, r);
    Ok(matching_bound(&a, &b, r, band).min(matching_bound(&b, &a, r, band)))
}

struct Staircase {
    epochs: Vec<f64>,
    /// levels[k] is the value after the k-th jump; levels[0] is the base.
    levels: Vec<f64>,
}

impl Staircase {
    fn new(p: &StepPath, r: f64) -> Self {
        let k = p.epochs().partition_point(|&e| e <= r);
        let mut levels = Vec::with_capacity(k + 1);
        levels.push(p.base());
        levels.extend_from_slice(&p.values()[..k]);
        // epochs[0] is the origin knot
        let mut epochs = Vec::with_capacity(k + 1);
        epochs.push(0.0);
        epochs.extend_from_slice(&p.epochs()[..k]);
        Staircase { epochs, levels }
    }

    fn len(&self) -> usize {
        self.epochs.len() - 1
    }
}

/// Sup term and log-slope term of the segment from knot `(i, j)` to knot
/// `(i2, j2)`; `None` for a degenerate segment. Knots with index `len + 1`
/// denote the terminal knot `(r, r)`.
fn segment_cost(a: &Staircase, b: &Staircase, r: f64, (i, j): (usize, usize), (i2, j2): (usize, usize)) -> Option<(f64, f64)> {
    let xa = a.epochs[i];
    let ya = b.epochs[j];
    let terminal = i2 > a.len();
    let xb = if terminal { r } else { a.epochs[i2] };
    let yb = if terminal { r } else { b.epochs[j2] };
    let dx = xb - xa;
    let dy = yb - ya;
    let slope = match (dx > 0.0, dy > 0.0) {
        (true, true) => (dy / dx).ln().abs(),
        (false, false) => 0.0,
        _ => return None,
    };
    // Unmatched interior jumps, placed in the x-coordinate of `a`.
    let a_end = if terminal { a.len() + 1 } else { i2 };
    let b_end = if terminal { b.len() + 1 } else { j2 };
    let map_back = |y: f64| if dy > 0.0 { xa + (y - ya) * dx / dy } else { xa };
    let mut ia = i + 1;
    let mut jb = j + 1;
    let mut la = a.levels[i];
    let mut lb = b.levels[j];
    let mut sup = (la - lb).abs();
    while ia < a_end || jb < b_end {
        let pa = if ia < a_end { a.epochs[ia] } else { f64::INFINITY };
        let pb = if jb < b_end { map_back(b.epochs[jb]) } else { f64::INFINITY };
        let pos = pa.min(pb);
        if pa == pos {
            la = a.levels[ia];
            ia += 1;
        }
        if pb == pos {
            lb = b.levels[jb];
            jb += 1;
        }
        sup = sup.max((la - lb).abs());
    }
    if terminal {
        sup = sup.max((a.levels[a.len()] - b.levels[b.len()]).abs());
    }
    Some((sup, slope))
}

fn insert_pareto(front: &mut Vec<(f64, f64)>, cand: (f64, f64)) {
    if front.iter().any(|&(u, l)| u <= cand.0 && l <= cand.1) {
        return;
    }
    front.retain(|&(u, l)| !(cand.0 <= u && cand.1 <= l));
    front.push(cand);
}

fn matching_bound(a: &Staircase, b: &Staircase, r: f64, band: usize) -> f64 {
    let n = a.len();
    let m = b.len();
    let step = band + 1;
    let mut fronts: Vec<Vec<Vec<(f64, f64)>>> = vec![vec![Vec::new(); m + 1]; n + 1];
    fronts[0][0].push((0.0, 0.0));
    let mut best = f64::INFINITY;
    for i in 0..=n {
        for j in 0..=m {
            if fronts[i][j].is_empty() {
                continue;
            }
            let front = std::mem::take(&mut fronts[i][j]);
            // to the terminal knot
            let skips_ok = (n - i <= band && m - j <= band) || (i, j) == (0, 0);
            if skips_ok {
                if let Some((u, l)) = segment_cost(a, b, r, (i, j), (n + 1, m + 1)) {
                    for &(fu, fl) in &front {
                        best = best.min(fu.max(u) + fl.max(l));
                    }
                }
            }
            for i2 in (i + 1)..=(n.min(i + step)) {
                for j2 in (j + 1)..=(m.min(j + step)) {
                    if i2.abs_diff(j2) > band {
                        continue;
                    }
                    if let Some((u, l)) = segment_cost(a, b, r, (i, j), (i2, j2)) {
                        for &(fu, fl) in &front {
                            insert_pareto(&mut fronts[i2][j2], (fu.max(u), fl.max(l)));
                        }
                    }
                }
            }
            fronts[i][j] = front;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn identical_paths_are_at_distance_zero() {
        let p = StepPath::new(1.0, vec![0.5, 0.8], vec![1.0, 2.5]).unwrap();
        assert_eq!(j1_distance(&p, &p, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn shifted_unit_jump() {
        let p = StepPath::from_jumps(1.0, &[(0.5, 1.0)]).unwrap();
        let q = StepPath::from_jumps(1.0, &[(0.6, 1.0)]).unwrap();
        assert_relative_eq!(j1_distance(&p, &q, 1.0).unwrap(), 1.25f64.ln(), max_relative = 1e-14);
        assert_eq!(uniform_distance(&p, &q, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn different_jump_sizes() {
        // matching the jumps costs |2 - 1.5| plus the slope term
        let p = StepPath::from_jumps(1.0, &[(0.5, 2.0)]).unwrap();
        let q = StepPath::from_jumps(1.0, &[(0.5, 1.5)]).unwrap();
        assert_relative_eq!(j1_distance(&p, &q, 1.0).unwrap(), 0.5, max_relative = 1e-14);
    }

    #[test]
    fn jump_at_horizon_matches_only_itself() {
        let p = StepPath::from_jumps(1.0, &[(1.0, 1.0)]).unwrap();
        let q = StepPath::from_jumps(1.0, &[(0.9, 1.0)]).unwrap();
        // a knot (1, 0.9) would leave a zero-length segment, so only the
        // identity remains.
        assert_eq!(j1_distance(&p, &q, 1.0).unwrap(), 1.0);
    }
}
