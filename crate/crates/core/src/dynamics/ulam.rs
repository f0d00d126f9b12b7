use super::LsvMap;
use crate::error::{domain, Error, Result};
use crate::numeric::ls_slope;
use crate::processes::GammaIndex;
use nalgebra::{DMatrix, DVector};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Partition and solver settings for the Ulam discretization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UlamOptions {
    /// Total number of cells (at least 1000).
    pub grid: usize,
    /// Right end of the first cell `[0, x_min)`, whose mass is passed straight to its neighbour.
    pub x_min: f64,
    /// Target for the `l1` residual of the fixed point.
    pub tol: f64,
    pub max_iter: usize,
}

impl UlamOptions {
    pub fn new(grid: usize) -> Self {
        UlamOptions { grid, x_min: 1e-7, tol: 1e-9, max_iter: 10_000 }
    }
}

/// An LSV map together with its approximate invariant density, normalized to
/// integrate to 1 over `Omega`.
#[derive(Debug, Clone)]
pub struct LsvSystem {
    map: LsvMap,
    edges: Vec<f64>,
    density: Vec<f64>,
    omega_start: usize,
    residual: f64,
    sampler: WeightedIndex<f64>,
}

/// Ulam approximation of the invariant density of `T_gamma` on `grid` cells.
pub fn ulam_density(gamma: GammaIndex, grid: usize) -> Result<LsvSystem> {
    LsvSystem::build(gamma, UlamOptions::new(grid))
}

fn cell_edges(opts: &UlamOptions) -> (Vec<f64>, usize) {
    let omega_cells = opts.grid / 2;
    let geo_cells = opts.grid - omega_cells - 1;
    let mut edges = vec![0.0, opts.x_min];
    let ratio = (0.5 / opts.x_min).powf(1.0 / geo_cells as f64);
    for k in 1..geo_cells {
        edges.push(opts.x_min * ratio.powi(k as i32));
    }
    edges.push(0.5);
    let omega_start = edges.len() - 1;
    for k in 1..=omega_cells {
        edges.push(0.5 + 0.5 * k as f64 / omega_cells as f64);
    }
    (edges, omega_start)
}

type SparseRows = Vec<Vec<(usize, f64)>>;

fn cell_of(edges: &[f64], x: f64) -> usize {
    (edges.partition_point(|&e| e <= x).max(1) - 1).min(edges.len() - 2)
}

/// Row-stochastic Ulam matrix: `P[i][j] = Leb(cell_i ∩ T^-1 cell_j) / Leb(cell_i)`.
fn transition_rows(map: &LsvMap, edges: &[f64], omega_start: usize) -> SparseRows {
    let cells = edges.len() - 1;
    let mut rows: SparseRows = vec![Vec::new(); cells];
    let mut add = |pts: &mut Vec<f64>| {
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        for w in pts.windows(2) {
            let (p, q) = (w[0], w[1]);
            if q <= p {
                continue;
            }
            let mid = 0.5 * (p + q);
            let i = cell_of(edges, mid);
            let j = cell_of(edges, map.apply(mid));
            let frac = (q - p) / (edges[i + 1] - edges[i]);
            match rows[i].last_mut() {
                Some((jj, v)) if *jj == j => *v += frac,
                _ => rows[i].push((j, frac)),
            }
        }
    };
    let mut left: Vec<f64> = edges[1..=omega_start].to_vec();
    left.extend(edges.iter().map(|&e| map.left_inverse(e)).filter(|&x| x > edges[1] && x < 0.5));
    add(&mut left);
    let mut right: Vec<f64> = edges[omega_start..].to_vec();
    right.extend(edges.iter().map(|&e| 0.5 * (e + 1.0)));
    add(&mut right);
    // mass entering [0, x_min) is handed to the next cell
    rows[0] = vec![(1, 1.0)];
    for r in &mut rows {
        r.sort_by_key(|e| e.0);
        r.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
    }
    rows
}

fn apply_rows(rows: &SparseRows, pi: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; pi.len()];
    for (i, r) in rows.iter().enumerate() {
        for &(j, p) in r {
            out[j] += pi[i] * p;
        }
    }
    out
}

/// Pushes a row vector on the left cells through `(I - U)^-1`, `U` the
/// left-to-left block (upper triangular since `T x > x` there); returns the
/// occupation of left cells and the mass delivered to each `Omega` cell.
fn left_resolvent(rows: &SparseRows, omega_start: usize, mut acc: Vec<f64>) -> (Vec<f64>, Vec<f64>) {
    let cells = rows.len();
    let mut occ = vec![0.0; omega_start];
    let mut out = vec![0.0; cells - omega_start];
    for j in 0..omega_start {
        let leave: f64 = rows[j].iter().filter(|e| e.0 != j).map(|e| e.1).sum();
        let xj = acc[j] / leave;
        occ[j] = xj;
        for &(k, p) in &rows[j] {
            if k == j {
                continue;
            }
            if k < omega_start {
                acc[k] += xj * p;
            } else {
                out[k - omega_start] += xj * p;
            }
        }
    }
    (occ, out)
}

impl LsvSystem {
    pub fn build(gamma: GammaIndex, opts: UlamOptions) -> Result<Self> {
        if opts.grid < 1000 {
            return domain(format!("Ulam grid needs at least 1000 cells, got {}", opts.grid));
        }
        if !(opts.x_min > 0.0 && opts.x_min < 0.01) {
            return domain("x_min must lie in (0, 0.01)");
        }
        let map = LsvMap::new(gamma);
        let (edges, omega_start) = cell_edges(&opts);
        let rows = transition_rows(&map, &edges, omega_start);
        let cells = rows.len();
        let m = cells - omega_start;

        // induced chain on Omega: direct part plus excursions through the left cells
        let mut induced = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            let mut acc = vec![0.0; omega_start];
            for &(j, p) in &rows[omega_start + i] {
                if j < omega_start {
                    acc[j] += p;
                } else {
                    induced[(i, j - omega_start)] += p;
                }
            }
            let (_, back) = left_resolvent(&rows, omega_start, acc);
            for (j, b) in back.into_iter().enumerate() {
                induced[(i, j)] += b;
            }
        }

        // stationary row vector: (S^T - I) pi = 0 with the last equation replaced by sum pi = 1
        let mut a = induced.transpose() - DMatrix::<f64>::identity(m, m);
        for j in 0..m {
            a[(m - 1, j)] = 1.0;
        }
        let mut rhs = DVector::<f64>::zeros(m);
        rhs[m - 1] = 1.0;
        let sol = a.lu().solve(&rhs).ok_or_else(|| Error::Numeric { message: "singular Ulam system".into(), diagnostic: f64::NAN })?;
        let mut pi: Vec<f64> = sol.iter().map(|v| v.max(0.0)).collect();
        let step = |pi: &[f64]| -> Vec<f64> {
            let mut out = vec![0.0; m];
            for (i, &p) in pi.iter().enumerate() {
                if p != 0.0 {
                    for (j, o) in out.iter_mut().enumerate() {
                        *o += p * induced[(i, j)];
                    }
                }
            }
            let s: f64 = out.iter().sum();
            out.iter().map(|v| v / s).collect()
        };
        let total: f64 = pi.iter().sum();
        pi.iter_mut().for_each(|v| *v /= total);
        let mut prev = f64::INFINITY;
        for _ in 0..opts.max_iter {
            let next = step(&pi);
            let r: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
            pi = next;
            // stop at round-off level or once the polish stalls
            if r < 1e-15 || r >= prev {
                break;
            }
            prev = r;
        }

        // left occupation from the Omega part
        let mut acc = vec![0.0; omega_start];
        for (i, &p) in pi.iter().enumerate() {
            for &(j, q) in &rows[omega_start + i] {
                if j < omega_start {
                    acc[j] += p * q;
                }
            }
        }
        let (occ, _) = left_resolvent(&rows, omega_start, acc);
        let mut full = occ;
        full.extend_from_slice(&pi);
        let pushed = apply_rows(&rows, &full);
        let residual: f64 = pushed.iter().zip(&full).map(|(a, b)| (a - b).abs()).sum();
        if !(residual <= opts.tol) {
            return Err(Error::Numeric { message: "Ulam fixed point did not converge".into(), diagnostic: residual });
        }
        let density: Vec<f64> = full.iter().enumerate().map(|(i, p)| p / (edges[i + 1] - edges[i])).collect();
        let sampler = WeightedIndex::new(&pi).map_err(|e| Error::Numeric { message: format!("Omega weights: {e}"), diagnostic: f64::NAN })?;
        Ok(LsvSystem { map, edges, density, omega_start, residual, sampler })
    }

    pub fn map(&self) -> &LsvMap {
        &self.map
    }

    pub fn gamma(&self) -> GammaIndex {
        self.map.gamma()
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    /// Density value on each cell.
    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn grid(&self) -> usize {
        self.density.len()
    }

    /// `l1` residual `sum |P pi - pi|` of the cell masses, with `Omega` carrying mass 1.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn density_at(&self, x: f64) -> f64 {
        self.density[cell_of(&self.edges, x)]
    }

    /// `int_Omega h`, 1 by construction.
    pub fn omega_mass(&self) -> f64 {
        (self.omega_start..self.grid()).map(|i| self.density[i] * (self.edges[i + 1] - self.edges[i])).sum()
    }

    /// Least-squares slope of `log h` against `log x` over cells inside `[lo, hi]`.
    pub fn log_slope(&self, lo: f64, hi: f64) -> Result<f64> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = (0..self.grid())
            .filter(|&i| self.edges[i] >= lo && self.edges[i + 1] <= hi)
            .map(|i| ((0.5 * (self.edges[i] + self.edges[i + 1])).ln(), self.density[i].ln()))
            .unzip();
        if xs.len() < 3 {
            return domain(format!("too few cells inside [{lo}, {hi}]"));
        }
        Ok(ls_slope(&xs, &ys))
    }

    /// Draw from the normalized invariant measure restricted to `Omega`.
    pub fn sample_omega<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let i = self.omega_start + self.sampler.sample(rng);
        let (l, r) = (self.edges[i], self.edges[i + 1]);
        l + (r - l) * rng.random::<f64>()
    }

    /// `cell_left,cell_right,value` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("cell_left,cell_right,value\n");
        for (i, h) in self.density.iter().enumerate() {
            s.push_str(&format!("{:e},{:e},{:e}\n", self.edges[i], self.edges[i + 1], h));
        }
        s
    }
}
