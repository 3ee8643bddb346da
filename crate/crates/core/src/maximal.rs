//! Hardy-Littlewood and sharp maximal functions over periodic dyadic cubes,
//! Muckenhoupt constants and weighted Lebesgue norms.
//!
//! A cube of side `2^{−j}` covers `N/2^j` consecutive cells along every axis,
//! wrapping around the torus. It is identified by its first cell, so there is
//! one cube per grid point and side. Cube sums use wrapped prefix sums and the
//! maximum over cubes containing `x` is a separable sliding maximum.

use std::collections::VecDeque;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::spaces::lp_norm_of_moduli;
use crate::torus::{check_same_grid, PeriodicFunction, TorusGrid};

/// Axis-parallel periodic cubes of dyadic side `2^{−j}`, one per starting cell.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubeFamily {
    grid: TorusGrid,
    levels: Vec<u32>,
}

impl CubeFamily {
    /// Sides `2^{−j}` for `j = 0..=log₂N`: from the whole torus down to one cell.
    pub fn dyadic(grid: TorusGrid) -> Self {
        Self {
            grid,
            levels: (0..=grid.levels()).collect(),
        }
    }

    /// A subfamily restricted to the listed `j`.
    pub fn with_levels(grid: TorusGrid, levels: &[u32]) -> Result<Self> {
        if levels.is_empty() || levels.iter().any(|&j| j > grid.levels()) {
            return Err(invalid("levels", format!("must be a non-empty subset of 0..={}", grid.levels())));
        }
        let mut levels = levels.to_vec();
        levels.sort_unstable();
        levels.dedup();
        Ok(Self { grid, levels })
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    /// Number of cells per axis of a cube at level `j`.
    pub fn cells(&self, j: u32) -> usize {
        self.grid.size() >> j
    }
}

/// Strictly positive real weight.
#[derive(Clone, Debug, PartialEq)]
pub struct Weight {
    grid: TorusGrid,
    values: Vec<f64>,
}

impl Weight {
    pub fn new(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::SizeMismatch(format!(
                "{} weight samples for a grid of {}",
                values.len(),
                grid.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(invalid("w", format!("weight sample {v} is not finite and positive")));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: TorusGrid, f: impl Fn(&crate::torus::Point) -> f64) -> Result<Self> {
        Self::new(grid, grid.points().map(|p| f(&p)).collect())
    }

    /// Real parts of `w`, which must have vanishing imaginary parts.
    pub fn from_function(w: &PeriodicFunction) -> Result<Self> {
        if w.samples().iter().any(|z| z.im != 0.0) {
            return Err(invalid("w", "weight must be real"));
        }
        Self::new(w.grid(), w.samples().iter().map(|z| z.re).collect())
    }

    pub fn unit(grid: TorusGrid) -> Self {
        Self {
            grid,
            values: vec![1.0; grid.len()],
        }
    }

    /// `0.1 + sin²(πx₁)`.
    pub fn sin2(grid: TorusGrid) -> Self {
        Self::from_fn(grid, |p| 0.1 + (std::f64::consts::PI * p[0]).sin().powi(2))
            .expect("0.1 + sin² is positive")
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Which maximal operator produced a profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaximalKind {
    HardyLittlewood,
    Sharp,
}

/// Non-negative maximal function sampled on the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct MaximalProfile {
    pub grid: TorusGrid,
    pub r: f64,
    pub kind: MaximalKind,
    pub values: Vec<f64>,
}

impl MaximalProfile {
    pub fn to_function(&self) -> PeriodicFunction {
        PeriodicFunction::from_real(self.grid, &self.values).expect("finite maximal values")
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// Applies `op` to every line of `data` along `axis`.
fn map_lines(data: &[f64], grid: TorusGrid, axis: usize, op: impl Fn(&[f64]) -> Vec<f64> + Sync) -> Vec<f64> {
    let (dim, size) = (grid.dim(), grid.size());
    let stride = size.pow((dim - 1 - axis) as u32);
    let block = stride * size;
    let starts: Vec<usize> = (0..data.len())
        .step_by(block)
        .flat_map(|outer| (0..stride).map(move |inner| outer + inner))
        .collect();
    let lines: Vec<Vec<f64>> = starts
        .par_iter()
        .map(|&base| {
            let line: Vec<f64> = (0..size).map(|j| data[base + j * stride]).collect();
            op(&line)
        })
        .collect();
    let mut out = vec![0.0; data.len()];
    for (base, line) in starts.iter().zip(lines) {
        for (j, v) in line.into_iter().enumerate() {
            out[base + j * stride] = v;
        }
    }
    out
}

/// `S(s) = Σ_{t<ℓ} v[(s + t) mod N]` via a prefix over the doubled line.
fn wrapped_window_sums(line: &[f64], cells: usize) -> Vec<f64> {
    let n = line.len();
    if cells == n {
        let total: f64 = line.iter().sum();
        return vec![total; n];
    }
    let mut prefix = Vec::with_capacity(n + cells + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for t in 0..n + cells {
        acc += line[t % n];
        prefix.push(acc);
    }
    (0..n).map(|s| prefix[s + cells] - prefix[s]).collect()
}

/// `M(x) = max_{t<ℓ} a[(x − t) mod N]` with a monotone deque.
fn wrapped_window_max(line: &[f64], cells: usize) -> Vec<f64> {
    let n = line.len();
    if cells == 1 {
        return line.to_vec();
    }
    if cells == n {
        let m = line.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        return vec![m; n];
    }
    // ext[i] = a[(i − ℓ + 1) mod N]; the window for x is ext[x..x+ℓ]
    let ext: Vec<f64> = (0..n + cells - 1).map(|i| line[(i + n - (cells - 1)) % n]).collect();
    let mut out = vec![0.0; n];
    let mut dq: VecDeque<usize> = VecDeque::new();
    for (i, &v) in ext.iter().enumerate() {
        while dq.back().is_some_and(|&b| ext[b] <= v) {
            dq.pop_back();
        }
        dq.push_back(i);
        if i + 1 >= cells {
            let lo = i + 1 - cells;
            while dq.front().is_some_and(|&f| f < lo) {
                dq.pop_front();
            }
            out[lo] = ext[dq[0]];
        }
    }
    out
}

/// Average of `values` over the cube starting at every grid point.
pub(crate) fn cube_averages(values: &[f64], grid: TorusGrid, cells: usize) -> Vec<f64> {
    let mut data = values.to_vec();
    for axis in 0..grid.dim() {
        data = map_lines(&data, grid, axis, |line| wrapped_window_sums(line, cells));
    }
    let vol = (cells as f64).powi(grid.dim() as i32);
    data.iter_mut().for_each(|v| *v /= vol);
    data
}

/// `max` of `per_start` over every cube of `cells` cells containing each point.
fn max_over_containing(per_start: &[f64], grid: TorusGrid, cells: usize) -> Vec<f64> {
    let mut data = per_start.to_vec();
    for axis in 0..grid.dim() {
        data = map_lines(&data, grid, axis, |line| wrapped_window_max(line, cells));
    }
    data
}

fn check_r(r: f64, upper: f64) -> Result<()> {
    if !(r >= 1.0 && r <= upper) {
        return Err(invalid("r", format!("{r} not in [1, {upper}]")));
    }
    Ok(())
}

/// `M_r f(x) = max_{Q ∋ x} (avg_Q |f|^r)^{1/r}`.
pub fn hardy_littlewood(f: &PeriodicFunction, r: f64, fam: &CubeFamily) -> Result<MaximalProfile> {
    check_r(r, f64::MAX)?;
    check_same_grid(f.grid(), fam.grid)?;
    let grid = fam.grid;
    let powered: Vec<f64> = f.samples().iter().map(|z| z.norm().powf(r)).collect();
    let mut best = vec![0.0f64; grid.len()];
    for &j in &fam.levels {
        let cells = fam.cells(j);
        let avg = cube_averages(&powered, grid, cells);
        let m = max_over_containing(&avg, grid, cells);
        best.iter_mut().zip(m).for_each(|(b, v)| *b = b.max(v));
    }
    let values = best.into_iter().map(|v| v.max(0.0).powf(1.0 / r)).collect();
    Ok(MaximalProfile {
        grid,
        r,
        kind: MaximalKind::HardyLittlewood,
        values,
    })
}

/// `(avg_Q |f − c_Q|^r)^{1/r}` for the cube of `cells` cells starting at every point,
/// with `c_Q` the cube mean of `f`.
fn cube_oscillations(f: &PeriodicFunction, r: f64, cells: usize) -> Vec<f64> {
    let grid = f.grid();
    let size = grid.size();
    let dim = grid.dim();
    let samples = f.samples();
    if cells == size {
        let mean = samples.iter().sum::<Complex64>() / samples.len() as f64;
        let osc: Vec<f64> = samples.iter().map(|z| (z - mean).norm()).collect();
        let v = lp_norm_of_moduli(&osc, r).expect("r ≥ 1");
        return vec![v; grid.len()];
    }
    let re: Vec<f64> = samples.iter().map(|z| z.re).collect();
    let im: Vec<f64> = samples.iter().map(|z| z.im).collect();
    let mean_re = cube_averages(&re, grid, cells);
    let mean_im = cube_averages(&im, grid, cells);
    let count = cells.pow(dim as u32);
    (0..grid.len())
        .into_par_iter()
        .map(|s| {
            let start = grid.unflatten(s);
            let c = Complex64::new(mean_re[s], mean_im[s]);
            let mut acc = 0.0;
            let mut off = [0usize; 3];
            for _ in 0..count {
                let mut idx = [0usize; 3];
                for a in 0..dim {
                    idx[a] = (start[a] + off[a]) % size;
                }
                acc += (samples[grid.flatten(&idx[..dim])] - c).norm().powf(r);
                for a in (0..dim).rev() {
                    off[a] += 1;
                    if off[a] < cells {
                        break;
                    }
                    off[a] = 0;
                }
            }
            (acc / count as f64).powf(1.0 / r)
        })
        .collect()
}

/// `M^#_r f(x) = max_{Q ∋ x} (avg_Q |f − f_Q|^r)^{1/r}` with `f_Q` the cube mean,
/// which is within a factor 2 of the infimum over constants.
pub fn sharp_maximal(f: &PeriodicFunction, r: f64, fam: &CubeFamily) -> Result<MaximalProfile> {
    check_r(r, 2.0)?;
    check_same_grid(f.grid(), fam.grid)?;
    let grid = fam.grid;
    let mut best = vec![0.0f64; grid.len()];
    for &j in &fam.levels {
        let cells = fam.cells(j);
        if cells == 1 {
            continue; // one-cell cubes have zero oscillation
        }
        let osc = cube_oscillations(f, r, cells);
        let m = max_over_containing(&osc, grid, cells);
        best.iter_mut().zip(m).for_each(|(b, v)| *b = b.max(v));
    }
    Ok(MaximalProfile {
        grid,
        r,
        kind: MaximalKind::Sharp,
        values: best,
    })
}

/// `sup_Q (avg_Q w)(avg_Q w^{−1/(p−1)})^{p−1}` over the family.
pub fn muckenhoupt_constant(w: &Weight, p: f64, fam: &CubeFamily) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid("p", format!("{p} must exceed 1")));
    }
    check_same_grid(w.grid, fam.grid)?;
    let dual: Vec<f64> = w.values.iter().map(|v| v.powf(-1.0 / (p - 1.0))).collect();
    let mut sup = 0.0f64;
    for &j in &fam.levels {
        let cells = fam.cells(j);
        let a = cube_averages(&w.values, fam.grid, cells);
        let b = cube_averages(&dual, fam.grid, cells);
        for (x, y) in a.iter().zip(&b) {
            sup = sup.max(x * y.powf(p - 1.0));
        }
    }
    Ok(sup)
}

/// `(N^{−n} Σ |f|^p w)^{1/p}`.
pub fn weighted_lp_norm(f: &PeriodicFunction, w: &Weight, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(invalid("p", format!("{p} not in [1, ∞)")));
    }
    check_same_grid(f.grid(), w.grid)?;
    let moduli: Vec<f64> = f
        .samples()
        .iter()
        .zip(&w.values)
        .map(|(z, wv)| z.norm() * wv.powf(1.0 / p))
        .collect();
    lp_norm_of_moduli(&moduli, p)
}
