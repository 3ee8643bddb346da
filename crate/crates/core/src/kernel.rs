//! Kernels `K_k(y, u) = Σ_ξ σ_k(y, ξ) e^{2πi u·ξ}` of dyadic symbol pieces and
//! their weighted `L^{r'}` norms in `u`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fft;
use crate::symbol::{spectral_derivative, unit, Symbol};
use crate::spaces::lp_norm_of_moduli;
use crate::torus::{lattice_norm, TorusGrid};

/// Default ceiling on the number of stored kernel entries.
pub const DEFAULT_KERNEL_CAP: usize = 1 << 28;

/// Kernel of one dyadic piece, stored y-major (`values[y * N^n + u]`).
#[derive(Clone, Debug, PartialEq)]
pub struct KernelSlice {
    grid: TorusGrid,
    pub k: u32,
    pub rho: f64,
    values: Vec<Complex64>,
}

impl KernelSlice {
    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `u ↦ K(y, u)`.
    pub fn row(&self, y: usize) -> &[Complex64] {
        let len = self.grid.len();
        &self.values[y * len..(y + 1) * len]
    }

    fn with_values(&self, values: Vec<Complex64>) -> Self {
        Self {
            grid: self.grid,
            k: self.k,
            rho: self.rho,
            values,
        }
    }

    /// `∂_{u_a} K` for each axis `a`.
    pub fn gradient_u(&self) -> Vec<KernelSlice> {
        let grid = self.grid;
        let len = grid.len();
        (0..grid.dim())
            .map(|a| {
                let beta = unit(a);
                let mut values = self.values.clone();
                values
                    .par_chunks_mut(len)
                    .for_each(|row| spectral_derivative(row, grid, &beta));
                self.with_values(values)
            })
            .collect()
    }

    /// `∂_{y_a} K` for each axis `a`.
    pub fn gradient_y(&self) -> Vec<KernelSlice> {
        let grid = self.grid;
        let len = grid.len();
        (0..grid.dim())
            .map(|a| {
                let beta = unit(a);
                let cols: Vec<Vec<Complex64>> = (0..len)
                    .into_par_iter()
                    .map(|u| {
                        let mut col: Vec<Complex64> = (0..len).map(|y| self.values[y * len + u]).collect();
                        spectral_derivative(&mut col, grid, &beta);
                        col
                    })
                    .collect();
                let mut values = vec![Complex64::default(); len * len];
                for (u, col) in cols.iter().enumerate() {
                    for (y, &v) in col.iter().enumerate() {
                        values[y * len + u] = v;
                    }
                }
                self.with_values(values)
            })
            .collect()
    }

    /// Fraction of `Σ|K̂(y, ξ)|²` lying outside `2^{k−1} ≤ |ξ| ≤ 2^{k+1}`
    /// (`|ξ| ≤ 2` for `k = 0`).
    pub fn off_shell_fraction(&self) -> f64 {
        let grid = self.grid;
        let len = grid.len();
        let (lo, hi) = if self.k == 0 {
            (0.0, 2.0)
        } else {
            ((1u64 << (self.k - 1)) as f64, (1u64 << (self.k + 1)) as f64)
        };
        let window = grid.window();
        let outside: Vec<bool> = window
            .frequencies()
            .map(|xi| {
                let r = lattice_norm(&xi);
                r < lo || r > hi
            })
            .collect();
        let parts: Vec<(f64, f64)> = self
            .values
            .par_chunks(len)
            .map(|row| {
                let mut spec = row.to_vec();
                fft::fft_nd(&mut spec, grid.dim(), grid.size(), false);
                spec.iter().zip(&outside).fold((0.0, 0.0), |(o, t), (c, &out)| {
                    let e = c.norm_sqr();
                    (if out { o + e } else { o }, t + e)
                })
            })
            .collect();
        let (off, total) = parts
            .iter()
            .fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
        if total == 0.0 {
            0.0
        } else {
            off / total
        }
    }
}

/// Kernel of `σ_k`, refusing grids whose `N^{2n}` exceeds `cap`.
pub fn synthesize_kernel_capped(sigma_k: &Symbol, k: u32, rho: f64, cap: usize) -> Result<KernelSlice> {
    let grid = sigma_k.grid();
    let len = grid.len();
    let needed = len.saturating_mul(len);
    if needed > cap {
        return Err(Error::MemoryCap { needed, cap });
    }
    let mut values = sigma_k.values().to_vec();
    values
        .par_chunks_mut(len)
        .for_each(|row| fft::fft_nd(row, grid.dim(), grid.size(), true));
    Ok(KernelSlice {
        grid,
        k,
        rho,
        values,
    })
}

pub fn synthesize_kernel(sigma_k: &Symbol, k: u32, rho: f64) -> Result<KernelSlice> {
    synthesize_kernel_capped(sigma_k, k, rho, DEFAULT_KERNEL_CAP)
}

/// Which quantity the weighted norm is taken of.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelNormMode {
    Plain,
    GradY,
    GradU,
}

/// Periodic Euclidean distance from `u` to the origin.
fn periodic_modulus(grid: TorusGrid, u: usize) -> f64 {
    let m = grid.unflatten(u);
    let h = grid.spacing();
    (0..grid.dim())
        .map(|a| {
            let t = m[a] as f64 * h;
            let d = t.min(1.0 - t);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// For every `y`, `(N^{−n} Σ_u |(1 + 2^{kρ}|u|)^{N_exp} G(y, u)|^{r'})^{1/r'}`
/// where `G` is `K`, `|∇_y K|` or `|∇_u K|` and `r' = r/(r − 1)`.
pub fn weighted_kernel_norm(
    kernel: &KernelSlice,
    n_exp: f64,
    r: f64,
    mode: KernelNormMode,
) -> Result<Vec<f64>> {
    if !(1.0..=2.0).contains(&r) {
        return Err(invalid("r", format!("{r} not in [1, 2]")));
    }
    if !n_exp.is_finite() || n_exp < 0.0 {
        return Err(invalid("n_exp", format!("{n_exp} must be finite and non-negative")));
    }
    let grid = kernel.grid;
    let len = grid.len();
    let dual = if r == 1.0 { f64::INFINITY } else { r / (r - 1.0) };
    let scale = 2f64.powf(kernel.k as f64 * kernel.rho);
    let weights: Vec<f64> = (0..len)
        .map(|u| (1.0 + scale * periodic_modulus(grid, u)).powf(n_exp))
        .collect();
    let parts: Vec<KernelSlice> = match mode {
        KernelNormMode::Plain => vec![kernel.clone()],
        KernelNormMode::GradY => kernel.gradient_y(),
        KernelNormMode::GradU => kernel.gradient_u(),
    };
    (0..len)
        .into_par_iter()
        .map(|y| {
            let moduli: Vec<f64> = (0..len)
                .map(|u| {
                    let m2: f64 = parts.iter().map(|p| p.values[y * len + u].norm_sqr()).sum();
                    weights[u] * m2.sqrt()
                })
                .collect();
            lp_norm_of_moduli(&moduli, dual)
        })
        .collect()
}
