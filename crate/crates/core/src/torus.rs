//! Uniform grids on the torus, the matching frequency window, and the
//! discrete Fourier pair between them.
//!
//! Grid points are `x = j/N` componentwise with `j ∈ {0, …, N−1}^n`, stored
//! row-major with the last axis fastest. Frequencies live in the symmetric box
//! `[−N/2, N/2)^n` and are stored in DFT order: along each axis index `j`
//! carries frequency `j` for `j < N/2` and `j − N` otherwise.
//!
//! The forward transform is the Riemann sum of the torus integral and carries
//! the factor `N^{−n}`; the inverse is the plain lattice sum. On trigonometric
//! polynomials whose frequencies lie in the window both are exact.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;

/// Largest supported torus dimension.
pub const MAX_DIM: usize = 3;

/// A point of the torus; coordinates past the grid dimension are zero.
pub type Point = [f64; MAX_DIM];

/// A lattice frequency; components past the grid dimension are zero.
pub type Freq = [i64; MAX_DIM];

/// Uniform grid with `size` samples per axis on `T^dim`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TorusGrid {
    dim: usize,
    size: usize,
}

impl TorusGrid {
    pub fn new(dim: usize, size: usize) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidGrid(format!(
                "dimension {dim} outside 1..={MAX_DIM}"
            )));
        }
        if size < 8 || !size.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "{size} samples per axis; need a power of two ≥ 8"
            )));
        }
        Ok(Self { dim, size })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Samples per axis (`N`).
    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    /// Total number of grid points, `N^n`.
    #[inline]
    pub fn len(&self) -> usize {
        self.size.pow(self.dim as u32)
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        1.0 / self.size as f64
    }

    /// log₂ N.
    pub fn levels(&self) -> u32 {
        self.size.trailing_zeros()
    }

    pub fn window(&self) -> LatticeWindow {
        LatticeWindow {
            dim: self.dim,
            size: self.size,
        }
    }

    /// Multi-index of the flat index `idx`.
    #[inline]
    pub fn unflatten(&self, mut idx: usize) -> [usize; MAX_DIM] {
        let mut out = [0; MAX_DIM];
        for axis in (0..self.dim).rev() {
            out[axis] = idx % self.size;
            idx /= self.size;
        }
        out
    }

    /// Flat index of a multi-index; components are reduced mod `N`.
    #[inline]
    pub fn flatten(&self, multi: &[usize]) -> usize {
        multi[..self.dim]
            .iter()
            .fold(0, |acc, &j| acc * self.size + j % self.size)
    }

    /// Coordinates of grid point `idx`.
    #[inline]
    pub fn point(&self, idx: usize) -> Point {
        let multi = self.unflatten(idx);
        let h = self.spacing();
        let mut x = [0.0; MAX_DIM];
        for axis in 0..self.dim {
            x[axis] = multi[axis] as f64 * h;
        }
        x
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }
}

/// The truncated frequency lattice `[−N/2, N/2)^n` matched to a grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeWindow {
    dim: usize,
    size: usize,
}

impl LatticeWindow {
    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn half(&self) -> i64 {
        (self.size / 2) as i64
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.size.pow(self.dim as u32)
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn grid(&self) -> TorusGrid {
        TorusGrid {
            dim: self.dim,
            size: self.size,
        }
    }

    /// Frequency carried by a single-axis DFT index.
    #[inline]
    pub fn axis_frequency(&self, j: usize) -> i64 {
        if j < self.size / 2 {
            j as i64
        } else {
            j as i64 - self.size as i64
        }
    }

    /// Frequency stored at flat index `idx`.
    #[inline]
    pub fn frequency(&self, mut idx: usize) -> Freq {
        let mut xi = [0; MAX_DIM];
        for axis in (0..self.dim).rev() {
            xi[axis] = self.axis_frequency(idx % self.size);
            idx /= self.size;
        }
        xi
    }

    #[inline]
    pub fn contains(&self, xi: &[i64]) -> bool {
        let h = self.half();
        xi[..self.dim].iter().all(|&v| -h <= v && v < h)
            && xi[self.dim..].iter().all(|&v| v == 0)
    }

    /// Flat index of `xi`, or `None` outside the window.
    pub fn index_of(&self, xi: &[i64]) -> Option<usize> {
        if !self.contains(xi) {
            return None;
        }
        let n = self.size as i64;
        Some(
            xi[..self.dim]
                .iter()
                .fold(0usize, |acc, &v| acc * self.size + v.rem_euclid(n) as usize),
        )
    }

    pub fn frequencies(&self) -> impl Iterator<Item = Freq> + '_ {
        (0..self.len()).map(move |i| self.frequency(i))
    }
}

/// Japanese bracket `⟨ξ⟩ = (1 + |ξ|²)^{1/2}`.
#[inline]
pub fn bracket(xi: &[i64]) -> f64 {
    (1.0 + xi.iter().map(|&v| (v * v) as f64).sum::<f64>()).sqrt()
}

/// Euclidean length `|ξ|` of a lattice point.
#[inline]
pub fn lattice_norm(xi: &[i64]) -> f64 {
    xi.iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt()
}

/// Samples of a 1-periodic function on a uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicFunction {
    grid: TorusGrid,
    samples: Vec<Complex64>,
}

impl PeriodicFunction {
    pub fn new(grid: TorusGrid, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::SizeMismatch(format!(
                "{} samples for a grid of {} points",
                samples.len(),
                grid.len()
            )));
        }
        if !all_finite(&samples) {
            return Err(Error::NonFinite("function samples"));
        }
        Ok(Self { grid, samples })
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            samples: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn constant(grid: TorusGrid, value: Complex64) -> Self {
        Self {
            grid,
            samples: vec![value; grid.len()],
        }
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(grid: TorusGrid, f: impl Fn(&Point) -> Complex64) -> Result<Self> {
        let samples = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        Self::new(grid, samples)
    }

    pub fn from_real(grid: TorusGrid, values: &[f64]) -> Result<Self> {
        Self::new(grid, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// The pure exponential `e^{2πi x·ξ}`.
    pub fn plane_wave(grid: TorusGrid, xi: &[i64]) -> Self {
        let samples = (0..grid.len())
            .map(|i| {
                let x = grid.point(i);
                let phase: f64 = (0..grid.dim()).map(|a| x[a] * xi[a] as f64).sum();
                Complex64::from_polar(1.0, TAU * phase)
            })
            .collect();
        Self { grid, samples }
    }

    #[inline]
    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    #[inline]
    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn moduli(&self) -> Vec<f64> {
        self.samples.iter().map(|z| z.norm()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Pointwise combination `a·self + b·other`.
    pub fn axpby(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        check_same_grid(self.grid, other.grid)?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(&u, &v)| a * u + b * v)
            .collect();
        Self::new(self.grid, samples)
    }

    /// Pointwise product with another function on the same grid.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        check_same_grid(self.grid, other.grid)?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(&u, &v)| u * v)
            .collect();
        Self::new(self.grid, samples)
    }

    pub fn scale(&self, a: Complex64) -> Self {
        Self {
            grid: self.grid,
            samples: self.samples.iter().map(|&u| a * u).collect(),
        }
    }

    /// Largest pointwise modulus of the difference.
    pub fn max_diff(&self, other: &Self) -> f64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .fold(0.0, |m, (u, v)| m.max((u - v).norm()))
    }
}

/// Coefficients indexed by the frequency window (DFT order).
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralCoefficients {
    window: LatticeWindow,
    coeffs: Vec<Complex64>,
}

impl SpectralCoefficients {
    pub fn new(window: LatticeWindow, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != window.len() {
            return Err(Error::SizeMismatch(format!(
                "{} coefficients for a window of {} frequencies",
                coeffs.len(),
                window.len()
            )));
        }
        if !all_finite(&coeffs) {
            return Err(Error::NonFinite("spectral coefficients"));
        }
        Ok(Self { window, coeffs })
    }

    pub fn zeros(window: LatticeWindow) -> Self {
        Self {
            window,
            coeffs: vec![Complex64::default(); window.len()],
        }
    }

    pub fn from_fn(window: LatticeWindow, f: impl Fn(&Freq) -> Complex64) -> Result<Self> {
        let coeffs = (0..window.len()).map(|i| f(&window.frequency(i))).collect();
        Self::new(window, coeffs)
    }

    #[inline]
    pub fn window(&self) -> LatticeWindow {
        self.window
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient at `xi`; zero outside the window.
    pub fn get(&self, xi: &[i64]) -> Complex64 {
        self.window
            .index_of(xi)
            .map_or(Complex64::default(), |i| self.coeffs[i])
    }

    /// Multiplies every coefficient by `m(ξ)`.
    pub fn multiply(&self, m: impl Fn(&Freq) -> Complex64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| c * m(&self.window.frequency(i)))
            .collect();
        Self {
            window: self.window,
            coeffs,
        }
    }

    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// `coeff(ξ) = N^{−n} Σ_j f(j/N) e^{−2πi (j/N)·ξ}`.
pub fn forward_dft(f: &PeriodicFunction) -> Result<SpectralCoefficients> {
    if !all_finite(&f.samples) {
        return Err(Error::NonFinite("forward_dft input"));
    }
    let grid = f.grid;
    let mut data = f.samples.clone();
    fft::fft_nd(&mut data, grid.dim, grid.size, false);
    let scale = 1.0 / grid.len() as f64;
    data.iter_mut().for_each(|v| *v *= scale);
    Ok(SpectralCoefficients {
        window: grid.window(),
        coeffs: data,
    })
}

/// `f(x) = Σ_{ξ ∈ window} c(ξ) e^{2πi x·ξ}` at every grid point.
pub fn inverse_dft(c: &SpectralCoefficients) -> Result<PeriodicFunction> {
    if c.coeffs.len() != c.window.len() {
        return Err(Error::SizeMismatch("coefficient count vs window".into()));
    }
    let grid = c.window.grid();
    let mut data = c.coeffs.clone();
    fft::fft_nd(&mut data, grid.dim, grid.size, true);
    PeriodicFunction::new(grid, data)
}

/// Applies the Fourier multiplier `m(ξ)` to `f`.
pub fn fourier_multiply(
    f: &PeriodicFunction,
    m: impl Fn(&Freq) -> Complex64,
) -> Result<PeriodicFunction> {
    inverse_dft(&forward_dft(f)?.multiply(m))
}

/// Table of `e^{2πi j/N}` for `j = 0..N`.
pub(crate) fn unit_roots(size: usize) -> Vec<Complex64> {
    (0..size)
        .map(|j| Complex64::from_polar(1.0, TAU * j as f64 / size as f64))
        .collect()
}

pub(crate) fn all_finite(values: &[Complex64]) -> bool {
    values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub(crate) fn check_same_grid(a: TorusGrid, b: TorusGrid) -> Result<()> {
    if a != b {
        return Err(Error::SizeMismatch(format!(
            "grid (n={}, N={}) vs grid (n={}, N={})",
            a.dim, a.size, b.dim, b.size
        )));
    }
    Ok(())
}
