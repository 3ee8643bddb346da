//! Discrete symbols `σ(x, ξ)` on `T^n × Z^n` and their calculus.
//!
//! A [`Symbol`] always carries its values over the full grid × window, stored
//! x-major (`values[x * N^n + ξ]`). A symbol may additionally be backed by a
//! closed-form [`Generator`], which can evaluate `σ(·, ξ)` at frequencies
//! outside the window. Forward differences of generator-backed symbols are
//! exact everywhere; for array-backed symbols every difference along axis `j`
//! invalidates the top layer `ξ_j = N/2 − 1 − consumed_j` of the window, and
//! invalid frequencies are excluded from seminorms.

mod families;
mod partition;
mod seminorm;

pub use families::{bessel_symbol, make_oscillating_symbol, AmplitudeProfile, OscillatingFamily};
pub use partition::{
    annulus, littlewood_paley_piece, littlewood_paley_split, phi_hat, psi_hat, smooth_step,
    DyadicPartition,
};
pub use seminorm::{fit_symbol_class, seminorms, shell_of, ClassFit, SeminormKey, SeminormTable};

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fft;
use crate::torus::{all_finite, Freq, LatticeWindow, Point, TorusGrid, MAX_DIM};

/// Highest total order accepted by [`Symbol::difference_op`] and
/// [`Symbol::x_derivative`].
pub const MAX_ORDER: usize = 4;

/// A multi-index; entries past the grid dimension are zero.
pub type MultiIndex = [usize; MAX_DIM];

/// Claimed Hörmander class `S^m_{ρ,δ}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolClass {
    pub m: f64,
    pub rho: f64,
    pub delta: f64,
}

type ColumnFn = dyn Fn(&Freq) -> Vec<Complex64> + Send + Sync;

/// Closed-form evaluator of whole columns `x ↦ σ(x, ξ)` at any lattice point.
#[derive(Clone)]
pub struct Generator {
    column: Arc<ColumnFn>,
    params: Value,
}

impl Generator {
    pub fn new(
        params: Value,
        column: impl Fn(&Freq) -> Vec<Complex64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            column: Arc::new(column),
            params,
        }
    }

    /// Builds a column generator from a pointwise formula.
    pub fn pointwise(
        grid: TorusGrid,
        params: Value,
        f: impl Fn(&Point, &Freq) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        let points: Vec<Point> = grid.points().collect();
        Self::new(params, move |xi| points.iter().map(|x| f(x, xi)).collect())
    }

    /// `σ(x, ξ)` for every grid point `x`.
    pub fn column(&self, xi: &Freq) -> Vec<Complex64> {
        (self.column)(xi)
    }

    /// JSON record of the parameters that produced this generator.
    pub fn params(&self) -> &Value {
        &self.params
    }
}

impl fmt::Debug for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Generator")
            .field("params", &self.params)
            .finish()
    }
}

#[derive(Clone)]
pub struct Symbol {
    grid: TorusGrid,
    values: Vec<Complex64>,
    generator: Option<Generator>,
    consumed: [usize; MAX_DIM],
    claimed: Option<SymbolClass>,
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Symbol")
            .field("grid", &self.grid)
            .field("generator", &self.generator)
            .field("consumed", &self.consumed)
            .field("claimed", &self.claimed)
            .finish_non_exhaustive()
    }
}

impl Symbol {
    /// Array-backed symbol from x-major values.
    pub fn from_values(grid: TorusGrid, values: Vec<Complex64>) -> Result<Self> {
        let want = grid.len() * grid.len();
        if values.len() != want {
            return Err(Error::SizeMismatch(format!(
                "{} symbol values, expected {want}",
                values.len()
            )));
        }
        if !all_finite(&values) {
            return Err(Error::NonFinite("symbol values"));
        }
        Ok(Self {
            grid,
            values,
            generator: None,
            consumed: [0; MAX_DIM],
            claimed: None,
        })
    }

    /// Generator-backed symbol; the window values are filled in eagerly.
    pub fn from_generator(grid: TorusGrid, generator: Generator) -> Result<Self> {
        let window = grid.window();
        let columns: Vec<Vec<Complex64>> = (0..window.len())
            .into_par_iter()
            .map(|j| generator.column(&window.frequency(j)))
            .collect();
        let values = scatter_columns(grid, &columns)?;
        Ok(Self {
            grid,
            values,
            generator: Some(generator),
            consumed: [0; MAX_DIM],
            claimed: None,
        })
    }

    /// Generator-backed symbol from a pointwise formula `σ(x, ξ)`.
    pub fn from_fn(
        grid: TorusGrid,
        f: impl Fn(&Point, &Freq) -> Complex64 + Send + Sync + 'static,
    ) -> Result<Self> {
        Self::from_generator(
            grid,
            Generator::pointwise(grid, json!({"family": "custom"}), f),
        )
    }

    /// x-independent symbol `σ(x, ξ) = m(ξ)`.
    pub fn multiplier(
        grid: TorusGrid,
        m: impl Fn(&Freq) -> Complex64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let len = grid.len();
        Self::from_generator(
            grid,
            Generator::new(json!({"family": "multiplier"}), move |xi| vec![m(xi); len]),
        )
    }

    pub fn constant(grid: TorusGrid, value: Complex64) -> Self {
        let len = grid.len();
        let generator = Generator::new(
            json!({"family": "constant", "re": value.re, "im": value.im}),
            move |_| vec![value; len],
        );
        Self {
            grid,
            values: vec![value; len * len],
            generator: Some(generator),
            consumed: [0; MAX_DIM],
            claimed: Some(SymbolClass {
                m: 0.0,
                rho: 1.0,
                delta: 0.0,
            }),
        }
    }

    pub fn zero(grid: TorusGrid) -> Self {
        let mut s = Self::constant(grid, Complex64::default());
        s.generator = Some(Generator::new(json!({"family": "zero"}), {
            let len = grid.len();
            move |_| vec![Complex64::default(); len]
        }));
        s
    }

    #[inline]
    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    #[inline]
    pub fn window(&self) -> LatticeWindow {
        self.grid.window()
    }

    /// Raw x-major values.
    #[inline]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `σ(x_idx, ·)` over the window in DFT order.
    #[inline]
    pub fn row(&self, x_idx: usize) -> &[Complex64] {
        let len = self.grid.len();
        &self.values[x_idx * len..(x_idx + 1) * len]
    }

    #[inline]
    pub fn value(&self, x_idx: usize, xi_idx: usize) -> Complex64 {
        self.values[x_idx * self.grid.len() + xi_idx]
    }

    /// `σ(·, ξ)` over the grid; evaluated through the generator when `ξ` lies
    /// outside the window.
    pub fn column_at(&self, xi: &Freq) -> Option<Vec<Complex64>> {
        if let Some(j) = self.window().index_of(xi) {
            if self.is_valid(j) {
                return Some(self.column(j));
            }
        }
        self.generator.as_ref().map(|g| g.column(xi))
    }

    pub fn column(&self, xi_idx: usize) -> Vec<Complex64> {
        let len = self.grid.len();
        (0..len).map(|x| self.values[x * len + xi_idx]).collect()
    }

    pub fn generator(&self) -> Option<&Generator> {
        self.generator.as_ref()
    }

    pub fn is_generator_backed(&self) -> bool {
        self.generator.is_some()
    }

    /// Parameter record of the generator, if any.
    pub fn params(&self) -> Option<&Value> {
        self.generator.as_ref().map(Generator::params)
    }

    pub fn claimed_class(&self) -> Option<SymbolClass> {
        self.claimed
    }

    pub fn with_claimed_class(mut self, class: SymbolClass) -> Self {
        self.claimed = Some(class);
        self
    }

    /// Number of invalidated top layers per axis.
    pub fn consumed(&self) -> [usize; MAX_DIM] {
        self.consumed
    }

    /// Whether the window entry `xi_idx` carries a trustworthy value.
    #[inline]
    pub fn is_valid(&self, xi_idx: usize) -> bool {
        if self.consumed.iter().all(|&c| c == 0) {
            return true;
        }
        let xi = self.window().frequency(xi_idx);
        let half = self.window().half();
        (0..self.grid.dim()).all(|a| xi[a] < half - self.consumed[a] as i64)
    }

    pub fn valid_mask(&self) -> Vec<bool> {
        (0..self.grid.len()).map(|j| self.is_valid(j)).collect()
    }

    /// Iterated forward differences `Δ^α_ξ σ`.
    pub fn difference_op(&self, alpha: &[usize]) -> Result<Symbol> {
        let alpha = normalize_multi(alpha, self.grid.dim())?;
        if order(&alpha) == 0 {
            return Ok(self.clone());
        }
        if let Some(generator) = &self.generator {
            let inner = generator.clone();
            let stencil = difference_stencil(&alpha);
            let params = json!({"of": generator.params(), "difference": alpha});
            let g = Generator::new(params, move |xi| {
                let mut acc: Vec<Complex64> = Vec::new();
                for (shift, weight) in &stencil {
                    let mut at = *xi;
                    for a in 0..MAX_DIM {
                        at[a] += shift[a] as i64;
                    }
                    let col = inner.column(&at);
                    if acc.is_empty() {
                        acc = col.iter().map(|&v| v * *weight).collect();
                    } else {
                        acc.iter_mut().zip(&col).for_each(|(s, &v)| *s += v * *weight);
                    }
                }
                acc
            });
            let mut out = Symbol::from_generator(self.grid, g)?;
            out.claimed = self.claimed;
            return Ok(out);
        }

        let mut consumed = self.consumed;
        for a in 0..self.grid.dim() {
            consumed[a] += alpha[a];
            if consumed[a] >= self.grid.size() {
                return Err(Error::WindowConsumed { axis: a });
            }
        }
        let window = self.window();
        let len = self.grid.len();
        let mut values = self.values.clone();
        for a in 0..self.grid.dim() {
            for _ in 0..alpha[a] {
                values = values
                    .par_chunks(len)
                    .flat_map_iter(|row| {
                        (0..len).map(move |j| {
                            let mut up = window.frequency(j);
                            up[a] += 1;
                            match window.index_of(&up) {
                                Some(k) => row[k] - row[j],
                                None => Complex64::default(),
                            }
                        })
                    })
                    .collect();
            }
        }
        let mut out = Symbol {
            grid: self.grid,
            values,
            generator: None,
            consumed,
            claimed: self.claimed,
        };
        out.zero_invalid();
        Ok(out)
    }

    /// Spectral x-derivative `∂^β_x σ` for every fixed ξ.
    pub fn x_derivative(&self, beta: &[usize]) -> Result<Symbol> {
        let beta = normalize_multi(beta, self.grid.dim())?;
        if order(&beta) == 0 {
            return Ok(self.clone());
        }
        let grid = self.grid;
        if let Some(generator) = &self.generator {
            let inner = generator.clone();
            let params = json!({"of": generator.params(), "x_derivative": beta});
            let g = Generator::new(params, move |xi| {
                let mut col = inner.column(xi);
                spectral_derivative(&mut col, grid, &beta);
                col
            });
            let mut out = Symbol::from_generator(grid, g)?;
            if !all_finite(&out.values) {
                return Err(Error::NonFinite("x_derivative"));
            }
            out.claimed = self.claimed;
            return Ok(out);
        }
        let columns: Vec<Vec<Complex64>> = (0..grid.len())
            .into_par_iter()
            .map(|j| {
                let mut col = self.column(j);
                spectral_derivative(&mut col, grid, &beta);
                col
            })
            .collect();
        let values = scatter_columns(grid, &columns)?;
        let mut out = Symbol {
            grid,
            values,
            generator: None,
            consumed: self.consumed,
            claimed: self.claimed,
        };
        out.zero_invalid();
        Ok(out)
    }

    /// `σ(x, ξ)·m(ξ)`; keeps generator backing.
    pub fn multiply_xi(&self, m: impl Fn(&Freq) -> f64 + Send + Sync + Clone + 'static) -> Result<Symbol> {
        let window = self.window();
        let len = self.grid.len();
        let weights: Vec<f64> = (0..len).map(|j| m(&window.frequency(j))).collect();
        let values: Vec<Complex64> = self
            .values
            .par_chunks(len)
            .flat_map_iter(|row| row.iter().zip(&weights).map(|(&v, &w)| v * w))
            .collect();
        let generator = self.generator.as_ref().map(|g| {
            let inner = g.clone();
            let m = m.clone();
            Generator::new(json!({"of": g.params(), "xi_weight": true}), move |xi| {
                let w = m(xi);
                inner.column(xi).into_iter().map(|v| v * w).collect()
            })
        });
        Ok(Symbol {
            grid: self.grid,
            values,
            generator,
            consumed: self.consumed,
            claimed: self.claimed,
        })
    }

    /// Pointwise sum; generator-backed only when both summands are.
    pub fn add(&self, other: &Symbol) -> Result<Symbol> {
        crate::torus::check_same_grid(self.grid, other.grid)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| a + b)
            .collect();
        let generator = match (&self.generator, &other.generator) {
            (Some(a), Some(b)) => {
                let (a, b) = (a.clone(), b.clone());
                let params = json!({"sum": [a.params(), b.params()]});
                Some(Generator::new(params, move |xi| {
                    a.column(xi)
                        .into_iter()
                        .zip(b.column(xi))
                        .map(|(u, v)| u + v)
                        .collect()
                }))
            }
            _ => None,
        };
        let mut consumed = [0; MAX_DIM];
        if generator.is_none() {
            for (c, (a, b)) in consumed.iter_mut().zip(self.consumed.iter().zip(&other.consumed)) {
                *c = (*a).max(*b);
            }
        }
        let mut out = Symbol {
            grid: self.grid,
            values,
            generator,
            consumed,
            claimed: None,
        };
        out.zero_invalid();
        Ok(out)
    }

    /// Drops the generator, leaving a plain array-backed symbol.
    pub fn to_array(&self) -> Symbol {
        let mut out = self.clone();
        out.generator = None;
        out
    }

    /// `sup |σ(x, ξ)|` over x and valid ξ.
    pub fn sup_norm(&self) -> f64 {
        let len = self.grid.len();
        let mask = self.valid_mask();
        self.values
            .chunks(len)
            .flat_map(|row| row.iter().zip(&mask).filter(|(_, &ok)| ok).map(|(v, _)| v.norm()))
            .fold(0.0, f64::max)
    }

    fn zero_invalid(&mut self) {
        if self.consumed.iter().all(|&c| c == 0) {
            return;
        }
        let len = self.grid.len();
        let mask = self.valid_mask();
        for row in self.values.chunks_mut(len) {
            for (v, &ok) in row.iter_mut().zip(&mask) {
                if !ok {
                    *v = Complex64::default();
                }
            }
        }
    }
}

#[inline]
pub(crate) fn order(alpha: &MultiIndex) -> usize {
    alpha.iter().sum()
}

/// Pads a multi-index to [`MAX_DIM`] and checks it against the grid dimension
/// and [`MAX_ORDER`].
pub fn normalize_multi(alpha: &[usize], dim: usize) -> Result<MultiIndex> {
    if alpha.len() > MAX_DIM || alpha.iter().skip(dim).any(|&a| a != 0) {
        return Err(Error::SizeMismatch(format!(
            "multi-index {alpha:?} for dimension {dim}"
        )));
    }
    let mut out = [0; MAX_DIM];
    out[..alpha.len()].copy_from_slice(alpha);
    let total = order(&out);
    if total > MAX_ORDER {
        return Err(Error::OrderTooHigh {
            order: total,
            max: MAX_ORDER,
        });
    }
    Ok(out)
}

/// Unit multi-index along `axis`.
pub fn unit(axis: usize) -> MultiIndex {
    let mut e = [0; MAX_DIM];
    e[axis] = 1;
    e
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Shifts γ ≤ α with weights `(−1)^{|α−γ|} C(α, γ)`.
fn difference_stencil(alpha: &MultiIndex) -> Vec<(MultiIndex, f64)> {
    let mut out = vec![([0; MAX_DIM], 1.0)];
    for a in 0..MAX_DIM {
        let mut next = Vec::new();
        for (shift, w) in &out {
            for g in 0..=alpha[a] {
                let mut s = *shift;
                s[a] = g;
                let sign = if (alpha[a] - g).is_multiple_of(2) { 1.0 } else { -1.0 };
                next.push((s, w * sign * binomial(alpha[a], g)));
            }
        }
        out = next;
    }
    out
}

/// Multiplies the x-spectrum of `col` by `(2πi η)^β`. Odd orders annihilate
/// the Nyquist mode along their axis.
pub(crate) fn spectral_derivative(col: &mut [Complex64], grid: TorusGrid, beta: &MultiIndex) {
    let (dim, size) = (grid.dim(), grid.size());
    fft::fft_nd(col, dim, size, false);
    let window = grid.window();
    let scale = 1.0 / grid.len() as f64;
    let half = window.half();
    for (j, v) in col.iter_mut().enumerate() {
        let eta = window.frequency(j);
        let mut factor = Complex64::new(scale, 0.0);
        for a in 0..dim {
            if beta[a] == 0 {
                continue;
            }
            if eta[a] == -half && beta[a] % 2 == 1 {
                factor = Complex64::default();
                break;
            }
            factor *= Complex64::new(0.0, TAU * eta[a] as f64).powu(beta[a] as u32);
        }
        *v *= factor;
    }
    fft::fft_nd(col, dim, size, true);
}

fn scatter_columns(grid: TorusGrid, columns: &[Vec<Complex64>]) -> Result<Vec<Complex64>> {
    let len = grid.len();
    let mut values = vec![Complex64::default(); len * len];
    for (j, col) in columns.iter().enumerate() {
        if col.len() != len {
            return Err(Error::SizeMismatch(format!(
                "generator column of length {}, expected {len}",
                col.len()
            )));
        }
        for (x, &v) in col.iter().enumerate() {
            values[x * len + j] = v;
        }
    }
    if !all_finite(&values) {
        return Err(Error::NonFinite("symbol values"));
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid1(n: usize) -> TorusGrid {
        TorusGrid::new(1, n).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn difference_of_constant_vanishes() {
        let s = Symbol::constant(grid1(16), c(3.0));
        for k in 1..=4 {
            let d = s.difference_op(&[k]).unwrap();
            assert!(d.values().iter().all(|v| v.norm() == 0.0));
        }
    }

    #[test]
    fn difference_of_linear_and_quadratic() {
        let g = grid1(16);
        let lin = Symbol::from_fn(g, |_, xi| c(xi[0] as f64)).unwrap();
        let d = lin.difference_op(&[1]).unwrap();
        assert!(d.values().iter().all(|v| (v - c(1.0)).norm() < 1e-14));

        let quad = Symbol::from_fn(g, |_, xi| c((xi[0] * xi[0]) as f64)).unwrap();
        let d2 = quad.difference_op(&[2]).unwrap();
        assert!(d2.values().iter().all(|v| (v - c(2.0)).norm() < 1e-12));
    }

    #[test]
    fn array_backed_differences_shrink_the_valid_region() {
        let g = grid1(16);
        let quad = Symbol::from_fn(g, |_, xi| c((xi[0] * xi[0]) as f64))
            .unwrap()
            .to_array();
        let d2 = quad.difference_op(&[2]).unwrap();
        assert_eq!(d2.consumed()[0], 2);
        let w = g.window();
        for j in 0..g.len() {
            let xi = w.frequency(j)[0];
            assert_eq!(d2.is_valid(j), xi < 6, "ξ = {xi}");
            if d2.is_valid(j) {
                assert!((d2.value(0, j) - c(2.0)).norm() < 1e-12);
            } else {
                assert_eq!(d2.value(0, j), Complex64::default());
            }
        }
    }

    #[test]
    fn order_and_window_errors() {
        let g = grid1(8);
        let s = Symbol::constant(g, c(1.0)).to_array();
        assert!(matches!(
            s.difference_op(&[5]),
            Err(Error::OrderTooHigh { .. })
        ));
        let d = s.difference_op(&[4]).unwrap();
        assert!(matches!(
            d.difference_op(&[4]),
            Err(Error::WindowConsumed { axis: 0 })
        ));
        assert!(s.x_derivative(&[5]).is_err());
        assert!(s.difference_op(&[0, 1]).is_err());
    }

    #[test]
    fn x_derivative_of_x_independent_symbol_vanishes() {
        let s = bessel_symbol(grid1(32), 1.5).unwrap();
        let d = s.x_derivative(&[1]).unwrap();
        assert!(d.values().iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn x_derivative_eigenfunction() {
        let g = grid1(32);
        let s = Symbol::from_fn(g, |x, xi| {
            Complex64::from_polar(1.0 / (1.0 + (xi[0] * xi[0]) as f64), TAU * x[0])
        })
        .unwrap();
        let d = s.x_derivative(&[1]).unwrap();
        let i2pi = Complex64::new(0.0, TAU);
        for (a, b) in d.values().iter().zip(s.values()) {
            assert!((a - i2pi * b).norm() < 1e-10);
        }
    }

    #[test]
    fn second_x_derivative_of_sine() {
        let g = grid1(32);
        let s = Symbol::from_fn(g, |x, _| c((TAU * x[0]).sin())).unwrap();
        let d = s.x_derivative(&[2]).unwrap();
        for (a, b) in d.values().iter().zip(s.values()) {
            assert!((a - b * (-TAU * TAU)).norm() < 1e-8);
        }
    }

    #[test]
    fn generator_extends_past_window() {
        let g = grid1(8);
        let s = Symbol::from_fn(g, |_, xi| c(xi[0] as f64)).unwrap();
        let col = s.column_at(&[100, 0, 0]).unwrap();
        assert!(col.iter().all(|v| *v == c(100.0)));
        assert!(s.to_array().column_at(&[100, 0, 0]).is_none());
    }

    #[test]
    fn stencil_weights_match_binomial_expansion() {
        let st = difference_stencil(&[3, 0, 0]);
        let w: Vec<f64> = st.iter().map(|(_, w)| *w).collect();
        assert_eq!(w, vec![-1.0, 3.0, -3.0, 1.0]);
    }
}
