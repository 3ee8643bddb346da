//! Toroidal quantization `Tf(x) = Σ_ξ σ(x, ξ) f̂(ξ) e^{2πi x·ξ}` and friends.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernel::KernelSlice;
use crate::probe::probe_function;
use crate::spaces::lp_norm;
use crate::symbol::Symbol;
use crate::torus::{
    all_finite, bracket, check_same_grid, forward_dft, fourier_multiply, inverse_dft, unit_roots,
    PeriodicFunction, SpectralCoefficients, TorusGrid,
};

/// Per-frequency residues `ξ_a mod N` used to index the unit-root table.
fn residues(grid: TorusGrid) -> Vec<[usize; 3]> {
    let window = grid.window();
    let n = grid.size() as i64;
    window
        .frequencies()
        .map(|xi| {
            let mut r = [0usize; 3];
            for a in 0..grid.dim() {
                r[a] = xi[a].rem_euclid(n) as usize;
            }
            r
        })
        .collect()
}

#[inline]
fn phase_index(x: &[usize; 3], r: &[usize; 3], size: usize) -> usize {
    (x[0] * r[0] + x[1] * r[1] + x[2] * r[2]) % size
}

/// Applies `Op(σ)` to `f` by direct summation over the window.
pub fn apply_operator(sigma: &Symbol, f: &PeriodicFunction) -> Result<PeriodicFunction> {
    check_same_grid(sigma.grid(), f.grid())?;
    let grid = f.grid();
    let size = grid.size();
    let spec = forward_dft(f)?;
    let coeffs = spec.coeffs();
    let roots = unit_roots(size);
    let res = residues(grid);
    let out: Vec<Complex64> = (0..grid.len())
        .into_par_iter()
        .map(|x| {
            let xm = grid.unflatten(x);
            sigma
                .row(x)
                .iter()
                .zip(coeffs)
                .zip(&res)
                .filter(|((_, c), _)| c.re != 0.0 || c.im != 0.0)
                .map(|((&s, &c), r)| s * c * roots[phase_index(&xm, r, size)])
                .sum()
        })
        .collect();
    if !all_finite(&out) {
        return Err(Error::NonFinite("operator output"));
    }
    PeriodicFunction::new(grid, out)
}

/// `J^s f`, the Fourier multiplier `⟨ξ⟩^s`.
pub fn bessel_potential(s: f64, f: &PeriodicFunction) -> Result<PeriodicFunction> {
    if !s.is_finite() {
        return Err(invalid("s", "must be finite"));
    }
    fourier_multiply(f, |xi| Complex64::new(bracket(xi).powf(s), 0.0))
}

/// `Op(σ)* g`, the adjoint for the normalized inner product on the grid.
pub fn adjoint_apply(sigma: &Symbol, g: &PeriodicFunction) -> Result<PeriodicFunction> {
    check_same_grid(sigma.grid(), g.grid())?;
    let grid = g.grid();
    let size = grid.size();
    let len = grid.len();
    let roots = unit_roots(size);
    let res = residues(grid);
    let samples = g.samples();
    let scale = 1.0 / len as f64;
    // h(ξ) = N^{−n} Σ_x conj σ(x, ξ) g(x) e^{−2πi x·ξ}
    let h: Vec<Complex64> = (0..len)
        .into_par_iter()
        .map(|j| {
            let r = &res[j];
            (0..len)
                .filter(|&x| samples[x].re != 0.0 || samples[x].im != 0.0)
                .map(|x| {
                    let xm = grid.unflatten(x);
                    sigma.value(x, j).conj() * samples[x] * roots[phase_index(&xm, r, size)].conj()
                })
                .sum::<Complex64>()
                * scale
        })
        .collect();
    inverse_dft(&SpectralCoefficients::new(grid.window(), h)?)
}

/// `Tf(x) = N^{−n} Σ_u K(x, x − u) f(u)` for a synthesized kernel.
pub fn kernel_apply(kernel: &KernelSlice, f: &PeriodicFunction) -> Result<PeriodicFunction> {
    let grid = kernel.grid();
    check_same_grid(grid, f.grid())?;
    let size = grid.size();
    let len = grid.len();
    let samples = f.samples();
    let scale = 1.0 / len as f64;
    let out: Vec<Complex64> = (0..len)
        .into_par_iter()
        .map(|x| {
            let xm = grid.unflatten(x);
            let row = kernel.row(x);
            (0..len)
                .map(|u| {
                    let um = grid.unflatten(u);
                    let mut d = [0usize; 3];
                    for a in 0..grid.dim() {
                        d[a] = (xm[a] + size - um[a]) % size;
                    }
                    row[grid.flatten(&d[..grid.dim()])] * samples[u]
                })
                .sum::<Complex64>()
                * scale
        })
        .collect();
    PeriodicFunction::new(grid, out)
}

/// Randomized lower bound for `‖Op(σ)‖_{L^p → L^q}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorNormEstimate {
    pub p: f64,
    pub q: f64,
    pub lower_bound: f64,
    /// Trial attaining the lower bound.
    pub argmax_trial: u64,
    pub trials: u64,
    pub seed: u64,
    /// Power-iteration value of the exact `L² → L²` norm when `p = q = 2`.
    pub exact2: Option<f64>,
}

/// Maximum ratio `‖Tf‖_q/‖f‖_p` over seeded probes band-limited to `|ξ| ≤ N/4`.
pub fn operator_norm_estimate(
    sigma: &Symbol,
    p: f64,
    q: f64,
    trials: u64,
    seed: u64,
) -> Result<OperatorNormEstimate> {
    if trials == 0 {
        return Err(invalid("trials", "must be positive"));
    }
    let grid = sigma.grid();
    let band = grid.size() as f64 / 4.0;
    let ratios: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let f = probe_function(grid, band, seed, t)?;
            let num = lp_norm(&apply_operator(sigma, &f)?, q)?;
            let den = lp_norm(&f, p)?;
            Ok(if den > 0.0 { num / den } else { 0.0 })
        })
        .collect::<Result<_>>()?;
    let (argmax_trial, lower_bound) = ratios
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, r)| if r > best.1 { (i, r) } else { best });
    let exact2 = if p == 2.0 && q == 2.0 {
        Some(l2_operator_norm(sigma, seed)?)
    } else {
        None
    };
    Ok(OperatorNormEstimate {
        p,
        q,
        lower_bound,
        argmax_trial: argmax_trial as u64,
        trials,
        seed,
        exact2,
    })
}

/// `‖Op(σ)‖_{L² → L²}` by power iteration on `T*T`.
pub fn l2_operator_norm(sigma: &Symbol, seed: u64) -> Result<f64> {
    let grid = sigma.grid();
    let mut v = crate::probe::gaussian_trig_poly(grid, f64::INFINITY, seed, u64::MAX)?;
    let mut lambda = 0.0f64;
    for _ in 0..5000 {
        let nv = lp_norm(&v, 2.0)?;
        if nv == 0.0 {
            return Ok(0.0);
        }
        v = v.scale(Complex64::new(1.0 / nv, 0.0));
        let tv = apply_operator(sigma, &v)?;
        let next = lp_norm(&tv, 2.0)?.powi(2);
        v = adjoint_apply(sigma, &tv)?;
        let done = (next - lambda).abs() <= 1e-13 * next.max(f64::MIN_POSITIVE);
        lambda = next;
        if done {
            break;
        }
    }
    Ok(lambda.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::Symbol;
    use std::f64::consts::TAU;

    fn naive_apply(sigma: &Symbol, f: &PeriodicFunction) -> Vec<Complex64> {
        let grid = f.grid();
        let window = grid.window();
        let spec = forward_dft(f).unwrap();
        (0..grid.len())
            .map(|x| {
                let p = grid.point(x);
                (0..grid.len())
                    .map(|j| {
                        let xi = window.frequency(j);
                        let ph: f64 = (0..grid.dim()).map(|a| p[a] * xi[a] as f64).sum();
                        sigma.value(x, j) * spec.coeffs()[j] * Complex64::from_polar(1.0, TAU * ph)
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn identity_and_multiplier() {
        let g = TorusGrid::new(2, 8).unwrap();
        let f = crate::probe::gaussian_trig_poly(g, 10.0, 3, 0).unwrap();
        let id = Symbol::constant(g, Complex64::new(1.0, 0.0));
        assert!(apply_operator(&id, &f).unwrap().max_diff(&f) < 1e-12);
        let m = Symbol::multiplier(g, |xi| Complex64::new(bracket(xi).powf(-0.5), 0.0)).unwrap();
        let a = apply_operator(&m, &f).unwrap();
        let b = bessel_potential(-0.5, &f).unwrap();
        assert!(a.max_diff(&b) < 1e-12);
    }

    #[test]
    fn matches_naive_sum_for_x_dependent_symbol() {
        let g = TorusGrid::new(1, 16).unwrap();
        let s = Symbol::from_fn(g, |x, xi| {
            Complex64::new((TAU * x[0]).cos() + 2.0, xi[0] as f64 * 0.1)
        })
        .unwrap();
        let f = crate::probe::gaussian_trig_poly(g, 8.0, 5, 1).unwrap();
        let fast = apply_operator(&s, &f).unwrap();
        let slow = naive_apply(&s, &f);
        for (a, b) in fast.samples().iter().zip(&slow) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn adjoint_identity() {
        let g = TorusGrid::new(2, 8).unwrap();
        let s = Symbol::from_fn(g, |x, xi| {
            Complex64::new((TAU * x[1]).sin(), 1.0) * bracket(xi).powf(-1.0)
        })
        .unwrap();
        let f = crate::probe::gaussian_trig_poly(g, 10.0, 1, 2).unwrap();
        let h = crate::probe::gaussian_trig_poly(g, 10.0, 1, 3).unwrap();
        let tf = apply_operator(&s, &f).unwrap();
        let ah = adjoint_apply(&s, &h).unwrap();
        let lhs: Complex64 = tf.samples().iter().zip(h.samples()).map(|(a, b)| a * b.conj()).sum();
        let rhs: Complex64 = f.samples().iter().zip(ah.samples()).map(|(a, b)| a * b.conj()).sum();
        assert!((lhs - rhs).norm() < 1e-10 * lhs.norm().max(1.0));
    }

    #[test]
    fn norms_of_simple_operators() {
        let g = TorusGrid::new(1, 32).unwrap();
        let id = Symbol::constant(g, Complex64::new(1.0, 0.0));
        let e = operator_norm_estimate(&id, 2.0, 2.0, 6, 7).unwrap();
        assert!((e.exact2.unwrap() - 1.0).abs() < 1e-9);
        assert!((e.lower_bound - 1.0).abs() < 1e-12);
        let z = Symbol::zero(g);
        let e = operator_norm_estimate(&z, 2.0, 4.0, 4, 7).unwrap();
        assert_eq!(e.lower_bound, 0.0);
        assert_eq!(e.exact2, None);
    }

    #[test]
    fn power_iteration_finds_multiplier_sup() {
        let g = TorusGrid::new(1, 32).unwrap();
        let m = Symbol::multiplier(g, |xi| Complex64::new(1.0 / (1.0 + (xi[0] - 3) as f64 * (xi[0] - 3) as f64), 0.0)).unwrap();
        let v = l2_operator_norm(&m, 1).unwrap();
        assert!((v - 1.0).abs() < 1e-6, "{v}");
    }
}
