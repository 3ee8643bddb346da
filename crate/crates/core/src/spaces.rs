//! Lebesgue, Sobolev and Besov norms of grid functions.
//!
//! All integrals are Riemann sums with weight `N^{−n}`. Besov blocks use the
//! dilation `Fφ_k(ξ) = φ(2^{−k}ξ)` with `φ` the annular bump of
//! [`crate::symbol::annulus`], and the low block `Fψ = 1 − Σ_{k≥1} φ(2^{−k}·) = φ̂`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::quantize::bessel_potential;
use crate::symbol::{annulus, phi_hat};
use crate::torus::{forward_dft, inverse_dft, lattice_norm, PeriodicFunction, SpectralCoefficients};

/// `(N^{−n} Σ|f|^p)^{1/p}`, or `max|f|` for `p = ∞`.
pub fn lp_norm(f: &PeriodicFunction, p: f64) -> Result<f64> {
    lp_norm_of_moduli(&f.moduli(), p)
}

pub(crate) fn lp_norm_of_moduli(moduli: &[f64], p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(invalid("p", format!("{p} < 1")));
    }
    if p == f64::INFINITY {
        return Ok(moduli.iter().copied().fold(0.0, f64::max));
    }
    let scale = moduli.iter().copied().fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(0.0);
    }
    // scaled to avoid overflow in |f|^p for large p
    let mean = moduli.iter().map(|&v| (v / scale).powf(p)).sum::<f64>() / moduli.len() as f64;
    Ok(scale * mean.powf(1.0 / p))
}

/// `‖J^s f‖_p`.
pub fn sobolev_norm(f: &PeriodicFunction, s: f64, p: f64) -> Result<f64> {
    if !(p > 1.0 && p < f64::INFINITY) {
        return Err(invalid("p", format!("{p} not in (1, ∞)")));
    }
    lp_norm(&bessel_potential(s, f)?, p)
}

/// Low block `ψ*f` and dyadic blocks `φ_k*f`, `k = 1..=K`.
#[derive(Clone, Debug)]
pub struct BesovBlocks {
    pub psi_part: PeriodicFunction,
    pub blocks: Vec<PeriodicFunction>,
}

impl BesovBlocks {
    /// `ψ*f + Σ_k φ_k*f`.
    pub fn reconstruct(&self) -> Result<PeriodicFunction> {
        let one = Complex64::new(1.0, 0.0);
        self.blocks
            .iter()
            .try_fold(self.psi_part.clone(), |acc, b| acc.axpby(one, b, one))
    }
}

fn blocks_unchecked(f: &PeriodicFunction, pieces: usize) -> Result<BesovBlocks> {
    let spec = forward_dft(f)?;
    let window = spec.window();
    let radii: Vec<f64> = window.frequencies().map(|xi| lattice_norm(&xi)).collect();
    let filtered = |weight: &dyn Fn(f64) -> f64| -> Result<PeriodicFunction> {
        let coeffs = spec
            .coeffs()
            .iter()
            .zip(&radii)
            .map(|(&c, &r)| c * weight(r))
            .collect();
        inverse_dft(&SpectralCoefficients::new(window, coeffs)?)
    };
    let psi_part = filtered(&phi_hat)?;
    let blocks = (1..=pieces as u32)
        .into_par_iter()
        .map(|k| filtered(&move |r: f64| annulus(r / (1u64 << k) as f64)))
        .collect::<Result<Vec<_>>>()?;
    Ok(BesovBlocks { psi_part, blocks })
}

/// Requires `2^{K+1} ≤ N/2`; reconstruction is exact on `|ξ| ≤ 2^K`.
pub fn besov_decompose(f: &PeriodicFunction, pieces: usize) -> Result<BesovBlocks> {
    let size = f.grid().size();
    if pieces == 0 || pieces >= 62 || (1usize << (pieces + 1)) > size / 2 {
        return Err(invalid(
            "K",
            format!("{pieces} blocks do not fit a window of half-width {}", size / 2),
        ));
    }
    blocks_unchecked(f, pieces)
}

/// Number of blocks needed to cover every frequency of the window.
pub fn covering_pieces(f: &PeriodicFunction) -> usize {
    let g = f.grid();
    let reach = (g.dim() as f64).sqrt() * (g.size() / 2) as f64;
    // φ̂ + Σ_{k≤K} φ(2^{−k}·) = φ̂(2^{−K}·), which is 1 on |ξ| ≤ 2^K
    let mut k = 1;
    while ((1u64 << k) as f64) < reach {
        k += 1;
    }
    k
}

/// `‖ψ*f‖_p + (Σ_k (2^{sk}‖φ_k*f‖_p)^q)^{1/q}` with all blocks that meet the window.
pub fn besov_norm(f: &PeriodicFunction, s: f64, p: f64, q: f64) -> Result<f64> {
    if !(p > 1.0 && p < f64::INFINITY) {
        return Err(invalid("p", format!("{p} not in (1, ∞)")));
    }
    if q.is_nan() || q < 1.0 {
        return Err(invalid("q", format!("{q} not in [1, ∞]")));
    }
    let blocks = blocks_unchecked(f, covering_pieces(f))?;
    let low = lp_norm(&blocks.psi_part, p)?;
    let terms = blocks
        .blocks
        .iter()
        .enumerate()
        .map(|(i, b)| Ok(2f64.powf(s * (i + 1) as f64) * lp_norm(b, p)?))
        .collect::<Result<Vec<f64>>>()?;
    let tail = if q == f64::INFINITY {
        terms.iter().copied().fold(0.0, f64::max)
    } else {
        lp_norm_of_moduli(&terms, q)? * (terms.len() as f64).powf(1.0 / q)
    };
    Ok(low + tail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::TorusGrid;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    #[test]
    fn lp_of_constants_and_waves() {
        let g = TorusGrid::new(2, 16).unwrap();
        let f = PeriodicFunction::constant(g, Complex64::new(-3.0, 4.0));
        for p in [1.0, 1.5, 2.0, 7.0, f64::INFINITY] {
            assert!((lp_norm(&f, p).unwrap() - 5.0).abs() < 1e-12);
        }
        let w = PeriodicFunction::plane_wave(g, &[2, -3]);
        for p in [1.0, 2.0, 4.0, f64::INFINITY] {
            assert!((lp_norm(&w, p).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!(lp_norm(&w, 0.5).is_err());
    }

    #[test]
    fn sobolev_of_single_mode() {
        let g = TorusGrid::new(2, 16).unwrap();
        let f = PeriodicFunction::plane_wave(g, &[3, 4]);
        for p in [1.5, 2.0, 3.0] {
            let v = sobolev_norm(&f, 1.0, p).unwrap();
            assert!((v - 26f64.sqrt()).abs() < 1e-10);
        }
        let z = PeriodicFunction::zeros(g);
        assert_eq!(sobolev_norm(&z, 2.0, 2.0).unwrap(), 0.0);
        assert!(sobolev_norm(&f, 1.0, 1.0).is_err());
    }

    #[test]
    fn besov_constant_and_zero() {
        let g = TorusGrid::new(1, 64).unwrap();
        let f = PeriodicFunction::constant(g, c(2.5));
        for (s, p, q) in [(1.0, 2.0, 2.0), (-1.0, 3.0, 1.0), (0.5, 1.5, f64::INFINITY)] {
            assert!((besov_norm(&f, s, p, q).unwrap() - 2.5).abs() < 1e-12);
        }
        assert_eq!(besov_norm(&PeriodicFunction::zeros(g), 1.0, 2.0, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn single_mode_meets_two_blocks() {
        use crate::symbol::annulus;
        let g = TorusGrid::new(1, 64).unwrap();
        let f = PeriodicFunction::plane_wave(g, &[6]);
        let parts = besov_decompose(&f, 4).unwrap();
        assert!(parts.psi_part.max_abs() < 1e-15);
        for (i, b) in parts.blocks.iter().enumerate() {
            let k = i + 1;
            let expected = annulus(6.0 / (1u64 << k) as f64);
            assert_eq!(expected > 0.0, k == 2 || k == 3);
            assert!((b.max_abs() - expected).abs() < 1e-12, "k={k}");
        }
        assert!(parts.reconstruct().unwrap().max_diff(&f) < 1e-10);
        let closed: f64 = [2u32, 3]
            .iter()
            .map(|&k| (2f64.powi(k as i32) * annulus(6.0 / (1u64 << k) as f64)).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!((besov_norm(&f, 1.0, 2.0, 2.0).unwrap() - closed).abs() < 1e-12);
    }

    #[test]
    fn covering_reaches_window_corner() {
        let f = PeriodicFunction::zeros(TorusGrid::new(1, 64).unwrap());
        assert_eq!(covering_pieces(&f), 5);
        let g = PeriodicFunction::zeros(TorusGrid::new(2, 64).unwrap());
        // corner at 32√2 ≈ 45.3
        assert_eq!(covering_pieces(&g), 6);
    }
}
