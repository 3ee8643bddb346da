//! Smooth inhomogeneous Littlewood-Paley partition on the lattice.
//!
//! `φ̂(ξ) = h(|ξ| − 1)` with `h` the standard C^∞ step built from `e^{−1/t}`,
//! so `φ̂ = 1` on the unit ball and vanishes for `|ξ| ≥ 2`. The pieces are
//! `ψ̂_k(ξ) = φ̂(2^{−k}ξ) − φ̂(2^{1−k}ξ)`, supported in
//! `2^{k−1} ≤ |ξ| ≤ 2^{k+1}`, and `φ̂ + Σ_{k≤K} ψ̂_k = φ̂(2^{−K}·)` telescopes.

use super::Symbol;
use crate::error::{invalid, Result};
use crate::torus::{lattice_norm, LatticeWindow};

/// `h(t) = 1` for `t ≤ 0`, `0` for `t ≥ 1`, smooth and monotone in between.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    if t >= 1.0 {
        return 0.0;
    }
    let a = (-1.0 / (1.0 - t)).exp();
    let b = (-1.0 / t).exp();
    a / (a + b)
}

/// Radial bump `φ̂` evaluated at `|ξ| = r`.
#[inline]
pub fn phi_hat(r: f64) -> f64 {
    smooth_step(r - 1.0)
}

/// `ψ̂_k` at `|ξ| = r`; `k = 0` gives `φ̂` itself.
#[inline]
pub fn psi_hat(k: u32, r: f64) -> f64 {
    if k == 0 {
        return phi_hat(r);
    }
    let outer = phi_hat(r / (1u64 << k) as f64);
    let inner = phi_hat(r / (1u64 << (k - 1)) as f64);
    outer - inner
}

/// Annular bump `φ(ξ) = φ̂(ξ) − φ̂(2ξ)`, supported in `1/2 ≤ |ξ| ≤ 2`.
#[inline]
pub fn annulus(r: f64) -> f64 {
    phi_hat(r) - phi_hat(2.0 * r)
}

/// `φ̂` and `ψ̂_1 … ψ̂_K` tabulated on a window.
#[derive(Clone, Debug)]
pub struct DyadicPartition {
    window: LatticeWindow,
    pieces: usize,
    phihat: Vec<f64>,
    psihat: Vec<Vec<f64>>,
}

impl DyadicPartition {
    /// Requires `2^{K+1} ≤ N/2` so every shell fits inside the window.
    pub fn new(window: LatticeWindow, pieces: usize) -> Result<Self> {
        check_fits(window, pieces)?;
        let radii: Vec<f64> = window.frequencies().map(|xi| lattice_norm(&xi)).collect();
        let phihat = radii.iter().map(|&r| phi_hat(r)).collect();
        let psihat = (1..=pieces as u32)
            .map(|k| radii.iter().map(|&r| psi_hat(k, r)).collect())
            .collect();
        Ok(Self {
            window,
            pieces,
            phihat,
            psihat,
        })
    }

    pub fn window(&self) -> LatticeWindow {
        self.window
    }

    /// `K`.
    pub fn pieces(&self) -> usize {
        self.pieces
    }

    pub fn phihat(&self) -> &[f64] {
        &self.phihat
    }

    /// `ψ̂_k` for `k = 1..=K`.
    pub fn psihat(&self, k: usize) -> &[f64] {
        &self.psihat[k - 1]
    }

    /// `max |φ̂ + Σψ̂_k − 1|` over `|ξ| ≤ 2^{K−1}`.
    pub fn identity_defect(&self) -> f64 {
        let limit = (1u64 << (self.pieces - 1)) as f64;
        self.window
            .frequencies()
            .enumerate()
            .filter(|(_, xi)| lattice_norm(xi) <= limit)
            .map(|(j, _)| {
                let total = self.phihat[j] + self.psihat.iter().map(|p| p[j]).sum::<f64>();
                (total - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }
}

fn check_fits(window: LatticeWindow, pieces: usize) -> Result<()> {
    if pieces == 0 || pieces >= 62 || (1usize << (pieces + 1)) > window.size() / 2 {
        return Err(invalid(
            "K",
            format!(
                "{pieces} dyadic pieces do not fit a window of half-width {}",
                window.size() / 2
            ),
        ));
    }
    Ok(())
}

/// `σ_k = σ·ψ̂_k` (or `σ·φ̂` for `k = 0`) without checking that the shell fits.
pub fn littlewood_paley_piece(sigma: &Symbol, k: u32) -> Result<Symbol> {
    sigma.multiply_xi(move |xi| psi_hat(k, lattice_norm(xi)))
}

/// `[σ₀, σ₁, …, σ_K]` with `Σ σ_k = σ` on `|ξ| ≤ 2^{K−1}`.
pub fn littlewood_paley_split(sigma: &Symbol, pieces: usize) -> Result<Vec<Symbol>> {
    check_fits(sigma.window(), pieces)?;
    (0..=pieces as u32)
        .map(|k| littlewood_paley_piece(sigma, k))
        .collect()
}
