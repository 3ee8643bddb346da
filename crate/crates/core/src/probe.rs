//! Seeded random trigonometric polynomials used as test functions.
//!
//! Every draw comes from a ChaCha stream keyed by `(seed, trial)`, so a trial
//! can be regenerated on its own and the result does not depend on the order
//! in which trials are evaluated.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::symbol::phi_hat;
use crate::torus::{inverse_dft, lattice_norm, Freq, PeriodicFunction, SpectralCoefficients, TorusGrid};

/// Shape of a probe.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeKind {
    /// Independent complex Gaussian coefficients on the whole band.
    Gaussian,
    /// Smooth bump centred at frequency 0: a spatial approximate identity.
    Bump,
    /// Bump translated to a random frequency centre (a wave packet).
    Packet,
}

/// Counter-based stream for `(seed, trial)`.
pub fn stream(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Zig-zag interleaving of a lattice point into a stream position, so the
/// coefficient drawn for `ξ` does not depend on the grid it is sampled on.
fn lattice_code(xi: &Freq) -> u128 {
    xi.iter().enumerate().fold(0u128, |acc, (a, &v)| {
        let z = if v >= 0 { 2 * v as u128 } else { 2 * (-v) as u128 - 1 };
        acc | (z << (21 * a))
    })
}

/// Unit-variance complex Gaussian by Box-Muller from two 64-bit words.
fn gaussian_at(rng: &mut ChaCha8Rng, xi: &Freq) -> Complex64 {
    rng.set_word_pos(4 * lattice_code(xi));
    let u1 = 1.0 - (rng.next_u64() >> 11) as f64 * f64::EPSILON / 2.0;
    let u2 = (rng.next_u64() >> 11) as f64 * f64::EPSILON / 2.0;
    Complex64::from_polar((-u1.ln()).sqrt(), TAU * u2)
}

/// Trigonometric polynomial with Gaussian coefficients on `|ξ| ≤ band`.
///
/// The coefficient of each `ξ` depends only on `(seed, trial, ξ)`: the same
/// band gives the same polynomial at every resolution that resolves it.
pub fn gaussian_trig_poly(grid: TorusGrid, band: f64, seed: u64, trial: u64) -> Result<PeriodicFunction> {
    let mut rng = stream(seed, trial);
    let window = grid.window();
    let coeffs = window
        .frequencies()
        .map(|xi| {
            if lattice_norm(&xi) <= band {
                gaussian_at(&mut rng, &xi)
            } else {
                Complex64::default()
            }
        })
        .collect();
    inverse_dft(&SpectralCoefficients::new(window, coeffs)?)
}

/// Which probe shape and width a trial index maps to.
pub fn probe_layout(band: f64, trial: u64) -> (ProbeKind, f64) {
    let kind = match trial % 3 {
        0 => ProbeKind::Gaussian,
        1 => ProbeKind::Bump,
        _ => ProbeKind::Packet,
    };
    // bump radius W with 2W ≤ band, cycling through dyadic widths
    let levels = ((band / 2.0).max(1.0)).log2().floor() as u64 + 1;
    let width = (1u64 << ((trial / 3) % levels)) as f64;
    (kind, width)
}

/// The `trial`-th probe on `grid`, band-limited to `|ξ| ≤ band`.
pub fn probe_function(grid: TorusGrid, band: f64, seed: u64, trial: u64) -> Result<PeriodicFunction> {
    let (kind, width) = probe_layout(band, trial);
    if kind == ProbeKind::Gaussian {
        return gaussian_trig_poly(grid, band, seed, trial);
    }
    let mut rng = stream(seed, trial);
    let dim = grid.dim();
    let mut x0 = [0.0; 3];
    for v in x0.iter_mut().take(dim) {
        *v = rng.random::<f64>();
    }
    let mut centre: Freq = [0; 3];
    if kind == ProbeKind::Packet {
        // log-uniform distance from the origin, so every dyadic shell is sampled alike
        let reach = ((band - 2.0 * width) / (dim as f64).sqrt()).floor().max(0.0);
        for v in centre.iter_mut().take(dim) {
            let size = ((reach + 1.0).powf(rng.random::<f64>()) - 1.0).round() as i64;
            *v = if rng.random::<bool>() { size } else { -size };
        }
    }
    let phase = Complex64::from_polar(1.0, TAU * rng.random::<f64>());
    let window = grid.window();
    let coeffs = window
        .frequencies()
        .map(|xi| {
            let mut d = [0i64; 3];
            for a in 0..3 {
                d[a] = xi[a] - centre[a];
            }
            let amp = phi_hat(lattice_norm(&d) / width);
            if amp == 0.0 || lattice_norm(&xi) > band {
                return Complex64::default();
            }
            let shift: f64 = (0..dim).map(|a| x0[a] * xi[a] as f64).sum();
            phase * Complex64::from_polar(amp, -TAU * shift)
        })
        .collect();
    inverse_dft(&SpectralCoefficients::new(window, coeffs)?)
}
