//! Built-in symbol families.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{Generator, Symbol, SymbolClass};
use crate::error::{invalid, Result};
use crate::torus::{bracket, Freq, Point, TorusGrid};

/// Bessel potential symbol `⟨ξ⟩^s`, claimed class `(s, 1, 0)`.
pub fn bessel_symbol(grid: TorusGrid, s: f64) -> Result<Symbol> {
    let len = grid.len();
    let generator = Generator::new(json!({"family": "bessel", "s": s}), move |xi| {
        vec![Complex64::new(bracket(xi).powf(s), 0.0); len]
    });
    Ok(Symbol::from_generator(grid, generator)?.with_claimed_class(SymbolClass {
        m: s,
        rho: 1.0,
        delta: 0.0,
    }))
}

/// x-profile multiplying the oscillating template.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AmplitudeProfile {
    /// Constant amplitude 1.
    Bracket,
    /// `(1 + depth·cos 2πx₁)/(1 + depth)`, depth in `[0, 1)`.
    XModulated { depth: f64 },
}

impl AmplitudeProfile {
    #[inline]
    fn at(&self, x: &Point) -> f64 {
        match *self {
            AmplitudeProfile::Bracket => 1.0,
            AmplitudeProfile::XModulated { depth } => {
                (1.0 + depth * (TAU * x[0]).cos()) / (1.0 + depth)
            }
        }
    }
}

/// `σ(x, ξ) = A(x) ⟨ξ⟩^m exp(i c₁⟨ξ⟩^{1−ρ}) exp(i c₂ sin(2πx₁) ⟨ξ⟩^δ)`.
///
/// Every ξ-difference costs `⟨ξ⟩^{−ρ}` (from the first phase, and from the
/// second one as long as `ρ + δ ≤ 1`) and every x-derivative gains
/// `⟨ξ⟩^δ`, so the family sits in `S^m_{ρ,δ}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OscillatingFamily {
    pub m: f64,
    pub rho: f64,
    pub delta: f64,
    pub c1: f64,
    pub c2: f64,
    pub profile: AmplitudeProfile,
}

impl OscillatingFamily {
    /// Draws `c₁, c₂ ∈ [1/2, 2]` from `seed`.
    pub fn seeded(m: f64, rho: f64, delta: f64, profile: AmplitudeProfile, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c1 = rng.random_range(0.5..=2.0);
        let c2 = rng.random_range(0.5..=2.0);
        let fam = Self {
            m,
            rho,
            delta,
            c1,
            c2,
            profile,
        };
        fam.validate()?;
        Ok(fam)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return Err(invalid("rho", format!("{} not in (0, 1]", self.rho)));
        }
        if !(0.0..1.0).contains(&self.delta) {
            return Err(invalid("delta", format!("{} not in [0, 1)", self.delta)));
        }
        if self.rho + self.delta > 1.0 + 1e-12 {
            return Err(invalid(
                "delta",
                format!("ρ + δ = {} exceeds 1 for this template", self.rho + self.delta),
            ));
        }
        if !self.m.is_finite() || !self.c1.is_finite() || !self.c2.is_finite() {
            return Err(invalid("m", "non-finite family parameter"));
        }
        if let AmplitudeProfile::XModulated { depth } = self.profile {
            if !(0.0..1.0).contains(&depth) {
                return Err(invalid("profile", format!("depth {depth} not in [0, 1)")));
            }
        }
        Ok(())
    }

    pub fn class(&self) -> SymbolClass {
        SymbolClass {
            m: self.m,
            rho: self.rho,
            delta: self.delta,
        }
    }

    #[inline]
    pub fn eval(&self, x: &Point, xi: &Freq) -> Complex64 {
        let b = bracket(xi);
        let phase = self.c1 * b.powf(1.0 - self.rho)
            + self.c2 * (TAU * x[0]).sin() * b.powf(self.delta);
        Complex64::from_polar(self.profile.at(x) * b.powf(self.m), phase)
    }

    pub fn symbol(&self, grid: TorusGrid) -> Result<Symbol> {
        self.validate()?;
        let fam = *self;
        let mut params = serde_json::to_value(fam)?;
        params["family"] = json!("oscillating");
        let generator = Generator::pointwise(grid, params, move |x, xi| fam.eval(x, xi));
        Ok(Symbol::from_generator(grid, generator)?.with_claimed_class(self.class()))
    }
}

/// Convenience wrapper: seeded oscillating symbol on `grid`.
pub fn make_oscillating_symbol(
    grid: TorusGrid,
    m: f64,
    rho: f64,
    delta: f64,
    profile: AmplitudeProfile,
    seed: u64,
) -> Result<Symbol> {
    OscillatingFamily::seeded(m, rho, delta, profile, seed)?.symbol(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bessel_values() {
        let g = TorusGrid::new(2, 16).unwrap();
        let s0 = bessel_symbol(g, 0.0).unwrap();
        assert!(s0.values().iter().all(|v| *v == Complex64::new(1.0, 0.0)));
        let s1 = bessel_symbol(g, 1.0).unwrap();
        let j = g.window().index_of(&[3, 4, 0]).unwrap();
        assert!((s1.value(5, j).re - 26f64.sqrt()).abs() < 1e-12);
        let g1 = TorusGrid::new(1, 16).unwrap();
        let sm2 = bessel_symbol(g1, -2.0).unwrap();
        assert!((sm2.value(0, 1).re - 0.5).abs() < 1e-15);
        assert_eq!(s1.claimed_class().unwrap().m, 1.0);
    }

    #[test]
    fn seeded_constants_in_range_and_reproducible() {
        for seed in 0..20 {
            let a = OscillatingFamily::seeded(0.0, 0.5, 0.5, AmplitudeProfile::Bracket, seed).unwrap();
            let b = OscillatingFamily::seeded(0.0, 0.5, 0.5, AmplitudeProfile::Bracket, seed).unwrap();
            assert_eq!(a, b);
            assert!((0.5..=2.0).contains(&a.c1) && (0.5..=2.0).contains(&a.c2));
        }
    }

    #[test]
    fn parameter_ranges_enforced() {
        let p = AmplitudeProfile::Bracket;
        assert!(OscillatingFamily::seeded(0.0, 0.0, 0.0, p, 1).is_err());
        assert!(OscillatingFamily::seeded(0.0, 1.2, 0.0, p, 1).is_err());
        assert!(OscillatingFamily::seeded(0.0, 0.5, 1.0, p, 1).is_err());
        assert!(OscillatingFamily::seeded(0.0, 0.75, 0.5, p, 1).is_err());
        assert!(OscillatingFamily::seeded(0.0, 0.5, 0.5, AmplitudeProfile::XModulated { depth: 1.5 }, 1).is_err());
    }

    #[test]
    fn order_minus_one_has_unit_normalized_modulus() {
        let g = TorusGrid::new(1, 64).unwrap();
        for rho in [0.25, 0.5, 1.0] {
            let s = make_oscillating_symbol(g, -1.0, rho, 0.0, AmplitudeProfile::Bracket, 7).unwrap();
            let w = g.window();
            let mut lo = f64::INFINITY;
            let mut hi: f64 = 0.0;
            for x in 0..g.len() {
                for j in 0..g.len() {
                    let v = s.value(x, j).norm() * bracket(&w.frequency(j));
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
            assert!((hi - 1.0).abs() < 1e-10 && (lo - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn params_are_recorded() {
        let g = TorusGrid::new(1, 16).unwrap();
        let s = make_oscillating_symbol(g, -0.25, 0.5, 0.5, AmplitudeProfile::Bracket, 3).unwrap();
        let p = s.params().unwrap();
        assert_eq!(p["family"], "oscillating");
        assert_eq!(p["m"], -0.25);
    }
}
