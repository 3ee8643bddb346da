//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use torus_pdo::maximal::Weight;
use torus_pdo::torus::{PeriodicFunction, TorusGrid};

/// Complex samples with independent uniform parts in [−1, 1].
pub fn random_function(grid: TorusGrid, seed: u64) -> PeriodicFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..grid.len())
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    PeriodicFunction::new(grid, samples).unwrap()
}

pub fn random_real_function(grid: TorusGrid, seed: u64) -> PeriodicFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<f64> = (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    PeriodicFunction::from_real(grid, &values).unwrap()
}

/// `N^{−n} Σ_x f(x) e^{−2πi x·ξ}` in window order.
pub fn naive_dft(f: &PeriodicFunction) -> Vec<Complex64> {
    let grid = f.grid();
    let window = grid.window();
    let scale = 1.0 / grid.len() as f64;
    window
        .frequencies()
        .map(|xi| {
            grid.points()
                .zip(f.samples())
                .map(|(p, v)| {
                    let phase: f64 = (0..grid.dim()).map(|a| p[a] * xi[a] as f64).sum();
                    v * Complex64::from_polar(1.0, -TAU * phase)
                })
                .sum::<Complex64>()
                * scale
        })
        .collect()
}

/// Flat indices of the periodic cube of `cells` cells per axis starting at `start`.
pub fn cube_members(grid: TorusGrid, start: usize, cells: usize) -> Vec<usize> {
    let dim = grid.dim();
    let size = grid.size();
    let s = grid.unflatten(start);
    let count = cells.pow(dim as u32);
    (0..count)
        .map(|mut c| {
            let mut idx = [0usize; 3];
            for a in (0..dim).rev() {
                idx[a] = (s[a] + c % cells) % size;
                c /= cells;
            }
            grid.flatten(&idx[..dim])
        })
        .collect()
}

/// Every dyadic periodic cube, as member lists.
pub fn all_cubes(grid: TorusGrid) -> Vec<Vec<usize>> {
    (0..=grid.levels())
        .flat_map(|j| {
            let cells = grid.size() >> j;
            (0..grid.len()).map(move |s| cube_members(grid, s, cells))
        })
        .collect()
}

/// `M_r f` by enumerating every cube and every member.
pub fn brute_hardy_littlewood(f: &PeriodicFunction, r: f64) -> Vec<f64> {
    let grid = f.grid();
    let mut best = vec![0.0f64; grid.len()];
    for cube in all_cubes(grid) {
        let avg = cube.iter().map(|&i| f.samples()[i].norm().powf(r)).sum::<f64>() / cube.len() as f64;
        let v = avg.powf(1.0 / r);
        for &i in &cube {
            best[i] = best[i].max(v);
        }
    }
    best
}

/// `M^#_r f` for real `f`, minimizing over 201 equispaced constants on `[min_Q f, max_Q f]`.
pub fn grid_search_sharp(f: &PeriodicFunction, r: f64) -> Vec<f64> {
    let grid = f.grid();
    let mut best = vec![0.0f64; grid.len()];
    for cube in all_cubes(grid) {
        let vals: Vec<f64> = cube.iter().map(|&i| f.samples()[i].re).collect();
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let inf = (0..=200)
            .map(|t| {
                let c = lo + (hi - lo) * t as f64 / 200.0;
                (vals.iter().map(|v| (v - c).abs().powf(r)).sum::<f64>() / vals.len() as f64).powf(1.0 / r)
            })
            .fold(f64::INFINITY, f64::min);
        for &i in &cube {
            best[i] = best[i].max(inf);
        }
    }
    best
}

/// `sup_Q (avg_Q w)(avg_Q w^{−1/(p−1)})^{p−1}` by enumeration.
pub fn brute_muckenhoupt(w: &Weight, p: f64) -> f64 {
    let grid = w.grid();
    all_cubes(grid)
        .iter()
        .map(|cube| {
            let len = cube.len() as f64;
            let a = cube.iter().map(|&i| w.values()[i]).sum::<f64>() / len;
            let b = cube.iter().map(|&i| w.values()[i].powf(-1.0 / (p - 1.0))).sum::<f64>() / len;
            a * b.powf(p - 1.0)
        })
        .fold(0.0, f64::max)
}

/// Three positive test weights: a smooth one, a power-type one and a rough one.
pub fn test_weights(grid: TorusGrid, seed: u64) -> Vec<Weight> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rough: Vec<f64> = (0..grid.len()).map(|_| rng.random_range(0.05..3.0)).collect();
    vec![
        Weight::sin2(grid),
        Weight::from_fn(grid, |p| 0.01 + (p[0] - 0.5).abs().sqrt()).unwrap(),
        Weight::new(grid, rough).unwrap(),
    ]
}

pub fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}
