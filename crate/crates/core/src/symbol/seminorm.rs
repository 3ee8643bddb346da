//! Shell-wise symbol seminorms and an empirical `(m, ρ, δ)` estimator.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{unit, MultiIndex, Symbol};
use crate::error::{invalid, Error, Result};
use crate::stats::linear_fit;
use crate::torus::{TorusGrid, MAX_DIM};

/// Dyadic shell `s` with `2^s ≤ ⟨ξ⟩ < 2^{s+1}`, computed in integers.
pub fn shell_of(xi: &[i64]) -> u32 {
    let q: u64 = 1 + xi.iter().map(|&v| (v * v) as u64).sum::<u64>();
    (63 - q.leading_zeros()) / 2
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SeminormKey {
    pub alpha: MultiIndex,
    pub beta: MultiIndex,
    pub shell: u32,
}

/// `sup_{x, ⟨ξ⟩ ∈ [2^s, 2^{s+1})} |∂^β_x Δ^α_ξ σ(x, ξ)|` per `(α, β, s)`.
///
/// Shells that contain no valid frequency have no entry.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeminormTable {
    pub grid: TorusGrid,
    #[serde(with = "entry_list")]
    pub entries: BTreeMap<SeminormKey, f64>,
}

mod entry_list {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Entry {
        alpha: MultiIndex,
        beta: MultiIndex,
        shell: u32,
        value: f64,
    }

    pub fn serialize<S: Serializer>(map: &BTreeMap<SeminormKey, f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
        let list: Vec<Entry> = map
            .iter()
            .map(|(k, &value)| Entry {
                alpha: k.alpha,
                beta: k.beta,
                shell: k.shell,
                value,
            })
            .collect();
        list.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BTreeMap<SeminormKey, f64>, D::Error> {
        let list = Vec::<Entry>::deserialize(d)?;
        Ok(list
            .into_iter()
            .map(|e| {
                (
                    SeminormKey {
                        alpha: e.alpha,
                        beta: e.beta,
                        shell: e.shell,
                    },
                    e.value,
                )
            })
            .collect())
    }
}

impl SeminormTable {
    pub fn get(&self, alpha: MultiIndex, beta: MultiIndex, shell: u32) -> Option<f64> {
        self.entries
            .get(&SeminormKey { alpha, beta, shell })
            .copied()
    }

    /// `(shell, value)` pairs of one `(α, β)` family in shell order.
    pub fn family(&self, alpha: MultiIndex, beta: MultiIndex) -> Vec<(u32, f64)> {
        self.entries
            .iter()
            .filter(|(k, _)| k.alpha == alpha && k.beta == beta)
            .map(|(k, &v)| (k.shell, v))
            .collect()
    }
}

/// All multi-indices in dimension `dim` with total order at most `max`.
fn multi_indices(dim: usize, max: usize) -> Vec<MultiIndex> {
    let mut out = vec![[0; MAX_DIM]];
    for a in 0..dim {
        let mut next = Vec::new();
        for m in &out {
            let used: usize = m.iter().sum();
            for k in 0..=(max - used) {
                let mut e = *m;
                e[a] = k;
                next.push(e);
            }
        }
        out = next;
    }
    out.sort_by_key(|m| (m.iter().sum::<usize>(), *m));
    out
}

pub fn seminorms(sigma: &Symbol, alpha_max: usize, beta_max: usize) -> Result<SeminormTable> {
    if alpha_max > 3 || beta_max > 3 {
        return Err(invalid("alpha_max/beta_max", "orders above 3 are not tabulated"));
    }
    let grid = sigma.grid();
    let window = grid.window();
    let shells: Vec<u32> = window.frequencies().map(|xi| shell_of(&xi)).collect();
    let alphas = multi_indices(grid.dim(), alpha_max);
    let betas = multi_indices(grid.dim(), beta_max);

    let mut entries = BTreeMap::new();
    for alpha in &alphas {
        let diffed = sigma.difference_op(alpha)?;
        let per_beta: Vec<Result<Vec<(SeminormKey, f64)>>> = betas
            .par_iter()
            .map(|beta| {
                let d = diffed.x_derivative(beta)?;
                let mask = d.valid_mask();
                let mut sup: BTreeMap<u32, f64> = BTreeMap::new();
                for row in d.values().chunks(grid.len()) {
                    for (j, v) in row.iter().enumerate() {
                        if mask[j] {
                            let e = sup.entry(shells[j]).or_insert(0.0);
                            *e = e.max(v.norm());
                        }
                    }
                }
                Ok(sup
                    .into_iter()
                    .map(|(shell, v)| {
                        (
                            SeminormKey {
                                alpha: *alpha,
                                beta: *beta,
                                shell,
                            },
                            v,
                        )
                    })
                    .collect())
            })
            .collect();
        for part in per_beta {
            entries.extend(part?);
        }
    }
    Ok(SeminormTable { grid, entries })
}

/// Result of inverting the class inequality on a seminorm table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassFit {
    pub m_hat: f64,
    pub rho_hat: f64,
    pub delta_hat: f64,
    /// Largest absolute log₂ deviation from any of the fitted lines.
    pub residual: f64,
    pub shells_used: usize,
    /// Every retained `(0, 0)` entry vanished; `m_hat` is −∞.
    pub degenerate: bool,
    /// The `Δ_{ξ₁}` family vanished identically; `rho_hat` set to 1.
    pub rho_unconstrained: bool,
    /// The `∂_{x₁}` family vanished identically; `delta_hat` set to 0.
    pub delta_unconstrained: bool,
}

/// Retained shells: `2 ≤ 2^s ≤ N/4`.
fn retained_shells(grid: TorusGrid) -> std::ops::RangeInclusive<u32> {
    1..=grid.levels().saturating_sub(2)
}

/// log₂-slope of a family over the retained shells; `None` when every entry
/// is below `floor`.
fn family_slope(
    table: &SeminormTable,
    alpha: MultiIndex,
    beta: MultiIndex,
    floor: f64,
) -> Option<(f64, f64)> {
    let shells = retained_shells(table.grid);
    let (xs, ys): (Vec<f64>, Vec<f64>) = table
        .family(alpha, beta)
        .into_iter()
        .filter(|(s, v)| shells.contains(s) && *v > floor)
        .map(|(s, v)| (s as f64, v.log2()))
        .unzip();
    linear_fit(&xs, &ys).map(|f| (f.slope, f.max_residual))
}

pub fn fit_symbol_class(table: &SeminormTable) -> Result<ClassFit> {
    let zero = [0; MAX_DIM];
    let e1 = unit(0);
    let shells = retained_shells(table.grid);
    let base: Vec<f64> = table
        .family(zero, zero)
        .into_iter()
        .filter(|(s, _)| shells.contains(s))
        .map(|(_, v)| v)
        .collect();
    if base.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "{} retained shells, need at least 4",
            base.len()
        )));
    }
    let scale = base.iter().copied().fold(0.0, f64::max);
    let floor = 1e-13 * scale;
    if scale == 0.0 {
        return Ok(ClassFit {
            m_hat: f64::NEG_INFINITY,
            rho_hat: f64::NAN,
            delta_hat: f64::NAN,
            residual: 0.0,
            shells_used: base.len(),
            degenerate: true,
            rho_unconstrained: true,
            delta_unconstrained: true,
        });
    }
    let (m_hat, res_m) = family_slope(table, zero, zero, floor)
        .ok_or_else(|| Error::InsufficientData("(0,0) family has < 2 nonzero shells".into()))?;
    let diff = family_slope(table, e1, zero, floor);
    let deriv = family_slope(table, zero, e1, floor);
    let (rho_hat, res_r) = diff.map_or((1.0, 0.0), |(s, r)| (m_hat - s, r));
    let (delta_hat, res_d) = deriv.map_or((0.0, 0.0), |(s, r)| (s - m_hat, r));
    Ok(ClassFit {
        m_hat,
        rho_hat,
        delta_hat,
        residual: res_m.max(res_r).max(res_d),
        shells_used: base.len(),
        degenerate: false,
        rho_unconstrained: diff.is_none(),
        delta_unconstrained: deriv.is_none(),
    })
}
