//! Experiment configuration, per-check defaults and hypothesis gating.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::torus::TorusGrid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    KernelDecay,
    DyadicGrowth,
    LocalEstimates,
    SharpMaximal,
    LpLq,
    Weighted,
    SobolevBesov,
}

impl Check {
    pub const ALL: [Check; 7] = [
        Check::KernelDecay,
        Check::DyadicGrowth,
        Check::LocalEstimates,
        Check::SharpMaximal,
        Check::LpLq,
        Check::Weighted,
        Check::SobolevBesov,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::KernelDecay => "kernel_decay",
            Check::DyadicGrowth => "dyadic_growth",
            Check::LocalEstimates => "local_estimates",
            Check::SharpMaximal => "sharp_maximal",
            Check::LpLq => "lp_lq",
            Check::Weighted => "weighted",
            Check::SobolevBesov => "sobolev_besov",
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.replace('-', "_");
        Check::ALL
            .into_iter()
            .find(|c| c.name() == key)
            .ok_or_else(|| invalid("check", format!("unknown check `{s}`")))
    }
}

/// Symbol used by a check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolFamily {
    /// Seeded oscillating symbol of class `(m, ρ, δ)`.
    Oscillating,
    /// The multiplier `⟨ξ⟩^m`.
    Bracket,
    Zero,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    Unit,
    /// `0.1 + sin²(πx₁)`.
    Sin2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Allowed excess of a fitted log₂ slope over its prediction.
    pub slope_slack: f64,
    /// Allowed relative growth per resolution doubling.
    pub trend_slack: f64,
    /// Same, for Monte Carlo norm sequences.
    pub mc_trend_slack: f64,
    /// Growth per doubling expected above an `L^p-L^q` threshold (reported only).
    pub probe_growth: f64,
    /// Absolute tolerance for algebraic identities.
    pub identity: f64,
    /// Accepted range of Besov/Sobolev norm ratios.
    pub lp_equivalence: (f64, f64),
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            slope_slack: 0.3,
            trend_slack: 0.10,
            mc_trend_slack: 0.15,
            probe_growth: 0.25,
            identity: 1e-9,
            lp_equivalence: (0.25, 4.0),
        }
    }
}

/// Parameters of one experiment. Unset fields take per-check defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub check: Check,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Grid size for single-resolution checks.
    #[serde(default, rename = "N", skip_serializing_if = "Option::is_none")]
    pub size: Option<usize>,
    /// Grid sizes for resolution-stability checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolutions: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    /// Interpolation parameter of the dyadic growth bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Weight exponent `N` of the kernel estimates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_exp: Option<f64>,
    /// Exponent case 1, 2 or 3 of the `L^p-L^q` thresholds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<SymbolFamily>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<WeightKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Inclusive range of dyadic indices `k`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_range: Option<(u32, u32)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cubes: Option<usize>,
    /// Fixed frequency band of the test functions; `N/4` per grid when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band: Option<f64>,
    /// Offset above the threshold used by the sharpness probe.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sharpness_offset: Option<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

/// Efficiency parameter `λ = max{0, (δ − ρ)/2}`.
pub fn efficiency(rho: f64, delta: f64) -> f64 {
    ((delta - rho) / 2.0).max(0.0)
}

/// Exponent case implied by `(p, q)`, preferring the lowest index on overlaps.
pub fn exponent_case(p: f64, q: f64) -> Option<u8> {
    if p <= 2.0 && 2.0 <= q {
        Some(1)
    } else if 2.0 <= p && p <= q {
        Some(2)
    } else if p <= q && q <= 2.0 {
        Some(3)
    } else {
        None
    }
}

fn case_holds(case: u8, p: f64, q: f64) -> bool {
    match case {
        1 => p <= 2.0 && 2.0 <= q,
        2 => 2.0 <= p && p <= q,
        3 => p <= q && q <= 2.0,
        _ => false,
    }
}

/// `n[1/p − 1/q + extra + λ]`, the order loss of the `L^p-L^q` bound in case `case`.
pub fn order_loss(n: usize, p: f64, q: f64, rho: f64, delta: f64, case: u8) -> f64 {
    let extra = match case {
        2 => (1.0 - rho) * (0.5 - 1.0 / p),
        3 => (1.0 - rho) * (1.0 / q - 0.5),
        _ => 0.0,
    };
    n as f64 * (1.0 / p - 1.0 / q + extra + efficiency(rho, delta))
}

fn need(value: Option<f64>, name: &str) -> Result<f64> {
    value.ok_or_else(|| Error::Hypothesis(format!("{name} is required")))
}

fn hypothesis(ok: bool, text: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Hypothesis(text()))
    }
}

const EPS: f64 = 1e-12;

impl ExperimentSpec {
    pub fn new(check: Check) -> Self {
        Self {
            check,
            n: None,
            size: None,
            resolutions: None,
            r: None,
            rho: None,
            delta: None,
            m: None,
            s: None,
            mu: None,
            p: None,
            q: None,
            lambda: None,
            n_exp: None,
            case: None,
            family: None,
            weight: None,
            trials: None,
            seed: None,
            k_range: None,
            cubes: None,
            band: None,
            sharpness_offset: None,
            tolerances: Tolerances::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Accessors for resolved specs.
    pub fn dim(&self) -> usize {
        self.n.unwrap_or(1)
    }

    pub fn seed_value(&self) -> u64 {
        self.seed.unwrap_or(1)
    }

    pub fn trials_value(&self) -> u64 {
        self.trials.unwrap_or(1)
    }

    pub fn value(&self, v: Option<f64>, name: &str) -> Result<f64> {
        need(v, name)
    }

    /// Fills per-check defaults and validates the hypotheses of the check.
    pub fn resolved(&self) -> Result<ExperimentSpec> {
        let mut s = self.clone();
        s.n.get_or_insert(1);
        s.seed.get_or_insert(1);
        let n = s.dim() as f64;
        match s.check {
            Check::KernelDecay => {
                s.size.get_or_insert(512);
                s.r.get_or_insert(2.0);
                let rho = *s.rho.get_or_insert(0.5);
                // the kernel estimates are stated for S^m_{ρ,ρ}
                s.delta = Some(rho);
                s.m.get_or_insert(-0.25);
                s.k_range.get_or_insert((3, 7));
                s.family.get_or_insert(SymbolFamily::Oscillating);
                let r = s.r.unwrap_or_default();
                s.n_exp.get_or_insert(n / r + 1.0 / (2.0 * rho));
            }
            Check::DyadicGrowth => {
                s.size.get_or_insert(512);
                let r = *s.r.get_or_insert(1.5);
                let rho = *s.rho.get_or_insert(0.75);
                // S^m_{ρ,1−ρ} ⊂ S^m_{ρ,ρ} keeps the oscillating family admissible
                s.delta.get_or_insert(rho.min(1.0 - rho));
                s.lambda.get_or_insert(0.6);
                s.m.get_or_insert(-n * (1.0 - rho) / r);
                s.k_range.get_or_insert((2, 6));
                s.trials.get_or_insert(24);
                s.family.get_or_insert(SymbolFamily::Oscillating);
            }
            Check::LocalEstimates => {
                let res = s.resolutions.get_or_insert_with(|| vec![256, 512]).clone();
                let r = *s.r.get_or_insert(2.0);
                let rho = *s.rho.get_or_insert(0.5);
                s.delta.get_or_insert(rho);
                s.m.get_or_insert(-n * (1.0 - rho) / r);
                s.k_range.get_or_insert((3, 6));
                s.trials.get_or_insert(4);
                s.cubes.get_or_insert(8);
                s.n_exp.get_or_insert(n / r + 1.0 / (2.0 * rho));
                s.family.get_or_insert(SymbolFamily::Oscillating);
                let smallest = res.iter().copied().min().unwrap_or(0);
                s.band.get_or_insert(smallest as f64 / 4.0);
            }
            Check::SharpMaximal => {
                s.resolutions.get_or_insert_with(|| vec![64, 128, 256]);
                let r = *s.r.get_or_insert(2.0);
                let rho = *s.rho.get_or_insert(0.5);
                s.delta.get_or_insert(rho);
                s.m.get_or_insert(-n * (1.0 - rho) / r);
                s.trials.get_or_insert(20);
                s.family.get_or_insert(SymbolFamily::Oscillating);
            }
            Check::LpLq => {
                s.resolutions.get_or_insert_with(|| vec![64, 128, 256]);
                let p = *s.p.get_or_insert(4.0 / 3.0);
                let q = *s.q.get_or_insert(4.0);
                let rho = *s.rho.get_or_insert(0.5);
                let delta = *s.delta.get_or_insert(0.5);
                let case = match s.case {
                    Some(c) => c,
                    None => *s.case.insert(exponent_case(p, q).unwrap_or(0)),
                };
                s.m.get_or_insert(-order_loss(s.dim(), p, q, rho, delta, case));
                s.trials.get_or_insert(32);
                s.family.get_or_insert(SymbolFamily::Bracket);
                s.sharpness_offset.get_or_insert(0.5);
            }
            Check::Weighted => {
                s.resolutions.get_or_insert_with(|| vec![64, 128, 256]);
                s.p.get_or_insert(4.0);
                let r = *s.r.get_or_insert(2.0);
                let rho = *s.rho.get_or_insert(0.5);
                s.delta.get_or_insert(rho);
                s.m.get_or_insert(-n * (1.0 - rho) / r);
                s.weight.get_or_insert(WeightKind::Sin2);
                s.trials.get_or_insert(20);
                s.family.get_or_insert(SymbolFamily::Oscillating);
            }
            Check::SobolevBesov => {
                s.resolutions.get_or_insert_with(|| vec![64, 128, 256]);
                let p = *s.p.get_or_insert(2.0);
                let q = *s.q.get_or_insert(2.0);
                s.s.get_or_insert(1.0);
                s.r.get_or_insert(2.0);
                let family = *s.family.get_or_insert(SymbolFamily::Bracket);
                let (rho0, delta0) = match family {
                    SymbolFamily::Oscillating => (0.5, 0.5),
                    _ => (1.0, 0.0),
                };
                let rho = *s.rho.get_or_insert(rho0);
                let delta = *s.delta.get_or_insert(delta0);
                let m = *s.m.get_or_insert(-1.0);
                let case = match s.case {
                    Some(c) => c,
                    None => *s.case.insert(exponent_case(p, q).unwrap_or(0)),
                };
                s.mu.get_or_insert(m + order_loss(s.dim(), p, q, rho, delta, case));
                s.trials.get_or_insert(16);
            }
        }
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        let n = self.dim();
        hypothesis((1..=3).contains(&n), || format!("dimension n = {n} not in 1..=3"))?;
        if let Some(size) = self.size {
            TorusGrid::new(n, size)?;
        }
        if let Some(res) = &self.resolutions {
            hypothesis(res.len() >= 2, || "at least two resolutions are needed".into())?;
            for &size in res {
                TorusGrid::new(n, size)?;
            }
            hypothesis(res.windows(2).all(|w| w[1] == 2 * w[0]), || {
                "resolutions must be successive doublings".into()
            })?;
        }
        if self.trials == Some(0) {
            return Err(invalid("trials", "must be positive"));
        }
        let finite = [
            self.r, self.rho, self.delta, self.m, self.s, self.mu, self.p, self.q, self.lambda, self.n_exp,
            self.band, self.sharpness_offset,
        ];
        if finite.iter().flatten().any(|v| !v.is_finite()) {
            return Err(invalid("spec", "parameters must be finite"));
        }
        let rho = need(self.rho, "rho")?;
        let delta = need(self.delta, "delta")?;
        hypothesis(rho > 0.0 && rho <= 1.0, || format!("0 < ρ ≤ 1 violated: ρ = {rho}"))?;
        hypothesis((0.0..1.0).contains(&delta), || format!("0 ≤ δ < 1 violated: δ = {delta}"))?;
        if self.family == Some(SymbolFamily::Oscillating) {
            hypothesis(rho + delta <= 1.0 + EPS, || {
                format!("the oscillating family needs ρ + δ ≤ 1, got ρ = {rho}, δ = {delta}")
            })?;
        }
        let nf = n as f64;
        let m = need(self.m, "m")?;
        match self.check {
            Check::KernelDecay => {
                let r = need(self.r, "r")?;
                hypothesis((1.0..=2.0).contains(&r), || format!("1 ≤ r ≤ 2 violated: r = {r}"))?;
                hypothesis(need(self.n_exp, "n_exp")? >= 0.0, || "N_exp ≥ 0 violated".into())?;
                self.check_k_range(3)?;
            }
            Check::DyadicGrowth => {
                let r = need(self.r, "r")?;
                let lambda = need(self.lambda, "lambda")?;
                hypothesis(r > 1.0 && r < 2.0, || format!("1 < r < 2 violated: r = {r}"))?;
                hypothesis(r / 2.0 <= rho && rho < 1.0, || format!("r/2 ≤ ρ < 1 violated: r = {r}, ρ = {rho}"))?;
                let lo = (2.0 * rho - r) / (2.0 - r);
                hypothesis(lo < lambda && lambda < rho, || {
                    format!("(2ρ − r)/(2 − r) < λ < ρ violated: λ = {lambda} not in ({lo}, {rho})")
                })?;
                hypothesis(delta <= rho, || format!("δ ≤ ρ violated: δ = {delta}, ρ = {rho}"))?;
                let top = -nf * (1.0 - rho) / r;
                hypothesis(m <= top + EPS, || format!("m ≤ −n(1 − ρ)/r = {top} violated: m = {m}"))?;
                self.check_k_range(3)?;
            }
            Check::LocalEstimates => {
                let r = need(self.r, "r")?;
                hypothesis(r > 1.0 && r <= 2.0, || format!("1 < r ≤ 2 violated: r = {r}"))?;
                hypothesis(rho < 1.0, || format!("0 < ρ < 1 violated: ρ = {rho}"))?;
                hypothesis(delta <= rho, || format!("δ ≤ ρ violated: δ = {delta}, ρ = {rho}"))?;
                let top = -nf * (1.0 - rho) / r;
                hypothesis(m <= top + EPS, || format!("m ≤ −n(1 − ρ)/r = {top} violated: m = {m}"))?;
                let n_exp = need(self.n_exp, "n_exp")?;
                hypothesis(n_exp > nf / r, || format!("N > n/r violated: N = {n_exp}"))?;
                if rho >= r / 2.0 {
                    let lambda = need(self.lambda, "lambda (required when ρ ≥ r/2)")?;
                    let lo = (2.0 * rho - r) / (2.0 - r);
                    hypothesis(lo < lambda && lambda < rho, || {
                        format!("(2ρ − r)/(2 − r) < λ < ρ violated: λ = {lambda}")
                    })?;
                }
                let cubes = self.cubes.unwrap_or(0);
                hypothesis(cubes > 0, || "at least one cube is needed".into())?;
                self.check_k_range(1)?;
            }
            Check::SharpMaximal | Check::Weighted => {
                let r = need(self.r, "r")?;
                hypothesis(r > 1.0 && r <= 2.0, || format!("1 < r ≤ 2 violated: r = {r}"))?;
                hypothesis(rho < 1.0, || format!("0 < ρ < 1 violated: ρ = {rho}"))?;
                hypothesis(delta <= rho, || format!("0 ≤ δ ≤ ρ violated: δ = {delta}, ρ = {rho}"))?;
                let top = -nf * (1.0 - rho) / r;
                hypothesis(m <= top + EPS, || format!("m ≤ −n(1 − ρ)/r = {top} violated: m = {m}"))?;
                if self.check == Check::Weighted {
                    let p = need(self.p, "p")?;
                    hypothesis(r <= p && p.is_finite(), || format!("r ≤ p < ∞ violated: r = {r}, p = {p}"))?;
                    hypothesis(self.weight.is_some(), || "a weight is required".into())?;
                }
            }
            Check::LpLq | Check::SobolevBesov => {
                let p = need(self.p, "p")?;
                let q = need(self.q, "q")?;
                hypothesis(1.0 < p && p <= q, || format!("1 < p ≤ q < ∞ violated: p = {p}, q = {q}"))?;
                let case = self.case.unwrap_or(0);
                hypothesis(case_holds(case, p, q), || {
                    format!("exponent case {case} does not hold for p = {p}, q = {q}")
                })?;
                let loss = order_loss(n, p, q, rho, delta, case);
                if self.check == Check::LpLq {
                    hypothesis(m <= -loss + EPS, || {
                        format!("case {case} threshold m ≤ {} violated: m = {m}", -loss)
                    })?;
                } else {
                    let mu = need(self.mu, "mu")?;
                    hypothesis(mu >= m + loss - EPS, || {
                        format!("case {case} condition μ ≥ {} violated: μ = {mu}", m + loss)
                    })?;
                    let r = need(self.r, "r")?;
                    hypothesis(r >= 1.0, || format!("Besov index 1 ≤ r ≤ ∞ violated: r = {r}"))?;
                    need(self.s, "s")?;
                }
            }
        }
        Ok(())
    }

    fn check_k_range(&self, min_points: u32) -> Result<()> {
        let (lo, hi) = self
            .k_range
            .ok_or_else(|| Error::Hypothesis("k_range is required".into()))?;
        if hi < lo || hi - lo + 1 < min_points {
            return Err(Error::InsufficientData(format!(
                "k_range {lo}..={hi} has fewer than {min_points} points"
            )));
        }
        let smallest = match (&self.resolutions, self.size) {
            (Some(res), _) => res.iter().copied().min().unwrap_or(0),
            (None, Some(size)) => size,
            _ => 0,
        };
        if (1usize << (hi + 1).min(62)) > smallest / 2 {
            return Err(invalid(
                "k_range",
                format!("shell k = {hi} does not fit a grid of size {smallest}"),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve() {
        for check in Check::ALL {
            let s = ExperimentSpec::new(check).resolved().unwrap();
            assert_eq!(s.check, check);
            assert!(s.m.is_some());
        }
    }

    #[test]
    fn threshold_arithmetic() {
        // p = 4/3, q = 4, λ = 0: −n(3/4 − 1/4) = −1/2
        assert!((order_loss(1, 4.0 / 3.0, 4.0, 0.5, 0.5, 1) - 0.5).abs() < 1e-15);
        assert!((efficiency(0.3, 0.7) - 0.2).abs() < 1e-15);
        assert_eq!(exponent_case(2.0, 2.0), Some(1));
        assert_eq!(exponent_case(3.0, 4.0), Some(2));
        assert_eq!(exponent_case(1.2, 1.5), Some(3));
        assert_eq!(exponent_case(3.0, 2.0), None);
    }

    #[test]
    fn hypotheses_are_gated() {
        let mut s = ExperimentSpec::new(Check::SharpMaximal);
        s.r = Some(2.5);
        assert!(matches!(s.resolved(), Err(Error::Hypothesis(_))));
        let mut s = ExperimentSpec::new(Check::DyadicGrowth);
        s.lambda = Some(0.75);
        let err = s.resolved().unwrap_err().to_string();
        assert!(err.contains("λ"), "{err}");
        let mut s = ExperimentSpec::new(Check::LpLq);
        s.m = Some(0.0);
        assert!(s.resolved().is_err());
        let mut s = ExperimentSpec::new(Check::LpLq);
        s.case = Some(2);
        assert!(s.resolved().is_err());
        let mut s = ExperimentSpec::new(Check::KernelDecay);
        s.k_range = Some((3, 4));
        assert!(matches!(s.resolved(), Err(Error::InsufficientData(_))));
        let mut s = ExperimentSpec::new(Check::Weighted);
        s.p = Some(1.5);
        assert!(s.resolved().is_err());
    }

    #[test]
    fn json_round_trip_and_unknown_fields() {
        let s = ExperimentSpec::from_json(r#"{"check": "kernel_decay", "N": 256, "k_range": [3, 6]}"#).unwrap();
        assert_eq!(s.size, Some(256));
        assert_eq!(s.k_range, Some((3, 6)));
        let text = serde_json::to_string(&s.resolved().unwrap()).unwrap();
        let back = ExperimentSpec::from_json(&text).unwrap();
        assert_eq!(back, s.resolved().unwrap());
        assert!(ExperimentSpec::from_json(r#"{"check": "kernel_decay", "bogus": 1}"#).is_err());
        assert_eq!("lp-lq".parse::<Check>().unwrap(), Check::LpLq);
    }
}
