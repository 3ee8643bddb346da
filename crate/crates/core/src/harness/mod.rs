//! Configurable experiments that test the boundedness statements numerically.
//!
//! An [`ExperimentSpec`] names a check and its parameters; [`run`] resolves
//! defaults, validates the hypotheses of the statement being tested, runs the
//! experiment and returns an [`ExperimentReport`]. The verdict is recomputed
//! from the measured values alone by [`judge`], so tightening a tolerance can
//! only turn a pass into a fail.

mod checks;
mod spec;

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub use spec::{Check, ExperimentSpec, SymbolFamily, Tolerances, WeightKind};

/// Outcome of a check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub check: Check,
    /// The experiment parameters with every default filled in.
    pub spec: ExperimentSpec,
    /// Named finite measurements.
    pub measured: BTreeMap<String, f64>,
    /// Predicted exponents, thresholds and bounds.
    pub predicted: BTreeMap<String, f64>,
    pub verdict: Verdict,
    pub runtime_ms: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Measurements and predictions before judging.
#[derive(Clone, Debug, Default)]
pub(crate) struct Outcome {
    pub measured: BTreeMap<String, f64>,
    pub predicted: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl Outcome {
    pub fn measure(&mut self, key: impl Into<String>, value: f64) {
        if value.is_finite() {
            self.measured.insert(key.into(), value);
        }
    }

    pub fn predict(&mut self, key: impl Into<String>, value: f64) {
        if value.is_finite() {
            self.predicted.insert(key.into(), value);
        }
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }
}

/// Resolves, validates and runs one experiment.
pub fn run(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let start = Instant::now();
    let resolved = spec.resolved()?;
    let outcome = checks::dispatch(&resolved)?;
    let verdict = judge(&resolved, &outcome.measured, &outcome.predicted);
    Ok(ExperimentReport {
        check: resolved.check,
        spec: resolved,
        measured: outcome.measured,
        predicted: outcome.predicted,
        verdict,
        runtime_ms: start.elapsed().as_millis() as u64,
        notes: outcome.notes,
    })
}

fn get(map: &BTreeMap<String, f64>, key: &str) -> Option<f64> {
    map.get(key).copied()
}

/// Pass/fail from the tolerances of `spec` and the measured values.
///
/// Every criterion is a non-strict comparison against a tolerance, so the
/// verdict is monotone in each tolerance. A missing measurement fails.
pub fn judge(
    spec: &ExperimentSpec,
    measured: &BTreeMap<String, f64>,
    predicted: &BTreeMap<String, f64>,
) -> Verdict {
    let tol = &spec.tolerances;
    let m = |k: &str| get(measured, k);
    let p = |k: &str| get(predicted, k);
    let le = |a: Option<f64>, b: Option<f64>| matches!((a, b), (Some(a), Some(b)) if a <= b);
    let ok = match spec.check {
        Check::KernelDecay => {
            if m("degenerate") == Some(1.0) {
                true
            } else {
                let slopes = ["plain", "grad_y", "grad_u"].iter().all(|name| {
                    le(
                        m(&format!("slope_{name}")),
                        p(&format!("slope_{name}")).map(|v| v + tol.slope_slack),
                    )
                });
                let gap = m("slope_gap_u").map(|g| (g - 1.0).abs());
                slopes && le(gap, Some(tol.slope_slack))
            }
        }
        Check::DyadicGrowth => {
            m("degenerate") == Some(1.0) || le(m("slope"), p("slope_bound").map(|v| v + tol.slope_slack))
        }
        Check::LocalEstimates => ["f0", "f1", "f1_diff"]
            .iter()
            .all(|name| le(m(&format!("growth_{name}")), Some(tol.trend_slack))),
        Check::SharpMaximal | Check::Weighted => le(m("growth"), Some(tol.trend_slack)),
        Check::LpLq => le(m("growth"), Some(tol.mc_trend_slack)),
        Check::SobolevBesov => {
            let (lo, hi) = tol.lp_equivalence;
            le(m("conjugation_defect"), Some(tol.identity))
                && le(m("growth"), Some(tol.mc_trend_slack))
                && le(Some(lo), m("besov_over_sobolev_min"))
                && le(m("besov_over_sobolev_max"), Some(hi))
        }
    };
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

/// One JSON object per report, newline-terminated.
pub fn write_jsonl(reports: &[ExperimentReport], out: &mut dyn Write) -> Result<()> {
    for r in reports {
        serde_json::to_writer(&mut *out, r)?;
        writeln!(out)?;
    }
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Flat table with `measured.<key>` and `predicted.<key>` columns.
pub fn write_csv(reports: &[ExperimentReport], out: &mut dyn Write) -> Result<()> {
    let mut measured_keys: Vec<&String> = reports.iter().flat_map(|r| r.measured.keys()).collect();
    measured_keys.sort();
    measured_keys.dedup();
    let mut predicted_keys: Vec<&String> = reports.iter().flat_map(|r| r.predicted.keys()).collect();
    predicted_keys.sort();
    predicted_keys.dedup();

    let mut header = vec!["check".to_string(), "verdict".into(), "runtime_ms".into()];
    header.extend(measured_keys.iter().map(|k| format!("measured.{k}")));
    header.extend(predicted_keys.iter().map(|k| format!("predicted.{k}")));
    writeln!(out, "{}", header.iter().map(|h| csv_field(h)).collect::<Vec<_>>().join(","))?;

    for r in reports {
        let mut row = vec![r.check.to_string(), r.verdict.to_string(), r.runtime_ms.to_string()];
        row.extend(
            measured_keys
                .iter()
                .map(|k| r.measured.get(*k).map(|v| v.to_string()).unwrap_or_default()),
        );
        row.extend(
            predicted_keys
                .iter()
                .map(|k| r.predicted.get(*k).map(|v| v.to_string()).unwrap_or_default()),
        );
        writeln!(out, "{}", row.iter().map(|c| csv_field(c)).collect::<Vec<_>>().join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn judge_kernel_decay() {
        let spec = ExperimentSpec::new(Check::KernelDecay).resolved().unwrap();
        let predicted = map(&[("slope_plain", 0.25), ("slope_grad_y", 0.75), ("slope_grad_u", 1.25)]);
        let good = map(&[
            ("slope_plain", 0.2),
            ("slope_grad_y", 0.7),
            ("slope_grad_u", 1.2),
            ("slope_gap_u", 1.0),
        ]);
        assert_eq!(judge(&spec, &good, &predicted), Verdict::Pass);
        let mut bad = good.clone();
        bad.insert("slope_plain".into(), 0.6);
        assert_eq!(judge(&spec, &bad, &predicted), Verdict::Fail);
        assert_eq!(judge(&spec, &map(&[]), &predicted), Verdict::Fail);
        assert_eq!(judge(&spec, &map(&[("degenerate", 1.0)]), &predicted), Verdict::Pass);
    }

    #[test]
    fn csv_flattens_maps() {
        let spec = ExperimentSpec::new(Check::SharpMaximal).resolved().unwrap();
        let report = ExperimentReport {
            check: Check::SharpMaximal,
            spec,
            measured: map(&[("growth", 0.01)]),
            predicted: map(&[("growth_bound", 0.1)]),
            verdict: Verdict::Pass,
            runtime_ms: 3,
            notes: vec![],
        };
        let mut buf = Vec::new();
        write_csv(&[report], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "check,verdict,runtime_ms,measured.growth,predicted.growth_bound");
        assert_eq!(lines.next().unwrap(), "sharp_maximal,pass,3,0.01,0.1");
    }
}
