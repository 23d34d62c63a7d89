//! Serializable results of the subcommands and their text/CSV renderings.

use std::fmt::Write as _;

use anyhow::Result;
use betagof::asymptotics::{EigenMethod, EigenResult};
use betagof::beta_model::{BetaParams, EstimationMethod};
use betagof::bootstrap::TestOutcome;
use betagof::power::PowerTable;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputSummary {
    pub source: String,
    pub n: usize,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub estimator: EstimationMethod,
    pub params: BetaParams,
}

/// Output of `betagof test`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub input: InputSummary,
    /// Every estimator that succeeded on the data.
    pub fits: Vec<FitSummary>,
    /// Estimator used by the tests.
    pub estimator: EstimationMethod,
    pub tests: Vec<TestOutcome>,
    pub seed: u64,
    /// Wall-clock seconds; only present with `--timing`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_seconds: Option<f64>,
}

impl Report {
    pub fn any_rejected(&self) -> bool {
        self.tests.iter().any(|t| t.reject)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let i = &self.input;
        let _ = writeln!(s, "{} {}", self.tool, self.version);
        let _ = writeln!(s, "data: {} (n = {}, min = {}, max = {})", i.source, i.n, i.min, i.max);
        for f in &self.fits {
            let _ = writeln!(
                s,
                "fit ({}): alpha = {:.6}, beta = {:.6}",
                f.estimator, f.params.alpha, f.params.beta
            );
        }
        if let Some(t) = self.tests.first() {
            let _ = writeln!(
                s,
                "bootstrap: estimator = {}, B = {}, level = {}, seed = {}",
                self.estimator, t.b, t.level, self.seed
            );
        }
        let _ = writeln!(
            s,
            "\n{:<10} {:>14} {:>14} {:>9}  decision",
            "statistic", "value", "critical", "p-value"
        );
        for t in &self.tests {
            let _ = writeln!(
                s,
                "{:<10} {:>14.6} {:>14.6} {:>9.4}  {}",
                t.statistic.to_string(),
                t.statistic_value,
                t.critical_value,
                t.p_value,
                if t.reject { "reject" } else { "accept" }
            );
        }
        let redraws: usize = self.tests.first().map_or(0, |t| t.redraws);
        if redraws > 0 {
            let _ = writeln!(s, "redrawn bootstrap samples: {redraws}");
        }
        if let Some(r) = self.runtime_seconds {
            let _ = writeln!(s, "runtime: {r:.3} s");
        }
        s
    }

    /// Columns: statistic, value, critical_value, p_value, reject, alpha,
    /// beta, B, level, seed.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "statistic",
            "value",
            "critical_value",
            "p_value",
            "reject",
            "alpha",
            "beta",
            "B",
            "level",
            "seed",
        ])?;
        for t in &self.tests {
            w.write_record([
                t.statistic.to_string(),
                t.statistic_value.to_string(),
                t.critical_value.to_string(),
                t.p_value.to_string(),
                t.reject.to_string(),
                t.fitted.alpha.to_string(),
                t.fitted.beta.to_string(),
                t.b.to_string(),
                t.level.to_string(),
                t.seed.to_string(),
            ])?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }
}

/// Columns: alternative, statistic, n, reps, B, level, rate, se.
pub fn power_csv(t: &PowerTable) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["alternative", "statistic", "n", "reps", "B", "level", "rate", "se"])?;
    for r in &t.rows {
        w.write_record([
            r.alternative.to_string(),
            r.statistic.to_string(),
            r.n.to_string(),
            r.reps.to_string(),
            r.b.to_string(),
            r.level.to_string(),
            r.rate.to_string(),
            r.se.to_string(),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// Rates in percent, one line per (alternative, n), statistics as columns.
pub fn power_text(t: &PowerTable) -> String {
    let cfg = &t.config;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "rejection rates in % (reps = {}, B = {}, level = {}, estimator = {})",
        cfg.mc_reps, cfg.b, cfg.level, cfg.estimator
    );
    let _ = write!(s, "{:<32} {:>5}", "alternative", "n");
    for k in &cfg.statistics {
        let _ = write!(s, " {:>8}", k.to_string());
    }
    s.push('\n');
    let width = cfg.statistics.len();
    for cell in t.rows.chunks(width) {
        let _ = write!(s, "{:<32} {:>5}", cell[0].alternative.to_string(), cell[0].n);
        for r in cell {
            let _ = write!(s, " {:>8.1}", 100.0 * r.rate);
        }
        s.push('\n');
    }
    let redraws: usize = t.rows.chunks(width).map(|c| c[0].redraws).sum();
    if redraws > 0 {
        let _ = writeln!(s, "redrawn samples: {redraws}");
    }
    s
}

/// Output of `betagof eigen`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenReport {
    pub params: BetaParams,
    pub method: EigenMethod,
    pub grid_size: usize,
    /// Leading eigenvalues, nonincreasing.
    pub eigenvalues: Vec<f64>,
    /// Sum over all eigenvalues of the discretisation.
    pub eigenvalue_sum: f64,
    pub trace: f64,
    pub min_raw: f64,
    pub clipped: usize,
    pub psd: bool,
}

impl EigenReport {
    pub fn new(params: BetaParams, e: &EigenResult, k: usize) -> Self {
        Self {
            params,
            method: e.method,
            grid_size: e.grid_size,
            eigenvalues: e.eigenvalues.iter().take(k).copied().collect(),
            eigenvalue_sum: e.eigenvalues.iter().sum(),
            trace: e.trace,
            min_raw: e.min_raw,
            clipped: e.clipped,
            psd: e.psd,
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "kernel eigenvalues at {} ({}, m = {})",
            self.params, self.method, self.grid_size
        );
        for (j, l) in self.eigenvalues.iter().enumerate() {
            let _ = writeln!(s, "{:>4}  {:.12e}", j + 1, l);
        }
        let _ = writeln!(s, "sum of eigenvalues  {:.12e}", self.eigenvalue_sum);
        let _ = writeln!(s, "trace               {:.12e}", self.trace);
        let _ = writeln!(
            s,
            "min raw eigenvalue  {:.3e} ({} clipped, {})",
            self.min_raw,
            self.clipped,
            if self.psd { "PSD" } else { "NOT PSD" }
        );
        s
    }

    /// Columns: index, eigenvalue.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["index", "eigenvalue"])?;
        for (j, l) in self.eigenvalues.iter().enumerate() {
            w.write_record([(j + 1).to_string(), l.to_string()])?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }
}
