//! Monte Carlo rejection rates of the bootstrap tests under fixed
//! alternatives.
//!
//! Each replication draws one sample, and every statistic in the study is
//! calibrated on that sample with shared bootstrap resamples. Replications
//! are spread over the executor; their seeds depend only on
//! `(master_seed, alternative index, n, replication, attempt)`.

use serde::{Deserialize, Deserializer, Serialize};

use crate::alternatives::{sample_alternative, AlternativeSpec};
use crate::beta_model::EstimationMethod;
use crate::bootstrap::{run_tests, BootstrapPlan, MAX_ATTEMPTS};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::gof_tests::StatisticKind;
use crate::rng::sub_seed;

/// Scale and content of a power study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerStudyConfig {
    pub alternatives: Vec<AlternativeSpec>,
    /// Sample sizes; a single integer is accepted.
    #[serde(deserialize_with = "one_or_many")]
    pub n: Vec<usize>,
    #[serde(default = "default_reps")]
    pub mc_reps: usize,
    #[serde(rename = "B", default = "default_b")]
    pub b: usize,
    #[serde(default = "default_level")]
    pub level: f64,
    /// Statistic names, or the single string "all".
    #[serde(default = "StatisticKind::battery", deserialize_with = "statistic_list")]
    pub statistics: Vec<StatisticKind>,
    #[serde(default = "default_estimator")]
    pub estimator: EstimationMethod,
    #[serde(default = "default_seed")]
    pub master_seed: u64,
}

fn default_reps() -> usize {
    1000
}

fn default_b() -> usize {
    200
}

fn default_level() -> f64 {
    0.1
}

fn default_estimator() -> EstimationMethod {
    EstimationMethod::MaximumLikelihood
}

fn default_seed() -> u64 {
    20_100_501
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<usize>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Sizes {
        One(usize),
        Many(Vec<usize>),
    }
    Ok(match Sizes::deserialize(d)? {
        Sizes::One(n) => vec![n],
        Sizes::Many(v) => v,
    })
}

fn statistic_list<'de, D: Deserializer<'de>>(
    d: D,
) -> std::result::Result<Vec<StatisticKind>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Stats {
        Text(String),
        List(Vec<StatisticKind>),
    }
    match Stats::deserialize(d)? {
        Stats::Text(s) => StatisticKind::parse_list(&s).map_err(serde::de::Error::custom),
        Stats::List(v) => Ok(v),
    }
}

impl PowerStudyConfig {
    /// Desk-scale study of `alternatives` at one sample size.
    pub fn new(alternatives: Vec<AlternativeSpec>, n: usize) -> Self {
        Self {
            alternatives,
            n: vec![n],
            mc_reps: default_reps(),
            b: default_b(),
            level: default_level(),
            statistics: StatisticKind::battery(),
            estimator: default_estimator(),
            master_seed: default_seed(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.alternatives.is_empty() {
            return Err(Error::InvalidParams("no alternatives given".into()));
        }
        if self.n.is_empty() {
            return Err(Error::InvalidParams("no sample sizes given".into()));
        }
        if let Some(&n) = self.n.iter().find(|&&n| n < 3) {
            return Err(Error::InvalidParams(format!(
                "sample size must be at least 3, got {n}"
            )));
        }
        if self.mc_reps == 0 {
            return Err(Error::InvalidParams("mc_reps must be positive".into()));
        }
        for alt in &self.alternatives {
            alt.validate()?;
        }
        self.plan(0).validate()
    }

    fn plan(&self, seed: u64) -> BootstrapPlan {
        BootstrapPlan {
            statistics: self.statistics.clone(),
            estimator: self.estimator,
            b: self.b,
            level: self.level,
            seed,
            keep_values: false,
        }
    }

    /// Number of (alternative, n) cells.
    pub fn cells(&self) -> usize {
        self.alternatives.len() * self.n.len()
    }
}

/// Rejection tally of one statistic in one (alternative, n) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub alternative: AlternativeSpec,
    pub statistic: StatisticKind,
    pub n: usize,
    pub reps: usize,
    #[serde(rename = "B")]
    pub b: usize,
    pub level: f64,
    pub count: usize,
    pub rate: f64,
    /// √(rate (1 - rate) / reps).
    pub se: f64,
    /// Samples or bootstrap resamples redrawn in this cell.
    pub redraws: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerTable {
    pub config: PowerStudyConfig,
    /// Cell by cell in config order; statistics in config order within a cell.
    pub rows: Vec<PowerRow>,
}

impl PowerTable {
    pub fn row(
        &self,
        alternative: &AlternativeSpec,
        n: usize,
        statistic: StatisticKind,
    ) -> Option<&PowerRow> {
        self.rows
            .iter()
            .find(|r| &r.alternative == alternative && r.n == n && r.statistic == statistic)
    }
}

/// Completion notice for one (alternative, n) cell.
#[derive(Debug, Clone, Copy)]
pub struct Progress<'a> {
    pub done: usize,
    pub total: usize,
    pub alternative: &'a AlternativeSpec,
    pub n: usize,
}

pub fn run_power_study(cfg: &PowerStudyConfig, exec: &Exec) -> Result<PowerTable> {
    run_power_study_with_progress(cfg, exec, |_| {})
}

pub fn run_power_study_with_progress<P: FnMut(Progress<'_>)>(
    cfg: &PowerStudyConfig,
    exec: &Exec,
    mut progress: P,
) -> Result<PowerTable> {
    cfg.validate()?;
    let total = cfg.cells();
    let mut rows = Vec::with_capacity(total * cfg.statistics.len());
    let mut done = 0;
    for (ai, alt) in cfg.alternatives.iter().enumerate() {
        for &n in &cfg.n {
            let reps = exec.map(cfg.mc_reps, |r| replication(cfg, ai, n, r));
            let mut counts = vec![0usize; cfg.statistics.len()];
            let mut redraws = 0;
            for rep in reps {
                let (rejects, extra) = rep?;
                redraws += extra;
                for (c, hit) in counts.iter_mut().zip(rejects) {
                    *c += usize::from(hit);
                }
            }
            for (&statistic, count) in cfg.statistics.iter().zip(counts) {
                let rate = count as f64 / cfg.mc_reps as f64;
                rows.push(PowerRow {
                    alternative: *alt,
                    statistic,
                    n,
                    reps: cfg.mc_reps,
                    b: cfg.b,
                    level: cfg.level,
                    count,
                    rate,
                    se: (rate * (1.0 - rate) / cfg.mc_reps as f64).sqrt(),
                    redraws,
                });
            }
            done += 1;
            progress(Progress {
                done,
                total,
                alternative: alt,
                n,
            });
        }
    }
    Ok(PowerTable {
        config: cfg.clone(),
        rows,
    })
}

/// Rejection flags of one replication and the redraws it needed.
fn replication(cfg: &PowerStudyConfig, ai: usize, n: usize, r: usize) -> Result<(Vec<bool>, usize)> {
    let path = [ai as u64, n as u64, r as u64];
    let mut last = None;
    for attempt in 0..MAX_ATTEMPTS {
        let sample_seed = sub_seed(cfg.master_seed, &[path[0], path[1], path[2], attempt as u64, 0]);
        let boot_seed = sub_seed(cfg.master_seed, &[path[0], path[1], path[2], attempt as u64, 1]);
        let result = sample_alternative(&cfg.alternatives[ai], n, sample_seed)
            .and_then(|s| run_tests(&s, &cfg.plan(boot_seed), &Exec::sequential()));
        match result {
            Ok(outcomes) => {
                let inner: usize = outcomes.first().map_or(0, |o| o.redraws);
                return Ok((outcomes.iter().map(|o| o.reject).collect(), attempt + inner));
            }
            Err(e) => last = Some(e),
        }
    }
    Err(Error::ReplicateFailed {
        replicate: r,
        attempts: MAX_ATTEMPTS,
        last: Box::new(last.expect("at least one attempt")),
    })
}
