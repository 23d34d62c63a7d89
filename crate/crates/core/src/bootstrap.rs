//! Parametric bootstrap calibration of the test statistics.
//!
//! Every bootstrap sample is drawn from the beta law fitted to the data and
//! re-fitted before the statistic is evaluated. Several statistics can share
//! one set of resamples; [`run_tests`] evaluates all of them on each
//! replicate.

use serde::{Deserialize, Serialize};

use crate::beta_model::{draw_beta, fit, BetaParams, EstimationMethod, Sample};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::gof_tests::{evaluate, StatisticKind};
use crate::rng;

/// Attempts per replicate before giving up on a resample whose re-fit or
/// statistic fails.
pub const MAX_ATTEMPTS: usize = 10;

/// Configuration of a single bootstrap test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSpec {
    pub statistic: StatisticKind,
    pub estimator: EstimationMethod,
    #[serde(rename = "B")]
    pub b: usize,
    pub level: f64,
    pub seed: u64,
}

/// Several statistics calibrated on shared resamples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapPlan {
    pub statistics: Vec<StatisticKind>,
    pub estimator: EstimationMethod,
    #[serde(rename = "B")]
    pub b: usize,
    pub level: f64,
    pub seed: u64,
    /// Keep the bootstrap distribution in each outcome.
    #[serde(default)]
    pub keep_values: bool,
}

impl From<BootstrapSpec> for BootstrapPlan {
    fn from(s: BootstrapSpec) -> Self {
        Self {
            statistics: vec![s.statistic],
            estimator: s.estimator,
            b: s.b,
            level: s.level,
            seed: s.seed,
            keep_values: false,
        }
    }
}

impl BootstrapPlan {
    pub fn validate(&self) -> Result<()> {
        if self.statistics.is_empty() {
            return Err(Error::InvalidParams("no statistics requested".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::InvalidParams(format!(
                "level must lie in (0, 1), got {}",
                self.level
            )));
        }
        critical_index(self.b, self.level).map(|_| ())
    }
}

/// Result of one bootstrap test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub statistic: StatisticKind,
    pub statistic_value: f64,
    pub critical_value: f64,
    pub p_value: f64,
    pub reject: bool,
    pub fitted: BetaParams,
    #[serde(rename = "B")]
    pub b: usize,
    pub level: f64,
    pub seed: u64,
    /// Resamples that had to be redrawn because re-fitting failed.
    pub redraws: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bootstrap_values: Option<Vec<f64>>,
}

/// 1-based index `B - floor(level (B + 1))` of the lower order statistic and
/// the interpolation weight on the gap to its successor.
fn critical_index(b: usize, level: f64) -> Result<(usize, f64)> {
    let pos = level * (b as f64 + 1.0);
    let floor = pos.floor();
    let idx = b as i64 - floor as i64;
    if b < 2 || idx < 1 || idx as usize + 1 > b {
        return Err(Error::IndexOutOfRange(format!(
            "B = {b} and level = {level} give order statistic {idx} (need 1 <= index < B)"
        )));
    }
    Ok((idx as usize, 1.0 - (pos - floor)))
}

/// Interpolated upper order statistic
/// `T*_(k) + w (T*_(k+1) - T*_(k))` with `k = B - floor(level (B + 1))`.
///
/// The weight `w = 1 - frac(level (B + 1))` places the value at position
/// `(1 - level)(B + 1)` of the ordered bootstrap sample; it equals 0.90 for
/// level 0.1 with B = 200, 500 or 1000.
pub fn modified_critical_value(sorted_boot: &[f64], level: f64) -> Result<f64> {
    let (k, w) = critical_index(sorted_boot.len(), level)?;
    let lo = sorted_boot[k - 1];
    let hi = sorted_boot[k];
    Ok(lo + w * (hi - lo))
}

/// Right-tail proportion `#{T*_j >= observed} / B`.
pub fn bootstrap_pvalue(boot: &[f64], observed: f64) -> f64 {
    if boot.is_empty() {
        return f64::NAN;
    }
    boot.iter().filter(|&&t| t >= observed).count() as f64 / boot.len() as f64
}

/// Run a single bootstrap test.
pub fn run_test(s: &Sample, spec: BootstrapSpec, exec: &Exec) -> Result<TestOutcome> {
    let mut out = run_tests(s, &spec.into(), exec)?;
    Ok(out.remove(0))
}

/// Run every statistic in `plan` against shared resamples.
pub fn run_tests(s: &Sample, plan: &BootstrapPlan, exec: &Exec) -> Result<Vec<TestOutcome>> {
    plan.validate()?;
    let fitted = fit(s, plan.estimator)?;
    let observed = plan
        .statistics
        .iter()
        .map(|&k| evaluate(k, s, fitted).map(|v| v.value))
        .collect::<Result<Vec<f64>>>()?;

    let n = s.len();
    let replicates = exec.map(plan.b, |j| replicate(n, fitted, plan, j));

    let m = plan.statistics.len();
    let mut columns = vec![Vec::with_capacity(plan.b); m];
    let mut redraws = 0;
    for r in replicates {
        let (values, extra) = r?;
        redraws += extra;
        for (col, v) in columns.iter_mut().zip(values) {
            col.push(v);
        }
    }

    plan.statistics
        .iter()
        .zip(observed)
        .zip(columns)
        .map(|((&statistic, statistic_value), boot)| {
            let p_value = bootstrap_pvalue(&boot, statistic_value);
            let mut sorted = boot.clone();
            sorted.sort_by(f64::total_cmp);
            let critical_value = modified_critical_value(&sorted, plan.level)?;
            Ok(TestOutcome {
                statistic,
                statistic_value,
                critical_value,
                p_value,
                reject: statistic_value > critical_value,
                fitted,
                b: plan.b,
                level: plan.level,
                seed: plan.seed,
                redraws,
                bootstrap_values: plan.keep_values.then_some(boot),
            })
        })
        .collect()
}

/// Statistic values for bootstrap replicate `j`, plus the number of redraws.
fn replicate(
    n: usize,
    fitted: BetaParams,
    plan: &BootstrapPlan,
    j: usize,
) -> Result<(Vec<f64>, usize)> {
    let mut last = None;
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = rng::stream(rng::sub_seed(plan.seed, &[j as u64, attempt as u64]));
        let draws: Vec<f64> = (0..n).map(|_| draw_beta(&mut rng, fitted)).collect();
        let boot = Sample::from_unchecked(draws);
        let attempt_result = fit(&boot, plan.estimator).and_then(|p| {
            plan.statistics
                .iter()
                .map(|&k| evaluate(k, &boot, p).map(|v| v.value))
                .collect::<Result<Vec<f64>>>()
        });
        match attempt_result {
            Ok(values) => return Ok((values, attempt)),
            Err(e) => last = Some(e),
        }
    }
    Err(Error::ReplicateFailed {
        replicate: j,
        attempts: MAX_ATTEMPTS,
        last: Box::new(last.expect("at least one attempt")),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beta_model::sample_beta;
    use crate::datasets;

    #[test]
    fn critical_value_examples() {
        let boot: Vec<f64> = (1..=500).map(f64::from).collect();
        assert!((modified_critical_value(&boot, 0.1).unwrap() - 450.9).abs() < 1e-9);

        let boot: Vec<f64> = (1..=1000).map(|i| (i as f64).sqrt()).collect();
        let want = boot[899] + 0.9 * (boot[900] - boot[899]);
        assert!((modified_critical_value(&boot, 0.1).unwrap() - want).abs() < 1e-12);

        assert_eq!(modified_critical_value(&[3.5; 200], 0.1).unwrap(), 3.5);
        assert!(modified_critical_value(&[1.0, 2.0], 0.9).is_err());
        assert!(modified_critical_value(&[1.0; 5], 0.01).is_err());
        assert!(modified_critical_value(&[1.0], 0.1).is_err());
    }

    #[test]
    fn pvalue_examples() {
        let boot = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(bootstrap_pvalue(&boot, 0.5), 1.0);
        assert_eq!(bootstrap_pvalue(&boot, 4.5), 0.0);
        assert_eq!(bootstrap_pvalue(&boot, 2.5), 0.5);
        assert_eq!(bootstrap_pvalue(&boot, 2.0), 0.75);
    }

    fn spec(statistic: StatisticKind, b: usize, seed: u64) -> BootstrapSpec {
        BootstrapSpec {
            statistic,
            estimator: EstimationMethod::MaximumLikelihood,
            b,
            level: 0.1,
            seed,
        }
    }

    #[test]
    fn outcome_is_consistent() {
        let s = datasets::by_name("may2007").unwrap();
        let plan = BootstrapPlan {
            keep_values: true,
            ..spec(StatisticKind::Tn, 200, 3).into()
        };
        let out = run_tests(&s, &plan, &Exec::sequential()).unwrap().remove(0);
        let boot = out.bootstrap_values.as_ref().unwrap();
        assert_eq!(boot.len(), 200);
        assert_eq!(out.p_value, bootstrap_pvalue(boot, out.statistic_value));
        assert_eq!(out.reject, out.statistic_value > out.critical_value);
        // A value above every bootstrap statistic gives p = 0 and rejects.
        let max = boot.iter().cloned().fold(f64::MIN, f64::max);
        let mut sorted = boot.clone();
        sorted.sort_by(f64::total_cmp);
        let c = modified_critical_value(&sorted, 0.1).unwrap();
        assert_eq!(bootstrap_pvalue(boot, max + 1.0), 0.0);
        assert!(max + 1.0 > c);
    }

    #[test]
    fn deterministic_across_workers() {
        let s = sample_beta(40, BetaParams::new(2.0, 5.0).unwrap(), 9);
        let plan = BootstrapPlan {
            statistics: StatisticKind::battery(),
            keep_values: true,
            ..spec(StatisticKind::Tn, 100, 77).into()
        };
        let a = run_tests(&s, &plan, &Exec::sequential()).unwrap();
        let b = run_tests(&s, &plan, &Exec::with_threads(4)).unwrap();
        let c = run_tests(&s, &plan, &Exec::with_threads(3)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn shared_resamples_match_single_runs() {
        let s = sample_beta(30, BetaParams::new(1.5, 1.5).unwrap(), 2);
        let plan = BootstrapPlan {
            statistics: vec![StatisticKind::Ks, StatisticKind::Tn],
            ..spec(StatisticKind::Tn, 50, 5).into()
        };
        let both = run_tests(&s, &plan, &Exec::sequential()).unwrap();
        let single = run_test(&s, spec(StatisticKind::Tn, 50, 5), &Exec::sequential()).unwrap();
        assert_eq!(both[1], single);
    }

    #[test]
    fn estimation_errors_propagate() {
        let s = Sample::new(vec![0.0, 0.5, 0.7]).unwrap();
        assert!(matches!(
            run_test(&s, spec(StatisticKind::Tn, 50, 1), &Exec::sequential()),
            Err(Error::NonInteriorData { .. })
        ));
        let s = Sample::new(vec![0.2, 0.5, 0.7]).unwrap();
        let bad = BootstrapSpec { level: 1.5, ..spec(StatisticKind::Tn, 50, 1) };
        assert!(run_test(&s, bad, &Exec::sequential()).is_err());
    }

    #[test]
    fn moments_estimator_runs() {
        let s = sample_beta(25, BetaParams::new(0.8, 1.2).unwrap(), 4);
        let sp = BootstrapSpec {
            estimator: EstimationMethod::Moments,
            ..spec(StatisticKind::Cm, 100, 8)
        };
        let out = run_test(&s, sp, &Exec::sequential()).unwrap();
        assert!((0.0..=1.0).contains(&out.p_value));
    }
}
