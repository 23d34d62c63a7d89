//! The two-parameter beta family: density, distribution function, sampling,
//! and the maximum-likelihood and moment estimators.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::rng::{self, StreamRng};
use crate::specfun::{
    digamma_raw, inv_reg_inc_beta_raw, ln_beta_raw, trigamma_raw,
};

/// Shape parameters (α, β) of a beta law, both positive and finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaParams {
    pub alpha: f64,
    pub beta: f64,
}

impl BetaParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if ok(alpha) && ok(beta) {
            Ok(Self { alpha, beta })
        } else {
            Err(Error::InvalidParams(format!(
                "beta shape parameters must be positive and finite, got ({alpha}, {beta})"
            )))
        }
    }

    /// Mean α / (α + β).
    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }

    /// Parameters of the reflected law of 1 - X.
    pub fn swapped(&self) -> Self {
        Self {
            alpha: self.beta,
            beta: self.alpha,
        }
    }
}

impl fmt::Display for BetaParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "B({}, {})", self.alpha, self.beta)
    }
}

/// Observations in [0, 1], kept in the order given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Sample {
    values: Vec<f64>,
}

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::OutOfRange { index, value });
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Values in nondecreasing order.
    pub fn sorted(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }

    /// Variance with divisor n.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.values.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / self.len() as f64
    }

    /// First observation equal to 0 or 1, if any.
    pub fn boundary_value(&self) -> Option<(usize, f64)> {
        self.values
            .iter()
            .copied()
            .enumerate()
            .find(|&(_, v)| v <= 0.0 || v >= 1.0)
    }

    /// Replace values below `eps` by `eps` and above `1 - eps` by `1 - eps`.
    pub fn winsorized(&self, eps: f64) -> Self {
        let values = self
            .values
            .iter()
            .map(|v| v.clamp(eps, 1.0 - eps))
            .collect();
        Self { values }
    }

    pub(crate) fn from_unchecked(values: Vec<f64>) -> Self {
        Self { values }
    }
}

impl TryFrom<Vec<f64>> for Sample {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Sample::new(values)
    }
}

impl From<Sample> for Vec<f64> {
    fn from(s: Sample) -> Self {
        s.values
    }
}

/// Parameter estimation method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimationMethod {
    #[serde(alias = "mle")]
    MaximumLikelihood,
    Moments,
}

impl EstimationMethod {
    pub fn short_name(&self) -> &'static str {
        match self {
            Self::MaximumLikelihood => "mle",
            Self::Moments => "moments",
        }
    }
}

impl fmt::Display for EstimationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for EstimationMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mle" | "ml" | "maximum_likelihood" => Ok(Self::MaximumLikelihood),
            "moments" | "mom" | "mme" => Ok(Self::Moments),
            other => Err(Error::Parse {
                position: 0,
                message: format!("unknown estimator '{other}', expected 'mle' or 'moments'"),
            }),
        }
    }
}

/// Density x^(α-1)(1-x)^(β-1) / B(α, β). Infinite at an endpoint whose
/// exponent is negative.
pub fn pdf(x: f64, p: BetaParams) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(domain("pdf", format!("x must lie in [0, 1], got {x}")));
    }
    Ok(pdf_raw(x, 1.0 - x, p))
}

/// Density evaluated from `x` and an accurately computed `1 - x`.
pub(crate) fn pdf_raw(x: f64, xc: f64, p: BetaParams) -> f64 {
    let edge = |v: f64, shape: f64| -> Option<f64> {
        if v > 0.0 {
            None
        } else if shape < 1.0 {
            Some(f64::INFINITY)
        } else if shape == 1.0 {
            Some(1.0)
        } else {
            Some(0.0)
        }
    };
    // Endpoint handling: the other factor equals one there.
    if let Some(e) = edge(x, p.alpha) {
        return if e == 1.0 {
            (-ln_beta_raw(p.alpha, p.beta)).exp()
        } else {
            e
        };
    }
    if let Some(e) = edge(xc, p.beta) {
        return if e == 1.0 {
            (-ln_beta_raw(p.alpha, p.beta)).exp()
        } else {
            e
        };
    }
    ((p.alpha - 1.0) * x.ln() + (p.beta - 1.0) * xc.ln() - ln_beta_raw(p.alpha, p.beta)).exp()
}

/// Distribution function F_(α,β)(t).
pub fn cdf(t: f64, p: BetaParams) -> Result<f64> {
    crate::specfun::reg_inc_beta(t, p.alpha, p.beta)
}

/// Quantile function.
pub fn quantile(u: f64, p: BetaParams) -> Result<f64> {
    crate::specfun::inv_reg_inc_beta(u, p.alpha, p.beta)
}

/// One beta variate as G₁ / (G₁ + G₂) with independent gamma variates.
pub fn draw_beta(rng: &mut StreamRng, p: BetaParams) -> f64 {
    loop {
        let g1 = rng::gamma(rng, p.alpha);
        let g2 = rng::gamma(rng, p.beta);
        let s = g1 + g2;
        if s > 0.0 {
            return g1 / s;
        }
    }
}

/// `n` i.i.d. draws from B(α, β); deterministic in `seed`.
pub fn sample_beta(n: usize, p: BetaParams, seed: u64) -> Sample {
    let mut rng = rng::stream(seed);
    Sample::from_unchecked((0..n).map(|_| draw_beta(&mut rng, p)).collect())
}

/// Inverse-CDF sampler, kept as an independent cross-check of [`sample_beta`].
pub fn sample_beta_inverse(n: usize, p: BetaParams, seed: u64) -> Sample {
    let mut rng = rng::stream(seed);
    Sample::from_unchecked(
        (0..n)
            .map(|_| inv_reg_inc_beta_raw(rng::open01(&mut rng), p.alpha, p.beta))
            .collect(),
    )
}

/// Sufficient statistics (mean ln X, mean ln(1 - X)).
fn log_means(s: &Sample) -> Result<(f64, f64)> {
    if let Some((index, value)) = s.boundary_value() {
        return Err(Error::NonInteriorData { index, value });
    }
    let n = s.len() as f64;
    let (l1, l2) = s
        .values()
        .iter()
        .fold((0.0, 0.0), |(a, b), &x| (a + x.ln(), b + (-x).ln_1p()));
    Ok((l1 / n, l2 / n))
}

fn check_not_constant(s: &Sample) -> Result<()> {
    if s.len() < 2 {
        return Err(Error::DegenerateSample(
            "at least two observations are needed".into(),
        ));
    }
    let first = s.values()[0];
    if s.values().iter().all(|&v| v == first) {
        return Err(Error::DegenerateSample(format!(
            "all observations equal {first}"
        )));
    }
    Ok(())
}

/// Residuals of the likelihood equations
/// Ψ(α) - Ψ(α+β) - mean ln X and Ψ(β) - Ψ(α+β) - mean ln(1-X).
pub fn score_residual(s: &Sample, p: BetaParams) -> Result<[f64; 2]> {
    let (l1, l2) = log_means(s)?;
    Ok(score_equations(p.alpha, p.beta, l1, l2))
}

fn score_equations(a: f64, b: f64, l1: f64, l2: f64) -> [f64; 2] {
    let dab = digamma_raw(a + b);
    [digamma_raw(a) - dab - l1, digamma_raw(b) - dab - l2]
}

/// Outcome of the maximum-likelihood solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleFit {
    pub params: BetaParams,
    pub iterations: usize,
    /// Max-norm of the likelihood-equation residuals at the solution.
    pub residual: f64,
}

const MLE_MAX_ITER: usize = 200;
const MLE_RESIDUAL_TOL: f64 = 1e-10;

/// Maximum-likelihood estimate of (α, β).
pub fn mle_fit(s: &Sample) -> Result<BetaParams> {
    mle_fit_detailed(s).map(|f| f.params)
}

/// Two-dimensional Newton iteration on the likelihood equations, started at
/// the moment estimate. Steps that leave the positive quadrant or increase the
/// residual are halved.
pub fn mle_fit_detailed(s: &Sample) -> Result<MleFit> {
    let (l1, l2) = log_means(s)?;
    check_not_constant(s)?;
    let start = moment_fit(s).unwrap_or(BetaParams {
        alpha: 1.0,
        beta: 1.0,
    });
    solve_likelihood_equations(l1, l2, start)
}

/// Solve Ψ(α) - Ψ(α+β) = l1, Ψ(β) - Ψ(α+β) = l2 from `start`.
pub(crate) fn solve_likelihood_equations(l1: f64, l2: f64, start: BetaParams) -> Result<MleFit> {
    let (mut a, mut b) = (start.alpha, start.beta);
    let norm = |r: [f64; 2]| r[0].abs().max(r[1].abs());
    let mut r = score_equations(a, b, l1, l2);
    let mut iterations = 0;
    for iter in 0..MLE_MAX_ITER {
        iterations = iter;
        let res = norm(r);
        if res <= 1e-14 {
            return Ok(MleFit {
                params: BetaParams { alpha: a, beta: b },
                iterations: iter,
                residual: res,
            });
        }
        let tab = trigamma_raw(a + b);
        let j11 = trigamma_raw(a) - tab;
        let j22 = trigamma_raw(b) - tab;
        let j12 = -tab;
        let det = j11 * j22 - j12 * j12;
        if !(det.is_finite() && det != 0.0) {
            break;
        }
        let da = -(j22 * r[0] - j12 * r[1]) / det;
        let db = -(j11 * r[1] - j12 * r[0]) / det;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let (na, nb) = (a + lambda * da, b + lambda * db);
            if na > 0.0 && nb > 0.0 && na.is_finite() && nb.is_finite() {
                let nr = score_equations(na, nb, l1, l2);
                if norm(nr) < res || lambda < 1e-6 && norm(nr).is_finite() {
                    a = na;
                    b = nb;
                    r = nr;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
        let step = (lambda * da).abs().max((lambda * db).abs());
        if step <= 1e-15 * a.max(b) {
            break;
        }
    }
    let res = norm(r);
    if res <= MLE_RESIDUAL_TOL && a > 0.0 && b > 0.0 {
        Ok(MleFit {
            params: BetaParams { alpha: a, beta: b },
            iterations,
            residual: res,
        })
    } else {
        Err(Error::NoConvergence {
            routine: "beta maximum likelihood",
            iterations: MLE_MAX_ITER,
        })
    }
}

/// Method-of-moments estimate from the sample mean and the variance with
/// divisor n.
pub fn moment_fit(s: &Sample) -> Result<BetaParams> {
    let m = s.mean();
    let v = s.variance();
    let bound = m * (1.0 - m);
    if !(v > 0.0) || v >= bound {
        return Err(Error::DegenerateSample(format!(
            "moment estimator needs 0 < variance < mean(1-mean); got variance {v}, bound {bound}"
        )));
    }
    let k = bound / v - 1.0;
    BetaParams::new(m * k, (1.0 - m) * k)
}

/// Estimate parameters with the chosen method.
pub fn fit(s: &Sample, method: EstimationMethod) -> Result<BetaParams> {
    match method {
        EstimationMethod::MaximumLikelihood => mle_fit(s),
        EstimationMethod::Moments => moment_fit(s),
    }
}

/// Inverse Fisher information of one observation.
pub fn fisher_inverse(p: BetaParams) -> Result<[[f64; 2]; 2]> {
    BetaParams::new(p.alpha, p.beta)?;
    Ok(fisher_inverse_raw(p))
}

pub(crate) fn fisher_inverse_raw(p: BetaParams) -> [[f64; 2]; 2] {
    let ta = trigamma_raw(p.alpha);
    let tb = trigamma_raw(p.beta);
    let tab = trigamma_raw(p.alpha + p.beta);
    let det = (ta + tb) * tab - ta * tb;
    let inv = 1.0 / det;
    [
        [(tab - tb) * inv, -tab * inv],
        [-tab * inv, (tab - ta) * inv],
    ]
}

/// Forward Fisher information of one observation.
pub fn fisher_information(p: BetaParams) -> [[f64; 2]; 2] {
    let tab = trigamma_raw(p.alpha + p.beta);
    [
        [trigamma_raw(p.alpha) - tab, -tab],
        [-tab, trigamma_raw(p.beta) - tab],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{endpoint_power, GaussLegendre};
    use crate::specfun::reg_inc_beta_raw;
    use proptest::prelude::*;

    fn params(a: f64, b: f64) -> BetaParams {
        BetaParams::new(a, b).unwrap()
    }

    #[test]
    fn params_and_sample_validation() {
        assert!(BetaParams::new(0.0, 1.0).is_err());
        assert!(BetaParams::new(1.0, f64::NAN).is_err());
        assert_eq!(Sample::new(vec![]), Err(Error::EmptySample));
        assert!(matches!(
            Sample::new(vec![0.2, 1.2]),
            Err(Error::OutOfRange { index: 1, .. })
        ));
        assert!(Sample::new(vec![0.0, 1.0]).is_ok());
    }

    #[test]
    fn pdf_examples() {
        for x in [0.0, 0.25, 0.5, 1.0] {
            assert!((pdf(x, params(1.0, 1.0)).unwrap() - 1.0).abs() < 1e-14);
        }
        assert!((pdf(0.5, params(2.0, 2.0)).unwrap() - 1.5).abs() < 1e-13);
        assert_eq!(pdf(0.0, params(0.5, 2.0)).unwrap(), f64::INFINITY);
        assert_eq!(pdf(1.0, params(2.0, 0.5)).unwrap(), f64::INFINITY);
        assert_eq!(pdf(0.0, params(2.0, 0.5)).unwrap(), 0.0);
        assert!(pdf(-0.1, params(2.0, 2.0)).is_err());
    }

    #[test]
    fn pdf_integrates_to_one() {
        let rule = GaussLegendre::order64();
        for (a, b) in [(0.3, 0.3), (0.5, 3.0), (2.0, 2.0), (7.5, 0.4), (8.0, 8.0)] {
            let p = params(a, b);
            let power = endpoint_power(a.min(b));
            let total =
                rule.integrate_unit(&mut |x, xc| pdf_raw(x, xc, p), 0.0, 1.0, power);
            assert!((total - 1.0).abs() < 1e-8, "({a},{b}): {total}");
        }
    }

    #[test]
    fn sampler_mean_and_determinism() {
        let p = params(2.0, 3.0);
        let s = sample_beta(1_000_000, p, 42);
        assert!((s.mean() - 0.4).abs() < 0.002);
        assert_eq!(sample_beta(100, p, 9), sample_beta(100, p, 9));
        assert_ne!(sample_beta(100, p, 9), sample_beta(100, p, 10));
    }

    fn ks_to_cdf(s: &Sample, cdf: impl Fn(f64) -> f64) -> f64 {
        let xs = s.sorted();
        let n = xs.len() as f64;
        xs.iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                (f - i as f64 / n).abs().max((i as f64 + 1.0) / n - f)
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn uniform_draws_match_uniform_cdf() {
        let s = sample_beta(100_000, params(1.0, 1.0), 3);
        assert!(ks_to_cdf(&s, |x| x) < 0.01);
        let s = sample_beta_inverse(100_000, params(1.0, 1.0), 3);
        assert!(ks_to_cdf(&s, |x| x) < 0.01);
    }

    #[test]
    fn both_samplers_agree_with_cdf() {
        for (a, b) in [(0.5, 0.5), (3.0, 0.5), (6.356, 1.97)] {
            let p = params(a, b);
            let f = |x: f64| reg_inc_beta_raw(x, a, b);
            assert!(ks_to_cdf(&sample_beta(50_000, p, 5), f) < 0.01);
            assert!(ks_to_cdf(&sample_beta_inverse(50_000, p, 5), f) < 0.01);
        }
    }

    #[test]
    fn histogram_chi_square_at_2_2() {
        // 50 equiprobable bins, 1e5 draws; chi-square with 49 df has its
        // 0.999 quantile at 85.35.
        let p = params(2.0, 2.0);
        let edges: Vec<f64> = (0..=50)
            .map(|k| inv_reg_inc_beta_raw(k as f64 / 50.0, 2.0, 2.0))
            .collect();
        for seed in 0..10 {
            let s = sample_beta(100_000, p, 1000 + seed);
            let mut counts = [0usize; 50];
            for &x in s.values() {
                let k = edges.partition_point(|&e| e <= x).clamp(1, 50) - 1;
                counts[k] += 1;
            }
            let expected = 2000.0;
            let chi2: f64 = counts
                .iter()
                .map(|&c| (c as f64 - expected).powi(2) / expected)
                .sum();
            assert!(chi2 < 85.35, "seed {seed}: chi2 = {chi2}");
        }
    }

    #[test]
    fn moment_fit_examples() {
        // Mean 0.5 and variance 1/12 exactly: symmetric two-point sample.
        let d = (1.0f64 / 12.0).sqrt();
        let s = Sample::new(vec![0.5 - d, 0.5 + d]).unwrap();
        let p = moment_fit(&s).unwrap();
        assert!((p.alpha - 1.0).abs() < 1e-12 && (p.beta - 1.0).abs() < 1e-12);
        // Mean 0.4, variance 0.04: 0.4*0.6/0.04 - 1 = 5.
        let s = Sample::new(vec![0.2, 0.6]).unwrap();
        let p = moment_fit(&s).unwrap();
        assert!((p.alpha - 2.0).abs() < 1e-12 && (p.beta - 3.0).abs() < 1e-12);
        let s = sample_beta(100_000, params(3.0, 0.5), 77);
        let p = moment_fit(&s).unwrap();
        assert!((p.alpha - 3.0).abs() < 0.15 && (p.beta - 0.5).abs() < 0.15, "{p:?}");
        assert!(matches!(
            moment_fit(&Sample::new(vec![0.3, 0.3]).unwrap()),
            Err(Error::DegenerateSample(_))
        ));
        assert!(moment_fit(&Sample::new(vec![0.0, 1.0]).unwrap()).is_err());
    }

    #[test]
    fn mle_errors() {
        assert!(matches!(
            mle_fit(&Sample::new(vec![0.0, 0.5]).unwrap()),
            Err(Error::NonInteriorData { index: 0, .. })
        ));
        assert!(matches!(
            mle_fit(&Sample::new(vec![0.5, 1.0]).unwrap()),
            Err(Error::NonInteriorData { index: 1, .. })
        ));
        assert!(matches!(
            mle_fit(&Sample::new(vec![0.4, 0.4, 0.4]).unwrap()),
            Err(Error::DegenerateSample(_))
        ));
        assert!(matches!(
            mle_fit(&Sample::new(vec![0.4]).unwrap()),
            Err(Error::DegenerateSample(_))
        ));
    }

    #[test]
    fn mle_symmetric_sample() {
        let base = sample_beta(40, params(1.7, 0.9), 8);
        let mut v = base.values().to_vec();
        v.extend(base.values().iter().map(|x| 1.0 - x));
        let p = mle_fit(&Sample::new(v).unwrap()).unwrap();
        assert!((p.alpha - p.beta).abs() < 1e-8, "{p:?}");
    }

    #[test]
    fn estimators_are_accurate_on_simulated_samples() {
        let mut rng = rng::stream(2024);
        let mut good = [0usize; 2];
        let reps = 200;
        for r in 0..reps {
            let a = 0.3 + 7.7 * rand::Rng::gen::<f64>(&mut rng);
            let b = 0.3 + 7.7 * rand::Rng::gen::<f64>(&mut rng);
            let s = sample_beta(200, params(a, b), 500 + r);
            let close = |p: BetaParams| {
                (p.alpha - a).abs() <= 0.3 * a && (p.beta - b).abs() <= 0.3 * b
            };
            let fit = mle_fit_detailed(&s).unwrap();
            assert!(fit.residual <= 1e-10);
            good[0] += close(fit.params) as usize;
            good[1] += moment_fit(&s).map(close).unwrap_or(false) as usize;
        }
        assert!(good[0] >= 180, "mle within 30%: {}", good[0]);
        assert!(good[1] >= 180, "moments within 30%: {}", good[1]);
    }

    #[test]
    fn fisher_inverse_at_uniform_against_monte_carlo_information() {
        use std::f64::consts::PI;
        let p = params(1.0, 1.0);
        let inv = fisher_inverse(p).unwrap();
        let t1 = PI * PI / 6.0;
        let t2 = t1 - 1.0;
        let det = 2.0 * t1 * t2 - t1 * t1;
        assert!((inv[0][0] - (t2 - t1) / det).abs() < 1e-12);
        assert!((inv[0][1] + t2 / det).abs() < 1e-12);

        // Monte Carlo E[score score^T] with score = (1 + ln x, 1 + ln(1-x)).
        let s = sample_beta(1_000_000, p, 99);
        let mut info = [[0.0; 2]; 2];
        for &x in s.values() {
            let g = [1.0 + x.ln(), 1.0 + (-x).ln_1p()];
            for i in 0..2 {
                for j in 0..2 {
                    info[i][j] += g[i] * g[j];
                }
            }
        }
        let n = s.len() as f64;
        for row in info.iter_mut() {
            for v in row.iter_mut() {
                *v /= n;
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                let prod: f64 = (0..2).map(|k| inv[i][k] * info[k][j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((prod - want).abs() < 0.01, "({i},{j}) = {prod}");
            }
        }
    }

    proptest! {
        #[test]
        fn fisher_inverse_symmetry_and_pd(a in 0.05f64..50.0, b in 0.05f64..50.0) {
            let m = fisher_inverse(params(a, b)).unwrap();
            let s = fisher_inverse(params(b, a)).unwrap();
            prop_assert!((m[0][0] - s[1][1]).abs() <= 1e-12 * m[0][0].abs());
            prop_assert!((m[1][1] - s[0][0]).abs() <= 1e-12 * m[1][1].abs());
            prop_assert!((m[0][1] - s[1][0]).abs() <= 1e-12 * m[0][1].abs());
            prop_assert_eq!(m[0][1], m[1][0]);
            let tr = m[0][0] + m[1][1];
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            prop_assert!(tr > 0.0 && det > 0.0);
        }

        #[test]
        fn mle_residual_is_tiny(a in 0.3f64..8.0, b in 0.3f64..8.0, seed in 0u64..1000) {
            let s = sample_beta(60, params(a, b), seed);
            let fit = mle_fit_detailed(&s).unwrap();
            let r = score_residual(&s, fit.params).unwrap();
            prop_assert!(r[0].abs() <= 1e-10 && r[1].abs() <= 1e-10);
        }
    }
}
