//! Data-generating laws on [0, 1] used as alternatives: beta, truncated
//! normal, beta/truncated-normal mixture, logit-normal, and compositions
//! F∘G of an outer distribution function with an inner law.
//!
//! The second parameter of `TN`, `LT` and the normal outer law is the
//! standard deviation of the underlying normal: `TN(0.25, 0.25)` truncates
//! N(0.25, 0.0625).
//!
//! Spec strings: `B(a,b)`, `TN(mu,sigma)`, `BN(p,a,b,mu,sigma)`, `LT(mu,sigma)` and
//! `OUTERoINNER` with outer `C(theta)`, `EXP(lambda)`, `N(mu,sigma)` and inner
//! `GO(eta,nu)`, `HN(sigma)`, `L(mu,scale)`, e.g. `C(1)oGO(2,1)`. The
//! character `∘` may be used in place of `o`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::beta_model::{draw_beta, BetaParams, Sample};
use crate::error::{Error, Result};
use crate::quadrature::{endpoint_power, GaussLegendre};
use crate::rng::{self, StreamRng};
use crate::specfun::{norm_cdf, norm_pdf, norm_quantile, reg_inc_beta_raw};

/// Outer distribution function of a composition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outer {
    /// Cauchy, F(x) = arctan(x/θ)/π + 1/2.
    Cauchy { theta: f64 },
    /// Exponential, F(x) = 1 - e^{-λx}.
    Exp { lambda: f64 },
    /// Normal with mean μ and standard deviation σ.
    Normal { mu: f64, sigma: f64 },
}

/// Inner law of a composition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Inner {
    /// Gompertz, G(x) = 1 - exp(-η(e^{νx} - 1)), x ≥ 0.
    Gompertz { eta: f64, nu: f64 },
    /// Half-normal, G(x) = erf(x / (σ√2)), x ≥ 0.
    HalfNormal { sigma: f64 },
    /// Laplace with location μ and scale ϑ.
    Laplace { mu: f64, scale: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlternativeSpec {
    Beta(BetaParams),
    /// Normal with mean μ and standard deviation σ, truncated to [0, 1].
    TruncNormal { mu: f64, sigma: f64 },
    /// B(α, β) with probability `p`, otherwise TN(μ, σ).
    BetaNormal {
        p: f64,
        beta: BetaParams,
        mu: f64,
        sigma: f64,
    },
    /// logistic(μ + σZ), Z standard normal.
    LogitNormal { mu: f64, sigma: f64 },
    /// F(X) with X ~ G.
    Compose(Outer, Inner),
}

/// (x, 1 - x) pair with both halves computed without cancellation.
type Pair = (f64, f64);

fn logistic_pair(y: f64) -> Pair {
    (1.0 / (1.0 + (-y).exp()), 1.0 / (1.0 + y.exp()))
}

/// -ln(1 - u) from a probability and its complement.
fn neg_ln_complement(u: f64, uc: f64) -> f64 {
    if u < 0.5 {
        -(-u).ln_1p()
    } else {
        -uc.ln()
    }
}

/// Φ⁻¹ from a probability and its complement.
fn norm_quantile_pair(u: f64, uc: f64) -> f64 {
    if u <= 0.5 {
        norm_quantile(u)
    } else {
        -norm_quantile(uc)
    }
}

impl Outer {
    /// (F(x), 1 - F(x)).
    fn eval(&self, x: f64) -> Pair {
        match *self {
            Outer::Cauchy { theta } => {
                let z = x / theta;
                if z > 0.0 {
                    let tail = (1.0 / z).atan() / PI;
                    (1.0 - tail, tail)
                } else if z < 0.0 {
                    let tail = (-1.0 / z).atan() / PI;
                    (tail, 1.0 - tail)
                } else {
                    (0.5, 0.5)
                }
            }
            Outer::Exp { lambda } => {
                let x = x.max(0.0);
                (-(-lambda * x).exp_m1(), (-lambda * x).exp())
            }
            Outer::Normal { mu, sigma } => {
                let z = (x - mu) / sigma;
                (norm_cdf(z), norm_cdf(-z))
            }
        }
    }

    /// F⁻¹ from a probability and its complement.
    fn quantile(&self, u: f64, uc: f64) -> f64 {
        match *self {
            Outer::Cauchy { theta } => {
                if u <= 0.5 {
                    -theta / (PI * u).tan()
                } else {
                    theta / (PI * uc).tan()
                }
            }
            Outer::Exp { lambda } => neg_ln_complement(u, uc) / lambda,
            Outer::Normal { mu, sigma } => mu + sigma * norm_quantile_pair(u, uc),
        }
    }

    /// Image of the real line's part where G puts mass, as (F(lo), F(hi)).
    fn range(&self, inner: &Inner) -> (f64, f64) {
        let (lo, hi) = inner.support();
        let a = if lo.is_finite() { self.eval(lo).0 } else { 0.0 };
        let b = if hi.is_finite() { self.eval(hi).0 } else { 1.0 };
        (a, b)
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Outer::Cauchy { theta } => theta > 0.0,
            Outer::Exp { lambda } => lambda > 0.0,
            Outer::Normal { mu, sigma } => mu.is_finite() && sigma > 0.0,
        };
        positive_check(ok, self)
    }
}

impl Inner {
    /// (G(x), 1 - G(x)).
    fn eval(&self, x: f64) -> Pair {
        match *self {
            Inner::Gompertz { eta, nu } => {
                if x <= 0.0 {
                    return (0.0, 1.0);
                }
                let h = eta * (nu * x).exp_m1();
                (-(-h).exp_m1(), (-h).exp())
            }
            Inner::HalfNormal { sigma } => {
                if x <= 0.0 {
                    return (0.0, 1.0);
                }
                let z = x / sigma;
                let tail = 2.0 * norm_cdf(-z);
                (1.0 - tail, tail)
            }
            Inner::Laplace { mu, scale } => {
                let z = (x - mu) / scale;
                if z <= 0.0 {
                    let lower = 0.5 * z.exp();
                    (lower, 1.0 - lower)
                } else {
                    let upper = 0.5 * (-z).exp();
                    (1.0 - upper, upper)
                }
            }
        }
    }

    /// G⁻¹ from a probability and its complement.
    fn quantile(&self, u: f64, uc: f64) -> f64 {
        match *self {
            Inner::Gompertz { eta, nu } => (neg_ln_complement(u, uc) / eta).ln_1p() / nu,
            Inner::HalfNormal { sigma } => {
                // G(x) = erf(x / (σ√2)). Near zero use the series of erf⁻¹,
                // elsewhere x = -σ Φ⁻¹(uc / 2).
                if u < 1e-3 {
                    let z = u * (PI.sqrt() / 2.0);
                    let w = PI * u * u;
                    sigma * std::f64::consts::SQRT_2 * z * (1.0 + w / 12.0 + 7.0 * w * w / 480.0)
                } else {
                    -sigma * norm_quantile(0.5 * uc)
                }
            }
            Inner::Laplace { mu, scale } => {
                if u <= 0.5 {
                    mu + scale * (2.0 * u).ln()
                } else {
                    mu - scale * (2.0 * uc).ln()
                }
            }
        }
    }

    fn support(&self) -> (f64, f64) {
        match self {
            Inner::Gompertz { .. } | Inner::HalfNormal { .. } => (0.0, f64::INFINITY),
            Inner::Laplace { .. } => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Inner::Gompertz { eta, nu } => eta > 0.0 && nu > 0.0,
            Inner::HalfNormal { sigma } => sigma > 0.0,
            Inner::Laplace { mu, scale } => mu.is_finite() && scale > 0.0,
        };
        positive_check(ok, self)
    }
}

fn positive_check(ok: bool, what: &dyn fmt::Display) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!(
            "{what}: scale and shape parameters must be positive and finite"
        )))
    }
}

/// Truncated normal helper: standardised bounds and normalising mass.
struct Trunc {
    mu: f64,
    sigma: f64,
    lo: f64,
    mass: f64,
}

impl Trunc {
    fn new(mu: f64, sigma: f64) -> Self {
        let a = -mu / sigma;
        let b = (1.0 - mu) / sigma;
        // Work in the tail that keeps precision.
        let (lo, hi) = (norm_cdf(a), norm_cdf(b));
        let mass = if a > 0.0 {
            norm_cdf(-a) - norm_cdf(-b)
        } else {
            hi - lo
        };
        Self { mu, sigma, lo, mass }
    }

    fn z(&self, t: f64) -> f64 {
        (t - self.mu) / self.sigma
    }

    fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= 1.0 {
            return 1.0;
        }
        ((norm_cdf(self.z(t)) - self.lo) / self.mass).clamp(0.0, 1.0)
    }

    fn survival(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        if t >= 1.0 {
            return 0.0;
        }
        ((norm_cdf(-self.z(t)) - norm_cdf(-self.z(1.0))) / self.mass).clamp(0.0, 1.0)
    }

    fn pdf(&self, x: f64) -> f64 {
        norm_pdf(self.z(x)) / (self.sigma * self.mass)
    }

    /// E[X 1{X ≥ t}] = (μ P(X ≥ t)·mass + σ(φ(z_t) - φ(z_1))) / mass.
    fn partial_mean(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        if t >= 1.0 {
            return 0.0;
        }
        self.mu * self.survival(t)
            + self.sigma * (norm_pdf(self.z(t)) - norm_pdf(self.z(1.0))) / self.mass
    }

    fn draw(&self, rng: &mut StreamRng) -> f64 {
        let u = rng::open01(rng);
        let p = self.lo + u * self.mass;
        (self.mu + self.sigma * norm_quantile(p)).clamp(0.0, 1.0)
    }
}

fn beta_partial_mean(t: f64, p: BetaParams) -> f64 {
    let t = t.clamp(0.0, 1.0);
    p.mean() * (1.0 - reg_inc_beta_raw(t, p.alpha + 1.0, p.beta))
}

impl AlternativeSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Beta(p) => BetaParams::new(p.alpha, p.beta).map(|_| ()),
            Self::TruncNormal { mu, sigma } | Self::LogitNormal { mu, sigma } => {
                positive_check(mu.is_finite() && sigma > 0.0 && sigma.is_finite(), self)
            }
            Self::BetaNormal { p, beta, mu, sigma } => {
                if !(p > 0.0 && p < 1.0) {
                    return Err(Error::InvalidParams(format!(
                        "{self}: mixing probability must lie in (0, 1)"
                    )));
                }
                BetaParams::new(beta.alpha, beta.beta)?;
                positive_check(mu.is_finite() && sigma > 0.0 && sigma.is_finite(), self)
            }
            Self::Compose(f, g) => {
                f.validate()?;
                g.validate()
            }
        }
    }

    /// Closed interval outside of which the law has no mass.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::Compose(f, g) => f.range(g),
            _ => (0.0, 1.0),
        }
    }

    /// One variate.
    pub fn draw(&self, rng: &mut StreamRng) -> f64 {
        match *self {
            Self::Beta(p) => draw_beta(rng, p),
            Self::TruncNormal { mu, sigma } => Trunc::new(mu, sigma).draw(rng),
            Self::BetaNormal { p, beta, mu, sigma } => {
                let u: f64 = rng::open01(rng);
                if u <= p {
                    draw_beta(rng, beta)
                } else {
                    Trunc::new(mu, sigma).draw(rng)
                }
            }
            Self::LogitNormal { mu, sigma } => {
                logistic_pair(mu + sigma * rng::standard_normal(rng)).0
            }
            Self::Compose(f, g) => {
                let u = rng::open01(rng);
                f.eval(g.quantile(u, 1.0 - u)).0
            }
        }
    }

    /// P(X ≤ t).
    pub fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= 1.0 {
            return 1.0;
        }
        match *self {
            Self::Beta(p) => reg_inc_beta_raw(t, p.alpha, p.beta),
            Self::TruncNormal { mu, sigma } => Trunc::new(mu, sigma).cdf(t),
            Self::BetaNormal { p, beta, mu, sigma } => {
                p * reg_inc_beta_raw(t, beta.alpha, beta.beta)
                    + (1.0 - p) * Trunc::new(mu, sigma).cdf(t)
            }
            Self::LogitNormal { mu, sigma } => norm_cdf(((t / (1.0 - t)).ln() - mu) / sigma),
            Self::Compose(f, g) => g.eval(f.quantile(t, 1.0 - t)).0,
        }
    }

    /// P(X ≥ t), computed directly in the upper tail.
    pub fn survival(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        if t >= 1.0 {
            return 0.0;
        }
        match *self {
            Self::Beta(p) => reg_inc_beta_raw(1.0 - t, p.beta, p.alpha),
            Self::TruncNormal { mu, sigma } => Trunc::new(mu, sigma).survival(t),
            Self::BetaNormal { p, beta, mu, sigma } => {
                p * reg_inc_beta_raw(1.0 - t, beta.beta, beta.alpha)
                    + (1.0 - p) * Trunc::new(mu, sigma).survival(t)
            }
            Self::LogitNormal { mu, sigma } => norm_cdf(-((t / (1.0 - t)).ln() - mu) / sigma),
            Self::Compose(f, g) => g.eval(f.quantile(t, 1.0 - t)).1,
        }
    }

    /// E[X 1{X ≥ t}]. Closed form for beta, TN and their mixture. The
    /// logit-normal and composed laws are increasing transforms of a normal
    /// or uniform variable, so the event becomes a half-line there and the
    /// mean is integrated on that scale.
    pub fn partial_mean(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        if t >= 1.0 {
            return 0.0;
        }
        let rule = GaussLegendre::order64();
        match *self {
            Self::Beta(p) => beta_partial_mean(t, p),
            Self::TruncNormal { mu, sigma } => Trunc::new(mu, sigma).partial_mean(t),
            Self::BetaNormal { p, beta, mu, sigma } => {
                p * beta_partial_mean(t, beta) + (1.0 - p) * Trunc::new(mu, sigma).partial_mean(t)
            }
            Self::LogitNormal { mu, sigma } => {
                let zt = if t > 0.0 {
                    ((t / (1.0 - t)).ln() - mu) / sigma
                } else {
                    f64::NEG_INFINITY
                };
                let mut breaks = vec![zt.max(-12.0)];
                breaks.extend((-24..=24).map(|k| k as f64 * 0.5).filter(|&z| z > zt));
                breaks
                    .windows(2)
                    .map(|w| {
                        rule.integrate(
                            |z| norm_pdf(z) * logistic_pair(mu + sigma * z).0,
                            w[0],
                            w[1],
                        )
                    })
                    .sum()
            }
            Self::Compose(f, g) => {
                // X = F(G⁻¹(U)) with U uniform, and X ≥ t exactly when U ≥ G(F⁻¹(t)).
                let ut = self.cdf(t);
                let mut breaks = vec![ut];
                breaks.extend((1..=16).map(|k| k as f64 / 16.0).filter(|&u| u > ut));
                let mut integrand = |u: f64, uc: f64| f.eval(g.quantile(u, uc)).0;
                rule.integrate_pieces(&mut integrand, &breaks, 8.0)
            }
        }
    }

    pub fn mean(&self) -> f64 {
        self.partial_mean(0.0)
    }

    /// E[h(X, 1 - X)], with the pair passed accurately so that logarithms of
    /// either half can be taken near the endpoints.
    pub fn expect<F: FnMut(f64, f64) -> f64>(&self, mut h: F) -> f64 {
        self.expect_dyn(&mut h)
    }

    fn expect_dyn(&self, h: &mut dyn FnMut(f64, f64) -> f64) -> f64 {
        let rule = GaussLegendre::order64();
        match *self {
            Self::Beta(p) => {
                let power = endpoint_power(p.alpha.min(p.beta));
                let mut f = |x: f64, xc: f64| {
                    let d = crate::beta_model::pdf_raw(x, xc, p);
                    if d == 0.0 || !d.is_finite() {
                        0.0
                    } else {
                        d * h(x, xc)
                    }
                };
                let breaks: Vec<f64> = (0..=8).map(|k| k as f64 / 8.0).collect();
                rule.integrate_pieces(&mut f, &breaks, power)
            }
            Self::TruncNormal { mu, sigma } => {
                let tn = Trunc::new(mu, sigma);
                let breaks: Vec<f64> = (0..=8).map(|k| k as f64 / 8.0).collect();
                rule.integrate_pieces(&mut |x, xc| tn.pdf(x) * h(x, xc), &breaks, 6.0)
            }
            Self::BetaNormal { p, beta, mu, sigma } => {
                p * Self::Beta(beta).expect_dyn(h)
                    + (1.0 - p) * Self::TruncNormal { mu, sigma }.expect_dyn(h)
            }
            Self::LogitNormal { mu, sigma } => {
                let breaks: Vec<f64> = (-24..=24).map(|k| k as f64 * 0.5).collect();
                breaks
                    .windows(2)
                    .map(|w| {
                        rule.integrate(
                            |z| {
                                let (x, xc) = logistic_pair(mu + sigma * z);
                                norm_pdf(z) * h(x, xc)
                            },
                            w[0],
                            w[1],
                        )
                    })
                    .sum()
            }
            Self::Compose(f, g) => {
                // Integrate over the inner probability scale u = G(x).
                let breaks: Vec<f64> = (0..=16).map(|k| k as f64 / 16.0).collect();
                let mut integrand = |u: f64, uc: f64| {
                    let (x, xc) = f.eval(g.quantile(u, uc));
                    h(x, xc)
                };
                rule.integrate_pieces(&mut integrand, &breaks, 8.0)
            }
        }
    }

    /// (E ln X, E ln(1 - X)).
    pub fn log_moments(&self) -> (f64, f64) {
        (
            self.expect(|x, _| x.ln()),
            self.expect(|_, xc| xc.ln()),
        )
    }

    /// The alternatives of the simulation tables, in table order.
    pub fn table_battery() -> Vec<AlternativeSpec> {
        [
            "B(0.5,0.5)",
            "B(1,1)",
            "B(2,2)",
            "B(0.5,1.5)",
            "B(0.5,3)",
            "B(1.5,0.5)",
            "B(3,0.5)",
            "BN(0.25,0.5,0.5,0.25,0.25)",
            "BN(0.5,0.5,0.5,0.25,0.25)",
            "BN(0.75,0.5,0.5,0.25,0.25)",
            "BN(0.25,2,2,0.25,0.25)",
            "BN(0.25,1.5,0.5,0.25,0.25)",
            "TN(0.25,0.25)",
            "TN(0.5,0.25)",
            "TN(0.25,0.5)",
            "LT(3,2)",
            "LT(1,2)",
            "LT(0.5,3)",
            "C(1)oGO(2,1)",
            "EXP(1)oHN(1)",
            "N(0,1)oL(2,0.5)",
        ]
        .iter()
        .map(|s| s.parse().expect("battery specs are valid"))
        .collect()
    }
}

/// `n` i.i.d. draws from `spec`; deterministic in `seed`.
pub fn sample_alternative(spec: &AlternativeSpec, n: usize, seed: u64) -> Result<Sample> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let mut rng = rng::stream(seed);
    Ok(Sample::from_unchecked(
        (0..n).map(|_| spec.draw(&mut rng)).collect(),
    ))
}

pub fn alternative_cdf(spec: &AlternativeSpec, t: f64) -> f64 {
    spec.cdf(t)
}

pub fn alternative_partial_mean(spec: &AlternativeSpec, t: f64) -> f64 {
    spec.partial_mean(t)
}

impl fmt::Display for Outer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outer::Cauchy { theta } => write!(f, "C({theta})"),
            Outer::Exp { lambda } => write!(f, "EXP({lambda})"),
            Outer::Normal { mu, sigma } => write!(f, "N({mu},{sigma})"),
        }
    }
}

impl fmt::Display for Inner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Inner::Gompertz { eta, nu } => write!(f, "GO({eta},{nu})"),
            Inner::HalfNormal { sigma } => write!(f, "HN({sigma})"),
            Inner::Laplace { mu, scale } => write!(f, "L({mu},{scale})"),
        }
    }
}

impl fmt::Display for AlternativeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Beta(p) => write!(f, "B({},{})", p.alpha, p.beta),
            Self::TruncNormal { mu, sigma } => write!(f, "TN({mu},{sigma})"),
            Self::BetaNormal { p, beta, mu, sigma } => {
                write!(f, "BN({p},{},{},{mu},{sigma})", beta.alpha, beta.beta)
            }
            Self::LogitNormal { mu, sigma } => write!(f, "LT({mu},{sigma})"),
            Self::Compose(o, i) => write!(f, "{o}o{i}"),
        }
    }
}

/// One `NAME(args)` term with the character offset where it starts.
struct Term {
    name: String,
    args: Vec<f64>,
    start: usize,
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn new(src: &str) -> Self {
        Self {
            chars: src.chars().collect(),
            pos: 0,
        }
    }

    fn err(&self, position: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            position,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn term(&mut self) -> Result<Term> {
        self.skip_ws();
        let start = self.pos;
        let mut name = String::new();
        while let Some(c) = self.peek().filter(char::is_ascii_alphabetic) {
            name.push(c.to_ascii_uppercase());
            self.pos += 1;
        }
        if name.is_empty() {
            return Err(self.err(start, "expected a distribution name"));
        }
        self.skip_ws();
        if self.peek() != Some('(') {
            return Err(self.err(self.pos, format!("expected '(' after {name}")));
        }
        self.pos += 1;
        let mut args = Vec::new();
        loop {
            self.skip_ws();
            let at = self.pos;
            let mut num = String::new();
            while let Some(c) = self
                .peek()
                .filter(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'))
            {
                num.push(c);
                self.pos += 1;
            }
            let v: f64 = num
                .parse()
                .map_err(|_| self.err(at, format!("expected a number in {name}(...)")))?;
            args.push(v);
            self.skip_ws();
            match self.peek() {
                Some(',') => self.pos += 1,
                Some(')') => {
                    self.pos += 1;
                    break;
                }
                _ => return Err(self.err(self.pos, "expected ',' or ')'")),
            }
        }
        Ok(Term { name, args, start })
    }

    fn arity(&self, t: &Term, want: usize) -> Result<()> {
        if t.args.len() == want {
            Ok(())
        } else {
            Err(self.err(
                t.start,
                format!(
                    "{} takes {want} parameter{}, got {}",
                    t.name,
                    if want == 1 { "" } else { "s" },
                    t.args.len()
                ),
            ))
        }
    }

    fn parse(mut self) -> Result<AlternativeSpec> {
        let first = self.term()?;
        self.skip_ws();
        let spec = match self.peek() {
            None => self.single(first)?,
            Some('o') | Some('O') | Some('∘') => {
                self.pos += 1;
                let second = self.term()?;
                self.skip_ws();
                if self.peek().is_some() {
                    return Err(self.err(self.pos, "unexpected trailing input"));
                }
                let outer = self.outer(&first)?;
                let inner = self.inner(&second)?;
                AlternativeSpec::Compose(outer, inner)
            }
            Some(_) => return Err(self.err(self.pos, "unexpected trailing input")),
        };
        spec.validate().map_err(|e| match e {
            Error::InvalidParams(m) => self.err(0, m),
            other => other,
        })?;
        Ok(spec)
    }

    fn single(&self, t: Term) -> Result<AlternativeSpec> {
        let a = &t.args;
        Ok(match t.name.as_str() {
            "B" => {
                self.arity(&t, 2)?;
                AlternativeSpec::Beta(
                    BetaParams::new(a[0], a[1]).map_err(|e| self.err(t.start, e.to_string()))?,
                )
            }
            "TN" => {
                self.arity(&t, 2)?;
                AlternativeSpec::TruncNormal { mu: a[0], sigma: a[1] }
            }
            "BN" => {
                self.arity(&t, 5)?;
                AlternativeSpec::BetaNormal {
                    p: a[0],
                    beta: BetaParams::new(a[1], a[2])
                        .map_err(|e| self.err(t.start, e.to_string()))?,
                    mu: a[3],
                    sigma: a[4],
                }
            }
            "LT" => {
                self.arity(&t, 2)?;
                AlternativeSpec::LogitNormal { mu: a[0], sigma: a[1] }
            }
            "C" | "EXP" | "N" => {
                return Err(self.err(
                    t.start,
                    format!("{} is an outer distribution function; write e.g. {}(...)oGO(2,1)", t.name, t.name),
                ))
            }
            other => return Err(self.err(t.start, format!("unknown distribution '{other}'"))),
        })
    }

    fn outer(&self, t: &Term) -> Result<Outer> {
        let a = &t.args;
        Ok(match t.name.as_str() {
            "C" => {
                self.arity(t, 1)?;
                Outer::Cauchy { theta: a[0] }
            }
            "EXP" => {
                self.arity(t, 1)?;
                Outer::Exp { lambda: a[0] }
            }
            "N" => {
                self.arity(t, 2)?;
                Outer::Normal { mu: a[0], sigma: a[1] }
            }
            other => {
                return Err(self.err(
                    t.start,
                    format!("'{other}' cannot be an outer distribution (use C, EXP or N)"),
                ))
            }
        })
    }

    fn inner(&self, t: &Term) -> Result<Inner> {
        let a = &t.args;
        Ok(match t.name.as_str() {
            "GO" => {
                self.arity(t, 2)?;
                Inner::Gompertz { eta: a[0], nu: a[1] }
            }
            "HN" => {
                self.arity(t, 1)?;
                Inner::HalfNormal { sigma: a[0] }
            }
            "L" => {
                self.arity(t, 2)?;
                Inner::Laplace { mu: a[0], scale: a[1] }
            }
            other => {
                return Err(self.err(
                    t.start,
                    format!("'{other}' cannot be an inner law (use GO, HN or L)"),
                ))
            }
        })
    }
}

impl FromStr for AlternativeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Parser::new(s).parse()
    }
}

impl Serialize for AlternativeSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for AlternativeSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::adaptive;

    fn spec(s: &str) -> AlternativeSpec {
        s.parse().unwrap()
    }

    fn sup_distance(spec: &AlternativeSpec, n: usize, seed: u64) -> f64 {
        let s = sample_alternative(spec, n, seed).unwrap().sorted();
        let nf = n as f64;
        let mut d: f64 = 0.0;
        let mut i = 0;
        while i < s.len() {
            let x = s[i];
            let mut j = i;
            while j < s.len() && s[j] == x {
                j += 1;
            }
            let f = spec.cdf(x);
            d = d.max((j as f64 / nf - f).abs()).max((f - i as f64 / nf).abs());
            i = j;
        }
        d
    }

    #[test]
    fn parse_and_display_round_trip() {
        for alt in AlternativeSpec::table_battery() {
            let text = alt.to_string();
            assert_eq!(text.parse::<AlternativeSpec>().unwrap(), alt, "{text}");
        }
        assert_eq!(spec("C(1)∘GO(2,1)"), spec("C(1)oGO(2,1)"));
        assert_eq!(spec(" lt( 3 , 2 ) "), spec("LT(3,2)"));
        assert_eq!(AlternativeSpec::table_battery().len(), 21);
    }

    #[test]
    fn parse_errors_have_positions() {
        let e = "BN(0.25)".parse::<AlternativeSpec>().unwrap_err();
        match e {
            Error::Parse { position, message } => {
                assert_eq!(position, 0);
                assert!(message.contains("5 parameters"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        let e = "B(2,".parse::<AlternativeSpec>().unwrap_err();
        assert!(matches!(e, Error::Parse { position: 4, .. }), "{e:?}");
        let e = "C(1)oXY(1)".parse::<AlternativeSpec>().unwrap_err();
        assert!(matches!(e, Error::Parse { position: 5, .. }), "{e:?}");
        assert!("B(2,3)x".parse::<AlternativeSpec>().is_err());
        assert!("TN(0.5,-1)".parse::<AlternativeSpec>().is_err());
        assert!("BN(1.5,1,1,0.5,0.1)".parse::<AlternativeSpec>().is_err());
        assert!("B(0,1)".parse::<AlternativeSpec>().is_err());
    }

    #[test]
    fn partial_means_match_survival_integral() {
        // E[X 1{X ≥ t}] = t P(X ≥ t) + ∫_t^1 P(X ≥ y) dy.
        for alt in AlternativeSpec::table_battery() {
            for k in 0..=20 {
                let t = k as f64 / 20.0;
                let oracle = t * alt.survival(t) + adaptive(&mut |y| alt.survival(y), t, 1.0, 1e-14);
                let pm = alt.partial_mean(t);
                assert!((pm - oracle).abs() < 1e-11, "{alt} at {t}: {pm} vs {oracle}");
            }
        }
    }

    #[test]
    fn boundary_identities() {
        for alt in AlternativeSpec::table_battery() {
            assert_eq!(alt.cdf(0.0), 0.0);
            assert_eq!(alt.cdf(1.0), 1.0);
            assert_eq!(alt.partial_mean(1.0), 0.0);
            let m = alt.mean();
            assert!((alt.partial_mean(0.0) - m).abs() < 1e-15);
            // Mean by the survival integral, independent of the closed forms.
            let by_survival = adaptive(&mut |y| alt.survival(y), 0.0, 1.0, 1e-13);
            assert!((m - by_survival).abs() < 1e-9, "{alt}: {m} vs {by_survival}");
            // cdf and survival are complementary.
            for t in [0.05, 0.3, 0.5, 0.77, 0.99] {
                assert!((alt.cdf(t) + alt.survival(t) - 1.0).abs() < 1e-12, "{alt} at {t}");
            }
            // The expectation operator integrates to one.
            assert!((alt.expect(|_, _| 1.0) - 1.0).abs() < 1e-10, "{alt}");
        }
    }

    #[test]
    fn truncated_normal_cdf_definition() {
        let (mu, s) = (0.25, 0.5);
        let alt = AlternativeSpec::TruncNormal { mu, sigma: s };
        let z = norm_cdf((1.0 - mu) / s) - norm_cdf(-mu / s);
        for t in [0.1, 0.4, 0.9] {
            let want = (norm_cdf((t - mu) / s) - norm_cdf(-mu / s)) / z;
            assert!((alt.cdf(t) - want).abs() < 1e-14);
        }
    }

    #[test]
    fn samplers_match_their_cdfs() {
        let n = 100_000;
        let bound = 3.0 / (n as f64).sqrt();
        for (k, alt) in AlternativeSpec::table_battery().iter().enumerate() {
            let d = sup_distance(alt, n, 40 + k as u64);
            assert!(d < bound, "{alt}: {d}");
        }
        let d = sup_distance(&spec("TN(0.5,0.25)"), n, 1);
        assert!(d < 0.005, "{d}");
    }

    #[test]
    fn mixture_limits() {
        let near_beta = spec("BN(0.999999999999,2,5,0.25,0.25)");
        let beta = spec("B(2,5)");
        let xs = sample_alternative(&near_beta, 100_000, 3).unwrap().sorted();
        let nf = xs.len() as f64;
        let d = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = beta.cdf(x);
                ((i + 1) as f64 / nf - f).max(f - i as f64 / nf)
            })
            .fold(0.0, f64::max);
        assert!(d < 3.0 / nf.sqrt(), "{d}");
    }

    #[test]
    fn logit_normal_symmetry_and_ranges() {
        let xs = sample_alternative(&spec("LT(0,2)"), 1_000_000, 5).unwrap();
        assert!((xs.mean() - 0.5).abs() < 0.003);
        let ys = sample_alternative(&spec("EXP(1)oHN(1)"), 100_000, 6).unwrap();
        assert!(ys.values().iter().all(|&y| (0.0..1.0).contains(&y)));
        let zs = sample_alternative(&spec("LT(3,2)"), 100_000, 7).unwrap();
        assert!(zs.values().iter().all(|&z| (0.0..=1.0).contains(&z)));
        let (lo, hi) = spec("C(1)oGO(2,1)").support();
        assert_eq!((lo, hi), (0.5, 1.0));
    }

    #[test]
    fn determinism() {
        let alt = spec("BN(0.5,0.5,0.5,0.25,0.25)");
        assert_eq!(
            sample_alternative(&alt, 50, 9).unwrap(),
            sample_alternative(&alt, 50, 9).unwrap()
        );
    }

    #[test]
    fn partial_means_match_monte_carlo() {
        let n = 10_000_000;
        for (k, text) in ["LT(3,2)", "C(1)oGO(2,1)", "BN(0.25,0.5,0.5,0.25,0.25)"].iter().enumerate() {
            let alt = spec(text);
            let xs = sample_alternative(&alt, n, 100 + k as u64).unwrap();
            for t in [0.1, 0.5, 0.8, 0.95] {
                let mc = xs.values().iter().filter(|&&x| x >= t).sum::<f64>() / n as f64;
                let exact = alt.partial_mean(t);
                assert!((mc - exact).abs() < 0.002, "{text} at {t}: {mc} vs {exact}");
            }
        }
    }

    #[test]
    fn log_moments_match_monte_carlo() {
        for (k, alt) in AlternativeSpec::table_battery().iter().enumerate() {
            let xs = sample_alternative(alt, 400_000, 900 + k as u64).unwrap();
            let n = xs.len() as f64;
            let l1: Vec<f64> = xs.values().iter().map(|x| x.ln()).collect();
            let l2: Vec<f64> = xs.values().iter().map(|x| (-x).ln_1p()).collect();
            let (e1, e2) = alt.log_moments();
            for (v, e) in [(l1, e1), (l2, e2)] {
                let m = v.iter().sum::<f64>() / n;
                let sd = (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n).sqrt();
                assert!((m - e).abs() < 5.0 * sd / n.sqrt() + 1e-9, "{alt}: {m} vs {e}");
            }
        }
    }
}
