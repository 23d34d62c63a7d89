//! Gauss–Legendre quadrature on [0, 1] sub-intervals.
//!
//! Integrands over the unit interval often carry algebraic or logarithmic
//! singularities at 0 and 1 (beta densities, `ln x` scores). Pieces touching
//! an endpoint are integrated after the substitution `x = h·u^p`, which turns
//! `x^(a-1)` into the smooth-enough `u^(pa-1)`. Integrands receive both `x` and
//! `1 - x`, the latter computed without cancellation near 1.

use std::sync::OnceLock;

/// Nodes and weights of an n-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "quadrature order must be positive");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Shared 64-point rule.
    pub fn order64() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(64))
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped onto [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, half * w))
    }

    /// ∫_a^b f(x) dx.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// ∫_lo^hi f(x, 1-x) dx for `0 <= lo <= hi <= 1`, substituting with
    /// exponent `power` at whichever of the global endpoints 0 and 1 the piece
    /// touches.
    pub fn integrate_unit<F: FnMut(f64, f64) -> f64>(
        &self,
        f: &mut F,
        lo: f64,
        hi: f64,
        power: f64,
    ) -> f64 {
        let mut total = 0.0;
        self.visit_unit(lo, hi, power, &mut |x, xc, w| total += w * f(x, xc));
        total
    }

    /// The (x, 1 - x, weight) triples used by
    /// [`integrate_unit`](Self::integrate_unit).
    pub fn unit_nodes(&self, lo: f64, hi: f64, power: f64) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::with_capacity(2 * self.order());
        self.visit_unit(lo, hi, power, &mut |x, xc, w| out.push((x, xc, w)));
        out
    }

    fn visit_unit(&self, lo: f64, hi: f64, power: f64, emit: &mut dyn FnMut(f64, f64, f64)) {
        if hi <= lo {
            return;
        }
        let p = power.max(1.0);
        if lo <= 0.0 && hi >= 1.0 {
            self.visit_unit(0.0, 0.5, p, emit);
            self.visit_unit(0.5, 1.0, p, emit);
            return;
        }
        if lo <= 0.0 && p > 1.0 {
            // x = hi * u^p, dx = hi * p * u^(p-1) du
            for (u, w) in self.mapped(0.0, 1.0) {
                let up = u.powf(p - 1.0);
                let x = hi * up * u;
                emit(x, 1.0 - x, w * hi * p * up);
            }
            return;
        }
        if hi >= 1.0 && p > 1.0 {
            let span = 1.0 - lo;
            for (u, w) in self.mapped(0.0, 1.0) {
                let up = u.powf(p - 1.0);
                let xc = span * up * u;
                emit(1.0 - xc, xc, w * span * p * up);
            }
            return;
        }
        for (x, w) in self.mapped(lo, hi) {
            emit(x, 1.0 - x, w);
        }
    }

    /// Sum of [`integrate_unit`](Self::integrate_unit) over consecutive
    /// pieces of a sorted breakpoint list.
    pub fn integrate_pieces<F: FnMut(f64, f64) -> f64>(
        &self,
        f: &mut F,
        breaks: &[f64],
        power: f64,
    ) -> f64 {
        breaks
            .windows(2)
            .map(|w| self.integrate_unit(f, w[0], w[1], power))
            .sum()
    }
}

/// Legendre polynomial P_n(x) and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Endpoint substitution exponent suited to a weight behaving like
/// `x^(shape - 1)` near the endpoint.
pub fn endpoint_power(shape: f64) -> f64 {
    (4.0 / shape).ceil().clamp(2.0, 30.0)
}

/// Adaptive bisection driven by a 32-point / two-half 32-point comparison.
pub fn adaptive<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, tol: f64) -> f64 {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    let rule = RULE.get_or_init(|| GaussLegendre::new(32));
    let whole = rule.integrate(&mut *f, a, b);
    adaptive_step(rule, f, a, b, whole, tol, 0)
}

fn adaptive_step<F: FnMut(f64) -> f64>(
    rule: &GaussLegendre,
    f: &mut F,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> f64 {
    let mid = 0.5 * (a + b);
    let left = rule.integrate(&mut *f, a, mid);
    let right = rule.integrate(&mut *f, mid, b);
    let both = left + right;
    if depth >= 40 || (both - whole).abs() <= tol {
        return both;
    }
    adaptive_step(rule, f, a, mid, left, 0.5 * tol, depth + 1)
        + adaptive_step(rule, f, mid, b, right, 0.5 * tol, depth + 1)
}
