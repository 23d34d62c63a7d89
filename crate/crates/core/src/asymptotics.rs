//! Limit theory of T_n: the centred summand h(x, s), its covariance kernel,
//! Nyström approximations of the kernel's eigenvalues, and the limit
//! Δ_{α,β} of T_n / n under a fixed alternative.
//!
//! With c = α + β,
//!
//! h(x, s) = (c x - α) 1{x ≥ s} + ℓ(x)ᵀ Υ(s) - g(s),
//! g(s)    = s^α (1 - s)^β / B(α, β),
//! ℓ(x)    = I⁻¹ ∇ log f(x; α, β),
//! Υ(s)    = E[(X - 1, X)ᵀ 1{X ≥ s}] - ∇g(s),
//!
//! and K(s, t) = E[h(X, s) h(X, t)] under X ~ B(α, β).

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::alternatives::AlternativeSpec;
use crate::beta_model::{fisher_inverse_raw, pdf_raw, solve_likelihood_equations, BetaParams};
use crate::error::{domain, Error, Result};
use crate::exec::Exec;
use crate::quadrature::{endpoint_power, GaussLegendre};
use crate::specfun::{digamma_raw, ln_beta_raw, reg_inc_beta_raw};

/// Parameters at which the kernel is built and the quadrature order used for
/// the expectation over X.
#[derive(Debug, Clone)]
pub struct KernelContext {
    params: BetaParams,
    rule: GaussLegendre,
    fisher_inv: [[f64; 2]; 2],
    /// Ψ(α+β) - Ψ(α), Ψ(α+β) - Ψ(β).
    psi_shift: [f64; 2],
    power: f64,
}

impl KernelContext {
    pub fn new(params: BetaParams, order: usize) -> Result<Self> {
        let params = BetaParams::new(params.alpha, params.beta)?;
        if order < 8 {
            return Err(Error::InvalidParams(format!(
                "quadrature order must be at least 8, got {order}"
            )));
        }
        let (a, b) = (params.alpha, params.beta);
        let dab = digamma_raw(a + b);
        Ok(Self {
            params,
            rule: GaussLegendre::new(order),
            fisher_inv: fisher_inverse_raw(params),
            psi_shift: [dab - digamma_raw(a), dab - digamma_raw(b)],
            power: endpoint_power(a.min(b)),
        })
    }

    pub fn params(&self) -> BetaParams {
        self.params
    }

    pub fn order(&self) -> usize {
        self.rule.order()
    }

    fn ell_pair(&self, x: f64, xc: f64) -> [f64; 2] {
        let s = [self.psi_shift[0] + x.ln(), self.psi_shift[1] + xc.ln()];
        mat_vec(&self.fisher_inv, s)
    }

    /// Precomputed (Υ(s), g(s)) for one index point.
    fn anchor(&self, s: f64) -> Anchor {
        Anchor {
            s,
            upsilon: upsilon_raw(s, self.params),
            g: g_raw(s, 1.0 - s, self.params),
        }
    }

    /// E[h(X, s) h(X, t)] by quadrature split at s and t.
    fn kernel_anchored(&self, u: &Anchor, v: &Anchor) -> f64 {
        let (lo, hi) = if u.s <= v.s { (u, v) } else { (v, u) };
        let (a, c) = (self.params.alpha, self.params.alpha + self.params.beta);
        let mut f = |x: f64, xc: f64| {
            let d = pdf_raw(x, xc, self.params);
            if d == 0.0 || !d.is_finite() {
                return 0.0;
            }
            let l = self.ell_pair(x, xc);
            let y = c * x - a;
            let hu = if x >= lo.s { y } else { 0.0 } + dot(l, lo.upsilon) - lo.g;
            let hv = if x >= hi.s { y } else { 0.0 } + dot(l, hi.upsilon) - hi.g;
            d * hu * hv
        };
        let mut breaks: Vec<f64> = [0.0, lo.s, 0.5, hi.s, 1.0]
            .into_iter()
            .filter(|&p| (0.0..=1.0).contains(&p))
            .collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        self.rule.integrate_pieces(&mut f, &breaks, self.power)
    }

    /// E[h(X, s)], which vanishes identically.
    pub fn centring(&self, s: f64) -> f64 {
        let u = self.anchor(s);
        let (a, c) = (self.params.alpha, self.params.alpha + self.params.beta);
        let mut f = |x: f64, xc: f64| {
            let d = pdf_raw(x, xc, self.params);
            if d == 0.0 || !d.is_finite() {
                return 0.0;
            }
            let l = self.ell_pair(x, xc);
            d * (if x >= s { c * x - a } else { 0.0 } + dot(l, u.upsilon) - u.g)
        };
        let mut breaks = vec![0.0, 0.5, 1.0];
        if s > 0.0 && s < 1.0 && s != 0.5 {
            breaks.push(s);
            breaks.sort_by(f64::total_cmp);
        }
        self.rule.integrate_pieces(&mut f, &breaks, self.power)
    }

    /// h(x, s) for a single observation.
    pub fn h(&self, x: f64, s: f64) -> Result<f64> {
        check_open(x, "h")?;
        check_unit(s, "h")?;
        let u = self.anchor(s);
        let (a, c) = (self.params.alpha, self.params.alpha + self.params.beta);
        let l = self.ell_pair(x, 1.0 - x);
        Ok(if x >= s { c * x - a } else { 0.0 } + dot(l, u.upsilon) - u.g)
    }
}

struct Anchor {
    s: f64,
    upsilon: [f64; 2],
    g: f64,
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn mat_vec(m: &[[f64; 2]; 2], v: [f64; 2]) -> [f64; 2] {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

fn check_unit(t: f64, function: &'static str) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(domain(function, format!("argument must lie in [0, 1], got {t}")))
    }
}

fn check_open(x: f64, function: &'static str) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(domain(function, format!("argument must lie in (0, 1), got {x}")))
    }
}

fn g_raw(t: f64, tc: f64, p: BetaParams) -> f64 {
    if t <= 0.0 || tc <= 0.0 {
        return 0.0;
    }
    (p.alpha * t.ln() + p.beta * tc.ln() - ln_beta_raw(p.alpha, p.beta)).exp()
}

fn g_grad_raw(t: f64, p: BetaParams) -> [f64; 2] {
    let g = g_raw(t, 1.0 - t, p);
    if g == 0.0 {
        return [0.0, 0.0];
    }
    let dab = digamma_raw(p.alpha + p.beta);
    [
        g * (t.ln() - digamma_raw(p.alpha) + dab),
        g * ((-t).ln_1p() - digamma_raw(p.beta) + dab),
    ]
}

fn upsilon_raw(t: f64, p: BetaParams) -> [f64; 2] {
    let (a, b) = (p.alpha, p.beta);
    let ex = p.mean() * (1.0 - reg_inc_beta_raw(t, a + 1.0, b));
    let surv = 1.0 - reg_inc_beta_raw(t, a, b);
    let dg = g_grad_raw(t, p);
    [ex - surv - dg[0], ex - dg[1]]
}

/// g(t) = t^α (1 - t)^β / B(α, β).
pub fn g_fn(t: f64, p: BetaParams) -> Result<f64> {
    check_unit(t, "g_fn")?;
    Ok(g_raw(t, 1.0 - t, p))
}

/// (∂g/∂α, ∂g/∂β); zero at the endpoints.
pub fn g_grad(t: f64, p: BetaParams) -> Result<[f64; 2]> {
    check_unit(t, "g_grad")?;
    Ok(g_grad_raw(t, p))
}

/// ∇ log f(x; α, β).
pub fn score(x: f64, p: BetaParams) -> Result<[f64; 2]> {
    check_open(x, "score")?;
    let dab = digamma_raw(p.alpha + p.beta);
    Ok([
        dab - digamma_raw(p.alpha) + x.ln(),
        dab - digamma_raw(p.beta) + (-x).ln_1p(),
    ])
}

/// ℓ(x) = I⁻¹ ∇ log f(x; α, β).
pub fn ell(x: f64, p: BetaParams) -> Result<[f64; 2]> {
    let s = score(x, p)?;
    Ok(mat_vec(&fisher_inverse_raw(p), s))
}

/// Υ(t) with E[X 1{X ≥ t}] = α/(α+β) (1 - F_(α+1,β)(t)).
pub fn upsilon(t: f64, p: BetaParams) -> Result<[f64; 2]> {
    check_unit(t, "upsilon")?;
    Ok(upsilon_raw(t, p))
}

/// Covariance kernel K(s, t).
pub fn kernel(s: f64, t: f64, ctx: &KernelContext) -> Result<f64> {
    check_unit(s, "kernel")?;
    check_unit(t, "kernel")?;
    Ok(ctx.kernel_anchored(&ctx.anchor(s), &ctx.anchor(t)))
}

/// How the kernel operator is discretised on the Gauss–Legendre grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum EigenMethod {
    /// Point evaluation: (√wᵢ K(xᵢ, xⱼ) √wⱼ).
    Nystrom,
    /// Rayleigh–Ritz on the Lagrange basis of the grid, with the kernel's
    /// diagonal kink integrated exactly.
    #[default]
    Galerkin,
}

impl std::fmt::Display for EigenMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Nystrom => "nystrom",
            Self::Galerkin => "galerkin",
        })
    }
}

impl std::str::FromStr for EigenMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nystrom" => Ok(Self::Nystrom),
            "galerkin" => Ok(Self::Galerkin),
            _ => Err(Error::InvalidParams(format!(
                "unknown eigen method '{s}' (use nystrom or galerkin)"
            ))),
        }
    }
}

/// Eigenvalues of a discretisation of the kernel operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    pub method: EigenMethod,
    /// Nonincreasing, tiny negatives clipped to zero.
    pub eigenvalues: Vec<f64>,
    pub grid_size: usize,
    /// Σ wᵢ K(xᵢ, xᵢ), the quadrature estimate of ∫ K(s, s) ds = Σ λⱼ.
    pub trace: f64,
    /// Trace of the discretised matrix (equal to `trace` for Nyström).
    pub matrix_trace: f64,
    /// Smallest eigenvalue before clipping.
    pub min_raw: f64,
    /// Number of eigenvalues in [-1e-8, 0) set to zero.
    pub clipped: usize,
    /// False if some eigenvalue was below -1e-8.
    pub psd: bool,
}

pub const CLIP_TOLERANCE: f64 = 1e-8;

/// Eigenvalues with the chosen discretisation on an `m`-point grid.
pub fn eigenvalues(
    ctx: &KernelContext,
    m: usize,
    method: EigenMethod,
    exec: &Exec,
) -> Result<EigenResult> {
    match method {
        EigenMethod::Nystrom => nystrom_eigenvalues(ctx, m, exec),
        EigenMethod::Galerkin => galerkin_eigenvalues(ctx, m, exec),
    }
}

fn check_grid(m: usize) -> Result<()> {
    if m < 8 {
        return Err(Error::InvalidParams(format!(
            "grid size must be at least 8, got {m}"
        )));
    }
    Ok(())
}

fn diagonal_trace(ctx: &KernelContext, nodes: &[f64], weights: &[f64], exec: &Exec) -> f64 {
    exec.map(nodes.len(), |i| {
        let a = ctx.anchor(nodes[i]);
        weights[i] * ctx.kernel_anchored(&a, &a)
    })
    .iter()
    .sum()
}

fn finish(
    method: EigenMethod,
    mat: DMatrix<f64>,
    trace: f64,
) -> Result<EigenResult> {
    if mat.iter().any(|v| !v.is_finite()) {
        return Err(Error::NoConvergence {
            routine: "kernel quadrature",
            iterations: 0,
        });
    }
    let m = mat.nrows();
    let matrix_trace = mat.trace();
    let eig = SymmetricEigen::new(mat);
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    let min_raw = values.last().copied().unwrap_or(0.0);
    let mut clipped = 0;
    for v in values.iter_mut() {
        if *v < 0.0 && *v >= -CLIP_TOLERANCE {
            *v = 0.0;
            clipped += 1;
        }
    }
    Ok(EigenResult {
        method,
        eigenvalues: values,
        grid_size: m,
        trace,
        matrix_trace,
        min_raw,
        clipped,
        psd: min_raw >= -CLIP_TOLERANCE,
    })
}

/// Eigenvalues of (√wᵢ K(xᵢ, xⱼ) √wⱼ) on an `m`-point Gauss–Legendre grid.
pub fn nystrom_eigenvalues(ctx: &KernelContext, m: usize, exec: &Exec) -> Result<EigenResult> {
    check_grid(m)?;
    let grid = GaussLegendre::new(m);
    let (nodes, weights): (Vec<f64>, Vec<f64>) = grid.mapped(0.0, 1.0).unzip();
    let anchors: Vec<Anchor> = nodes.iter().map(|&x| ctx.anchor(x)).collect();
    let rows = exec.map(m, |i| {
        (i..m)
            .map(|j| ctx.kernel_anchored(&anchors[i], &anchors[j]))
            .collect::<Vec<f64>>()
    });
    let sw: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let mut mat = DMatrix::<f64>::zeros(m, m);
    let mut trace = 0.0;
    for (i, row) in rows.iter().enumerate() {
        trace += weights[i] * row[0];
        for (k, &kij) in row.iter().enumerate() {
            let j = i + k;
            let v = sw[i] * kij * sw[j];
            mat[(i, j)] = v;
            mat[(j, i)] = v;
        }
    }
    finish(EigenMethod::Nystrom, mat, trace)
}

/// Legendre polynomials P_0..P_{n} at v ∈ [-1, 1].
fn legendre_all(n: usize, v: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(n + 1);
    p.push(1.0);
    if n >= 1 {
        p.push(v);
    }
    for k in 2..=n {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * v * p[k - 1] - (kf - 1.0) * p[k - 2]) / kf;
        p.push(next);
    }
    p
}

/// Rayleigh–Ritz eigenvalues on span{L_1, …, L_m}, the Lagrange polynomials
/// of the `m`-point Gauss–Legendre grid on [0, 1].
///
/// The kernel splits as K(s, t) = M(max(s, t)) + S(s, t) with
/// M(u) = E[(cX - α)² 1{X ≥ u}] = ∫_u^1 (cv - α)² f(v) dv and the rank-three
/// S(s, t) = -Υ(s)ᵀ I⁻¹ Υ(t) - g(s) g(t). Writing
/// M(max(s, t)) = ∫ m(v) 1{v ≥ s} 1{v ≥ t} dv with m(v) = (cv - α)² f(v)
/// gives the Galerkin entries ∫ m(v) Aᵢ(v) Aⱼ(v) dv with Aᵢ(v) = ∫₀^v Lᵢ,
/// free of the diagonal kink. Gauss–Legendre exactness makes the mass
/// matrix diag(w), so the problem is symmetric after scaling by w^{-1/2}.
pub fn galerkin_eigenvalues(ctx: &KernelContext, m: usize, exec: &Exec) -> Result<EigenResult> {
    check_grid(m)?;
    let p = ctx.params;
    let (a, c) = (p.alpha, p.alpha + p.beta);
    let grid = GaussLegendre::new(m);
    let (nodes, weights): (Vec<f64>, Vec<f64>) = grid.mapped(0.0, 1.0).unzip();

    // Lᵢ(x) = wᵢ Σ_k (2k+1) P_k(yᵢ) P_k(2x - 1), yᵢ = 2xᵢ - 1.
    let node_leg: Vec<Vec<f64>> = nodes.iter().map(|&x| legendre_all(m, 2.0 * x - 1.0)).collect();

    // Fine composite rule for the outer integrals.
    let pieces = 16;
    let rule = GaussLegendre::order64();
    let power = endpoint_power(a.min(p.beta));
    let fine: Vec<(f64, f64, f64)> = (0..pieces)
        .flat_map(|k| {
            let (lo, hi) = (k as f64 / pieces as f64, (k + 1) as f64 / pieces as f64);
            rule.unit_nodes(lo, hi, power)
        })
        .collect();

    // Coefficient form: Aᵢ(v) = wᵢ Σ_k (2k+1) P_k(yᵢ) Q_k(v) with
    // Q_0(v) = v and Q_k(v) = (P_{k+1}(2v-1) - P_{k-1}(2v-1)) / (2(2k+1)).
    // Likewise Bᵢ[φ] = ∫ φ Lᵢ = wᵢ Σ_k (2k+1) P_k(yᵢ) ∫ φ P_k(2v-1) dv.
    let q = fine.len();
    let rows = exec.map(q, |r| {
        let (v, vc, w) = fine[r];
        let leg = legendre_all(m, 2.0 * v - 1.0);
        let mut qk = Vec::with_capacity(m);
        qk.push(v);
        for k in 1..m {
            qk.push((leg[k + 1] - leg[k - 1]) / (2.0 * (2 * k + 1) as f64));
        }
        let dens = pdf_raw(v, vc, p);
        let mv = if dens.is_finite() { (c * v - a).powi(2) * dens } else { 0.0 };
        let ups = upsilon_raw(v, p);
        let g = g_raw(v, vc, p);
        (qk, leg, w, mv, [ups[0], ups[1], g])
    });

    // Legendre moments of Υ_α, Υ_β and g.
    let mut moments = vec![[0.0f64; 3]; m];
    for (_, leg, w, _, phi) in &rows {
        for k in 0..m {
            for (mom, ph) in moments[k].iter_mut().zip(phi) {
                *mom += w * ph * leg[k];
            }
        }
    }
    let to_nodes = |coef: &dyn Fn(usize) -> f64, i: usize| -> f64 {
        weights[i]
            * (0..m)
                .map(|k| (2 * k + 1) as f64 * node_leg[i][k] * coef(k))
                .sum::<f64>()
    };
    let b: Vec<[f64; 3]> = (0..m)
        .map(|i| {
            [
                to_nodes(&|k| moments[k][0], i),
                to_nodes(&|k| moments[k][1], i),
                to_nodes(&|k| moments[k][2], i),
            ]
        })
        .collect();

    // A at every fine node, scaled by √(w m(v)).
    let mut amat = DMatrix::<f64>::zeros(q, m);
    for (r, (qk, _, w, mv, _)) in rows.iter().enumerate() {
        let scale = (w * mv).sqrt();
        if scale == 0.0 {
            continue;
        }
        for i in 0..m {
            let ai = weights[i]
                * (0..m)
                    .map(|k| (2 * k + 1) as f64 * node_leg[i][k] * qk[k])
                    .sum::<f64>();
            amat[(r, i)] = scale * ai;
        }
    }
    let mut gmat = amat.transpose() * &amat;
    let fi = ctx.fisher_inv;
    for i in 0..m {
        for j in 0..m {
            let ui = [b[i][0], b[i][1]];
            let uj = [b[j][0], b[j][1]];
            gmat[(i, j)] -= dot(ui, mat_vec(&fi, uj)) + b[i][2] * b[j][2];
        }
    }
    let mut mat = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let v = 0.5 * (gmat[(i, j)] + gmat[(j, i)]);
            mat[(i, j)] = v / (weights[i] * weights[j]).sqrt();
        }
    }
    let trace = diagonal_trace(ctx, &nodes, &weights, exec);
    finish(EigenMethod::Galerkin, mat, trace)
}

/// Δ_{α,β} = ∫₀¹ ((α+β) E[X 1{X≥t}] - α P(X≥t) - g(t))² dt under `alt`.
pub fn delta_discrepancy(alt: &AlternativeSpec, p: BetaParams) -> Result<f64> {
    alt.validate()?;
    let p = BetaParams::new(p.alpha, p.beta)?;
    let c = p.alpha + p.beta;
    let mut f = |t: f64, _: f64| {
        let d = c * alt.partial_mean(t) - p.alpha * alt.survival(t) - g_raw(t, 1.0 - t, p);
        d * d
    };
    let mut breaks: Vec<f64> = (0..=32).map(|k| k as f64 / 32.0).collect();
    let (lo, _) = alt.support();
    if lo > 0.0 && lo < 1.0 {
        breaks.push(lo);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
    }
    let power = endpoint_power(p.alpha.min(p.beta)).max(4.0);
    Ok(GaussLegendre::order64().integrate_pieces(&mut f, &breaks, power))
}

/// Limit of the maximum-likelihood estimate under `alt`: the solution of the
/// likelihood equations with population log-moments.
pub fn pseudo_true_params(alt: &AlternativeSpec) -> Result<BetaParams> {
    alt.validate()?;
    if let AlternativeSpec::Beta(p) = alt {
        return Ok(*p);
    }
    let (l1, l2) = alt.log_moments();
    if !(l1.is_finite() && l2.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "{alt}: E ln X or E ln(1 - X) is not finite"
        )));
    }
    let m = alt.mean();
    let second = alt.expect(|x, _| x * x);
    let v = second - m * m;
    let start = if v > 0.0 && v < m * (1.0 - m) {
        let k = m * (1.0 - m) / v - 1.0;
        BetaParams::new(m * k, (1.0 - m) * k).unwrap_or(BetaParams::new(1.0, 1.0)?)
    } else {
        BetaParams::new(1.0, 1.0)?
    };
    let fit = solve_likelihood_equations(l1, l2, start)?;
    Ok(fit.params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beta_model::{draw_beta, mle_fit};
    use crate::quadrature::adaptive;
    use crate::rng;
    use crate::specfun::{ln_beta_raw, reg_inc_beta_raw};
    use rand::Rng;

    fn params(a: f64, b: f64) -> BetaParams {
        BetaParams::new(a, b).unwrap()
    }

    /// E[X^k 1{X ≥ m}] under B(α, β).
    fn upper_moment(k: f64, m: f64, p: BetaParams) -> f64 {
        (ln_beta_raw(p.alpha + k, p.beta) - ln_beta_raw(p.alpha, p.beta)).exp()
            * (1.0 - reg_inc_beta_raw(m, p.alpha + k, p.beta))
    }

    /// K(s, t) = E[(cX - α)² 1{X ≥ max(s,t)}] - Υ(s)ᵀ I⁻¹ Υ(t) - g(s) g(t),
    /// from E[ℓ] = 0, E[ℓℓᵀ] = I⁻¹ and E[(cX - α) 1{X ≥ s} ∇log f] = -Υ(s).
    fn kernel_closed_form(s: f64, t: f64, p: BetaParams) -> f64 {
        let (a, c) = (p.alpha, p.alpha + p.beta);
        let m = s.max(t);
        let second = c * c * upper_moment(2.0, m, p) - 2.0 * a * c * upper_moment(1.0, m, p)
            + a * a * upper_moment(0.0, m, p);
        let us = upsilon(s, p).unwrap();
        let ut = upsilon(t, p).unwrap();
        let fi = fisher_inverse_raw(p);
        second - dot(us, mat_vec(&fi, ut)) - g_fn(s, p).unwrap() * g_fn(t, p).unwrap()
    }

    #[test]
    fn g_values() {
        let p = params(1.0, 1.0);
        assert!((g_fn(0.5, p).unwrap() - 0.25).abs() < 1e-15);
        assert!((g_fn(0.3, p).unwrap() - 0.21).abs() < 1e-15);
        assert_eq!(g_fn(0.0, params(0.3, 2.0)).unwrap(), 0.0);
        assert_eq!(g_grad(1.0, params(0.3, 2.0)).unwrap(), [0.0, 0.0]);
        assert!(g_fn(1.5, p).is_err());
    }

    #[test]
    fn g_grad_matches_finite_differences() {
        let mut rng = rng::stream(42);
        let h = 1e-5;
        for _ in 0..100 {
            let t: f64 = rng.gen_range(0.01..0.99);
            let (a, b) = (rng.gen_range(0.3..8.0), rng.gen_range(0.3..8.0));
            let grad = g_grad(t, params(a, b)).unwrap();
            let da = (g_fn(t, params(a + h, b)).unwrap() - g_fn(t, params(a - h, b)).unwrap()) / (2.0 * h);
            let db = (g_fn(t, params(a, b + h)).unwrap() - g_fn(t, params(a, b - h)).unwrap()) / (2.0 * h);
            assert!((grad[0] - da).abs() < 1e-6, "{t} {a} {b}: {} vs {da}", grad[0]);
            assert!((grad[1] - db).abs() < 1e-6, "{t} {a} {b}: {} vs {db}", grad[1]);
        }
    }

    #[test]
    fn score_and_ell() {
        let s = score(0.3, params(1.0, 1.0)).unwrap();
        assert!((s[0] - (1.0 + 0.3f64.ln())).abs() < 1e-14);
        assert!((s[1] - (1.0 + 0.7f64.ln())).abs() < 1e-14);
        let p = params(2.5, 0.7);
        let fi = fisher_inverse_raw(p);
        let sc = score(0.42, p).unwrap();
        let l = ell(0.42, p).unwrap();
        assert!((l[0] - (fi[0][0] * sc[0] + fi[0][1] * sc[1])).abs() < 1e-14);
        assert!((l[1] - (fi[1][0] * sc[0] + fi[1][1] * sc[1])).abs() < 1e-14);
        assert!(score(0.0, p).is_err());
    }

    #[test]
    fn score_has_mean_zero() {
        let p = params(2.0, 3.0);
        let mut r = rng::stream(3);
        let n = 1_000_000;
        let mut m = [0.0, 0.0];
        for _ in 0..n {
            let s = score(draw_beta(&mut r, p), p).unwrap();
            m[0] += s[0];
            m[1] += s[1];
        }
        let norm = ((m[0] / n as f64).powi(2) + (m[1] / n as f64).powi(2)).sqrt();
        assert!(norm < 0.005, "{norm}");
    }

    #[test]
    fn upsilon_endpoints() {
        let p = params(2.0, 3.0);
        let u0 = upsilon(0.0, p).unwrap();
        assert!((u0[0] + 0.6).abs() < 1e-15 && (u0[1] - 0.4).abs() < 1e-15);
        assert_eq!(upsilon(1.0, p).unwrap(), [0.0, 0.0]);
    }

    #[test]
    fn upsilon_matches_monte_carlo() {
        let mut r = rng::stream(17);
        let n = 1_000_000;
        for case in 0..4 {
            let p = params(r.gen_range(0.5..6.0), r.gen_range(0.5..6.0));
            let t: f64 = r.gen_range(0.05..0.95);
            let mut s = rng::stream(500 + case);
            let (mut e1, mut e2) = (0.0, 0.0);
            for _ in 0..n {
                let x = draw_beta(&mut s, p);
                if x >= t {
                    e1 += x - 1.0;
                    e2 += x;
                }
            }
            let dg = g_grad(t, p).unwrap();
            let mc = [e1 / n as f64 - dg[0], e2 / n as f64 - dg[1]];
            let u = upsilon(t, p).unwrap();
            assert!((u[0] - mc[0]).abs() < 0.003 && (u[1] - mc[1]).abs() < 0.003, "{u:?} vs {mc:?}");
        }
    }

    #[test]
    fn kernel_is_symmetric_and_matches_closed_form() {
        let mut r = rng::stream(23);
        for (a, b) in [(1.0, 1.0), (2.0, 2.0), (0.5, 3.0), (6.0, 1.5)] {
            let p = params(a, b);
            let ctx = KernelContext::new(p, 64).unwrap();
            for _ in 0..25 {
                let s: f64 = r.gen();
                let t: f64 = r.gen();
                let k1 = kernel(s, t, &ctx).unwrap();
                let k2 = kernel(t, s, &ctx).unwrap();
                assert!((k1 - k2).abs() < 1e-10);
                let closed = kernel_closed_form(s, t, p);
                assert!((k1 - closed).abs() < 1e-8, "({a},{b}) at ({s},{t}): {k1} vs {closed}");
            }
        }
    }

    #[test]
    fn kernel_matches_monte_carlo() {
        let p = params(2.0, 3.0);
        let ctx = KernelContext::new(p, 64).unwrap();
        let mut r = rng::stream(8);
        let n = 1_000_000;
        let (s, t) = (0.3, 0.55);
        let mut acc = 0.0;
        for _ in 0..n {
            let x = draw_beta(&mut r, p);
            acc += ctx.h(x, s).unwrap() * ctx.h(x, t).unwrap();
        }
        let mc = acc / n as f64;
        let k = kernel(s, t, &ctx).unwrap();
        assert!((mc - k).abs() < 0.005, "{mc} vs {k}");
    }

    #[test]
    fn centring_identity() {
        for (a, b) in [(1.0, 1.0), (2.0, 2.0), (0.5, 3.0), (3.0, 0.5)] {
            let ctx = KernelContext::new(params(a, b), 64).unwrap();
            for i in 0..50 {
                let s = (i as f64 + 0.5) / 50.0;
                let c = ctx.centring(s);
                assert!(c.abs() < 1e-8, "({a},{b}) s={s}: {c}");
            }
        }
    }

    #[test]
    fn nystrom_properties() {
        for (a, b) in [(1.0, 1.0), (2.0, 2.0), (0.5, 3.0)] {
            let ctx = KernelContext::new(params(a, b), 64).unwrap();
            let e = nystrom_eigenvalues(&ctx, 32, &Exec::sequential()).unwrap();
            assert!(e.psd, "({a},{b}) min {}", e.min_raw);
            assert!(e.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
            let sum: f64 = e.eigenvalues.iter().sum();
            assert!((sum - e.trace).abs() < 1e-8, "{sum} vs {}", e.trace);
        }
    }

    #[test]
    fn galerkin_properties() {
        for (a, b) in [(1.0, 1.0), (2.0, 2.0), (0.5, 3.0), (0.3, 0.3)] {
            let ctx = KernelContext::new(params(a, b), 64).unwrap();
            let small = galerkin_eigenvalues(&ctx, 24, &Exec::sequential()).unwrap();
            let e = galerkin_eigenvalues(&ctx, 48, &Exec::sequential()).unwrap();
            assert!(e.psd && e.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
            // Nested polynomial spaces: Ritz values can only grow.
            for k in 0..5 {
                assert!(small.eigenvalues[k] <= e.eigenvalues[k] * (1.0 + 1e-10));
            }
            let rel = (small.eigenvalues[0] / e.eigenvalues[0] - 1.0).abs();
            assert!(rel < 1e-5, "({a},{b}) {rel:e}");
            let sum: f64 = e.eigenvalues.iter().sum();
            assert!((sum - e.matrix_trace).abs() < 1e-10);
            assert!(sum <= e.trace);
            let oracle = adaptive(&mut |s| kernel_closed_form(s, s, params(a, b)), 0.0, 1.0, 1e-12);
            assert!((e.trace - oracle).abs() < 1e-6, "({a},{b}) {} vs {oracle}", e.trace);
            // Point evaluation converges to the same leading eigenvalue.
            let ny = nystrom_eigenvalues(&ctx, 48, &Exec::sequential()).unwrap();
            assert!((ny.eigenvalues[0] / e.eigenvalues[0] - 1.0).abs() < 5e-3);
        }
    }

    #[test]
    fn pseudo_true_fixed_points() {
        let b = pseudo_true_params(&"B(2,3)".parse().unwrap()).unwrap();
        assert!((b.alpha - 2.0).abs() < 1e-6 && (b.beta - 3.0).abs() < 1e-6);
        let u = pseudo_true_params(&"B(1,1)".parse().unwrap()).unwrap();
        assert_eq!((u.alpha, u.beta), (1.0, 1.0));
        // The solver itself, fed with beta log-moments.
        for (a, b) in [(1.0, 1.0), (0.7, 4.0), (2.0, 3.0)] {
            let (l1, l2) = AlternativeSpec::Beta(params(a, b)).log_moments();
            let fit = solve_likelihood_equations(l1, l2, params(3.0, 0.5)).unwrap();
            assert!((fit.params.alpha - a).abs() < 1e-6 && (fit.params.beta - b).abs() < 1e-6);
        }
    }

    #[test]
    fn pseudo_true_matches_large_sample_mle() {
        let alt: AlternativeSpec = "TN(0.5,0.25)".parse().unwrap();
        let p = pseudo_true_params(&alt).unwrap();
        let s = crate::alternatives::sample_alternative(&alt, 1_000_000, 12).unwrap();
        let q = mle_fit(&s).unwrap();
        assert!((p.alpha - q.alpha).abs() < 0.02 && (p.beta - q.beta).abs() < 0.02, "{p} vs {q}");
    }

    #[test]
    fn delta_vanishes_under_the_model() {
        for (a, b) in [(1.0, 1.0), (2.0, 3.0), (0.5, 0.5), (6.0, 2.0)] {
            let p = params(a, b);
            let d = delta_discrepancy(&AlternativeSpec::Beta(p), p).unwrap();
            assert!(d.abs() < 1e-10, "({a},{b}): {d}");
        }
        let d = delta_discrepancy(&AlternativeSpec::Beta(params(2.0, 3.0)), params(2.5, 3.0)).unwrap();
        assert!(d > 1e-6);
    }

    #[test]
    fn delta_positive_on_alternatives() {
        for alt in AlternativeSpec::table_battery() {
            if matches!(alt, AlternativeSpec::Beta(_)) {
                continue;
            }
            let p = pseudo_true_params(&alt).unwrap();
            let d = delta_discrepancy(&alt, p).unwrap();
            assert!(d > 1e-6, "{alt}: {d}");
        }
    }

    #[test]
    fn tn_over_n_tracks_delta_for_moderate_n() {
        // A quick version of the large-n consistency check: at n = 2000 the
        // mean of T_n/n over a few samples is within 25% of Δ.
        let alt: AlternativeSpec = "LT(3,2)".parse().unwrap();
        let p = pseudo_true_params(&alt).unwrap();
        let delta = delta_discrepancy(&alt, p).unwrap();
        let n = 2000;
        let mean: f64 = (0..5)
            .map(|seed| {
                let s = crate::alternatives::sample_alternative(&alt, n, seed).unwrap();
                let q = mle_fit(&s).unwrap();
                crate::gof_tests::t_statistic(&s, q).unwrap() / n as f64
            })
            .sum::<f64>()
            / 5.0;
        assert!((mean - delta).abs() < 0.25 * delta, "{mean} vs {delta}");
    }
}
