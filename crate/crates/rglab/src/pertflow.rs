//! The second-order renormalisation group map Φ_pt for the hierarchical
//! model, its rescaled flow, the critical stable manifold, the derivative
//! flow, and the susceptibility asymptotics.

use crate::error::{Error, Result};
use crate::hierarchical::{self, MomentTable};
use crate::quad::{brent, Legendre};
use crate::ModelParams;

/// γ = (n+2)/(n+8).
pub fn gamma_exponent(n: usize) -> f64 {
    (n as f64 + 2.0) / (n as f64 + 8.0)
}

/// Flow coefficients at one scale, primed (unscaled) and rescaled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coeffs {
    pub j: usize,
    pub n: usize,
    pub c: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub eta_p: f64,
    pub beta_p: f64,
    pub xi_p: f64,
    pub kappa_g_p: f64,
    pub kappa_nu_p: f64,
    pub kappa_gnu_p: f64,
    pub kappa_gg_p: f64,
    pub kappa_nunu_p: f64,
    pub eta: f64,
    pub beta: f64,
    pub xi: f64,
    pub kappa_g: f64,
    pub kappa_mu: f64,
    pub kappa_gmu: f64,
    pub kappa_gg: f64,
    pub kappa_mumu: f64,
    pub vartheta: f64,
    pub l: usize,
    pub d: usize,
}

impl Coeffs {
    /// Coefficients from a moment table; c1 is nonzero only for the final covariance.
    pub fn from_moments(p: &ModelParams, m: &MomentTable<f64>, c1: f64) -> Self {
        let nf = p.n as f64;
        let (c, c2, c3, c4) = (m.c, m.c2, m.c3, m.c4);
        let eta_p = (nf + 2.0) * c;
        let beta_p = (nf + 8.0) * c2;
        let xi_p = 2.0 * (nf + 2.0) * c3 + (nf + 2.0).powi(2) * c * c2;
        let kappa_g_p = 0.25 * nf * (nf + 2.0) * c * c;
        let kappa_nu_p = 0.5 * nf * c;
        let kappa_gnu_p = 0.5 * nf * (nf + 2.0) * c * c2;
        let kappa_gg_p = 0.25 * nf * (nf + 2.0) * (c4 + (nf + 2.0) * c * c * c2);
        let kappa_nunu_p = 0.25 * nf * c2;
        let l2j = p.lf().powi(2 * m.j as i32);
        let l4j = l2j * l2j;
        Self {
            j: m.j,
            n: p.n,
            c,
            c1,
            c2,
            c3,
            c4,
            eta_p,
            beta_p,
            xi_p,
            kappa_g_p,
            kappa_nu_p,
            kappa_gnu_p,
            kappa_gg_p,
            kappa_nunu_p,
            eta: l2j * eta_p,
            beta: beta_p,
            xi: l2j * xi_p,
            kappa_g: l4j * kappa_g_p,
            kappa_mu: l2j * kappa_nu_p,
            kappa_gmu: l2j * kappa_gnu_p,
            kappa_gg: l4j * kappa_gg_p,
            kappa_mumu: kappa_nunu_p,
            vartheta: hierarchical::vartheta(p.l, m.j, p.m2),
            l: p.l,
            d: p.d,
        }
    }

    /// s'_{τ²} = 4(g²(n+2)c + gν)c^{(1)}.
    pub fn s_tau2(&self, g: f64, nu: f64) -> f64 {
        4.0 * (g * g * (self.n as f64 + 2.0) * self.c + g * nu) * self.c1
    }

    /// s'_τ = (g²(n+2)²c² + 2gν(n+2)c + ν²)c^{(1)}.
    pub fn s_tau(&self, g: f64, nu: f64) -> f64 {
        let a = self.n as f64 + 2.0;
        (g * g * a * a * self.c * self.c + 2.0 * g * nu * a * self.c + nu * nu) * self.c1
    }

    pub fn gamma(&self) -> f64 {
        gamma_exponent(self.n)
    }
}

/// Coefficients for C_{j+1} in infinite volume (c^{(1)} = 0).
pub fn coeffs(j: usize, p: &ModelParams) -> Coeffs {
    let m = hierarchical::block_moments::<f64>(p.d, p.l, j, &p.m2);
    let mut k = Coeffs::from_moments(p, &m, 0.0);
    // rescaled coefficients from closed forms, free of overflow at large j
    let lf = p.lf();
    let ld = lf.powi(-(p.d as i32));
    let (e1, e3, e4) = (1.0 - ld, 1.0 - 3.0 * ld + 2.0 * ld * ld, 1.0 - 4.0 * ld + 6.0 * ld * ld - 3.0 * ld.powi(3));
    let r = if p.m2 == 0.0 { 1.0 } else { 1.0 / (1.0 + p.m2 * lf.powi(2 * j as i32)) };
    let a = (4 - p.d as i32) * j as i32;
    let (nf, n2) = (p.n as f64, p.n as f64 + 2.0);
    let s1 = lf.powi(a);
    let s2 = lf.powi(2 * a);
    k.eta = n2 * s1 * r * e1;
    k.beta = (nf + 8.0) * s1 * r * r * e1;
    k.xi = s2 * r.powi(3) * (2.0 * n2 * e3 + n2 * n2 * e1 * e1);
    k.kappa_g = 0.25 * nf * n2 * s2 * r * r * e1 * e1;
    k.kappa_mu = 0.5 * nf * s1 * r * e1;
    k.kappa_gmu = 0.5 * nf * n2 * s2 * r.powi(3) * e1 * e1;
    k.kappa_gg = 0.25 * nf * n2 * lf.powi(3 * a) * r.powi(4) * (e4 + n2 * e1.powi(3));
    k.kappa_mumu = 0.25 * nf * s1 * r * r * e1;
    k
}

/// Coefficients for the final covariance C_N̂ = m⁻² Q_N on a box of L^{dN} sites.
pub fn coeffs_final(p: &ModelParams) -> Result<Coeffs> {
    if !(p.m2 > 0.0) {
        return Err(Error::FinalNeedsMass);
    }
    let vol = p.lf().powi((p.d * p.big_n) as i32);
    let v = 1.0 / (p.m2 * vol);
    let m = MomentTable { j: p.big_n, c: v, c1: vol * v, c2: vol * v * v, c3: vol * v.powi(3), c4: vol * v.powi(4) };
    Ok(Coeffs::from_moments(p, &m, 1.0 / p.m2))
}

/// Coefficient table for scales 0..jmax.
pub fn coeff_table(p: &ModelParams, jmax: usize) -> Vec<Coeffs> {
    (0..jmax).map(|j| coeffs(j, p)).collect()
}

/// U = gτ² + ντ + u at scale j, with rescaled μ = L^{2j}ν and the τ³ coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingState {
    pub j: usize,
    pub u: f64,
    pub g: f64,
    pub nu: f64,
    pub w6: f64,
}

impl CouplingState {
    pub fn new(j: usize, u: f64, g: f64, nu: f64) -> Self {
        Self { j, u, g, nu, w6: 0.0 }
    }

    pub fn mu(&self, l: usize) -> f64 {
        (l as f64).powi(2 * self.j as i32) * self.nu
    }
}

/// The unrescaled map U ↦ U_pt, plus W₊ = −4c^{(1)}g²τ³.
pub fn phi_pt(u: &CouplingState, k: &Coeffs) -> CouplingState {
    let (g, nu) = (u.g, u.nu);
    let g_pt = g - k.beta_p * g * g - k.s_tau2(g, nu);
    let gb = (k.n as f64 + 2.0) * k.c2;
    let nu_pt = nu * (1.0 - gb * g) + k.eta_p * g - k.xi_p * g * g - k.s_tau(g, nu);
    let u_pt = u.u + k.kappa_g_p * g + k.kappa_nu_p * nu - k.kappa_gnu_p * g * nu - k.kappa_gg_p * g * g - k.kappa_nunu_p * nu * nu;
    CouplingState { j: u.j + 1, u: u_pt, g: g_pt, nu: nu_pt, w6: -4.0 * k.c1 * g * g }
}

/// Rescaled step (g, μ) ↦ (g − βg², L²(μ(1−γβg) + ηg − ξg²)).
pub fn flow_step(g: f64, mu: f64, k: &Coeffs) -> (f64, f64) {
    let l2 = (k.l * k.l) as f64;
    let gp = g - k.beta * g * g;
    let mup = l2 * (mu * (1.0 - k.gamma() * k.beta * g) + k.eta * g - k.xi * g * g);
    (gp, mup)
}

/// E_pt = L^d(κ_g g + κ_μ μ − κ_{gμ}gμ − κ_{gg}g² − κ_{μμ}μ²), for d = 4.
pub fn e_pt(g: f64, mu: f64, k: &Coeffs) -> f64 {
    (k.l as f64).powi(k.d as i32)
        * (k.kappa_g * g + k.kappa_mu * mu - k.kappa_gmu * g * mu - k.kappa_gg * g * g - k.kappa_mumu * mu * mu)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    LeftDomain,
    MaxScale,
}

/// A run of the rescaled flow. `u` is the unscaled per-site constant.
#[derive(Debug, Clone)]
pub struct FlowTrajectory {
    pub params: ModelParams,
    pub g: Vec<f64>,
    pub mu: Vec<f64>,
    pub u: Vec<f64>,
    pub coeffs: Vec<Coeffs>,
    pub termination: Termination,
    /// Direction of exit from the interval J_j when the run left the domain.
    pub exit_up: Option<bool>,
}

impl FlowTrajectory {
    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }

    /// Largest residual when each step is recomputed from the stored state.
    pub fn replay_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..self.len() - 1 {
            let (g1, m1) = flow_step(self.g[j], self.mu[j], &self.coeffs[j]);
            worst = worst.max((g1 - self.g[j + 1]).abs()).max((m1 - self.mu[j + 1]).abs());
        }
        worst
    }
}

/// Run the rescaled flow from (g₀, μ₀). With `window = Some((c0, gtilde))` the
/// run stops once |μ_j| leaves c0·ϑ_j·g̃_j.
pub fn run_flow(g0: f64, mu0: f64, p: &ModelParams, jmax: usize, window: Option<(f64, &[f64])>) -> FlowTrajectory {
    let mut g = vec![g0];
    let mut mu = vec![mu0];
    let mut u = vec![0.0];
    let mut cs = Vec::new();
    let mut termination = Termination::MaxScale;
    let mut exit_up = None;
    let lf = p.lf();
    for j in 0..jmax {
        let k = coeffs(j, p);
        let (gj, mj) = (g[j], mu[j]);
        let nu = mj * lf.powi(-2 * j as i32);
        let uj = u[j] + k.kappa_g_p * gj + k.kappa_nu_p * nu - k.kappa_gnu_p * gj * nu - k.kappa_gg_p * gj * gj - k.kappa_nunu_p * nu * nu;
        let (g1, m1) = flow_step(gj, mj, &k);
        cs.push(k);
        g.push(g1);
        mu.push(m1);
        u.push(uj);
        if !g1.is_finite() || !m1.is_finite() || g1 <= 0.0 && g0 > 0.0 {
            termination = Termination::LeftDomain;
            break;
        }
        if let Some((c0, gt)) = window {
            let jj = j + 1;
            let gtj = if jj < gt.len() { gt[jj] } else { *gt.last().unwrap() };
            let half = c0 * hierarchical::vartheta(p.l, jj, p.m2) * gtj;
            if m1 > half {
                termination = Termination::LeftDomain;
                exit_up = Some(true);
                break;
            }
            if m1 < -half {
                termination = Termination::LeftDomain;
                exit_up = Some(false);
                break;
            }
        }
        if p.m2 > 0.0 && k.vartheta < 1e-18 {
            termination = Termination::Converged;
            break;
        }
    }
    FlowTrajectory { params: *p, g, mu, u, coeffs: cs, termination, exit_up }
}

/// The g-flow alone, g_{j+1} = g_j − β_j g_j².
pub fn g_flow(g0: f64, p: &ModelParams, jmax: usize) -> Vec<f64> {
    let mut g = Vec::with_capacity(jmax + 1);
    g.push(g0);
    for j in 0..jmax {
        let b = coeffs(j, p).beta;
        let gj = g[j];
        g.push(gj - b * gj * gj);
    }
    g
}

/// A_j, t_j, and the products Π_{0,j}.
#[derive(Debug, Clone)]
pub struct SequenceAnalysis {
    pub g: Vec<f64>,
    pub a: Vec<f64>,
    pub t: Vec<f64>,
    /// Π_{0,j} = Π_{k=0}^{j} (1 − γβ_k g_k).
    pub pi: Vec<f64>,
    pub beta0: f64,
}

pub fn sequences(g0: f64, p: &ModelParams, jmax: usize) -> SequenceAnalysis {
    let g = g_flow(g0, p, jmax);
    let gam = gamma_exponent(p.n);
    let mut a = vec![0.0];
    let mut pi = Vec::with_capacity(jmax);
    let mut prod = 1.0;
    for j in 0..jmax {
        let b = coeffs(j, p).beta;
        a.push(a[j] + b);
        prod *= 1.0 - gam * b * g[j];
        pi.push(prod);
    }
    let t = a.iter().map(|aj| g0 / (1.0 + g0 * aj)).collect();
    let beta0 = (p.n as f64 + 8.0) * (1.0 - p.lf().powi(-(p.d as i32)));
    SequenceAnalysis { g, a, t, pi, beta0 }
}

/// μ̄₀ from the backward sum, with a tail estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackwardSum {
    pub mu0: f64,
    pub tail_bound: f64,
    pub terms: usize,
}

/// μ̄₀ = Σ_{l≥0} L^{−2l} Π_{0,l}^{−1} (−η_l ḡ_l + ξ_l ḡ_l²).
pub fn mu0_backward(g0: f64, p: &ModelParams, jmax: usize) -> Result<BackwardSum> {
    let gam = gamma_exponent(p.n);
    let l2 = p.lf() * p.lf();
    let mut g = g0;
    let mut scale = 1.0; // L^{−2l} Π_{0,l−1}^{−1}
    let mut sum = 0.0;
    let mut last = 0.0;
    let mut terms = 0;
    for l in 0..jmax {
        let k = coeffs(l, p);
        let a = 1.0 - gam * k.beta * g;
        if !(a > 0.0) || !g.is_finite() {
            return Err(Error::NonConvergent(format!("g-flow left the domain at scale {l}")));
        }
        let term = scale / a * (-k.eta * g + k.xi * g * g);
        sum += term;
        last = term;
        terms = l + 1;
        scale /= l2 * a;
        g -= k.beta * g * g;
        if term.abs() <= 1e-18 * sum.abs() && l > 2 {
            break;
        }
    }
    let ratio = 1.0 / (l2 * (1.0 - gam * (p.n as f64 + 8.0) * g).max(0.5));
    Ok(BackwardSum { mu0: sum, tail_bound: last.abs() * ratio / (1.0 - ratio), terms })
}

/// The backward sequence μ̄_j for j < jmax, from a single backward recursion
/// μ̄_j = (μ̄_{j+1}/L² − η_j g_j + ξ_j g_j²)/(1 − γβ_j g_j) started at μ̄ = 0
/// far above jmax.
pub fn mu_bar_sequence(g0: f64, p: &ModelParams, jmax: usize) -> Vec<f64> {
    let extra = 60;
    let total = jmax + extra;
    let g = g_flow(g0, p, total);
    let gam = gamma_exponent(p.n);
    let l2 = p.lf() * p.lf();
    let mut mu = vec![0.0; total + 1];
    for j in (0..total).rev() {
        let k = coeffs(j, p);
        mu[j] = (mu[j + 1] / l2 - k.eta * g[j] + k.xi * g[j] * g[j]) / (1.0 - gam * k.beta * g[j]);
    }
    mu.truncate(jmax + 1);
    mu
}

/// Stepwise replay of a backward sequence through the forward map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplayReport {
    pub max_rel_residual: f64,
    /// max_j |μ_j| / (c ϑ_j ḡ_j) for the constant c supplied.
    pub max_bound_ratio: f64,
}

pub fn replay_backward(g0: f64, mu_bar: &[f64], p: &ModelParams, c_bound: f64) -> ReplayReport {
    let jmax = mu_bar.len() - 1;
    let g = g_flow(g0, p, jmax);
    let mut res: f64 = 0.0;
    let mut ratio: f64 = 0.0;
    for j in 0..jmax {
        let k = coeffs(j, p);
        let (_, m1) = flow_step(g[j], mu_bar[j], &k);
        let scale = mu_bar[j + 1].abs().max(k.eta * g[j] * 1e-3).max(f64::MIN_POSITIVE);
        res = res.max((m1 - mu_bar[j + 1]).abs() / scale);
    }
    for j in 0..=jmax {
        let th = hierarchical::vartheta(p.l, j, p.m2);
        ratio = ratio.max(mu_bar[j].abs() / (c_bound * th * g[j]));
    }
    ReplayReport { max_rel_residual: res, max_bound_ratio: ratio }
}

/// Bleher–Sinai bisection for μ₀^c. `c0` is the half-width constant of J_j.
pub fn mu0_bisection(g0: f64, p: &ModelParams, jmax: usize, c0: f64) -> Result<f64> {
    let gt = g_flow(g0, p, jmax + 1);
    let side = |m0: f64| -> Option<bool> { run_flow(g0, m0, p, jmax, Some((c0, &gt))).exit_up };
    let w = (10.0 * c0 * g0).max(1.0);
    let (mut lo, mut hi) = (-w, w);
    if side(lo) != Some(false) || side(hi) != Some(true) {
        return Err(Error::NoBracket);
    }
    for _ in 0..200 {
        if hi - lo <= 1e-14 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match side(mid) {
            Some(true) => hi = mid,
            Some(false) => lo = mid,
            None => return Ok(mid),
        }
    }
    Ok(0.5 * (lo + hi))
}

/// dμ_j/dμ₀ = Π_{k<j} L²(1 − γβ_k g_k) along a trajectory.
pub fn dmu_dmu0(traj: &FlowTrajectory) -> Vec<f64> {
    let gam = gamma_exponent(traj.params.n);
    let l2 = traj.params.lf().powi(2);
    let mut out = vec![1.0];
    for (j, k) in traj.coeffs.iter().enumerate() {
        let prev = out[j];
        out.push(prev * l2 * (1.0 - gam * k.beta * traj.g[j]));
    }
    out
}

/// T₀(h) norm of U = gτ² + ντ + u.
pub fn t0_norm(u: &CouplingState, h: f64) -> f64 {
    0.25 * u.g.abs() * h.powi(4) + 0.5 * u.nu.abs() * h * h + u.u.abs()
}

/// Default k₀ = 1/(24(n+2)).
pub fn default_k0(n: usize) -> f64 {
    1.0 / (24.0 * (n as f64 + 2.0))
}

/// Membership of (g, ν) in the domain 𝒟_j, with ν given through μ = L^{2j}ν.
pub fn domain_check(g: f64, mu: f64, j: usize, gtilde: f64, p: &ModelParams, k0: f64) -> bool {
    let w = gtilde / (2.0 * k0);
    2.0 * k0 * gtilde < g && g < w && mu.abs() < w * p.lf().powi((4 - p.d as i32) * j as i32)
}

/// Leading small-g prediction and the effective-mass susceptibility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiPrediction {
    pub epsilon: f64,
    pub leading: f64,
    pub amplitude: f64,
    pub effective_mass_chi: f64,
    pub m2: f64,
    pub residual: f64,
}

/// A_{g,n} ≈ ((1−L^{−d})(n+8)g / log L)^γ.
pub fn chi_amplitude(g: f64, p: &ModelParams) -> f64 {
    let lf = p.lf();
    ((1.0 - lf.powi(-(p.d as i32))) * (p.n as f64 + 8.0) * g / lf.ln()).powf(gamma_exponent(p.n))
}

/// ν₀^c(m²) + m² − ν_c as a function of m².
pub fn bare_mass_gap(g: f64, m2: f64, nu_c: f64, p: &ModelParams, jmax: usize) -> Result<f64> {
    Ok(mu0_backward(g, &p.with_m2(m2), jmax)?.mu0 + m2 - nu_c)
}

pub fn chi_prediction(g: f64, epsilon: f64, p: &ModelParams) -> Result<ChiPrediction> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParam("epsilon must be positive".into()));
    }
    let jmax = 4000;
    let amplitude = chi_amplitude(g, p);
    let gam = gamma_exponent(p.n);
    let leading = amplitude / epsilon * (1.0 / epsilon).ln().powf(gam);
    let nu_c = mu0_backward(g, &p.with_m2(0.0), jmax)?.mu0;
    let f = |s: f64| bare_mass_gap(g, s.exp(), nu_c, p, jmax).map(|v| v - epsilon).unwrap_or(f64::NAN);
    let (mut a, mut b) = (epsilon.ln() - 10.0, epsilon.ln() + 5.0);
    while f(a) > 0.0 && a > -700.0 {
        a -= 10.0;
    }
    while f(b) < 0.0 && b < 10.0 {
        b += 5.0;
    }
    let s = brent(f, a, b, 1e-15, 300).ok_or(Error::NoBracket)?;
    let m2 = s.exp();
    let residual = (bare_mass_gap(g, m2, nu_c, p, jmax)? - epsilon).abs() / epsilon;
    Ok(ChiPrediction { epsilon, leading, amplitude, effective_mass_chi: 1.0 / m2, m2, residual })
}

/// Solution of dχ/dν = −Bχ²(log χ)^{−γ} critical at ν = 0, sampled on a grid.
#[derive(Debug, Clone)]
pub struct ChiOde {
    pub eps: Vec<f64>,
    pub chi: Vec<f64>,
    /// γ fitted from log(Bχε) = γ log log ε⁻¹.
    pub exponent: f64,
}

/// ν(χ) on the critical solution: (1/B)∫_{log χ}^∞ w^γ e^{−w} dw.
fn critical_nu(gamma: f64, b: f64, w0: f64) -> f64 {
    let rule = Legendre::new(40);
    let tail = rule.integrate_panels(0.0, 80.0, 16, |s| (w0 + s).powf(gamma) * (-s).exp());
    tail * (-w0).exp() / b
}

pub fn chi_ode_invert(gamma: f64, b: f64, eps_grid: &[f64]) -> Result<ChiOde> {
    if !(b > 0.0) || eps_grid.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidParam("B and every ε must be positive".into()));
    }
    let eps_min = eps_grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let eps_max = eps_grid.iter().cloned().fold(0.0, f64::max);
    // anchor at log χ = w_a, well above the grid in ν
    let mut w = 1.0;
    while critical_nu(gamma, b, w) < 10.0 * eps_max && w > 1e-3 {
        w *= 0.5;
    }
    let nu = critical_nu(gamma, b, w);
    // integrate dν/dw = −w^γ e^{−w}/B by RK4 in log ν
    let rhs = |w: f64, lnnu: f64| -> f64 { -w.powf(gamma) * (-w).exp() / (b * lnnu.exp()) };
    let mut lnnu = nu.ln();
    let h = 1e-3;
    let mut path_w = vec![w];
    let mut path_lnnu = vec![lnnu];
    while lnnu > eps_min.ln() - 1.0 {
        let k1 = rhs(w, lnnu);
        let k2 = rhs(w + 0.5 * h, lnnu + 0.5 * h * k1);
        let k3 = rhs(w + 0.5 * h, lnnu + 0.5 * h * k2);
        let k4 = rhs(w + h, lnnu + h * k3);
        lnnu += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        w += h;
        path_w.push(w);
        path_lnnu.push(lnnu);
        if w > 800.0 {
            return Err(Error::NonConvergent("ODE did not reach the smallest ε".into()));
        }
    }
    let mut chi = Vec::with_capacity(eps_grid.len());
    for &e in eps_grid {
        let le = e.ln();
        // path_lnnu is decreasing
        let i = path_lnnu.partition_point(|&v| v > le).clamp(1, path_lnnu.len() - 1);
        let (x0, x1) = (path_lnnu[i - 1], path_lnnu[i]);
        let t = (le - x0) / (x1 - x0);
        chi.push((path_w[i - 1] + t * (path_w[i] - path_w[i - 1])).exp());
    }
    // Bχε ~ (log ε⁻¹)^γ has no free amplitude, so fit through the origin
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (e, c) in eps_grid.iter().zip(&chi) {
        let x = (1.0 / e).ln().ln();
        sxy += x * (b * e * c).ln();
        sxx += x * x;
    }
    let exponent = sxy / sxx;
    Ok(ChiOde { eps: eps_grid.to_vec(), chi, exponent })
}

/// Log-spaced grid of `k` points between a and b.
pub fn log_grid(a: f64, b: f64, k: usize) -> Vec<f64> {
    (0..k).map(|i| (a.ln() + (b.ln() - a.ln()) * i as f64 / (k - 1) as f64).exp()).collect()
}
