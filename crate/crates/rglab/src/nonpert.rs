//! Exact function-level block recursion for the hierarchical model,
//! F_{j+1}(φ) = E[Π_b F_j(φ+ζ_b)], with susceptibility and four-point
//! observables from the final integral, and a brute-force oracle on tiny boxes.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;

use crate::hierarchical::{self, HierGeometry};
use crate::pertflow::{self, CouplingState};
use crate::quad::{linear_fit, Legendre, NormalRule};
use crate::rng;
use crate::{Error, ModelParams, Result};

/// Default number of radial grid nodes.
pub const DEFAULT_NODES: usize = 513;

/// A radial block function stored as ln F on a uniform grid in r = |φ|.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockFunction {
    pub j: usize,
    pub n: usize,
    pub rmax: f64,
    /// ln F(k·h), k = 0..nodes.
    pub log_values: Vec<f64>,
    /// ln F ≈ a + b r² + c r⁴ beyond rmax.
    pub tail: [f64; 3],
    /// Largest fraction of any node's integral that came from beyond the grid.
    pub tail_fraction: f64,
}

impl BlockFunction {
    pub fn from_log_values(j: usize, n: usize, rmax: f64, log_values: Vec<f64>) -> Result<Self> {
        if log_values.len() < 8 {
            return Err(Error::InvalidParam("need at least 8 grid nodes".into()));
        }
        if log_values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonConvergent(format!("non-finite ln F at scale {j}")));
        }
        let m = log_values.len() - 1;
        let h = rmax / m as f64;
        let rs: Vec<f64> = (m - 4..=m).map(|k| k as f64 * h).collect();
        let ys: Vec<f64> = log_values[m - 4..].to_vec();
        let tail = fit_even_quartic(&rs, &ys);
        Ok(Self { j, n, rmax, log_values, tail, tail_fraction: 0.0 })
    }

    /// Samples ln F = `logf(r)` on `nodes` points of [0, rmax].
    pub fn from_fn<F: Fn(f64) -> f64>(j: usize, n: usize, rmax: f64, nodes: usize, logf: F) -> Result<Self> {
        let h = rmax / (nodes - 1) as f64;
        Self::from_log_values(j, n, rmax, (0..nodes).map(|k| logf(k as f64 * h)).collect())
    }

    pub fn step(&self) -> f64 {
        self.rmax / (self.log_values.len() - 1) as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.log_values.len()).map(|k| k as f64 * h).collect()
    }

    fn at(&self, k: i64) -> f64 {
        self.log_values[k.unsigned_abs() as usize]
    }

    /// ln F(r) by 6-point Lagrange interpolation, even in r.
    pub fn log_value(&self, r: f64) -> f64 {
        let r = r.abs();
        if r > self.rmax {
            let r2 = r * r;
            return self.tail[0] + self.tail[1] * r2 + self.tail[2] * r2 * r2;
        }
        let m = (self.log_values.len() - 1) as i64;
        let u = r / self.step();
        let i = (u.floor() as i64).min(m - 1);
        let start = (i - 2).min(m - 5);
        let t = u - start as f64;
        let mut s = 0.0;
        for k in 0..6 {
            let mut w = 1.0;
            for q in 0..6 {
                if q != k {
                    w *= (t - q as f64) / (k as f64 - q as f64);
                }
            }
            s += w * self.at(start + k);
        }
        s
    }

    pub fn value(&self, r: f64) -> f64 {
        self.log_value(r).exp()
    }
}

fn fit_even_quartic(rs: &[f64], ys: &[f64]) -> [f64; 3] {
    let a = DMatrix::from_fn(rs.len(), 3, |i, k| rs[i].powi(2 * k as i32));
    let b = DVector::from_column_slice(ys);
    let svd = a.svd(true, true);
    let c = svd.solve(&b, 1e-14).unwrap_or_else(|_| DVector::zeros(3));
    [c[0], c[1], c[2]]
}

/// The exchangeable zero-sum Gaussian on one block: ζ_b = ξ_b − ξ̄ with ξ_b iid N(0, σ²I_n).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroSumGaussian {
    pub b: usize,
    pub n: usize,
    pub sigma2: f64,
}

impl ZeroSumGaussian {
    /// Fluctuation of C_{j+1}: σ² = γ_{j+1} L^{−dj}.
    pub fn for_scale(p: &ModelParams, j: usize) -> Self {
        let b = p.block_count();
        let c = hierarchical::c_diag(p.d, p.l, j, p.m2);
        Self { b, n: p.n, sigma2: c / (1.0 - 1.0 / b as f64) }
    }

    /// Per-component variance σ²(1 − 1/B).
    pub fn variance(&self) -> f64 {
        self.sigma2 * (1.0 - 1.0 / self.b as f64)
    }

    /// B vectors of n components, flattened block-major.
    pub fn sample<R: Rng + ?Sized>(&self, r: &mut R) -> Vec<f64> {
        let s = self.sigma2.sqrt();
        let mut v: Vec<f64> = (0..self.b * self.n).map(|_| s * rng::normal(r)).collect();
        for c in 0..self.n {
            let mean = (0..self.b).map(|b| v[b * self.n + c]).sum::<f64>() / self.b as f64;
            for b in 0..self.b {
                v[b * self.n + c] -= mean;
            }
        }
        v
    }
}

/// ln ∫ exp(h(z)) dz over [0, zmax]: the support where h is within 60 of its
/// scanned peak gets a composite Gauss–Legendre rule. Also returns the
/// fraction of the integral from z > zsplit.
fn log_integral<H: Fn(f64) -> f64>(h: &H, zmax: f64, zsplit: f64) -> (f64, f64) {
    let scan = 1200;
    let dz = zmax / scan as f64;
    let hs: Vec<f64> = (0..=scan).map(|i| h(i as f64 * dz)).collect();
    let peak = hs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let first = hs.iter().position(|&v| v > peak - 60.0).unwrap_or(0);
    let last = hs.iter().rposition(|&v| v > peak - 60.0).unwrap_or(scan);
    let lo = first.saturating_sub(1) as f64 * dz;
    let hi = (last + 1).min(scan) as f64 * dz;
    let rule = Legendre::new(20);
    let g = |z: f64| (h(z) - peak).exp();
    let split = zsplit.clamp(lo, hi);
    let panels = |a: f64, b: f64| ((64.0 * (b - a) / (hi - lo)).ceil() as usize).max(1);
    let left = if split > lo { rule.integrate_panels(lo, split, panels(lo, split), g) } else { 0.0 };
    let right = if split < hi { rule.integrate_panels(split, hi, panels(split, hi), g) } else { 0.0 };
    let total = left + right;
    (peak + total.ln(), if total > 0.0 { right / total } else { 0.0 })
}

/// One exact step F₊(φ) = E_{ζ∼N(0,c_j)}[F(φ+ζ)F(φ−ζ)] for n = 1, L^d = 2,
/// tabulated on [0, rmax_next].
pub fn rg_step_quadrature(f: &BlockFunction, p: &ModelParams, rmax_next: f64, nodes: usize) -> Result<BlockFunction> {
    if p.n != 1 || p.block_count() != 2 {
        return Err(Error::InvalidParam("quadrature engine needs n = 1 and L^d = 2".into()));
    }
    let c = hierarchical::c_diag(p.d, p.l, f.j, p.m2);
    let sd = c.sqrt();
    let zmax = 12.0 * sd;
    let norm = (2.0 / (2.0 * std::f64::consts::PI * c).sqrt()).ln();
    let h = rmax_next / (nodes - 1) as f64;
    let results: Vec<(f64, f64)> = (0..nodes)
        .into_par_iter()
        .map(|k| {
            let phi = k as f64 * h;
            let hz = |z: f64| -z * z / (2.0 * c) + f.log_value(phi + z) + f.log_value(phi - z);
            let (v, tail) = log_integral(&hz, zmax, f.rmax - phi);
            (norm + v, tail)
        })
        .collect();
    let worst_tail = results.iter().fold(0.0f64, |m, r| m.max(r.1));
    let vals = results.into_iter().map(|r| r.0).collect();
    let mut out = BlockFunction::from_log_values(f.j + 1, 1, rmax_next, vals)?;
    out.tail_fraction = worst_tail;
    Ok(out)
}

/// Result of a Monte Carlo step: the new function and per-node relative
/// standard errors.
#[derive(Debug, Clone)]
pub struct McStep {
    pub function: BlockFunction,
    pub rel_std_err: Vec<f64>,
    /// Some node inside the 3σ envelope has relative s.e. above 10⁻³.
    pub flagged: bool,
}

/// F₊(r) = E[Π_b F(|r e₁ + ζ_b|)] by antithetic Monte Carlo over the zero-sum
/// Gaussian, for any n and L^d.
pub fn rg_step_mc(f: &BlockFunction, p: &ModelParams, rmax_next: f64, nodes: usize, seed: u64, samples: usize) -> Result<McStep> {
    if samples < 2 {
        return Err(Error::InvalidParam("need at least 2 samples".into()));
    }
    let zs = ZeroSumGaussian::for_scale(p, f.j);
    let envelope = 3.0 * zs.variance().sqrt();
    let h = rmax_next / (nodes - 1) as f64;
    let n = p.n;
    let per_node: Vec<(f64, f64)> = (0..nodes)
        .into_par_iter()
        .map(|k| {
            let r = k as f64 * h;
            let mut stream = rng::stream(seed, &[f.j as u64, k as u64]);
            let mut logs = Vec::with_capacity(samples);
            for _ in 0..samples {
                let z = zs.sample(&mut stream);
                let mut sp = 0.0;
                let mut sm = 0.0;
                for b in 0..zs.b {
                    let v = &z[b * n..(b + 1) * n];
                    let tail2: f64 = v[1..].iter().map(|x| x * x).sum();
                    sp += f.log_value(((r + v[0]).powi(2) + tail2).sqrt());
                    sm += f.log_value(((r - v[0]).powi(2) + tail2).sqrt());
                }
                logs.push((sp, sm));
            }
            let peak = logs.iter().map(|(a, b)| a.max(*b)).fold(f64::NEG_INFINITY, f64::max);
            let ys: Vec<f64> = logs.iter().map(|(a, b)| 0.5 * ((a - peak).exp() + (b - peak).exp())).collect();
            let mean = ys.iter().sum::<f64>() / samples as f64;
            let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (samples - 1) as f64;
            (peak + mean.ln(), (var / samples as f64).sqrt() / mean)
        })
        .collect();
    let flagged = per_node.iter().enumerate().any(|(k, (_, rel))| k as f64 * h <= envelope && *rel > 1e-3);
    let vals = per_node.iter().map(|v| v.0).collect();
    let errs = per_node.iter().map(|v| v.1).collect();
    Ok(McStep { function: BlockFunction::from_log_values(f.j + 1, n, rmax_next, vals)?, rel_std_err: errs, flagged })
}

/// Per-site couplings read off the Taylor expansion of −ln F_j at 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Couplings {
    pub j: usize,
    pub u: f64,
    pub nu: f64,
    pub g: f64,
}

impl Couplings {
    pub fn state(&self) -> CouplingState {
        CouplingState::new(self.j, self.u, self.g, self.nu)
    }
}

/// u_j = −ln F(0)/L^{dj}, ν_j = ∂²(−ln F)(0)/L^{dj}, g_j = ∂⁴(−ln F)(0)/(6L^{dj}),
/// from a least-squares polynomial fit in r² over the innermost nodes.
pub fn extract_couplings(f: &BlockFunction, p: &ModelParams) -> Result<Couplings> {
    let m = f.log_values.len();
    let k = (m / 8).max(24).min(m);
    let h = f.step();
    let xmax = ((k - 1) as f64 * h).powi(2);
    let deg = 8;
    if k <= deg + 4 {
        return Err(Error::InvalidParam("grid too coarse near 0".into()));
    }
    let a = DMatrix::from_fn(k, deg + 1, |i, q| ((i as f64 * h).powi(2) / xmax).powi(q as i32));
    let b = DVector::from_fn(k, |i, _| -f.log_values[i]);
    let svd = a.svd(true, true);
    let sv = &svd.singular_values;
    let cond = sv.max() / sv.min();
    if !(cond < 1e12) {
        return Err(Error::NonConvergent(format!("ill-conditioned coupling fit ({cond:e})")));
    }
    let c = svd.solve(&b, 1e-15).map_err(|e| Error::NonConvergent(e.to_string()))?;
    let vol = (p.l as f64).powi((p.d * f.j) as i32);
    // −ln F = c0 + c1 x/X + c2 (x/X)² + …, x = φ²
    let d2 = 2.0 * c[1] / xmax;
    let d4 = 24.0 * c[2] / (xmax * xmax);
    Ok(Couplings { j: f.j, u: c[0] / vol, nu: d2 / vol, g: d4 / (6.0 * vol) })
}

/// F₀(φ) = exp(−(¼g|φ|⁴ + ½ν₀|φ|²)) on [0, rmax].
pub fn initial_function(n: usize, g0: f64, nu0: f64, rmax: f64, nodes: usize) -> Result<BlockFunction> {
    BlockFunction::from_fn(0, n, rmax, nodes, |r| -(0.25 * g0 * r.powi(4) + 0.5 * nu0 * r * r))
}

/// Variance of the final constant field, 1/(m² L^{dN}).
pub fn final_variance(p: &ModelParams) -> Result<f64> {
    if !(p.m2 > 0.0) {
        return Err(Error::FinalNeedsMass);
    }
    Ok(1.0 / (p.m2 * (p.lf()).powi((p.d * p.big_n) as i32)))
}

/// Grid radii R_0..R_N: R_N covers the final (or remaining) fluctuation and
/// R_j = R_{j+1} + 12√c_j.
pub fn domain_plan(p: &ModelParams) -> Vec<f64> {
    let rem = match final_variance(p) {
        Ok(v) => v,
        Err(_) => (p.big_n..p.big_n + 400).map(|k| hierarchical::c_diag(p.d, p.l, k, p.m2)).sum(),
    };
    let mut r = vec![0.0; p.big_n + 1];
    r[p.big_n] = (12.0 * rem.sqrt()).max(1.0);
    for j in (0..p.big_n).rev() {
        r[j] = r[j + 1] + 12.0 * hierarchical::c_diag(p.d, p.l, j, p.m2).sqrt();
    }
    r
}

/// F_0, …, F_N by the quadrature engine.
pub fn run_quadrature_flow(p: &ModelParams, g0: f64, nu0: f64, nodes: usize) -> Result<Vec<BlockFunction>> {
    let plan = domain_plan(p);
    let mut out = vec![initial_function(1, g0, nu0, plan[0], nodes)?];
    for j in 0..p.big_n {
        let next = rg_step_quadrature(&out[j], p, plan[j + 1], nodes)?;
        out.push(next);
    }
    Ok(out)
}

/// ⟨ζ^2⟩ and ⟨ζ^4⟩ under the density ∝ e^{−ζ²/(2σ²)} F_N(ζ), n = 1.
fn final_moments(f: &BlockFunction, var: f64) -> (f64, f64) {
    let zmax = 14.0 * var.sqrt();
    let h = |z: f64| -z * z / (2.0 * var) + f.log_value(z);
    let (l0, _) = log_integral(&h, zmax, zmax);
    let (l2, _) = log_integral(&|z: f64| h(z) + 2.0 * z.abs().max(1e-300).ln(), zmax, zmax);
    let (l4, _) = log_integral(&|z: f64| h(z) + 4.0 * z.abs().max(1e-300).ln(), zmax, zmax);
    ((l2 - l0).exp(), (l4 - l0).exp())
}

/// χ_N = 1/m² + (m⁴L^{dN})⁻¹ Z''(0)/Z(0) with Z(s) = E F_N(s+ζ), ζ ∼ N(0, m⁻²L^{−dN}).
/// The derivative is moved onto the Gaussian, which gives χ_N = L^{dN}⟨ζ²⟩_F.
pub fn chi_finite_volume(f: &BlockFunction, p: &ModelParams) -> Result<f64> {
    if f.n != 1 {
        return Err(Error::InvalidParam("chi_finite_volume needs n = 1".into()));
    }
    let var = final_variance(p)?;
    let (m2, _) = final_moments(f, var);
    Ok(m2 / (var * p.m2))
}

/// ū₄ = (m⁸L^{dN})⁻¹(Z⁗/Z − 3(Z''/Z)²) and g̃_ren = −ū₄m⁸/6.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct U4Bar {
    pub u4bar: f64,
    pub g_ren: f64,
}

pub fn u4bar(f: &BlockFunction, p: &ModelParams) -> Result<U4Bar> {
    let var = final_variance(p)?;
    let (m2, m4) = final_moments(f, var);
    let vol = p.lf().powi((p.d * p.big_n) as i32);
    // Z''/Z = (⟨ζ²⟩/σ² − 1)/σ², Z⁗/Z = (⟨ζ⁴⟩/σ⁴ − 6⟨ζ²⟩/σ² + 3)/σ⁴
    let z2 = (m2 / var - 1.0) / var;
    let z4 = (m4 / (var * var) - 6.0 * m2 / var + 3.0) / (var * var);
    let u = (z4 - 3.0 * z2 * z2) / (p.m2.powi(4) * vol);
    Ok(U4Bar { u4bar: u, g_ren: -u * p.m2.powi(4) / 6.0 })
}

/// Nested tensor sum; coordinate `a` of φ = L y only involves y_0..y_a, so each
/// level fixes one component. Weight products below 10⁻⁴⁰ are pruned.
#[allow(clippy::too_many_arguments)]
fn tensor_sum(
    lmat: &DMatrix<f64>,
    rule: &NormalRule,
    g: f64,
    dnu: f64,
    a: usize,
    w: f64,
    expo: f64,
    ys: &mut Vec<f64>,
    acc: &mut [f64; 3],
) {
    let v = lmat.nrows();
    let base: f64 = (0..a).map(|b| lmat[(a, b)] * ys[b]).sum();
    for (x, wx) in rule.nodes.iter().zip(&rule.weights) {
        let wt = w * wx;
        if wt < 1e-40 {
            continue;
        }
        let phi = base + lmat[(a, a)] * x;
        let p2 = phi * phi;
        let e = expo - 0.25 * g * p2 * p2 - 0.5 * dnu * p2;
        ys[a] = *x;
        if a + 1 == v {
            let big: f64 = (0..v).map(|c| (0..=c).map(|b| lmat[(c, b)] * ys[b]).sum::<f64>()).sum();
            let f = wt * e.exp();
            let b2 = big * big;
            acc[0] += f;
            acc[1] += f * b2;
            acc[2] += f * b2 * b2;
        } else {
            tensor_sum(lmat, rule, g, dnu, a + 1, wt, e, ys, acc);
        }
    }
}

/// Both routes to χ_N and ū₄ on a box of at most four sites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleReport {
    pub direct_chi: f64,
    pub recursive_chi: f64,
    pub direct_u4: f64,
    pub recursive_u4: f64,
    /// |direct χ at order 2k − direct χ at order k| / χ.
    pub refinement_change: f64,
}

impl OracleReport {
    pub fn rel_diff(&self) -> f64 {
        ((self.direct_chi - self.recursive_chi) / self.direct_chi).abs()
    }
}

/// Tensor Gauss–Hermite expectation of (Φ², Φ⁴), Φ = Σφ_x, against
/// exp(−½φ(−Δ_H)φ − Σ(¼gφ⁴ + ½νφ²)).
fn direct_moments(geom: &HierGeometry, g: f64, nu: f64, order: usize) -> Result<(f64, f64)> {
    let v = geom.volume();
    let lap = DMatrix::from_fn(v, v, |a, b| {
        hierarchical::laplacian_entry::<f64>(geom, &geom.coords(a), &geom.coords(b))
    });
    // reference mass from the self-consistent ν_r = ν + 3g(−Δ_H + ν_r)⁻¹₀₀
    let green = |m: f64| (-lap.clone() + DMatrix::identity(v, v) * m).try_inverse();
    let mut nu_r = nu.max(0.1);
    for _ in 0..50 {
        let gdiag = green(nu_r).map_or(0.0, |c| c[(0, 0)]);
        nu_r = (nu + 3.0 * g * gdiag).max(0.1);
    }
    let cov = green(nu_r).ok_or_else(|| Error::NonConvergent("singular reference".into()))?;
    let chol = cov.cholesky().ok_or(Error::NotPsd(f64::NAN))?;
    let lmat = chol.l();
    let rule = NormalRule::new(order);
    let mut acc = [0.0; 3];
    let mut phi = vec![0.0; v];
    tensor_sum(&lmat, &rule, g, nu - nu_r, 0, 1.0, 0.0, &mut phi, &mut acc);
    let (z0, z2, z4) = (acc[0], acc[1], acc[2]);
    Ok((z2 / z0, z4 / z0))
}

/// χ_N = Σ_x⟨φ₀φ_x⟩ by direct tensor quadrature (with ν = ν₀ + m²) and by the
/// block recursion; n = 1, at most four sites.
pub fn oracle_chi(p: &ModelParams, g0: f64, nu0: f64, order: usize) -> Result<OracleReport> {
    if p.n != 1 {
        return Err(Error::InvalidParam("oracle needs n = 1".into()));
    }
    let geom = HierGeometry::new(p.d, p.l, p.big_n)?;
    let v = geom.volume();
    if v > 4 {
        return Err(Error::Refused(format!("{v} sites exceeds the oracle limit of 4")));
    }
    let nu = nu0 + p.m2;
    let (p2, p4) = direct_moments(&geom, g0, nu, order)?;
    let (p2b, _) = direct_moments(&geom, g0, nu, 2 * order)?;
    let vf = v as f64;
    let direct_chi = p2 / vf;
    let direct_u4 = (p4 - 3.0 * p2 * p2) / vf;
    let flow = run_quadrature_flow(p, g0, nu0, DEFAULT_NODES)?;
    let last = flow.last().expect("flow has at least F_0");
    let recursive_chi = chi_finite_volume(last, p)?;
    let recursive_u4 = u4bar(last, p)?.u4bar;
    Ok(OracleReport {
        direct_chi,
        recursive_chi,
        direct_u4,
        recursive_u4,
        refinement_change: ((p2b - p2) / p2).abs(),
    })
}

/// Per-step defects g_{j+1} − Φ_pt(U_j).g of the extracted couplings.
#[derive(Debug, Clone)]
pub struct DefectScan {
    pub couplings: Vec<Couplings>,
    pub defects: Vec<f64>,
}

impl DefectScan {
    pub fn max_abs(&self) -> f64 {
        self.defects.iter().fold(0.0, |m, d| m.max(d.abs()))
    }
}

pub fn g_step_defects(p: &ModelParams, g0: f64, nu0: f64, nodes: usize) -> Result<DefectScan> {
    let flow = run_quadrature_flow(p, g0, nu0, nodes)?;
    let couplings = flow.iter().map(|f| extract_couplings(f, p)).collect::<Result<Vec<_>>>()?;
    let defects = couplings
        .windows(2)
        .map(|w| {
            let k = pertflow::coeffs(w[0].j, p);
            w[1].g - pertflow::phi_pt(&w[0].state(), &k).g
        })
        .collect();
    Ok(DefectScan { couplings, defects })
}

/// Log-log slope of the largest g-step defect against g₀.
pub fn defect_slope(p: &ModelParams, g0s: &[f64], nu0: f64, nodes: usize) -> Result<(f64, Vec<f64>)> {
    let mut ds = Vec::with_capacity(g0s.len());
    for &g in g0s {
        ds.push(g_step_defects(p, g, nu0, nodes)?.max_abs());
    }
    let lx: Vec<f64> = g0s.iter().map(|g| g.ln()).collect();
    let ly: Vec<f64> = ds.iter().map(|d| d.ln()).collect();
    Ok((linear_fit(&lx, &ly).1, ds))
}
