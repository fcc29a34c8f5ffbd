//! Finite-range decomposition of (−Δ+m²)⁻¹ on Z^d and on the discrete torus.
//!
//! The covariance is split as Σ_j C_j with C_j built from Chebyshev
//! polynomials of the lattice Laplacian, so that C_{j;0x} vanishes for
//! |x|₁ ≥ L^j/2. Kernels are obtained from the exact Chebyshev recursion on
//! the lattice; Fourier symbols from the Poisson form of P_t and a tabulated
//! first moment of f.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;

use crate::quad::Legendre;
use crate::{Error, Result};

const TABLE_STEP: f64 = 1.0 / 16.0;
const TABLE_MAX: f64 = 640.0;

/// Which compactly supported profile is used for f̂.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BumpKind {
    /// f̂ ∝ exp(−1/(1−s²)) on (−1,1). Its f changes sign.
    Plain,
    /// f̂ ∝ g∗g with g(s) = exp(−1/(1−4s²)) on (−½,½), so f ∝ |ĝ|² ≥ 0.
    SelfConvolved,
}

/// The profile f̂ on [−1,1], normalised so that ∫₀^∞ y f(y) dy = 1, which makes
/// 1/ζ = ∫ t² P_t(ζ) dt/t.
#[derive(Debug, Clone)]
pub struct BumpProfile {
    pub kind: BumpKind,
    /// Normalisation constant multiplying the raw profile.
    pub a: f64,
    nodes: Vec<(f64, f64)>,
    conv: Legendre,
    /// tail[k] = ∫_{kh}^∞ u f(u) du on the grid kh.
    tail: Vec<f64>,
    fvals: Vec<(f64, f64)>,
    /// (f̂, f̂', f̂'') of the raw self-convolved profile on a grid of [0,1].
    fhat_table: Vec<(f64, f64, f64)>,
}

const FHAT_STEP: f64 = 1.0 / 2048.0;

fn raw_g(s: f64) -> f64 {
    let q = 1.0 - 4.0 * s * s;
    if q <= 0.0 {
        0.0
    } else {
        (-1.0 / q).exp()
    }
}

/// (g, g', g'') for g(s) = exp(−1/(1−4s²)).
fn raw_g_derivs(s: f64) -> (f64, f64, f64) {
    let q = 1.0 - 4.0 * s * s;
    if q <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let g = (-1.0 / q).exp();
    let d1 = -8.0 * s / (q * q);
    let d2 = -8.0 / (q * q) - 128.0 * s * s / (q * q * q);
    (g, g * d1, g * (d1 * d1 + d2))
}

fn quintic(t: f64, h: f64, lo: (f64, f64, f64), hi: (f64, f64, f64)) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let t5 = t4 * t;
    let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    let h2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
    let k0 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
    let k1 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    let k2 = 0.5 * t3 - t4 + 0.5 * t5;
    lo.0 * h0 + h * lo.1 * h1 + h * h * lo.2 * h2 + hi.0 * k0 + h * hi.1 * k1 + h * h * hi.2 * k2
}

fn raw_plain(s: f64) -> f64 {
    let q = 1.0 - s * s;
    if q <= 0.0 {
        0.0
    } else {
        (-1.0 / q).exp()
    }
}

impl BumpProfile {
    /// Builds, normalises and validates a profile.
    pub fn new(kind: BumpKind) -> Result<Self> {
        let gl = Legendre::new(16);
        let (lo, hi, panels) = match kind {
            BumpKind::Plain => (0.0, 1.0, 64),
            BumpKind::SelfConvolved => (0.0, 0.5, 32),
        };
        let width = (hi - lo) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * gl.nodes.len());
        for k in 0..panels {
            let c = lo + (k as f64 + 0.5) * width;
            for (x, w) in gl.nodes.iter().zip(&gl.weights) {
                let s = c + 0.5 * width * x;
                let wt = 0.5 * width * w;
                let v = match kind {
                    BumpKind::Plain => raw_plain(s),
                    BumpKind::SelfConvolved => raw_g(s),
                };
                nodes.push((s, wt * v));
            }
        }
        let mut p = Self { kind, a: 1.0, nodes, conv: Legendre::new(24), tail: Vec::new(), fvals: Vec::new(), fhat_table: Vec::new() };
        if kind == BumpKind::SelfConvolved {
            p.fhat_table = (0..=2048).map(|i| p.raw_conv(i as f64 * FHAT_STEP)).collect();
        }
        p.build_table();
        let total = p.tail[0];
        p.a = 1.0 / total;
        for t in &mut p.tail {
            *t /= total;
        }
        for v in &mut p.fvals {
            v.0 /= total;
            v.1 /= total;
        }
        p.validate()?;
        Ok(p)
    }

    /// The default nonnegative profile, built once per process.
    pub fn standard() -> Arc<BumpProfile> {
        static CELL: OnceLock<Arc<BumpProfile>> = OnceLock::new();
        CELL.get_or_init(|| Arc::new(BumpProfile::new(BumpKind::SelfConvolved).expect("standard profile is valid")))
            .clone()
    }

    fn raw_f(&self, y: f64) -> (f64, f64) {
        match self.kind {
            BumpKind::Plain => {
                let (mut c, mut s) = (0.0, 0.0);
                for &(x, w) in &self.nodes {
                    let (sn, cs) = (x * y).sin_cos();
                    c += w * cs;
                    s -= w * x * sn;
                }
                (c / PI, s / PI)
            }
            BumpKind::SelfConvolved => {
                let (mut g, mut dg) = (0.0, 0.0);
                for &(x, w) in &self.nodes {
                    let (sn, cs) = (x * y).sin_cos();
                    g += w * cs;
                    dg -= w * x * sn;
                }
                g *= 2.0;
                dg *= 2.0;
                (g * g / (2.0 * PI), g * dg / PI)
            }
        }
    }

    fn build_table(&mut self) {
        let n = (TABLE_MAX / TABLE_STEP).round() as usize;
        let gl = Legendre::new(4);
        self.fvals = (0..=n).map(|k| self.raw_f(k as f64 * TABLE_STEP)).collect();
        let mut pieces = Vec::with_capacity(n);
        for k in 0..n {
            let a = k as f64 * TABLE_STEP;
            pieces.push(gl.integrate(a, a + TABLE_STEP, |u| u * self.raw_f(u).0));
        }
        let mut tail = vec![0.0; n + 1];
        for k in (0..n).rev() {
            tail[k] = tail[k + 1] + pieces[k];
        }
        self.tail = tail;
    }

    fn raw_conv(&self, s: f64) -> (f64, f64, f64) {
        let (mut v, mut d1, mut d2) = (0.0, 0.0, 0.0);
        let h = (1.0 - s) / 4.0;
        for k in 0..4 {
            let c = s - 0.5 + (k as f64 + 0.5) * h;
            for (x, w) in self.conv.nodes.iter().zip(&self.conv.weights) {
                let u = c + 0.5 * h * x;
                let wt = 0.5 * h * w * raw_g(u);
                let (g, g1, g2) = raw_g_derivs(s - u);
                v += wt * g;
                d1 += wt * g1;
                d2 += wt * g2;
            }
        }
        (v, d1, d2)
    }

    /// f̂(s), zero outside (−1,1).
    pub fn fhat(&self, s: f64) -> f64 {
        let s = s.abs();
        if s >= 1.0 {
            return 0.0;
        }
        match self.kind {
            BumpKind::Plain => self.a * raw_plain(s),
            BumpKind::SelfConvolved => {
                let k = ((s / FHAT_STEP).floor() as usize).min(self.fhat_table.len() - 2);
                let t = s / FHAT_STEP - k as f64;
                self.a * quintic(t, FHAT_STEP, self.fhat_table[k], self.fhat_table[k + 1])
            }
        }
    }

    /// f̂(s) by direct quadrature, bypassing the table.
    pub fn fhat_direct(&self, s: f64) -> f64 {
        let s = s.abs();
        if s >= 1.0 {
            return 0.0;
        }
        match self.kind {
            BumpKind::Plain => self.a * raw_plain(s),
            BumpKind::SelfConvolved => self.a * self.raw_conv(s).0,
        }
    }

    /// f(y) = (1/2π) ∫ f̂(s) e^{isy} ds.
    pub fn f(&self, y: f64) -> f64 {
        self.a * self.raw_f(y.abs()).0
    }

    /// T(y) = ∫_y^∞ u f(u) du, so T(0) = 1.
    pub fn tail(&self, y: f64) -> f64 {
        let y = y.abs();
        if y >= TABLE_MAX {
            return 0.0;
        }
        let h = TABLE_STEP;
        let k = ((y / h).floor() as usize).min(self.tail.len() - 2);
        let t = y / h - k as f64;
        let node = |i: usize| {
            let u = i as f64 * h;
            let (f, df) = self.fvals[i];
            (self.tail[i], -u * f, -(f + u * df))
        };
        quintic(t, h, node(k), node(k + 1))
    }

    /// Checks P_t ≥ −10⁻¹⁰ on a grid of (t, ζ).
    pub fn validate(&self) -> Result<()> {
        let ts = [0.5, 1.0, 1.5, 2.0, 3.0, 4.5, 6.5, 9.0, 13.0, 19.0, 27.0, 40.0];
        for &t in &ts {
            for i in 0..=40 {
                let zeta = 0.1 * i as f64;
                let v = p_t(t, zeta, self);
                if v < -1e-10 {
                    return Err(Error::Gate(format!("profile gives P_t({t},{zeta}) = {v:e} < 0")));
                }
            }
        }
        Ok(())
    }
}

/// λ(k) = 4 Σ sin²(k_i/2).
pub fn lattice_symbol(k: &[f64]) -> f64 {
    k.iter().map(|&ki| 4.0 * (0.5 * ki).sin().powi(2)).sum()
}

/// P_t(ζ) = (1/2π) Σ_{|p|≤t} t⁻¹ f̂(p/t) T_p(1−ζ/2).
pub fn p_t(t: f64, zeta: f64, profile: &BumpProfile) -> f64 {
    let x = 1.0 - 0.5 * zeta;
    let mut sum = profile.fhat(0.0);
    let (mut tm, mut tp) = (1.0, x);
    let pmax = t.floor() as usize;
    for p in 1..=pmax {
        sum += 2.0 * profile.fhat(p as f64 / t) * tp;
        let next = 2.0 * x * tp - tm;
        tm = tp;
        tp = next;
    }
    sum / (2.0 * PI * t)
}

/// Highest-order divided difference of ζ ↦ P_t(ζ) on ⌊t⌋+2 equispaced nodes
/// of [0,4]; zero when the degree is at most ⌊t⌋.
pub fn p_t_degree_defect(t: f64, profile: &BumpProfile) -> f64 {
    let m = t.floor() as usize + 2;
    let xs: Vec<f64> = (0..m).map(|i| 4.0 * i as f64 / (m - 1) as f64).collect();
    let mut dd: Vec<f64> = xs.iter().map(|&z| p_t(t, z, profile)).collect();
    for order in 1..m {
        for i in (order..m).rev() {
            dd[i] = (dd[i] - dd[i - 1]) / (xs[i] - xs[i - order]);
        }
    }
    dd[m - 1]
}

/// w(t,x) = (2π)^{−d} ∫ (t²/M²) P_t((λ(k)+m²)/M²) e^{ik·x} dk by a periodic
/// rectangle rule, exact for the trigonometric polynomial integrand.
pub fn w_kernel(t: f64, x: &[i64], m2: f64, profile: &BumpProfile) -> f64 {
    let d = x.len();
    let m2big = 2.0 * d as f64 + m2;
    let xmax = x.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0) as usize;
    let kpts = 2 * (t.floor() as usize + xmax) + 2;
    let pts = kpts.pow(d as u32);
    let mut sum = 0.0;
    let mut k = vec![0.0; d];
    for idx in 0..pts {
        let mut r = idx;
        let mut phase = 0.0;
        for i in 0..d {
            k[i] = 2.0 * PI * (r % kpts) as f64 / kpts as f64;
            phase += k[i] * x[i] as f64;
            r /= kpts;
        }
        let zeta = (lattice_symbol(&k) + m2) / m2big;
        sum += p_t(t, zeta, profile) * phase.cos();
    }
    t * t / m2big * sum / pts as f64
}

/// Integration window [a, b] in t for scale j ≥ 1.
pub fn scale_window(j: usize, l: usize) -> (f64, f64) {
    let lf = l as f64;
    let b = 0.5 * lf.powi(j as i32);
    let a = if j == 1 { 0.0 } else { 0.5 * lf.powi(j as i32 - 1) };
    (a, b)
}

/// ∫_a^b f̂(p/t) dt.
fn chebyshev_weight(p: usize, a: f64, b: f64, profile: &BumpProfile, gl: &Legendre) -> f64 {
    if p == 0 {
        return profile.fhat(0.0) * (b - a);
    }
    let pf = p as f64;
    let lo = pf / b;
    let hi = if a > 0.0 { (pf / a).min(1.0) } else { 1.0 };
    if lo >= hi {
        return 0.0;
    }
    pf * gl.integrate_panels(lo, hi, 8, |s| profile.fhat(s) / (s * s))
}

/// Σ_n θ_n⁻² T(c θ_n) with θ_n = |θ − 2πn|, θ = arccos(1 − ζ/2).
fn tail_sum(c: f64, zeta: f64, profile: &BumpProfile) -> f64 {
    if c == 0.0 {
        return 1.0 / zeta;
    }
    let theta = (1.0 - 0.5 * zeta).clamp(-1.0, 1.0).acos();
    let nmax = (TABLE_MAX / (2.0 * PI * c)).ceil() as i64 + 1;
    let mut s = 0.0;
    for n in -nmax..=nmax {
        let th = (theta - 2.0 * PI * n as f64).abs();
        if th * c >= TABLE_MAX {
            continue;
        }
        s += profile.tail(c * th) / (th * th);
    }
    s
}

/// Σ_n θ_n⁻² [T(aθ_n) − T(bθ_n)], with the θ → 0 limit handled.
fn window_sum(a: f64, b: f64, zeta: f64, profile: &BumpProfile) -> f64 {
    let theta = (1.0 - 0.5 * zeta).clamp(-1.0, 1.0).acos();
    if theta < 1e-7 {
        let f0 = profile.f(0.0);
        let near = 0.5 * f0 * (b * b - a * a);
        let far = tail_sum(b, zeta, profile) - profile.tail(b * theta) / (theta * theta).max(1e-300);
        let far_a = if a == 0.0 { 0.0 } else { tail_sum(a, zeta, profile) - profile.tail(a * theta) / (theta * theta).max(1e-300) };
        return near + far_a - far;
    }
    tail_sum(a, zeta, profile) - tail_sum(b, zeta, profile)
}

/// Ĉ(k) of the covariance piece ∫_a^b w(t,·) dt/t (b = ∞ allowed).
pub fn window_symbol(a: f64, b: f64, k: &[f64], m2: f64, profile: &BumpProfile) -> f64 {
    let m2big = 2.0 * k.len() as f64 + m2;
    let zeta = (lattice_symbol(k) + m2) / m2big;
    let s = if b.is_infinite() {
        if a == 0.0 {
            1.0 / zeta
        } else {
            tail_sum(a, zeta, profile)
        }
    } else {
        window_sum(a, b, zeta, profile)
    };
    s / m2big
}

/// One scale of the decomposition on Z^d.
#[derive(Debug, Clone)]
pub struct FrdSlice {
    pub j: usize,
    pub d: usize,
    pub l: usize,
    pub m2: f64,
    /// Largest coordinate that can carry a nonzero value.
    pub radius: usize,
    /// C_{j;0x} on the orthant [0, radius]^d, first coordinate fastest.
    pub kernel: Vec<f64>,
    pub profile: Arc<BumpProfile>,
}

impl FrdSlice {
    pub fn window(&self) -> (f64, f64) {
        scale_window(self.j, self.l)
    }

    /// The range L^j/2.
    pub fn range(&self) -> f64 {
        0.5 * (self.l as f64).powi(self.j as i32)
    }

    fn index(&self, x: &[i64]) -> Option<usize> {
        let side = self.radius + 1;
        let mut idx = 0;
        let mut stride = 1;
        for &xi in x {
            let a = xi.unsigned_abs() as usize;
            if a >= side {
                return None;
            }
            idx += a * stride;
            stride *= side;
        }
        Some(idx)
    }

    /// C_{j;0x}; zero for |x|₁ ≥ L^j/2.
    pub fn kernel_at(&self, x: &[i64]) -> f64 {
        let l1: u64 = x.iter().map(|v| v.unsigned_abs()).sum();
        if l1 as f64 >= self.range() {
            return 0.0;
        }
        self.index(x).map_or(0.0, |i| self.kernel[i])
    }

    /// Ĉ_j(k).
    pub fn symbol(&self, k: &[f64]) -> f64 {
        let (a, b) = self.window();
        window_symbol(a, b, k, self.m2, &self.profile)
    }

    /// All x with |x|₁ < L^j/2.
    pub fn support(&self) -> Vec<Vec<i64>> {
        let r = self.radius as i64;
        let side = 2 * r + 1;
        let total = (side as usize).pow(self.d as u32);
        let mut out = Vec::new();
        for idx in 0..total {
            let mut v = idx as i64;
            let x: Vec<i64> = (0..self.d)
                .map(|_| {
                    let c = v % side - r;
                    v /= side;
                    c
                })
                .collect();
            let l1: i64 = x.iter().map(|c| c.abs()).sum();
            if (l1 as f64) < self.range() {
                out.push(x);
            }
        }
        out
    }
}

/// Builds C_j on Z^d from the lattice Chebyshev recursion
/// C_j = (1/(2πM²)) Σ_p ε_p (∫_a^b f̂(p/t) dt) T_p(I − (−Δ+m²)/(2M²)) δ.
pub fn frd_slice(j: usize, d: usize, l: usize, m2: f64, profile: Arc<BumpProfile>) -> Result<FrdSlice> {
    if j == 0 || d == 0 || l < 2 {
        return Err(Error::InvalidParam("need j ≥ 1, d ≥ 1, L ≥ 2".into()));
    }
    if !(m2 >= 0.0) {
        return Err(Error::InvalidParam("m2 must be ≥ 0".into()));
    }
    let (a, b) = scale_window(j, l);
    let pmax = {
        let p = b.floor() as usize;
        if p as f64 >= b {
            p - 1
        } else {
            p
        }
    };
    let radius = pmax;
    let side = radius + 1;
    let len = side.pow(d as u32);
    if len > 50_000_000 {
        return Err(Error::Refused(format!("kernel table of {len} entries")));
    }
    let m2big = 2.0 * d as f64 + m2;
    let gl = Legendre::new(16);
    let strides: Vec<usize> = (0..d).map(|i| side.pow(i as u32)).collect();
    let coords = |idx: usize, i: usize| (idx / strides[i]) % side;

    let apply = |v: &[f64], out: &mut [f64]| {
        for idx in 0..len {
            let mut nb = 0.0;
            for i in 0..d {
                let c = coords(idx, i);
                let up = if c < radius { v[idx + strides[i]] } else { 0.0 };
                let down = if c > 0 { v[idx - strides[i]] } else if radius > 0 { v[idx + strides[i]] } else { 0.0 };
                nb += up + down;
            }
            out[idx] = 0.5 * v[idx] + nb / (2.0 * m2big);
        }
    };

    let mut kernel = vec![0.0; len];
    let mut prev = vec![0.0; len];
    prev[0] = 1.0;
    let w0 = chebyshev_weight(0, a, b, &profile, &gl);
    kernel[0] += w0;
    let mut cur = vec![0.0; len];
    if pmax >= 1 {
        apply(&prev, &mut cur);
    }
    let mut next = vec![0.0; len];
    for p in 1..=pmax {
        let w = 2.0 * chebyshev_weight(p, a, b, &profile, &gl);
        for (k, c) in kernel.iter_mut().zip(&cur) {
            *k += w * c;
        }
        if p < pmax {
            apply(&cur, &mut next);
            for (n, pv) in next.iter_mut().zip(&prev) {
                *n = 2.0 * *n - pv;
            }
            std::mem::swap(&mut prev, &mut cur);
            std::mem::swap(&mut cur, &mut next);
        }
    }
    let norm = 1.0 / (2.0 * PI * m2big);
    for k in &mut kernel {
        *k *= norm;
    }
    Ok(FrdSlice { j, d, l, m2, radius, kernel, profile })
}

/// The exactly computable t < 1 part of C_1 at the origin.
pub fn c0_part(d: usize, m2: f64, profile: &BumpProfile) -> f64 {
    profile.fhat(0.0) / (2.0 * PI) / (2.0 * d as f64 + m2)
}

/// ϑ(t, m²; s) = (2d+m²)⁻¹ (1 + m²t²/(2d+m²))^{−s}.
pub fn vartheta(t: f64, d: usize, m2: f64, s: f64) -> f64 {
    let m2big = 2.0 * d as f64 + m2;
    (1.0 + m2 * t * t / m2big).powf(-s) / m2big
}

/// max_x |∇^α C_{j;0x}| · L^{(d−2+|α|)(j−1)} / ϑ_{j−1}(m²;s), with forward
/// differences ∇_e f(x) = f(x+e) − f(x).
pub fn scaling_check(slice: &FrdSlice, alpha: &[usize], s: f64) -> f64 {
    let d = slice.d;
    let order: usize = alpha.iter().sum();
    let mut shifts: Vec<(Vec<i64>, f64)> = vec![(vec![0; d], 1.0)];
    for (i, &ai) in alpha.iter().enumerate().take(d) {
        for _ in 0..ai {
            let mut next = Vec::with_capacity(2 * shifts.len());
            for (v, c) in &shifts {
                let mut up = v.clone();
                up[i] += 1;
                next.push((up, *c));
                next.push((v.clone(), -c));
            }
            shifts = next;
        }
    }
    let r = slice.radius as i64 + order as i64;
    let side = 2 * r + 1;
    let total = (side as usize).pow(d as u32);
    let mut best: f64 = 0.0;
    for idx in 0..total {
        let mut v = idx as i64;
        let x: Vec<i64> = (0..d)
            .map(|_| {
                let c = v % side - r;
                v /= side;
                c
            })
            .collect();
        let mut val = 0.0;
        for (sh, c) in &shifts {
            let y: Vec<i64> = x.iter().zip(sh).map(|(a, b)| a + b).collect();
            val += c * slice.kernel_at(&y);
        }
        best = best.max(val.abs());
    }
    let lf = slice.l as f64;
    let jm1 = slice.j as i32 - 1;
    let scale = lf.powf((d as f64 - 2.0 + order as f64) * jm1 as f64);
    best * scale / vartheta(lf.powi(jm1), d, slice.m2, s)
}

/// A covariance piece on the torus (Z/L^N Z)^d, as a translation-invariant kernel.
#[derive(Debug, Clone)]
pub struct TorusKernel {
    pub j: usize,
    pub n: usize,
    pub side: usize,
    pub d: usize,
    /// C_{0x} for x in [0, side)^d, first coordinate fastest.
    pub values: Vec<f64>,
}

impl TorusKernel {
    pub fn at(&self, x: &[i64]) -> f64 {
        let s = self.side as i64;
        let mut idx = 0;
        let mut stride = 1;
        for &xi in x {
            idx += xi.rem_euclid(s) as usize * stride;
            stride *= self.side;
        }
        self.values[idx]
    }

    /// Dense matrix C_{x,y} = C_{0,y−x}.
    pub fn matrix(&self) -> DMatrix<f64> {
        let v = self.values.len();
        let pts = torus_points(self.side, self.d);
        DMatrix::from_fn(v, v, |a, b| {
            let diff: Vec<i64> = pts[b].iter().zip(&pts[a]).map(|(y, x)| y - x).collect();
            self.at(&diff)
        })
    }
}

fn torus_points(side: usize, d: usize) -> Vec<Vec<i64>> {
    let total = side.pow(d as u32);
    (0..total)
        .map(|idx| {
            let mut v = idx;
            (0..d)
                .map(|_| {
                    let c = v % side;
                    v /= side;
                    c as i64
                })
                .collect()
        })
        .collect()
}

/// C_{N,j} on the torus of side L^N: the periodisation of C_j for j < N, and
/// for j = N the aggregate of all scales ≥ N, evaluated from its symbol at
/// torus momenta. `slices[i]` must be the slice for scale i+1.
pub fn torus_slice(j: usize, n: usize, slices: &[FrdSlice]) -> Result<TorusKernel> {
    let first = slices.first().ok_or_else(|| Error::InvalidParam("no slices".into()))?;
    let (d, l, m2) = (first.d, first.l, first.m2);
    if j == 0 || j > n {
        return Err(Error::InvalidParam(format!("torus scale {j} outside 1..={n}")));
    }
    let side = l.pow(n as u32);
    let pts = torus_points(side, d);
    let s = side as i64;
    if j < n {
        let slice = slices
            .get(j - 1)
            .filter(|sl| sl.j == j)
            .ok_or_else(|| Error::InvalidParam(format!("missing slice for scale {j}")))?;
        let values = pts
            .iter()
            .map(|x| {
                let mut acc = 0.0;
                let shifts = 3usize.pow(d as u32);
                for z in 0..shifts {
                    let mut zz = z;
                    let y: Vec<i64> = x
                        .iter()
                        .map(|&xi| {
                            let c = (zz % 3) as i64 - 1;
                            zz /= 3;
                            xi + c * s
                        })
                        .collect();
                    acc += slice.kernel_at(&y);
                }
                acc
            })
            .collect();
        return Ok(TorusKernel { j, n, side, d, values });
    }
    if !(m2 > 0.0) {
        return Err(Error::InvalidParam("torus covariance needs m2 > 0".into()));
    }
    let (a, _) = scale_window(n, l);
    let ks: Vec<Vec<f64>> =
        pts.iter().map(|m| m.iter().map(|&c| 2.0 * PI * c as f64 / side as f64).collect()).collect();
    let sym: Vec<f64> = ks.iter().map(|k| window_symbol(a, f64::INFINITY, k, m2, &first.profile)).collect();
    let vol = pts.len() as f64;
    let values = pts
        .iter()
        .map(|x| {
            ks.iter()
                .zip(&sym)
                .map(|(k, c)| {
                    let ph: f64 = k.iter().zip(x).map(|(ki, xi)| ki * *xi as f64).sum();
                    c * ph.cos()
                })
                .sum::<f64>()
                / vol
        })
        .collect();
    Ok(TorusKernel { j, n, side, d, values })
}

/// Σ_{j<N} C_{N,j} + C_{N,N} as a dense matrix.
pub fn torus_covariance(n: usize, slices: &[FrdSlice]) -> Result<DMatrix<f64>> {
    let mut total: Option<DMatrix<f64>> = None;
    for j in 1..=n {
        let m = torus_slice(j, n, slices)?.matrix();
        total = Some(match total {
            None => m,
            Some(t) => t + m,
        });
    }
    total.ok_or_else(|| Error::InvalidParam("N must be ≥ 1".into()))
}

/// Dense (−Δ_torus + m²)⁻¹ on (Z/side Z)^d.
pub fn torus_inverse(side: usize, d: usize, m2: f64) -> Result<DMatrix<f64>> {
    let pts = torus_points(side, d);
    let v = pts.len();
    let s = side as i64;
    let mut a = DMatrix::<f64>::zeros(v, v);
    let index = |x: &[i64]| -> usize {
        let mut idx = 0;
        let mut stride = 1;
        for &xi in x {
            idx += xi.rem_euclid(s) as usize * stride;
            stride *= side;
        }
        idx
    };
    for (i, x) in pts.iter().enumerate() {
        a[(i, i)] += 2.0 * d as f64 + m2;
        for dir in 0..d {
            for step in [-1i64, 1] {
                let mut y = x.clone();
                y[dir] += step;
                a[(i, index(&y))] -= 1.0;
            }
        }
    }
    a.try_inverse().ok_or_else(|| Error::NonConvergent("singular torus operator".into()))
}

/// Σ_{j=1}^{J} Ĉ_j(k).
pub fn symbol_partial_sum(jmax: usize, l: usize, k: &[f64], m2: f64, profile: &BumpProfile) -> f64 {
    (1..=jmax)
        .map(|j| {
            let (a, b) = scale_window(j, l);
            window_symbol(a, b, k, m2, profile)
        })
        .sum()
}

/// C_{j;0x} recovered from the symbol by a periodic rectangle rule with
/// `kpts` points per direction.
pub fn kernel_from_symbol(slice: &FrdSlice, x: &[i64], kpts: usize) -> f64 {
    let d = slice.d;
    let pts = kpts.pow(d as u32);
    let mut k = vec![0.0; d];
    let mut sum = 0.0;
    for idx in 0..pts {
        let mut r = idx;
        let mut phase = 0.0;
        for i in 0..d {
            k[i] = 2.0 * PI * (r % kpts) as f64 / kpts as f64;
            phase += k[i] * x[i] as f64;
            r /= kpts;
        }
        sum += slice.symbol(&k) * phase.cos();
    }
    sum / pts as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prof() -> Arc<BumpProfile> {
        BumpProfile::standard()
    }

    #[test]
    fn lattice_symbol_examples() {
        assert_eq!(lattice_symbol(&[0.0, 0.0]), 0.0);
        assert!((lattice_symbol(&[PI, PI, PI]) - 12.0).abs() < 1e-12);
        assert!((lattice_symbol(&[PI / 2.0, PI / 2.0]) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn profile_normalisation_and_tail() {
        let p = prof();
        assert!((p.tail(0.0) - 1.0).abs() < 1e-14);
        let gl = Legendre::new(20);
        for &y in &[0.3, 2.71, 10.05, 33.3] {
            let direct = 1.0 - gl.integrate_panels(0.0, y, 64, |u| u * p.f(u));
            assert!((p.tail(y) - direct).abs() < 1e-11, "{y}: {} vs {direct}", p.tail(y));
        }
        for i in 0..200 {
            let s = 0.005 * i as f64 + 0.0013;
            let e = (p.fhat(s) - p.fhat_direct(s)).abs();
            assert!(e < 1e-12, "{s} {e:e}");
        }
        // f from f̂ by a direct cosine transform.
        for &y in &[0.0, 1.3, 7.9] {
            let ft = gl.integrate_panels(0.0, 1.0, 40, |s| p.fhat_direct(s) * (s * y).cos()) / PI;
            assert!((ft - p.f(y)).abs() < 1e-10);
        }
    }

    #[test]
    fn plain_profile_rejected() {
        assert!(matches!(BumpProfile::new(BumpKind::Plain), Err(Error::Gate(_))));
    }

    #[test]
    fn p_t_constant_below_one() {
        let p = prof();
        let c = p.fhat(0.0) / (2.0 * PI * 0.5);
        for &z in &[0.0, 1.3, 4.0] {
            assert!((p_t(0.5, z, &p) - c).abs() < 1e-15);
        }
    }

    #[test]
    fn p_t_degree_bound() {
        let p = prof();
        for &t in &[1.5, 3.7, 9.2] {
            assert!(p_t_degree_defect(t, &p).abs() < 1e-10);
        }
        assert!(p_t_degree_defect(3.0, &p).abs() < 1e-10);
    }

    #[test]
    fn p_t_integral_gives_inverse() {
        let p = prof();
        let gl = Legendre::new(16);
        let mut acc = gl.integrate(0.0, 1.0, |t| t * p_t(t, 1.0, &p));
        let mut t0 = 1.0;
        while t0 < 1000.0 {
            acc += gl.integrate_panels(t0, t0 + 1.0, 2, |t| t * p_t(t, 1.0, &p));
            t0 += 1.0;
        }
        assert!((acc - 1.0).abs() < 1e-6, "{acc}");
    }

    #[test]
    fn w_kernel_small_t_and_propagation() {
        let p = prof();
        let w = w_kernel(0.7, &[0, 0], 1.0, &p);
        assert!((w - 0.7 / 5.0 * p.fhat(0.0) / (2.0 * PI)).abs() < 1e-14);
        assert!(w_kernel(0.7, &[1, 0], 1.0, &p).abs() < 1e-14);
        for x in [[3i64, 0], [2, 2], [4, 1]] {
            assert!(w_kernel(2.9, &x, 0.5, &p).abs() < 1e-10);
        }
        assert!(w_kernel(2.9, &[1, 1], 0.5, &p).abs() > 1e-6);
        // d=1, t=2, x=0 against a dense midpoint rule in k.
        let n = 10_000;
        let direct: f64 = (0..n)
            .map(|i| {
                let k = -PI + (i as f64 + 0.5) * 2.0 * PI / n as f64;
                4.0 / 3.0 * p_t(2.0, (lattice_symbol(&[k]) + 1.0) / 3.0, &p)
            })
            .sum::<f64>()
            / n as f64;
        assert!((w_kernel(2.0, &[0], 1.0, &p) - direct).abs() < 1e-12);
    }

    #[test]
    fn slice_matches_t_quadrature_and_symbol() {
        let p = prof();
        let slice = frd_slice(2, 2, 3, 0.5, p.clone()).unwrap();
        let (a, b) = slice.window();
        let gl = Legendre::new(16);
        for x in [[0i64, 0], [1, 0], [1, 1], [2, 1]] {
            let q = gl.integrate_panels(a, b, 24, |t| w_kernel(t, &x, 0.5, &p) / t);
            assert!((slice.kernel_at(&x) - q).abs() < 1e-10, "{x:?}");
            let fs = kernel_from_symbol(&slice, &x, 16);
            assert!((slice.kernel_at(&x) - fs).abs() < 1e-10, "{x:?}");
        }
        let sum: f64 = slice.support().iter().map(|x| slice.kernel_at(x)).sum();
        assert!((sum - slice.symbol(&[0.0, 0.0])).abs() < 1e-10);
    }

    #[test]
    fn c0_part_of_first_slice() {
        let p = prof();
        let s1 = frd_slice(1, 2, 2, 1.0, p.clone()).unwrap();
        // With L=2 only the t < 1 piece survives.
        assert!((s1.kernel_at(&[0, 0]) - c0_part(2, 1.0, &p)).abs() < 1e-15);
    }

    #[test]
    fn finite_range_from_symbol() {
        let p = prof();
        let slice = frd_slice(3, 2, 2, 1.0, p).unwrap();
        for x in [[4i64, 0], [2, 2], [3, 1], [5, 0]] {
            assert_eq!(slice.kernel_at(&x), 0.0);
            assert!(kernel_from_symbol(&slice, &x, 24).abs() < 1e-10);
        }
    }

    #[test]
    fn partial_sums_converge_from_below() {
        let p = prof();
        let k = [PI / 2.0, PI / 2.0];
        let mut prev = 0.0;
        for j in 1..=40 {
            let s = symbol_partial_sum(j, 2, &k, 1.0, &p);
            assert!(s >= prev - 1e-14);
            prev = s;
        }
        assert!((prev - 0.2).abs() < 1e-6);
    }

    #[test]
    fn torus_matches_dense_inverse() {
        let p = prof();
        for (d, l, n) in [(1usize, 4usize, 1usize), (1, 2, 2), (2, 2, 2)] {
            let slices: Vec<FrdSlice> = (1..n).map(|j| frd_slice(j, d, l, 1.0, p.clone()).unwrap()).collect();
            let slices = if slices.is_empty() { vec![frd_slice(1, d, l, 1.0, p.clone()).unwrap()] } else { slices };
            let c = torus_covariance(n, &slices).unwrap();
            let inv = torus_inverse(l.pow(n as u32), d, 1.0).unwrap();
            assert!((c - inv).amax() < 1e-6);
        }
    }

    #[test]
    fn scaling_ratio_bounded() {
        let p = prof();
        let ratios: Vec<f64> =
            (1..=6).map(|j| scaling_check(&frd_slice(j, 3, 2, 0.0, p.clone()).unwrap(), &[0, 0, 0], 1.0)).collect();
        let mx = ratios.iter().cloned().fold(0.0, f64::max);
        let tail_max = ratios[3..].iter().cloned().fold(0.0, f64::max);
        let tail_min = ratios[3..].iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(mx.is_finite() && tail_max / tail_min < 1.5, "{ratios:?}");
        let r1: Vec<f64> =
            (1..=7).map(|j| scaling_check(&frd_slice(j, 1, 2, 0.0, p.clone()).unwrap(), &[1], 1.0)).collect();
        assert!(r1.iter().all(|r| r.is_finite() && *r < 10.0), "{r1:?}");
    }
}
