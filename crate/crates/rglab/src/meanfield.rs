//! The mean-field O(n) model through its renormalised potential
//! V(φ) = −log ∫ exp(−β|φ−σ|²/2 + h·σ) μ(dσ), with h along the first axis.

use crate::error::{Error, Result};
use crate::quad::{brent, gauss_legendre, Legendre};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFieldState {
    pub n: usize,
    pub beta: f64,
    pub h: f64,
}

impl MeanFieldState {
    pub fn new(n: usize, beta: f64, h: f64) -> Result<Self> {
        if n == 0 || !(beta > 0.0) || !h.is_finite() {
            return Err(Error::InvalidParam("need n >= 1, beta > 0 and finite h".into()));
        }
        Ok(Self { n, beta, h })
    }

    pub fn beta_c(&self) -> f64 {
        self.n as f64
    }
}

/// Polar-angle rule for the uniform measure on S^{n−1}, n ≥ 2: nodes cos θ and
/// normalised weights.
struct SphereRule {
    cos: Vec<f64>,
    w: Vec<f64>,
}

impl SphereRule {
    fn new(n: usize) -> Self {
        let (x, w) = gauss_legendre(256);
        let mut cos = Vec::with_capacity(256);
        let mut ww = Vec::with_capacity(256);
        for (xi, wi) in x.iter().zip(&w) {
            let th = 0.5 * std::f64::consts::PI * (xi + 1.0);
            cos.push(th.cos());
            ww.push(wi * th.sin().powi(n as i32 - 2));
        }
        let s: f64 = ww.iter().sum();
        ww.iter_mut().for_each(|v| *v /= s);
        Self { cos, w: ww }
    }

    /// log E[e^{a σ₁}] and the first two tilted moments of σ₁.
    fn tilt(&self, a: f64) -> (f64, f64, f64) {
        let (mut z, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for (c, w) in self.cos.iter().zip(&self.w) {
            let e = w * (a * (c - 1.0)).exp();
            z += e;
            m1 += e * c;
            m2 += e * c * c;
        }
        (a + z.ln(), m1 / z, m2 / z)
    }
}

/// log E[e^{a σ₁}] for a ≥ 0, with the G and G' of the tilted measure.
fn log_mgf(n: usize, a: f64) -> (f64, f64, f64) {
    let s = a.signum();
    let a = a.abs();
    match n {
        1 => {
            let t = a.tanh();
            (a + (0.5 * (1.0 + (-2.0 * a).exp())).ln(), s * t, 1.0 - t * t)
        }
        3 if a > 1e-4 => {
            // sinh(a)/a and the Langevin function
            let lc = a + (0.5 * (1.0 - (-2.0 * a).exp())).ln() - a.ln();
            let g = 1.0 / a.tanh() - 1.0 / a;
            let gp = 1.0 / (a * a) - 1.0 / a.sinh().powi(2);
            (lc, s * g, gp)
        }
        _ => {
            let (lz, m1, m2) = SphereRule::new(n).tilt(a);
            (lz, s * m1, m2 - m1 * m1)
        }
    }
}

/// The renormalised potential at a field φ on the axis of h. For n = 1 the
/// constant is chosen so that V(0) = 0 when h = 0.
pub fn renorm_potential(phi: f64, s: &MeanFieldState) -> f64 {
    let a = s.beta * phi + s.h;
    let (lz, _, _) = log_mgf(s.n, a);
    let quad = 0.5 * s.beta * phi * phi - lz;
    if s.n == 1 {
        quad
    } else {
        quad + 0.5 * s.beta
    }
}

/// V for a general vector φ ∈ R^n (h along the first axis).
pub fn renorm_potential_vec(phi: &[f64], s: &MeanFieldState) -> Result<f64> {
    if phi.len() != s.n {
        return Err(Error::InvalidParam("field has the wrong number of components".into()));
    }
    let mut a2 = 0.0;
    for (i, p) in phi.iter().enumerate() {
        let ai = s.beta * p + if i == 0 { s.h } else { 0.0 };
        a2 += ai * ai;
    }
    let r2: f64 = phi.iter().map(|p| p * p).sum();
    let (lz, _, _) = log_mgf(s.n, a2.sqrt());
    Ok(0.5 * s.beta * r2 - lz + if s.n == 1 { 0.0 } else { 0.5 * s.beta })
}

/// Direct quadrature of the defining sphere integral, for checking closed forms.
pub fn renorm_potential_quadrature(phi: f64, s: &MeanFieldState) -> f64 {
    if s.n == 1 {
        let f = |sg: f64| (-0.5 * s.beta * (phi - sg).powi(2) + s.h * sg).exp();
        return -(0.5 * (f(1.0) + f(-1.0))).ln();
    }
    let r = SphereRule::new(s.n);
    let z: f64 = r
        .cos
        .iter()
        .zip(&r.w)
        .map(|(c, w)| w * (-0.5 * s.beta * (phi * phi - 2.0 * phi * c + 1.0) + s.h * c).exp())
        .sum();
    -z.ln()
}

/// G(φ) = E_{μ_φ}[σ₁] on the axis.
pub fn g_map(phi: f64, s: &MeanFieldState) -> f64 {
    log_mgf(s.n, s.beta * phi + s.h).1
}

/// d²V/dφ² along the axis.
pub fn v_curvature(phi: f64, s: &MeanFieldState) -> f64 {
    let (_, _, gp) = log_mgf(s.n, s.beta * phi + s.h);
    s.beta - s.beta * s.beta * gp
}

/// Global minimiser φ₀ of V on the field axis. At h = 0 and β > β_c the
/// positive root is returned (the h ↓ 0 limit).
pub fn solve_magnetisation(s: &MeanFieldState) -> f64 {
    if s.h < 0.0 {
        return -solve_magnetisation(&MeanFieldState { h: -s.h, ..*s });
    }
    if s.h == 0.0 && s.beta <= s.beta_c() {
        return 0.0;
    }
    let f = |p: f64| g_map(p, s) - p;
    let lo = if s.h == 0.0 { 1e-9 * ((s.beta - s.beta_c()) / s.beta_c()).sqrt().min(1.0) } else { 0.0 };
    let root = brent(f, lo, 1.0, 1e-16, 400).unwrap_or(0.0);
    // polish by Newton on φ − G(φ)
    let mut p = root;
    for _ in 0..3 {
        let (_, g, gp) = log_mgf(s.n, s.beta * p + s.h);
        let d = 1.0 - s.beta * gp;
        if d.abs() < 1e-300 {
            break;
        }
        let step = (p - g) / d;
        if !(step.abs() < 1e-6) {
            break;
        }
        p -= step;
    }
    p
}

/// χ = ∂φ₀/∂h = G'/(1 − βG'); for n = 1 this is 1/(−β + (1−φ₀²)⁻¹).
pub fn susceptibility(s: &MeanFieldState) -> f64 {
    let p = solve_magnetisation(s);
    let (_, _, gp) = log_mgf(s.n, s.beta * p + s.h);
    1.0 / (1.0 / gp - s.beta)
}

/// ∫g e^{−NV}/∫e^{−NV} by one-dimensional quadrature for each N.
pub fn laplace_ratio<G: Fn(f64) -> f64, V: Fn(f64) -> f64>(g: G, v: V, ns: &[f64], range: (f64, f64)) -> Vec<f64> {
    let rule = Legendre::new(20);
    let panels = 4000;
    // shift by the grid minimum of V to avoid underflow
    let vmin = (0..=panels)
        .map(|i| v(range.0 + (range.1 - range.0) * i as f64 / panels as f64))
        .fold(f64::INFINITY, f64::min);
    ns.iter()
        .map(|&nn| {
            let num = rule.integrate_panels(range.0, range.1, panels, |p| g(p) * (-nn * (v(p) - vmin)).exp());
            let den = rule.integrate_panels(range.0, range.1, panels, |p| (-nn * (v(p) - vmin)).exp());
            num / den
        })
        .collect()
}

/// Laplace ratios for the n = 1 potential of `s`.
pub fn laplace_ratio_demo<G: Fn(f64) -> f64>(g: G, s: &MeanFieldState, ns: &[f64]) -> Vec<f64> {
    laplace_ratio(g, |p| renorm_potential(p, s), ns, (-4.0, 4.0))
}
