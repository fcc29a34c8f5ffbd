//! Random-walk representations of (−Δ_β + v)⁻¹ and the weakly self-avoiding
//! walk two-point function.

use super::forms::FermionMoments;
use crate::error::{Error, Result};
use crate::quad::{gauss_hermite, Legendre};
use crate::rng;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

/// Vertices with symmetric edge weights β and killing rates v.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    pub beta: DMatrix<f64>,
    pub kill: Vec<f64>,
}

impl WeightedGraph {
    pub fn new(beta: DMatrix<f64>, kill: Vec<f64>) -> Result<Self> {
        let n = beta.nrows();
        if n == 0 || n > 8 || beta.ncols() != n || kill.len() != n {
            return Err(Error::InvalidParam("need a square weight matrix with 1..=8 vertices".into()));
        }
        for i in 0..n {
            if beta[(i, i)] != 0.0 {
                return Err(Error::InvalidParam("diagonal edge weights must vanish".into()));
            }
            for j in 0..n {
                if beta[(i, j)] < 0.0 || beta[(i, j)] != beta[(j, i)] {
                    return Err(Error::InvalidParam("edge weights must be symmetric and nonnegative".into()));
                }
            }
        }
        Ok(Self { beta, kill })
    }

    /// Complete graph with unit weights.
    pub fn complete(n: usize, kill: f64) -> Result<Self> {
        Self::new(DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { 1.0 }), vec![kill; n])
    }

    /// Nearest-neighbour cycle.
    pub fn cycle(n: usize, kill: f64) -> Result<Self> {
        let b = DMatrix::from_fn(n, n, |i, j| if (i + 1) % n == j || (j + 1) % n == i { 1.0 } else { 0.0 });
        Self::new(b, vec![kill; n])
    }

    pub fn len(&self) -> usize {
        self.kill.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kill.is_empty()
    }

    pub fn beta_bar(&self, x: usize) -> f64 {
        self.beta.row(x).sum()
    }

    /// −Δ_β + v.
    pub fn operator(&self) -> DMatrix<f64> {
        let n = self.len();
        DMatrix::from_fn(n, n, |i, j| if i == j { self.beta_bar(i) + self.kill[i] } else { -self.beta[(i, j)] })
    }

    pub fn dense_inverse(&self) -> Result<DMatrix<f64>> {
        self.operator().try_inverse().ok_or_else(|| Error::InvalidParam("singular operator".into()))
    }

    fn require_walkable(&self) -> Result<()> {
        if (0..self.len()).any(|x| !(self.beta_bar(x) > 0.0)) {
            return Err(Error::InvalidParam("every vertex needs a positive total edge weight".into()));
        }
        Ok(())
    }
}

/// Walk sum with its tail bound.
#[derive(Debug, Clone)]
pub struct WalkSum {
    pub value: DMatrix<f64>,
    pub tail_bound: f64,
    pub steps: usize,
}

/// Σ over walks with Y_{j+1} ≠ Y_j of Π β_{Y_jY_{j+1}} / Π (β̄_{Y_j} + v_{Y_j}).
pub fn resolvent_walk_sum(g: &WeightedGraph, tol: f64) -> Result<WalkSum> {
    let n = g.len();
    let dinv: Vec<f64> = (0..n).map(|x| 1.0 / (g.beta_bar(x) + g.kill[x])).collect();
    let rho = (0..n).map(|x| g.beta_bar(x) * dinv[x]).fold(0.0, f64::max);
    if !(rho < 1.0) || dinv.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::GreenDiverges);
    }
    let p = DMatrix::from_fn(n, n, |i, j| dinv[i] * g.beta[(i, j)]);
    let dmax = dinv.iter().cloned().fold(0.0, f64::max);
    let mut term = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(dinv.clone()));
    let mut sum = term.clone();
    let mut steps = 0;
    let mut tail = rho / (1.0 - rho) * dmax;
    while tail > tol {
        term = &p * term;
        sum += &term;
        steps += 1;
        tail = rho.powi(steps as i32 + 1) / (1.0 - rho) * dmax;
        if steps > 1_000_000 {
            return Err(Error::NonConvergent("walk sum".into()));
        }
    }
    Ok(WalkSum { value: sum, tail_bound: tail, steps })
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub samples: usize,
}

impl McEstimate {
    fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        Self { mean, std_err: (var / n).sqrt(), samples: xs.len() }
    }
}

fn jump<R: Rng>(g: &WeightedGraph, u: usize, rng: &mut R) -> usize {
    let tot = g.beta_bar(u);
    let mut r = rng.random::<f64>() * tot;
    for v in 0..g.len() {
        r -= g.beta[(u, v)];
        if r < 0.0 && g.beta[(u, v)] > 0.0 {
            return v;
        }
    }
    (0..g.len()).rev().find(|&v| g.beta[(u, v)] > 0.0).unwrap()
}

fn exp_holding<R: Rng>(rate: f64, rng: &mut R) -> f64 {
    -(1.0 - rng.random::<f64>()).ln() / rate
}

/// ∫₀^∞ E_x(e^{−Σ v_u L_{T,u}} 1_{X(T)=y}) dT by simulating the continuous-time walk.
pub fn ctrw_feynman_kac(g: &WeightedGraph, x: usize, y: usize, seed: u64, samples: usize) -> Result<McEstimate> {
    g.require_walkable()?;
    if g.kill.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidParam("killing rates must be positive".into()));
    }
    let mut rng = rng::stream(seed, &[0x464b, x as u64, y as u64]);
    let mut xs = Vec::with_capacity(samples);
    for _ in 0..samples {
        let mut u = x;
        let mut logw: f64 = 0.0;
        let mut acc = 0.0;
        while logw > -45.0 {
            let h = exp_holding(g.beta_bar(u), &mut rng);
            let v = g.kill[u];
            if u == y {
                acc += logw.exp() * (-(-v * h).exp_m1()) / v;
            }
            logw -= v * h;
            u = jump(g, u, &mut rng);
        }
        xs.push(acc);
    }
    Ok(McEstimate::from_samples(&xs))
}

/// The two routes to the weakly self-avoiding walk two-point function G_{0x}(g, ν).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WsawTwoPoint {
    pub walk: McEstimate,
    pub forms: f64,
}

/// Route (a): ∫ E₀(e^{−gI(T)} 1_{X(T)=x}) e^{−νT} dT with I(T) = Σ_u L_{T,u}².
pub fn wsaw_walk(g: &WeightedGraph, x: usize, gg: f64, nu: f64, seed: u64, samples: usize) -> Result<McEstimate> {
    if !(gg > 0.0) {
        return Err(Error::InvalidParam("g must be positive".into()));
    }
    g.require_walkable()?;
    let n = g.len();
    let rule = Legendre::new(16);
    let mut rng = rng::stream(seed, &[0x5753, x as u64]);
    let mut xs = Vec::with_capacity(samples);
    for _ in 0..samples {
        let mut u = 0;
        let mut local = vec![0.0; n];
        let mut logw: f64 = 0.0; // −gI(s) − νs at the start of the interval
        let mut acc = 0.0;
        let mut steps = 0;
        loop {
            let h = exp_holding(g.beta_bar(u), &mut rng);
            let l0 = local[u];
            let expo = |t: f64| -gg * (2.0 * l0 * t + t * t) - nu * t;
            if u == x {
                let width = 0.5 / gg.sqrt();
                let panels = ((h / width).ceil() as usize).clamp(1, 4000);
                acc += logw.exp() * rule.integrate_panels(0.0, h, panels, |t| expo(t).exp());
            }
            logw += expo(h);
            local[u] += h;
            u = jump(g, u, &mut rng);
            steps += 1;
            // largest possible future gain of the exponent
            let gain: f64 = local.iter().map(|l| (-nu - 2.0 * gg * l).max(0.0).powi(2) / (4.0 * gg)).sum();
            if logw + gain < -40.0 {
                break;
            }
            if steps > 100_000 {
                return Err(Error::NonConvergent("walk did not terminate".into()));
            }
        }
        xs.push(acc);
    }
    Ok(McEstimate::from_samples(&xs))
}

/// Route (b): E_C(e^{−Σ(gτ_y² + ν₀τ_y)} φ̄₀φ_x) with C = (−Δ_β + m²)⁻¹ and
/// ν₀ = ν − m², the fermionic directions expanded exactly and the boson
/// integral done by tensor Gauss–Hermite quadrature with `nodes` per direction.
pub fn wsaw_forms(g: &WeightedGraph, x: usize, gg: f64, nu: f64, m2: f64, nodes: usize) -> Result<f64> {
    if !(gg > 0.0) {
        return Err(Error::InvalidParam("g must be positive".into()));
    }
    if !(m2 > 0.0) {
        return Err(Error::InvalidParam("m2 must be positive".into()));
    }
    let n = g.len();
    if n > 3 {
        return Err(Error::InvalidParam("quadrature route supports at most 3 vertices".into()));
    }
    let nu0 = nu - m2;
    let lap = WeightedGraph { beta: g.beta.clone(), kill: vec![m2; n] };
    let a = lap.operator();
    let a_rows: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| a[(i, j)]).collect()).collect();
    let fm = FermionMoments::new(&a_rows)?;
    // F(τ) = Σ_S ∂_S F(τ⁰) Π_{z∈S} ψ_zψ̄_z; collect the fermion moments of Π ψ_zψ̄_z
    let mut subsets = Vec::new();
    for s in 0u32..(1 << n) {
        let mut mask = 0u32;
        let mut sign = 1.0;
        // Π_{z∈S} (ψ_z ψ̄_z) = Π (−ψ̄_zψ_z), already in canonical order
        for z in 0..n {
            if s & (1 << z) != 0 {
                mask |= 0b11 << (2 * z);
                sign = -sign;
            }
        }
        let m = fm.moment(mask) * sign;
        if m != 0.0 {
            subsets.push((s, m));
        }
    }
    // boson side. e^{−φAφ̄ − ν₀|φ|²} = e^{−φA_rφ̄ − (ν − ν_r)|φ|²} with A_r = −Δ_β + ν_r, so
    // the quadrature runs over the m²-free reference covariance C_r = A_r⁻¹:
    // φ = u + iv with u, v independent N(0, C_r/2)
    let nu_r = if nu > 0.25 { nu } else { 1.0 };
    let a_r = WeightedGraph { beta: g.beta.clone(), kill: vec![nu_r; n] }.operator();
    let jac = a.determinant() / a_r.determinant();
    let c_r = a_r.try_inverse().ok_or_else(|| Error::InvalidParam("singular operator".into()))?;
    let eig = SymmetricEigen::new(c_r * 0.5);
    let root = &eig.eigenvectors * DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).sqrt()));
    let (hx, hw) = gauss_hermite(nodes);
    let z: Vec<f64> = hx.iter().map(|t| t * std::f64::consts::SQRT_2).collect();
    let w: Vec<f64> = hw.iter().map(|t| t / std::f64::consts::PI.sqrt()).collect();
    let dim = 2 * n;
    let total = nodes.pow(dim as u32);
    let shift = nu - nu_r;
    let f = |t: f64| (-gg * t * t - shift * t).exp();
    let fp = |t: f64| -(2.0 * gg * t + nu0) * (-gg * t * t - shift * t).exp();
    let mut acc = 0.0;
    let mut idx = vec![0usize; dim];
    let mut u = vec![0.0; n];
    let mut v = vec![0.0; n];
    for _ in 0..total {
        let mut weight = 1.0;
        for k in 0..dim {
            weight *= w[idx[k]];
        }
        for i in 0..n {
            u[i] = 0.0;
            v[i] = 0.0;
            for k in 0..n {
                u[i] += root[(i, k)] * z[idx[k]];
                v[i] += root[(i, k)] * z[idx[n + k]];
            }
        }
        let tau0: Vec<f64> = (0..n).map(|i| u[i] * u[i] + v[i] * v[i]).collect();
        // Re(φ̄₀φ_x); the imaginary part integrates to zero
        let obs = u[0] * u[x] + v[0] * v[x];
        let mut sum_s = 0.0;
        for (s, m) in &subsets {
            let mut prod = *m;
            for i in 0..n {
                prod *= if s & (1 << i) != 0 { fp(tau0[i]) } else { f(tau0[i]) };
            }
            sum_s += prod;
        }
        acc += weight * obs * sum_s * jac;
        for k in 0..dim {
            idx[k] += 1;
            if idx[k] < nodes {
                break;
            }
            idx[k] = 0;
        }
    }
    Ok(acc)
}

/// Both routes for G_{0x}(g, ν).
pub fn wsaw_two_point(g: &WeightedGraph, x: usize, gg: f64, nu: f64, seed: u64, samples: usize) -> Result<WsawTwoPoint> {
    let walk = wsaw_walk(g, x, gg, nu, seed, samples)?;
    let forms = wsaw_forms(g, x, gg, nu, 1.0, 24)?;
    Ok(WsawTwoPoint { walk, forms })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn walk_sum_matches_inverse() {
        let g = WeightedGraph::complete(2, 1.0).unwrap();
        let ws = resolvent_walk_sum(&g, 1e-13).unwrap();
        let inv = g.dense_inverse().unwrap();
        assert!((ws.value - &inv).abs().max() < 1e-10);
        let c4 = WeightedGraph::cycle(4, 0.3).unwrap();
        let ws = resolvent_walk_sum(&c4, 1e-13).unwrap();
        assert!((ws.value - c4.dense_inverse().unwrap()).abs().max() < 1e-10);
        let big = WeightedGraph::complete(3, 1e6).unwrap();
        let ws = resolvent_walk_sum(&big, 1e-15).unwrap();
        assert!((ws.value[(1, 1)] * 1e6 - 1.0).abs() < 1e-5);
        let zero = WeightedGraph::complete(3, 0.0).unwrap();
        assert!(resolvent_walk_sum(&zero, 1e-10).is_err());
    }

    #[test]
    fn feynman_kac() {
        let b = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.5, 1.0, 0.0, 2.0, 0.5, 2.0, 0.0]);
        let g = WeightedGraph::new(b, vec![0.4, 0.7, 1.1]).unwrap();
        let inv = g.dense_inverse().unwrap();
        for y in 0..3 {
            let e = ctrw_feynman_kac(&g, 0, y, 42, 20000).unwrap();
            assert!((e.mean - inv[(0, y)]).abs() < 3.0 * e.std_err, "{y} {e:?} {}", inv[(0, y)]);
        }
        let gm = WeightedGraph::cycle(4, 0.25).unwrap();
        let es: Vec<McEstimate> = (0..4).map(|y| ctrw_feynman_kac(&gm, 0, y, 7, 4000).unwrap()).collect();
        let tot: f64 = es.iter().map(|e| e.mean).sum();
        let se = es.iter().map(|e| e.std_err * e.std_err).sum::<f64>().sqrt();
        assert!((tot - 4.0).abs() < 3.0 * se, "{tot} {se}");
        let iso = WeightedGraph::new(DMatrix::zeros(2, 2), vec![1.0, 1.0]).unwrap();
        assert!(ctrw_feynman_kac(&iso, 0, 1, 1, 10).is_err());
    }

    #[test]
    fn wsaw_routes() {
        let g = WeightedGraph::complete(2, 0.0).unwrap();
        for x in 0..2 {
            let f1 = wsaw_forms(&g, x, 0.5, 1.0, 0.5, 24).unwrap();
            let f2 = wsaw_forms(&g, x, 0.5, 1.0, 2.0, 24).unwrap();
            assert!((f1 - f2).abs() < 1e-8, "{f1} {f2}");
            let w = wsaw_walk(&g, x, 0.5, 1.0, 3, 20000).unwrap();
            assert!((w.mean - f1).abs() < 3.0 * w.std_err, "{w:?} {f1}");
        }
        let a = wsaw_forms(&g, 1, 0.2, 1.0, 1.0, 24).unwrap();
        let b = wsaw_forms(&g, 1, 0.8, 1.0, 1.0, 24).unwrap();
        assert!(b < a);
        assert!(wsaw_walk(&g, 0, 0.0, 1.0, 1, 10).is_err());
    }
}
