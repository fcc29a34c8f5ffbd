//! Hierarchical block geometry, the hierarchical Laplacian, the covariance
//! decomposition (−Δ_H + m²)⁻¹ = Σ_j C_j + C_N̂, and its moments.

use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Scalar;

/// The box [0, L^N)^d with its nested blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HierGeometry {
    pub d: usize,
    pub l: usize,
    pub n: usize,
}

impl HierGeometry {
    pub fn new(d: usize, l: usize, n: usize) -> Result<Self> {
        if d == 0 || l < 2 || n == 0 {
            return Err(Error::InvalidParam(format!("need d >= 1, L >= 2, N >= 1 (got d={d}, L={l}, N={n})")));
        }
        let bits = (d * n) as f64 * (l as f64).log2();
        if bits > 40.0 {
            return Err(Error::InvalidParam("volume L^(dN) too large".into()));
        }
        Ok(Self { d, l, n })
    }

    /// Box side L^N.
    pub fn side(&self) -> usize {
        self.l.pow(self.n as u32)
    }

    /// Number of sites L^{dN}.
    pub fn volume(&self) -> usize {
        self.side().pow(self.d as u32)
    }

    /// d = 1 lies outside the dimension range of the construction.
    pub fn is_extrapolation(&self) -> bool {
        self.d < 2
    }

    pub fn coords(&self, mut idx: usize) -> Vec<usize> {
        let s = self.side();
        (0..self.d)
            .map(|_| {
                let c = idx % s;
                idx /= s;
                c
            })
            .collect()
    }

    pub fn index(&self, x: &[usize]) -> usize {
        let s = self.side();
        x.iter().rev().fold(0, |acc, &c| acc * s + c)
    }

    /// The j-block label of x: each coordinate with its low j base-L digits cleared.
    pub fn block_of(&self, x: &[usize], j: usize) -> Vec<usize> {
        let lj = self.l.pow(j as u32);
        x.iter().map(|c| c / lj).collect()
    }

    pub fn same_block(&self, x: &[usize], y: &[usize], j: usize) -> bool {
        let lj = self.l.pow(j as u32);
        x.iter().zip(y).all(|(a, b)| a / lj == b / lj)
    }

    /// Smallest j such that x and y lie in a common j-block.
    pub fn coalescence_scale(&self, x: &[usize], y: &[usize]) -> Result<usize> {
        self.check_site(x)?;
        self.check_site(y)?;
        if x == y {
            return Err(Error::EqualSites);
        }
        let mut j = 0;
        for (&a, &b) in x.iter().zip(y) {
            let (mut a, mut b) = (a, b);
            let mut k = 0;
            while a != b {
                a /= self.l;
                b /= self.l;
                k += 1;
            }
            j = j.max(k);
        }
        Ok(j)
    }

    fn check_site(&self, x: &[usize]) -> Result<()> {
        if x.len() != self.d || x.iter().any(|&c| c >= self.side()) {
            return Err(Error::InvalidParam(format!("site {x:?} outside the box")));
        }
        Ok(())
    }

    /// Coalescence scale with the convention 0 for x = y.
    fn scale_or_zero(&self, x: &[usize], y: &[usize]) -> usize {
        if x == y {
            0
        } else {
            self.coalescence_scale(x, y).unwrap_or(usize::MAX)
        }
    }
}

fn lpow<T: Scalar>(l: usize, k: i32) -> T {
    T::from_i64(l as i64).powi(k)
}

/// Block projection Q_{j;xy} = L^{-dj} 1{x, y share a j-block}.
pub fn projection_q<T: Scalar>(geom: &HierGeometry, j: usize, x: &[usize], y: &[usize]) -> T {
    if geom.same_block(x, y, j) {
        lpow(geom.l, -((geom.d * j) as i32))
    } else {
        T::zero()
    }
}

/// Closed form of Δ_{H,N;xy}.
pub fn laplacian_entry<T: Scalar>(geom: &HierGeometry, x: &[usize], y: &[usize]) -> T {
    let d = geom.d as i32;
    let n = geom.n as i32;
    let l_d: T = lpow(geom.l, -d);
    let l_d2: T = lpow(geom.l, -(d + 2));
    let one = T::one();
    let denom = one.clone() - l_d2.clone();
    if x == y {
        let top: T = one.clone() - lpow(geom.l, -(d + 2) * n);
        return -((one - l_d) * top / denom);
    }
    let jx = geom.scale_or_zero(x, y) as i32;
    let l2: T = lpow(geom.l, 2);
    let a = (l2 - one.clone()) / denom.clone() * lpow(geom.l, -(d + 2) * jx);
    let b = (one - l_d) / denom * lpow(geom.l, -(d + 2) * n);
    a + b
}

/// Which piece of the decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    /// C_j for 1 ≤ j ≤ N.
    Fine(usize),
    /// The final covariance C_N̂ = m⁻² Q_N.
    Final,
}

/// γ_j = L^{2(j−1)} / (1 + m² L^{2(j−1)}).
pub fn gamma<T: Scalar>(l: usize, j: usize, m2: &T) -> T {
    let a: T = lpow(l, 2 * (j as i32 - 1));
    a.clone() / (T::one() + a * m2.clone())
}

/// Implicit representation of one covariance piece.
#[derive(Debug, Clone, PartialEq)]
pub struct HierCovariance<T> {
    pub scale: Scale,
    pub m2: T,
    pub gamma: T,
    /// Entry for x = y.
    pub diag: T,
    /// Entry for x ≠ y in a common (j−1)-block.
    pub within: T,
    /// Entry for x, y in distinct (j−1)-blocks of a common j-block.
    pub cross: T,
}

impl<T: Scalar> HierCovariance<T> {
    pub fn new(geom: &HierGeometry, scale: Scale, m2: T) -> Result<Self> {
        match scale {
            Scale::Fine(j) => {
                if j == 0 || j > geom.n {
                    return Err(Error::InvalidParam(format!("scale {j} outside 1..={}", geom.n)));
                }
                if m2.to_f64() < 0.0 {
                    return Err(Error::InvalidParam("m2 must be >= 0".into()));
                }
                let g = gamma(geom.l, j, &m2);
                let d = geom.d as i32;
                let a: T = lpow(geom.l, -d * (j as i32 - 1));
                let b: T = lpow(geom.l, -d * j as i32);
                let diag = g.clone() * (a - b.clone());
                let cross = -(g.clone() * b);
                Ok(Self { scale, m2, gamma: g, within: diag.clone(), diag, cross })
            }
            Scale::Final => {
                if !(m2.to_f64() > 0.0) {
                    return Err(Error::FinalNeedsMass);
                }
                let v = T::one() / m2.clone() * lpow(geom.l, -((geom.d * geom.n) as i32));
                Ok(Self { scale, gamma: T::one() / m2.clone(), m2, diag: v.clone(), within: v.clone(), cross: v })
            }
        }
    }

    pub fn entry(&self, geom: &HierGeometry, x: &[usize], y: &[usize]) -> T {
        match self.scale {
            Scale::Final => self.diag.clone(),
            Scale::Fine(j) => {
                if x == y {
                    self.diag.clone()
                } else if geom.same_block(x, y, j - 1) {
                    self.within.clone()
                } else if geom.same_block(x, y, j) {
                    self.cross.clone()
                } else {
                    T::zero()
                }
            }
        }
    }

    /// Covariance of the L^d sub-block values inside one j-block.
    pub fn block_matrix(&self, geom: &HierGeometry) -> nalgebra::DMatrix<f64> {
        let b = geom.l.pow(geom.d as u32);
        nalgebra::DMatrix::from_fn(b, b, |i, k| if i == k { self.diag.to_f64() } else { self.cross.to_f64() })
    }

    /// Eigenvalues of the within-block matrix, ascending.
    pub fn block_eigenvalues(&self, geom: &HierGeometry) -> Vec<f64> {
        let mut ev: Vec<f64> = self.block_matrix(geom).symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }
}

/// C_{j;xy}(m²), or the final piece.
pub fn covariance_entry<T: Scalar>(geom: &HierGeometry, scale: Scale, x: &[usize], y: &[usize], m2: T) -> Result<T> {
    Ok(HierCovariance::new(geom, scale, m2)?.entry(geom, x, y))
}

/// Diagonal c_j and moment sums c_j^{(n)} = Σ_x C_{j+1;0x}^n.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable<T> {
    pub j: usize,
    pub c: T,
    pub c1: T,
    pub c2: T,
    pub c3: T,
    pub c4: T,
}

/// Infinite-volume closed forms for the moments at scale j ≥ 0.
pub fn block_moments<T: Scalar>(d: usize, l: usize, j: usize, m2: &T) -> MomentTable<T> {
    let d = d as i32;
    let j_ = j as i32;
    let one = T::one();
    let a: T = lpow(l, -d);
    let r = if m2.is_zero() { one.clone() } else { one.clone() / (one.clone() + m2.clone() * lpow(l, 2 * j_)) };
    let c = lpow::<T>(l, -(d - 2) * j_) * r.clone() * (one.clone() - a.clone());
    let c2 = lpow::<T>(l, -(d - 4) * j_) * r.powi(2) * (one.clone() - a.clone());
    let three = T::from_i64(3);
    let two = T::from_i64(2);
    let c3 = lpow::<T>(l, -(2 * d - 6) * j_)
        * r.powi(3)
        * (one.clone() - three.clone() * a.clone() + two * a.powi(2));
    let c4 = lpow::<T>(l, -(3 * d - 8) * j_)
        * r.powi(4)
        * (one - T::from_i64(4) * a.clone() + T::from_i64(6) * a.powi(2) - three * a.powi(3));
    MomentTable { j, c, c1: T::zero(), c2, c3, c4 }
}

/// Moments of C_{j+1} on the box; requires j < N.
pub fn moments<T: Scalar>(geom: &HierGeometry, j: usize, m2: &T) -> Result<MomentTable<T>> {
    if j >= geom.n {
        return Err(Error::InvalidParam(format!("moments need j < N (j={j}, N={})", geom.n)));
    }
    Ok(block_moments(geom.d, geom.l, j, m2))
}

/// Diagonal c_j of C_{j+1} in infinite volume.
pub fn c_diag(d: usize, l: usize, j: usize, m2: f64) -> f64 {
    let r = if m2 == 0.0 { 1.0 } else { 1.0 / (1.0 + m2 * (l as f64).powi(2 * j as i32)) };
    (l as f64).powi(-((d as i32 - 2) * j as i32)) * r * (1.0 - (l as f64).powi(-(d as i32)))
}

/// Second moment c_j^{(2)} in infinite volume.
pub fn c2_diag(d: usize, l: usize, j: usize, m2: f64) -> f64 {
    let r = if m2 == 0.0 { 1.0 } else { 1.0 / (1.0 + m2 * (l as f64).powi(2 * j as i32)) };
    (l as f64).powi(-((d as i32 - 4) * j as i32)) * r * r * (1.0 - (l as f64).powi(-(d as i32)))
}

/// A truncated series with a bound on the omitted tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedSum {
    pub value: f64,
    pub tail_bound: f64,
    pub terms: usize,
}

fn sum_with_ratio_tail<F: Fn(usize) -> f64, R: Fn(usize) -> f64>(term: F, ratio: R, jmax: usize) -> TruncatedSum {
    let mut value = 0.0;
    for j in 0..jmax {
        value += term(j);
    }
    let r = ratio(jmax);
    let tail_bound = if r < 1.0 { term(jmax) / (1.0 - r) } else { f64::INFINITY };
    TruncatedSum { value, tail_bound, terms: jmax }
}

/// Infinite-volume (−Δ_H + m²)⁻¹₀₀ = Σ_{j≥0} c_j.
pub fn green_diag(d: usize, l: usize, m2: f64, jmax: usize) -> Result<TruncatedSum> {
    if d <= 2 && m2 <= 0.0 {
        return Err(Error::GreenDiverges);
    }
    let lf = l as f64;
    Ok(sum_with_ratio_tail(
        |j| c_diag(d, l, j, m2),
        |j| lf.powi(2 - d as i32) * (1.0 + m2 * lf.powi(2 * j as i32)) / (1.0 + m2 * lf.powi(2 * j as i32 + 2)),
        jmax,
    ))
}

/// Finite-volume diagonal Σ_{j<N} c_j + m⁻² L^{−dN}.
pub fn green_diag_box(geom: &HierGeometry, m2: f64) -> Result<f64> {
    if !(m2 > 0.0) {
        return Err(Error::FinalNeedsMass);
    }
    let s: f64 = (0..geom.n).map(|j| c_diag(geom.d, geom.l, j, m2)).sum();
    Ok(s + 1.0 / (m2 * geom.volume() as f64))
}

/// Hierarchical bubble B^H = Σ_{j≥0} c_j^{(2)}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BubbleReport {
    pub sum: TruncatedSum,
    /// B^H / log m⁻¹ (d = 4 only).
    pub ratio_log: Option<f64>,
    /// The d = 4 asymptotic constant (1 − L^{−d}) / log L.
    pub asymptote: Option<f64>,
}

pub fn hier_bubble(d: usize, l: usize, m2: f64, jmax: usize) -> Result<BubbleReport> {
    if d <= 4 && m2 <= 0.0 {
        return Err(Error::BubbleDiverges);
    }
    let lf = l as f64;
    let sum = sum_with_ratio_tail(
        |j| c2_diag(d, l, j, m2),
        |j| {
            let q = (1.0 + m2 * lf.powi(2 * j as i32)) / (1.0 + m2 * lf.powi(2 * j as i32 + 2));
            lf.powi(4 - d as i32) * q * q
        },
        jmax,
    );
    let (ratio_log, asymptote) = if d == 4 {
        (Some(sum.value / (-0.5 * m2.ln())), Some((1.0 - lf.powi(-4)) / lf.ln()))
    } else {
        (None, None)
    };
    Ok(BubbleReport { sum, ratio_log, asymptote })
}

/// Mass scale j_m: largest j with L^j m ≤ 1 (∞ at m² = 0).
pub fn mass_scale(l: usize, m2: f64) -> Option<usize> {
    if m2 <= 0.0 {
        return None;
    }
    let j = (-0.5 * m2.ln() / (l as f64).ln()).floor();
    Some(j.max(0.0) as usize)
}

/// ϑ_j = 2^{−(j − j_m)₊}.
pub fn vartheta(l: usize, j: usize, m2: f64) -> f64 {
    match mass_scale(l, m2) {
        None => 1.0,
        Some(jm) => 0.5f64.powi(j.saturating_sub(jm) as i32),
    }
}

/// Sample one field φ = Σ_j ζ_j + ζ_N̂ with one Gaussian per block per scale.
pub fn gff_sample_tree(geom: &HierGeometry, m2: f64, seed: u64) -> Result<Vec<f64>> {
    if !(m2 > 0.0) {
        return Err(Error::FinalNeedsMass);
    }
    let mut rng = rng::stream(seed, &[0x4849_4552]);
    let vol = geom.volume();
    let coords: Vec<Vec<usize>> = (0..vol).map(|i| geom.coords(i)).collect();
    let mut phi = vec![0.0; vol];
    let bsz = geom.l.pow(geom.d as u32);
    for j in 1..=geom.n {
        let sigma = (gamma(geom.l, j, &m2) * (geom.l as f64).powi(-((geom.d * (j - 1)) as i32))).sqrt();
        let sub_side = geom.side() / geom.l.pow(j as u32 - 1);
        let sub_geom = HierGeometry { d: geom.d, l: geom.l, n: geom.n - (j - 1) };
        let nsub = sub_side.pow(geom.d as u32);
        debug_assert_eq!(nsub, sub_geom.volume());
        let xi: Vec<f64> = (0..nsub).map(|_| sigma * rng::normal(&mut rng)).collect();
        // mean of ξ over the L^d sub-blocks of each j-block
        let mut mean = vec![0.0; nsub];
        for b in 0..nsub {
            let bc = sub_geom.coords(b);
            let parent = sub_geom.block_of(&bc, 1);
            let mut s = 0.0;
            for k in 0..bsz {
                let mut off = k;
                let child: Vec<usize> = parent
                    .iter()
                    .map(|p| {
                        let o = off % geom.l;
                        off /= geom.l;
                        p * geom.l + o
                    })
                    .collect();
                s += xi[sub_geom.index(&child)];
            }
            mean[b] = s / bsz as f64;
        }
        for (x, c) in coords.iter().enumerate() {
            let b = sub_geom.index(&geom.block_of(c, j - 1));
            phi[x] += xi[b] - mean[b];
        }
    }
    let top = rng::normal(&mut rng);
    let top = top * (1.0 / (m2 * vol as f64)).sqrt();
    for v in phi.iter_mut() {
        *v += top;
    }
    Ok(phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use nalgebra::DMatrix;
    use num_rational::BigRational;
    use num_traits::Zero;

    fn g(d: usize, l: usize, n: usize) -> HierGeometry {
        HierGeometry::new(d, l, n).unwrap()
    }

    #[test]
    fn coalescence_examples() {
        assert_eq!(g(2, 2, 2).coalescence_scale(&[0, 0], &[1, 0]).unwrap(), 1);
        assert_eq!(g(2, 2, 2).coalescence_scale(&[0, 0], &[2, 0]).unwrap(), 2);
        assert_eq!(g(1, 2, 3).coalescence_scale(&[0], &[7]).unwrap(), 3);
        assert_eq!(g(1, 2, 3).coalescence_scale(&[3], &[3]), Err(Error::EqualSites));
    }

    #[test]
    fn laplacian_closed_form_small() {
        let geom = g(2, 2, 1);
        let v: BigRational = laplacian_entry(&geom, &[0, 0], &[0, 0]);
        assert_eq!(v, rat(-3, 4));
        let w: BigRational = laplacian_entry(&geom, &[0, 0], &[1, 1]);
        assert_eq!(w, rat(1, 4));
    }

    #[test]
    fn laplacian_rows_sum_to_zero_exactly() {
        for geom in [g(1, 3, 2), g(2, 2, 2), g(3, 2, 1)] {
            for xi in [0, geom.volume() - 1] {
                let x = geom.coords(xi);
                let s = (0..geom.volume()).fold(BigRational::zero(), |acc, y| {
                    acc + laplacian_entry::<BigRational>(&geom, &x, &geom.coords(y))
                });
                assert!(s.is_zero());
            }
        }
    }

    #[test]
    fn laplacian_matches_projection_sum() {
        let geom = g(2, 3, 2);
        let vol = geom.volume();
        let pts: Vec<Vec<usize>> = (0..vol).map(|i| geom.coords(i)).collect();
        for x in [0usize, 5, 40] {
            for y in 0..vol {
                let mut s = BigRational::zero();
                for j in 1..=geom.n {
                    let p = projection_q::<BigRational>(&geom, j - 1, &pts[x], &pts[y])
                        - projection_q::<BigRational>(&geom, j, &pts[x], &pts[y]);
                    s = s - Scalar::powi(&rat(3, 1), -2 * (j as i32 - 1)) * p;
                }
                assert_eq!(laplacian_entry::<BigRational>(&geom, &pts[x], &pts[y]), s);
            }
        }
    }

    #[test]
    fn covariance_examples() {
        let geom = g(4, 2, 3);
        let z = [0, 0, 0, 0];
        let v = covariance_entry(&geom, Scale::Fine(2), &z, &z, 0.0).unwrap();
        assert!((v - 0.234375).abs() < 1e-15);
        let far = [4, 0, 0, 0];
        assert_eq!(covariance_entry(&geom, Scale::Fine(2), &z, &far, 0.3).unwrap(), 0.0);
        assert_eq!(covariance_entry(&geom, Scale::Final, &z, &far, 0.0), Err(Error::FinalNeedsMass));
    }

    #[test]
    fn zero_sum_exact_and_block_spectrum() {
        let geom = g(2, 2, 3);
        for j in 1..=3 {
            let cov = HierCovariance::new(&geom, Scale::Fine(j), rat(0, 1)).unwrap();
            let s = (0..geom.volume()).fold(BigRational::zero(), |acc, y| acc + cov.entry(&geom, &[0, 0], &geom.coords(y)));
            assert!(s.is_zero());
            let covf = HierCovariance::new(&geom, Scale::Fine(j), 0.7).unwrap();
            let ev = covf.block_eigenvalues(&geom);
            assert!(ev[0].abs() < 1e-14);
            assert!(ev[1] > 1e-6);
        }
    }

    #[test]
    fn diag_formula() {
        let geom = g(3, 2, 4);
        for j in 1..=4 {
            let m2 = 0.37;
            let v = covariance_entry(&geom, Scale::Fine(j), &[1, 2, 3], &[1, 2, 3], m2).unwrap();
            let e = (1.0 + m2 * 2f64.powi(2 * (j as i32 - 1))).recip() * 2f64.powi(-(j as i32 - 1)) * (1.0 - 1.0 / 8.0);
            assert!((v - e).abs() < 1e-15);
        }
    }

    #[test]
    fn moment_examples() {
        let geom = g(4, 2, 5);
        for j in 0..4 {
            let t = moments::<BigRational>(&geom, j, &rat(0, 1)).unwrap();
            assert_eq!(t.c2, rat(15, 16));
            assert_eq!(t.c3, rat(210, 256) * Scalar::powi(&rat(2, 1), -2 * j as i32));
        }
        assert!(moments::<f64>(&geom, 5, &0.0).is_err());
    }

    #[test]
    fn green_examples() {
        let s = green_diag(4, 2, 0.0, 200).unwrap();
        assert!((s.value - 1.25).abs() < 1e-14);
        let s = green_diag(3, 2, 0.0, 200).unwrap();
        assert!((s.value - 1.75).abs() < 1e-14);
        assert!(green_diag(2, 2, 0.0, 200).is_err());
    }

    #[test]
    fn green_box_matches_dense_inverse() {
        let geom = g(4, 2, 2);
        let vol = geom.volume();
        let pts: Vec<Vec<usize>> = (0..vol).map(|i| geom.coords(i)).collect();
        let m = DMatrix::from_fn(vol, vol, |i, k| -laplacian_entry::<f64>(&geom, &pts[i], &pts[k]) + if i == k { 1.0 } else { 0.0 });
        let inv = m.try_inverse().unwrap();
        assert!((inv[(0, 0)] - green_diag_box(&geom, 1.0).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn bubble_examples() {
        let b = hier_bubble(5, 2, 0.0, 200).unwrap();
        assert!((b.sum.value - 31.0 / 16.0).abs() < 1e-13);
        assert_eq!(hier_bubble(4, 2, 0.0, 200), Err(Error::BubbleDiverges));
        for k in 1..30 {
            let b = hier_bubble(4, 2, 10f64.powi(-k), 400).unwrap();
            assert!(b.sum.value.is_finite() && b.sum.tail_bound.is_finite());
        }
    }

    #[test]
    fn mass_scale_and_vartheta() {
        assert_eq!(mass_scale(2, 4f64.powi(-5)), Some(5));
        assert_eq!(vartheta(2, 7, 4f64.powi(-5)), 0.25);
        assert_eq!(vartheta(2, 7, 0.0), 1.0);
    }

    #[test]
    fn tree_sampler_matches_covariance() {
        let geom = g(1, 2, 3);
        let m2 = 0.5;
        let samples = 100_000;
        let (mut s00, mut s07, mut s00sq, mut s07sq) = (0.0, 0.0, 0.0, 0.0);
        for k in 0..samples {
            let phi = gff_sample_tree(&geom, m2, k as u64).unwrap();
            let a = phi[0] * phi[0];
            let b = phi[0] * phi[7];
            s00 += a;
            s07 += b;
            s00sq += a * a;
            s07sq += b * b;
        }
        let n = samples as f64;
        let var = green_diag_box(&geom, m2).unwrap();
        let mut cov07 = 1.0 / (m2 * 8.0);
        for j in 1..=3 {
            cov07 += covariance_entry(&geom, Scale::Fine(j), &[0], &[7], m2).unwrap();
        }
        let se0 = ((s00sq / n - (s00 / n).powi(2)) / n).sqrt();
        let se7 = ((s07sq / n - (s07 / n).powi(2)) / n).sqrt();
        assert!((s00 / n - var).abs() < 4.0 * se0);
        assert!((s07 / n - cov07).abs() < 4.0 * se7);
        let big = gff_sample_tree(&geom, 1e8, 3).unwrap();
        assert!(big.iter().all(|v| v.abs() < 1e-2));
    }
}
