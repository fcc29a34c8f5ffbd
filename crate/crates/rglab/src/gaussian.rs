//! Gaussian measures on finite index sets: Wick calculus for polynomial
//! observables, the convolution semigroup, the F_C pairing, cumulants, and
//! sampling.

use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Scalar;
use nalgebra::{DMatrix, SymmetricEigen};
use std::collections::BTreeMap;

/// Dense exponent vector of a monomial.
pub type Monomial = Vec<u32>;

/// Sparse multivariate polynomial with canonical (lexicographic) monomial order.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<T> {
    nvars: usize,
    terms: BTreeMap<Monomial, T>,
}

impl<T: Scalar> Polynomial<T> {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: T) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, T::one())
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(e, T::one())
    }

    pub fn monomial(exps: Monomial, c: T) -> Self {
        let mut p = Self::zero(exps.len());
        p.add_term(exps, c);
        p
    }

    /// Product of the listed variables (with repetition).
    pub fn product_of(nvars: usize, vars: &[usize]) -> Self {
        let mut e = vec![0; nvars];
        for &v in vars {
            e[v] += 1;
        }
        Self::monomial(e, T::one())
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &T)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, exps: Monomial, c: T) {
        assert_eq!(exps.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&exps) {
            Some(v) => {
                let s = v.clone() + c;
                if s.is_zero() {
                    self.terms.remove(&exps);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(exps, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn constant_term(&self) -> T {
        self.terms.get(&vec![0; self.nvars]).cloned().unwrap_or_else(T::zero)
    }

    pub fn scale(&self, c: &T) -> Self {
        let mut p = Self::zero(self.nvars);
        for (e, v) in &self.terms {
            p.add_term(e.clone(), v.clone() * c.clone());
        }
        p
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut p = self.clone();
        for (e, v) in &other.terms {
            p.add_term(e.clone(), v.clone());
        }
        p
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut p = self.clone();
        for (e, v) in &other.terms {
            p.add_term(e.clone(), -v.clone());
        }
        p
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut p = Self::zero(self.nvars);
        for (e1, v1) in &self.terms {
            for (e2, v2) in &other.terms {
                let e: Monomial = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                p.add_term(e, v1.clone() * v2.clone());
            }
        }
        p
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::one(self.nvars), |acc, _| acc.mul(self))
    }

    pub fn derivative(&self, i: usize) -> Self {
        let mut p = Self::zero(self.nvars);
        for (e, v) in &self.terms {
            if e[i] > 0 {
                let mut e2 = e.clone();
                e2[i] -= 1;
                p.add_term(e2, v.clone() * T::from_i64(e[i] as i64));
            }
        }
        p
    }

    pub fn eval(&self, x: &[T]) -> T {
        let mut s = T::zero();
        for (e, v) in &self.terms {
            let mut t = v.clone();
            for (xi, &k) in x.iter().zip(e) {
                if k > 0 {
                    t = t * xi.powi(k as i32);
                }
            }
            s = s + t;
        }
        s
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, v)| v.to_f64() * x.iter().zip(e).map(|(xi, &k)| xi.powi(k as i32)).product::<f64>())
            .sum()
    }

    /// Δ_C A = Σ_{xy} C_{xy} ∂_x ∂_y A.
    pub fn laplacian(&self, c: &[Vec<T>]) -> Self {
        let mut out = Self::zero(self.nvars);
        for x in 0..self.nvars {
            let dx = self.derivative(x);
            if dx.is_zero() {
                continue;
            }
            for y in 0..self.nvars {
                if c[x][y].is_zero() {
                    continue;
                }
                out = out.add(&dx.derivative(y).scale(&c[x][y]));
            }
        }
        out
    }

    /// e^{s Δ_C / 2} A, a finite sum.
    fn heat(&self, c: &[Vec<T>], sign: i64) -> Self {
        let mut out = self.clone();
        let mut term = self.clone();
        let mut k = 1i64;
        while !term.is_zero() {
            term = term.laplacian(c).scale(&T::ratio(sign, 2 * k));
            out = out.add(&term);
            k += 1;
        }
        out
    }
}

fn check_square<T>(c: &[Vec<T>], nvars: usize) {
    assert_eq!(c.len(), nvars, "covariance size must match the number of variables");
    assert!(c.iter().all(|r| r.len() == nvars));
}

/// E_C θA = e^{½Δ_C} A as a polynomial in the background field.
pub fn heat_convolve<T: Scalar>(a: &Polynomial<T>, c: &[Vec<T>]) -> Polynomial<T> {
    check_square(c, a.nvars());
    a.heat(c, 1)
}

/// Wick ordering :A:_C = e^{−½Δ_C} A.
pub fn wick_order<T: Scalar>(a: &Polynomial<T>, c: &[Vec<T>]) -> Polynomial<T> {
    check_square(c, a.nvars());
    a.heat(c, -1)
}

/// E_C A.
pub fn wick_expect<T: Scalar>(a: &Polynomial<T>, c: &[Vec<T>]) -> T {
    heat_convolve(a, c).constant_term()
}

/// F_C(A, B) = Σ_{n≥1} (1/n!) Σ C_{x₁y₁}⋯C_{xₙyₙ} ∂ⁿ_{x}A ∂ⁿ_{y}B.
pub fn f_c_pairing<T: Scalar>(a: &Polynomial<T>, b: &Polynomial<T>, c: &[Vec<T>]) -> Polynomial<T> {
    check_square(c, a.nvars());
    let nv = a.nvars();
    let mut out = Polynomial::zero(nv);
    let mut layer: Vec<(Polynomial<T>, Polynomial<T>)> = vec![(a.clone(), b.clone())];
    let mut n = 1i64;
    loop {
        let mut next = Vec::new();
        for (pa, pb) in &layer {
            for x in 0..nv {
                let da = pa.derivative(x);
                if da.is_zero() {
                    continue;
                }
                for y in 0..nv {
                    if c[x][y].is_zero() {
                        continue;
                    }
                    let db = pb.derivative(y);
                    if db.is_zero() {
                        continue;
                    }
                    next.push((da.clone(), db.scale(&c[x][y])));
                }
            }
        }
        if next.is_empty() {
            break;
        }
        // merge pairs sharing the same left factor to limit growth
        let mut merged: Vec<(Polynomial<T>, Polynomial<T>)> = Vec::new();
        for (pa, pb) in next {
            if let Some(slot) = merged.iter_mut().find(|(qa, _)| *qa == pa) {
                slot.1 = slot.1.add(&pb);
            } else {
                merged.push((pa, pb));
            }
        }
        merged.retain(|(_, pb)| !pb.is_zero());
        layer = merged.into_iter().map(|(pa, pb)| (pa, pb.scale(&T::ratio(1, n)))).collect();
        for (pa, pb) in &layer {
            out = out.add(&pa.mul(pb));
        }
        n += 1;
    }
    out
}

/// |E(Fφ_x) − Σ_y C_{xy} E(∂F/∂φ_y)|, computed exactly.
pub fn integration_by_parts_check<T: Scalar>(f: &Polynomial<T>, c: &[Vec<T>], x: usize) -> T {
    let nv = f.nvars();
    let lhs = wick_expect(&f.mul(&Polynomial::var(nv, x)), c);
    let mut rhs = T::zero();
    for y in 0..nv {
        rhs = rhs + c[x][y].clone() * wick_expect(&f.derivative(y), c);
    }
    let r = lhs - rhs;
    if r.to_f64() < 0.0 {
        -r
    } else {
        r
    }
}

/// A real covariance matrix with cached eigendecomposition.
#[derive(Debug, Clone)]
pub struct Covariance {
    pub matrix: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
    /// Indices of eigenvalues treated as exact zeros.
    pub kernel: Vec<usize>,
}

impl Covariance {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidParam("covariance must be square".into()));
        }
        let m = matrix.nrows();
        for i in 0..m {
            for j in 0..i {
                let a = matrix[(i, j)];
                let b = matrix[(j, i)];
                if (a - b).abs() > 1e-12 * (a.abs() + b.abs()).max(1e-300) {
                    return Err(Error::InvalidParam("covariance must be symmetric".into()));
                }
            }
        }
        let maxdiag = (0..m).map(|i| matrix[(i, i)].abs()).fold(0.0, f64::max);
        let tol = 1e-12 * maxdiag;
        let eig = SymmetricEigen::new(matrix.clone());
        let mut kernel = Vec::new();
        let mut eigenvalues = Vec::with_capacity(m);
        for (k, &l) in eig.eigenvalues.iter().enumerate() {
            if l < -tol {
                return Err(Error::NotPsd(l));
            }
            if l <= tol {
                kernel.push(k);
                eigenvalues.push(0.0);
            } else {
                eigenvalues.push(l);
            }
        }
        Ok(Self { matrix, eigenvalues, eigenvectors: eig.eigenvectors, kernel })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        Self::new(DMatrix::from_fn(m, m, |i, j| rows[i][j]))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim()).map(|i| (0..self.dim()).map(|j| self.matrix[(i, j)]).collect()).collect()
    }

    /// Map i.i.d. standard normals z to a field with this covariance.
    pub fn transform(&self, z: &[f64]) -> Vec<f64> {
        let m = self.dim();
        let mut out = vec![0.0; m];
        for k in 0..m {
            let s = self.eigenvalues[k].sqrt();
            if s == 0.0 {
                continue;
            }
            let a = s * z[k];
            for i in 0..m {
                out[i] += self.eigenvectors[(i, k)] * a;
            }
        }
        out
    }

    pub fn sample(&self, seed: u64, count: usize) -> Vec<Vec<f64>> {
        let mut r = rng::stream(seed, &[0x4741_5553]);
        (0..count)
            .map(|_| {
                let z: Vec<f64> = (0..self.dim()).map(|_| rng::normal(&mut r)).collect();
                self.transform(&z)
            })
            .collect()
    }
}

/// Samples from N(0, C).
pub fn sample(c: &Covariance, seed: u64, count: usize) -> Vec<Vec<f64>> {
    c.sample(seed, count)
}

/// All set partitions of {0,…,k−1} as lists of block bitmasks, via
/// restricted-growth strings.
pub fn set_partitions(k: usize) -> Result<Vec<Vec<u32>>> {
    if k > 8 {
        return Err(Error::PartitionCap(k));
    }
    let mut out = Vec::new();
    if k == 0 {
        out.push(Vec::new());
        return Ok(out);
    }
    let mut a = vec![0usize; k];
    loop {
        let nb = a.iter().max().unwrap() + 1;
        let mut blocks = vec![0u32; nb];
        for (i, &b) in a.iter().enumerate() {
            blocks[b] |= 1 << i;
        }
        out.push(blocks);
        // next restricted-growth string
        let mut i = k - 1;
        loop {
            if i == 0 {
                return Ok(out);
            }
            let maxprev = a[..i].iter().max().copied().unwrap();
            if a[i] <= maxprev {
                a[i] += 1;
                for v in a.iter_mut().skip(i + 1) {
                    *v = 0;
                }
                break;
            }
            i -= 1;
        }
    }
}

fn spread(mask: u32, members: &[usize]) -> u32 {
    let mut out = 0;
    for (i, &m) in members.iter().enumerate() {
        if mask & (1 << i) != 0 {
            out |= 1 << m;
        }
    }
    out
}

fn members_of(mask: u32) -> Vec<usize> {
    (0..32).filter(|i| mask & (1 << i) != 0).collect()
}

fn factorial(n: usize) -> i64 {
    (1..=n as i64).product()
}

/// Joint cumulants κ_I from joint moments μ_I, both indexed by subset bitmask
/// of k variables (entry 0 is the empty set).
pub fn cumulants_from_moments<T: Scalar>(moments: &[T]) -> Result<Vec<T>> {
    subset_order(moments.len())?;
    let mut out = vec![T::zero(); moments.len()];
    for mask in 1..moments.len() as u32 {
        let mem = members_of(mask);
        let mut s = T::zero();
        for p in set_partitions(mem.len())? {
            let nb = p.len();
            let coef = T::from_i64(if nb % 2 == 1 { 1 } else { -1 } * factorial(nb - 1));
            let prod = p.iter().fold(T::one(), |acc, &b| acc * moments[spread(b, &mem) as usize].clone());
            s = s + coef * prod;
        }
        out[mask as usize] = s;
    }
    Ok(out)
}

/// Joint moments μ_I = Σ_π Π_{B∈π} κ_B.
pub fn moments_from_cumulants<T: Scalar>(cumulants: &[T]) -> Result<Vec<T>> {
    subset_order(cumulants.len())?;
    let mut out = vec![T::zero(); cumulants.len()];
    out[0] = T::one();
    for mask in 1..cumulants.len() as u32 {
        let mem = members_of(mask);
        let mut s = T::zero();
        for p in set_partitions(mem.len())? {
            s = s + p.iter().fold(T::one(), |acc, &b| acc * cumulants[spread(b, &mem) as usize].clone());
        }
        out[mask as usize] = s;
    }
    Ok(out)
}

fn subset_order(len: usize) -> Result<usize> {
    if !len.is_power_of_two() {
        return Err(Error::InvalidParam("table length must be 2^k".into()));
    }
    let k = len.trailing_zeros() as usize;
    if k > 8 {
        return Err(Error::PartitionCap(k));
    }
    Ok(k)
}

/// Cumulants κ_1..κ_k of one variable from its moments m_1..m_k.
pub fn univariate_cumulants<T: Scalar>(moments: &[T]) -> Result<Vec<T>> {
    let k = moments.len();
    if k > 8 {
        return Err(Error::PartitionCap(k));
    }
    let table: Vec<T> = (0..(1usize << k))
        .map(|m| if m == 0 { T::one() } else { moments[m.count_ones() as usize - 1].clone() })
        .collect();
    let cum = cumulants_from_moments(&table)?;
    Ok((1..=k).map(|r| cum[(1usize << r) - 1].clone()).collect())
}

/// Joint moment table E Π_{i∈I} φ_{v_i} of a Gaussian, for listed variables.
pub fn gaussian_moment_table<T: Scalar>(vars: &[usize], c: &[Vec<T>]) -> Vec<T> {
    let nv = c.len();
    (0..(1usize << vars.len()))
        .map(|mask| {
            let picked: Vec<usize> = (0..vars.len()).filter(|i| mask & (1 << i) != 0).map(|i| vars[i]).collect();
            wick_expect(&Polynomial::product_of(nv, &picked), c)
        })
        .collect()
}
