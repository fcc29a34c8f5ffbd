//! Differential forms in the boson field (φ, φ̄) and fermion field (ψ, ψ̄)
//! on V vertices, the supersymmetry generator Q, and the Gaussian
//! super-expectation.
//!
//! Fermion generators are indexed ψ̄_x = 2x, ψ_x = 2x+1, so the canonical
//! top form is ψ̄₁ψ₁⋯ψ̄_Vψ_V. Boson variables are φ_x = x and φ̄_x = V+x.

use crate::error::{Error, Result};
use crate::gaussian::Polynomial;
use crate::scalar::Scalar;
use nalgebra::{DMatrix, SymmetricEigen};
use std::collections::{BTreeMap, HashMap};

/// Σ over fermion monomials (bitmask) of boson polynomial coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Form<T> {
    nv: usize,
    terms: BTreeMap<u32, Polynomial<T>>,
}

pub fn psibar_gen(x: usize) -> u32 {
    2 * x as u32
}

pub fn psi_gen(x: usize) -> u32 {
    2 * x as u32 + 1
}

/// Sign of moving the sorted monomial `a` past `b` into sorted order.
fn merge_sign(a: u32, b: u32) -> bool {
    let mut odd = false;
    let mut bb = b;
    while bb != 0 {
        let j = bb.trailing_zeros();
        bb &= bb - 1;
        let above = if j >= 31 { 0 } else { a >> (j + 1) };
        if above.count_ones() % 2 == 1 {
            odd = !odd;
        }
    }
    odd
}

impl<T: Scalar> Form<T> {
    pub fn zero(nv: usize) -> Self {
        Self { nv, terms: BTreeMap::new() }
    }

    pub fn from_poly(nv: usize, p: Polynomial<T>) -> Self {
        assert_eq!(p.nvars(), 2 * nv);
        let mut f = Self::zero(nv);
        f.add_term(0, p);
        f
    }

    pub fn constant(nv: usize, c: T) -> Self {
        Self::from_poly(nv, Polynomial::constant(2 * nv, c))
    }

    pub fn one(nv: usize) -> Self {
        Self::constant(nv, T::one())
    }

    pub fn phi(nv: usize, x: usize) -> Self {
        Self::from_poly(nv, Polynomial::var(2 * nv, x))
    }

    pub fn phibar(nv: usize, x: usize) -> Self {
        Self::from_poly(nv, Polynomial::var(2 * nv, nv + x))
    }

    fn generator(nv: usize, g: u32) -> Self {
        let mut f = Self::zero(nv);
        f.add_term(1 << g, Polynomial::one(2 * nv));
        f
    }

    pub fn psi(nv: usize, x: usize) -> Self {
        Self::generator(nv, psi_gen(x))
    }

    pub fn psibar(nv: usize, x: usize) -> Self {
        Self::generator(nv, psibar_gen(x))
    }

    /// τ_x = φ_xφ̄_x + ψ_x ∧ ψ̄_x.
    pub fn tau(nv: usize, x: usize) -> Self {
        Self::phi(nv, x).wedge(&Self::phibar(nv, x)).add(&Self::psi(nv, x).wedge(&Self::psibar(nv, x)))
    }

    /// τ_{xy} = ½(φ_xφ̄_y + ψ_xψ̄_y + φ_yφ̄_x + ψ_yψ̄_x).
    pub fn tau_xy(nv: usize, x: usize, y: usize) -> Self {
        let a = Self::phi(nv, x).wedge(&Self::phibar(nv, y)).add(&Self::psi(nv, x).wedge(&Self::psibar(nv, y)));
        let b = Self::phi(nv, y).wedge(&Self::phibar(nv, x)).add(&Self::psi(nv, y).wedge(&Self::psibar(nv, x)));
        a.add(&b).scale(&T::ratio(1, 2))
    }

    pub fn vertices(&self) -> usize {
        self.nv
    }

    pub fn terms(&self) -> impl Iterator<Item = (&u32, &Polynomial<T>)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, mask: u32, p: Polynomial<T>) {
        if p.is_zero() {
            return;
        }
        let merged = match self.terms.get(&mask) {
            Some(q) => q.add(&p),
            None => p,
        };
        if merged.is_zero() {
            self.terms.remove(&mask);
        } else {
            self.terms.insert(mask, merged);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, mask: u32) -> Polynomial<T> {
        self.terms.get(&mask).cloned().unwrap_or_else(|| Polynomial::zero(2 * self.nv))
    }

    /// Degree-zero (in fermions) part.
    pub fn degree_zero(&self) -> Polynomial<T> {
        self.coefficient(0)
    }

    pub fn is_even(&self) -> bool {
        self.terms.keys().all(|m| m.count_ones() % 2 == 0)
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (m, p) in &o.terms {
            r.add_term(*m, p.clone());
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&(-T::one())))
    }

    pub fn scale(&self, c: &T) -> Self {
        let mut r = Self::zero(self.nv);
        for (m, p) in &self.terms {
            r.add_term(*m, p.scale(c));
        }
        r
    }

    pub fn mul_poly(&self, q: &Polynomial<T>) -> Self {
        let mut r = Self::zero(self.nv);
        for (m, p) in &self.terms {
            r.add_term(*m, p.mul(q));
        }
        r
    }

    /// Graded product a ∧ b.
    pub fn wedge(&self, o: &Self) -> Self {
        let mut r = Self::zero(self.nv);
        for (ma, pa) in &self.terms {
            for (mb, pb) in &o.terms {
                if ma & mb != 0 {
                    continue;
                }
                let p = pa.mul(pb);
                let p = if merge_sign(*ma, *mb) { p.scale(&(-T::one())) } else { p };
                r.add_term(ma | mb, p);
            }
        }
        r
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut r = Self::one(self.nv);
        for _ in 0..k {
            r = r.wedge(self);
        }
        r
    }

    /// ∂/∂φ_y (or ∂/∂φ̄_y when `bar`) acting on boson coefficients.
    pub fn d_boson(&self, y: usize, bar: bool) -> Self {
        let v = if bar { self.nv + y } else { y };
        let mut r = Self::zero(self.nv);
        for (m, p) in &self.terms {
            r.add_term(*m, p.derivative(v));
        }
        r
    }

    /// The supersymmetry generator, an anti-derivation with
    /// Qφ = ψ, Qφ̄ = ψ̄, Qψ = −φ, Qψ̄ = φ̄.
    pub fn q_operator(&self) -> Self {
        let nv = self.nv;
        let mut r = Self::zero(nv);
        for (m, p) in &self.terms {
            let mono = Self { nv, terms: BTreeMap::from([(*m, Polynomial::one(2 * nv))]) };
            for x in 0..nv {
                let dp = p.derivative(x);
                if !dp.is_zero() {
                    r = r.add(&Self::psi(nv, x).mul_poly(&dp).wedge(&mono));
                }
                let dpb = p.derivative(nv + x);
                if !dpb.is_zero() {
                    r = r.add(&Self::psibar(nv, x).mul_poly(&dpb).wedge(&mono));
                }
            }
            // act on the fermion generators in order
            let mut pos = 0;
            let mut mm = *m;
            while mm != 0 {
                let g = mm.trailing_zeros();
                mm &= mm - 1;
                let x = (g / 2) as usize;
                let rest = *m & !(1 << g);
                let boson = if g % 2 == 1 {
                    Polynomial::var(2 * nv, x).scale(&(-T::one()))
                } else {
                    Polynomial::var(2 * nv, nv + x)
                };
                let mut c = p.mul(&boson);
                if pos % 2 == 1 {
                    c = c.scale(&(-T::one()));
                }
                r.add_term(rest, c);
                pos += 1;
            }
        }
        r
    }
}

/// The fermionic part e^{−ψAψ̄} with constant coefficients.
pub fn exp_fermion_quadratic<T: Scalar>(a: &[Vec<T>]) -> Form<T> {
    let nv = a.len();
    let mut k = Form::zero(nv);
    for x in 0..nv {
        for y in 0..nv {
            if !a[x][y].is_zero() {
                k = k.add(&Form::psi(nv, x).wedge(&Form::psibar(nv, y)).scale(&a[x][y]));
            }
        }
    }
    let mut out = Form::one(nv);
    let mut term = Form::one(nv);
    for n in 1..=nv as i64 {
        term = term.wedge(&k).scale(&T::ratio(-1, n));
        out = out.add(&term);
    }
    out
}

/// Coefficient of the canonical top form ψ̄₁ψ₁⋯ in a form with constant coefficients.
fn top_constant<T: Scalar>(f: &Form<T>) -> T {
    let top = (1u32 << (2 * f.nv)) - 1;
    f.coefficient(top).constant_term()
}

/// E[Π φ_x^{a_x} φ̄_y^{b_y}] for the complex Gaussian with E[φ_xφ̄_y] = C_{xy}.
pub fn complex_wick<T: Scalar>(exps: &[u32], c: &[Vec<T>]) -> T {
    let nv = c.len();
    let mut memo: HashMap<Vec<u32>, T> = HashMap::new();
    fn rec<T: Scalar>(e: &mut Vec<u32>, nv: usize, c: &[Vec<T>], memo: &mut HashMap<Vec<u32>, T>) -> T {
        let Some(x) = (0..nv).find(|&i| e[i] > 0) else {
            return if e[nv..].iter().all(|&b| b == 0) { T::one() } else { T::zero() };
        };
        if let Some(v) = memo.get(e.as_slice()) {
            return v.clone();
        }
        let key = e.clone();
        let mut acc = T::zero();
        e[x] -= 1;
        for y in 0..nv {
            let b = e[nv + y];
            if b == 0 || c[x][y].is_zero() {
                continue;
            }
            e[nv + y] -= 1;
            acc = acc + T::from_i64(b as i64) * c[x][y].clone() * rec(e, nv, c, memo);
            e[nv + y] += 1;
        }
        e[x] += 1;
        memo.insert(key, acc.clone());
        acc
    }
    let a: u32 = exps[..nv].iter().sum();
    let b: u32 = exps[nv..].iter().sum();
    if a != b {
        return T::zero();
    }
    let mut e = exps.to_vec();
    rec(&mut e, nv, c, &mut memo)
}

/// Gauss–Jordan inverse over a field.
pub fn invert<T: Scalar>(m: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
    let n = m.len();
    let mut a: Vec<Vec<T>> = m.to_vec();
    let mut inv: Vec<Vec<T>> = (0..n).map(|i| (0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect()).collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs_f64().partial_cmp(&a[j][col].abs_f64()).unwrap())
            .filter(|&i| !a[i][col].is_zero())
            .ok_or_else(|| Error::InvalidParam("singular matrix".into()))?;
        a.swap(col, piv);
        inv.swap(col, piv);
        let p = a[col][col].clone();
        for j in 0..n {
            a[col][j] = a[col][j].clone() / p.clone();
            inv[col][j] = inv[col][j].clone() / p.clone();
        }
        for i in 0..n {
            if i == col || a[i][col].is_zero() {
                continue;
            }
            let f = a[i][col].clone();
            for j in 0..n {
                a[i][j] = a[i][j].clone() - f.clone() * a[col][j].clone();
                inv[i][j] = inv[i][j].clone() - f.clone() * inv[col][j].clone();
            }
        }
    }
    Ok(inv)
}

/// Smallest eigenvalue of the symmetric part of a matrix.
pub fn min_hermitian_eigenvalue<T: Scalar>(m: &[Vec<T>]) -> f64 {
    let n = m.len();
    let s = DMatrix::from_fn(n, n, |i, j| 0.5 * (m[i][j].to_f64() + m[j][i].to_f64()));
    SymmetricEigen::new(s).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Fermionic moments ⟨ψ^S⟩_A = [top](ψ^S ∧ e^{−ψAψ̄}) / det A for every mask S.
pub struct FermionMoments<T> {
    exp_form: Form<T>,
    det: T,
    nv: usize,
}

impl<T: Scalar> FermionMoments<T> {
    pub fn new(a: &[Vec<T>]) -> Result<Self> {
        let exp_form = exp_fermion_quadratic(a);
        let det = top_constant(&exp_form);
        if det.is_zero() {
            return Err(Error::InvalidParam("singular matrix".into()));
        }
        Ok(Self { exp_form, det, nv: a.len() })
    }

    /// det A as produced by the Grassmann expansion.
    pub fn det(&self) -> &T {
        &self.det
    }

    pub fn moment(&self, mask: u32) -> T {
        let top = (1u32 << (2 * self.nv)) - 1;
        let comp = top & !mask;
        let c = self.exp_form.coefficient(comp).constant_term();
        if c.is_zero() {
            return T::zero();
        }
        let c = if merge_sign(mask, comp) { -c } else { c };
        c / self.det.clone()
    }
}

/// Gaussian super-expectation E_C K = ∫ K e^{−S_A}, A = C⁻¹.
pub fn super_expectation<T: Scalar>(k: &Form<T>, c: &[Vec<T>]) -> Result<T> {
    let n = c.len();
    if k.vertices() != n {
        return Err(Error::InvalidParam("form and covariance sizes differ".into()));
    }
    for i in 0..n {
        for j in 0..n {
            if c[i][j] != c[j][i] {
                return Err(Error::InvalidParam("covariance must be symmetric".into()));
            }
        }
    }
    let a = invert(c)?;
    let lmin = min_hermitian_eigenvalue(&a);
    if !(lmin > 0.0) {
        return Err(Error::NotPsd(lmin));
    }
    let fm = FermionMoments::new(&a)?;
    let mut acc = T::zero();
    for (mask, p) in k.terms() {
        let mo = fm.moment(*mask);
        if mo.is_zero() {
            continue;
        }
        let mut e = T::zero();
        for (exps, coef) in p.terms() {
            e = e + coef.clone() * complex_wick(exps, c);
        }
        acc = acc + mo * e;
    }
    Ok(acc)
}

/// |[top] e^{−ψAψ̄} / det A − 1| with det A from LU; this is |∫e^{−S_A} − 1|
/// for A with positive definite Hermitian part.
pub fn self_normalisation_residual(a: &DMatrix<f64>) -> Result<f64> {
    let n = a.nrows();
    let lmin = SymmetricEigen::new(0.5 * (a + a.transpose())).eigenvalues.min();
    if !(lmin > 0.0) {
        return Err(Error::NotPsd(lmin));
    }
    let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| a[(i, j)]).collect()).collect();
    let fm = FermionMoments::new(&rows)?;
    Ok((fm.det() / a.clone().determinant() - 1.0).abs())
}

/// F(τ) for a polynomial F in the vertex variables, built by form algebra.
pub fn poly_of_tau<T: Scalar>(f: &Polynomial<T>) -> Form<T> {
    let nv = f.nvars();
    let taus: Vec<Form<T>> = (0..nv).map(|x| Form::tau(nv, x)).collect();
    let mut out = Form::zero(nv);
    for (exps, c) in f.terms() {
        let mut t = Form::constant(nv, c.clone());
        for (x, &e) in exps.iter().enumerate() {
            if e > 0 {
                t = t.wedge(&taus[x].pow(e));
            }
        }
        out = out.add(&t);
    }
    out
}

/// Super-expectation of φ̄_x φ_y Π_{z≠x,y}(1+τ_z).
pub fn strict_saw_form_value<T: Scalar>(c: &[Vec<T>], x: usize, y: usize) -> Result<T> {
    let nv = c.len();
    let mut k = Form::phibar(nv, x).wedge(&Form::phi(nv, y));
    for z in 0..nv {
        if z != x && z != y {
            k = k.wedge(&Form::one(nv).add(&Form::tau(nv, z)));
        }
    }
    super_expectation(&k, c)
}

/// ∫ φ̄_xφ_y Π_{u<v}(1 + 2β_{uv}τ_{uv}) Π_w e^{−τ_w}, i.e. the super-expectation with C = I.
pub fn trail_form_value<T: Scalar>(beta: &[Vec<T>], x: usize, y: usize) -> Result<T> {
    let nv = beta.len();
    let mut k = Form::phibar(nv, x).wedge(&Form::phi(nv, y));
    for u in 0..nv {
        for v in u + 1..nv {
            if !beta[u][v].is_zero() {
                let t = Form::tau_xy(nv, u, v).scale(&(T::from_i64(2) * beta[u][v].clone()));
                k = k.wedge(&Form::one(nv).add(&t));
            }
        }
    }
    let id: Vec<Vec<T>> = (0..nv).map(|i| (0..nv).map(|j| if i == j { T::one() } else { T::zero() }).collect()).collect();
    super_expectation(&k, &id)
}

/// Σ over strictly self-avoiding walks x → y in the complete graph of C^ω.
pub fn strict_saw_sum<T: Scalar>(c: &[Vec<T>], x: usize, y: usize) -> T {
    let nv = c.len();
    fn dfs<T: Scalar>(c: &[Vec<T>], u: usize, y: usize, used: &mut Vec<bool>, w: T, acc: &mut T) {
        if u == y {
            *acc = acc.clone() + w;
            return;
        }
        for v in 0..c.len() {
            if !used[v] {
                used[v] = true;
                dfs(c, v, y, used, w.clone() * c[u][v].clone(), acc);
                used[v] = false;
            }
        }
    }
    let mut used = vec![false; nv];
    used[x] = true;
    let mut acc = T::zero();
    dfs(c, x, y, &mut used, T::one(), &mut acc);
    acc
}

/// Σ over self-avoiding trails x → y (no undirected edge reused) in the complete graph of β^ω.
pub fn trail_sum<T: Scalar>(beta: &[Vec<T>], x: usize, y: usize) -> T {
    let nv = beta.len();
    fn dfs<T: Scalar>(b: &[Vec<T>], u: usize, y: usize, used: &mut Vec<Vec<bool>>, w: T, acc: &mut T) {
        if u == y {
            *acc = acc.clone() + w.clone();
        }
        for v in 0..b.len() {
            if v == u || used[u][v] {
                continue;
            }
            used[u][v] = true;
            used[v][u] = true;
            dfs(b, v, y, used, w.clone() * b[u][v].clone(), acc);
            used[u][v] = false;
            used[v][u] = false;
        }
    }
    let mut used = vec![vec![false; nv]; nv];
    let mut acc = T::zero();
    dfs(beta, x, y, &mut used, T::one(), &mut acc);
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use num_rational::BigRational;
    use rand::{Rng, SeedableRng};

    type Q = BigRational;

    fn rat_cov(seed: u64, n: usize) -> Vec<Vec<Q>> {
        // C = MᵀM + I with small integer M
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let m: Vec<Vec<i64>> = (0..n).map(|_| (0..n).map(|_| rng.random_range(-2..=2)).collect()).collect();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let s: i64 = (0..n).map(|k| m[k][i] * m[k][j]).sum();
                        rat(s + if i == j { 1 } else { 0 }, 1)
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn grassmann_basics() {
        let nv = 2;
        let p: Form<Q> = Form::psi(nv, 0);
        assert!(p.wedge(&p).is_zero());
        let a = Form::<Q>::psi(nv, 0).wedge(&Form::psibar(nv, 1));
        let b = Form::<Q>::psibar(nv, 1).wedge(&Form::psi(nv, 0));
        assert_eq!(a, b.scale(&rat(-1, 1)));
        // Q on generators and Q² identities
        for x in 0..nv {
            assert_eq!(Form::<Q>::phi(nv, x).q_operator(), Form::psi(nv, x));
            assert_eq!(Form::<Q>::psi(nv, x).q_operator(), Form::phi(nv, x).scale(&rat(-1, 1)));
            assert_eq!(Form::<Q>::psibar(nv, x).q_operator(), Form::phibar(nv, x));
            assert_eq!(Form::<Q>::psi(nv, x).q_operator().q_operator(), Form::psi(nv, x).scale(&rat(-1, 1)));
        }
    }

    #[test]
    fn tau_closed_and_exact() {
        let nv = 3;
        for (x, y) in [(0, 1), (1, 2), (0, 0)] {
            let t = Form::<Q>::tau_xy(nv, x, y);
            assert!(t.q_operator().is_zero());
            let lam = Form::<Q>::phi(nv, x)
                .wedge(&Form::psibar(nv, y))
                .add(&Form::phi(nv, y).wedge(&Form::psibar(nv, x)))
                .scale(&rat(1, 2));
            assert_eq!(lam.q_operator(), t);
        }
        assert!(Form::<Q>::tau(nv, 2).q_operator().is_zero());
    }

    #[test]
    fn q_chain_rule() {
        let nv = 2;
        let k1 = Form::<Q>::phi(nv, 0).wedge(&Form::phibar(nv, 1)).add(&Form::psi(nv, 0).wedge(&Form::psibar(nv, 0)));
        let k2 = Form::<Q>::phi(nv, 0).wedge(&Form::phi(nv, 1)).add(&Form::psibar(nv, 1).wedge(&Form::psi(nv, 0)));
        // F(a, b) = a² + 3ab − 2b²
        let f = k1.wedge(&k1).add(&k1.wedge(&k2).scale(&rat(3, 1))).sub(&k2.wedge(&k2).scale(&rat(2, 1)));
        let f1 = k1.scale(&rat(2, 1)).add(&k2.scale(&rat(3, 1)));
        let f2 = k1.scale(&rat(3, 1)).sub(&k2.scale(&rat(4, 1)));
        let rhs = f1.wedge(&k1.q_operator()).add(&f2.wedge(&k2.q_operator()));
        assert_eq!(f.q_operator(), rhs);
    }

    #[test]
    fn super_expectation_basics() {
        let c = rat_cov(3, 3);
        assert_eq!(super_expectation(&Form::one(3), &c).unwrap(), rat(1, 1));
        for x in 0..3 {
            for y in 0..3 {
                let k = Form::phi(3, x).wedge(&Form::phibar(3, y));
                assert_eq!(super_expectation(&k, &c).unwrap(), c[x][y]);
            }
        }
        let t2 = Form::<Q>::tau(3, 1).pow(2);
        assert_eq!(super_expectation(&t2, &c).unwrap(), rat(0, 1));
        let bad = vec![vec![rat(1, 1), rat(2, 1)], vec![rat(2, 1), rat(1, 1)]];
        assert!(super_expectation(&Form::one(2), &bad).is_err());
    }

    #[test]
    fn localisation_exact() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for trial in 0..10 {
            let nv = 2 + trial % 2;
            let c = rat_cov(100 + trial as u64, nv);
            let mut f = Polynomial::<Q>::zero(nv);
            for _ in 0..4 {
                let e: Vec<u32> = (0..nv).map(|_| rng.random_range(0..=1)).collect();
                if e.iter().sum::<u32>() <= 3 {
                    f.add_term(e, rat(rng.random_range(-5..=5), rng.random_range(1..=4)));
                }
            }
            f.add_term(vec![0; nv], rat(rng.random_range(-3..=3), 1));
            let val = super_expectation(&poly_of_tau(&f), &c).unwrap();
            assert_eq!(val, f.constant_term());
        }
    }

    #[test]
    fn super_ibp() {
        let nv = 3;
        let c = rat_cov(5, nv);
        let ks = [
            Form::<Q>::phi(nv, 1).wedge(&Form::tau(nv, 2)),
            Form::<Q>::phi(nv, 0).wedge(&Form::phi(nv, 2)).wedge(&Form::phibar(nv, 1)),
            Form::<Q>::psi(nv, 0).wedge(&Form::psibar(nv, 1)).wedge(&Form::phi(nv, 2)),
        ];
        for k in &ks {
            for x in 0..nv {
                let lhs = super_expectation(&Form::phibar(nv, x).wedge(k), &c).unwrap();
                let mut rhs = rat(0, 1);
                for y in 0..nv {
                    rhs = rhs + c[x][y].clone() * super_expectation(&k.d_boson(y, false), &c).unwrap();
                }
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn saw_and_trail_representations() {
        let c = rat_cov(9, 2);
        assert_eq!(strict_saw_form_value(&c, 0, 1).unwrap(), c[0][1]);
        for seed in 0..3 {
            let c = rat_cov(20 + seed, 3);
            for (x, y) in [(0, 1), (0, 2), (1, 2)] {
                assert_eq!(strict_saw_form_value(&c, x, y).unwrap(), strict_saw_sum(&c, x, y));
            }
        }
        let b: Vec<Vec<Q>> = (0..4).map(|i| (0..4).map(|j| if i == j { rat(0, 1) } else { rat((i + j) as i64 + 1, 7) }).collect()).collect();
        assert_eq!(trail_form_value(&b, 0, 3).unwrap(), trail_sum(&b, 0, 3));
    }

    #[test]
    fn normalisation_random() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..5 {
            let m = DMatrix::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0));
            let a = &m * m.transpose() + DMatrix::identity(3, 3) + DMatrix::from_fn(3, 3, |i, j| if i < j { 0.7 } else if i > j { -0.7 } else { 0.0 });
            assert!(self_normalisation_residual(&a).unwrap() < 1e-12);
        }
    }
}
