//! Numerical laboratory for the renormalisation group of the hierarchical
//! |φ|⁴ model: covariance decompositions, the perturbative flow, an exact
//! block recursion, mean-field theory, and walk/supersymmetry representations.

pub mod error;
pub mod frd;
pub mod gaussian;
pub mod hierarchical;
pub mod meanfield;
pub mod nonpert;
pub mod pertflow;
pub mod quad;
pub mod rng;
pub mod scalar;
pub mod walks_susy;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Model parameters shared by the hierarchical modules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub d: usize,
    pub l: usize,
    pub big_n: usize,
    pub n: usize,
    pub m2: f64,
}

impl ModelParams {
    pub fn new(d: usize, l: usize, big_n: usize, n: usize, m2: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParam("d must be at least 1".into()));
        }
        if l < 2 {
            return Err(Error::InvalidParam("L must be at least 2".into()));
        }
        if n == 0 {
            return Err(Error::InvalidParam("n must be at least 1".into()));
        }
        if !(m2 >= 0.0) || !m2.is_finite() {
            return Err(Error::InvalidParam(format!("m2 must be finite and >= 0, got {m2}")));
        }
        Ok(Self { d, l, big_n, n, m2 })
    }

    /// The standard four-dimensional setting d=4, L=2.
    pub fn d4(n: usize, m2: f64) -> Self {
        Self { d: 4, l: 2, big_n: 1000, n, m2 }
    }

    pub fn with_m2(self, m2: f64) -> Self {
        Self { m2, ..self }
    }

    pub fn lf(&self) -> f64 {
        self.l as f64
    }

    /// Sites per block, L^d.
    pub fn block_count(&self) -> usize {
        self.l.pow(self.d as u32)
    }
}
