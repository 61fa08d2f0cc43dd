//! Coordinatewise proxes and their orthonormal-basis generalization.

use nalgebra::DMatrix;

use crate::catalog::scalar_kind::ScalarKind;
use crate::error::{Error, Result};
use crate::func::{ProxFn, Vector};

/// `sum_k phi_k(x_k)`.
#[derive(Debug, Clone)]
pub struct SeparableProx {
    kinds: Vec<ScalarKind>,
}

impl SeparableProx {
    pub fn new(kinds: Vec<ScalarKind>) -> Result<Self> {
        if kinds.is_empty() {
            return Err(Error::InvalidInput("separable function needs at least one coordinate".into()));
        }
        for k in &kinds {
            k.validate()?;
        }
        Ok(SeparableProx { kinds })
    }

    /// The same scalar function on every coordinate.
    pub fn broadcast(kind: ScalarKind, dim: usize) -> Result<Self> {
        Self::new(vec![kind; dim])
    }

    /// Weighted l1 norm `sum_k w_k |x_k|`.
    pub fn weighted_l1(weights: &[f64]) -> Result<Self> {
        Self::new(weights.iter().map(|&w| ScalarKind::abs(w)).collect())
    }

    pub fn kinds(&self) -> &[ScalarKind] {
        &self.kinds
    }
}

impl ProxFn for SeparableProx {
    fn dim(&self) -> usize {
        self.kinds.len()
    }
    fn eval(&self, x: &Vector) -> f64 {
        self.kinds.iter().zip(x.iter()).map(|(k, &v)| k.eval(v)).sum()
    }
    fn prox(&self, gamma: f64, x: &Vector) -> Vector {
        Vector::from_iterator(
            x.len(),
            self.kinds.iter().zip(x.iter()).map(|(k, &v)| k.prox(gamma, v)),
        )
    }
    fn eval_conjugate(&self, u: &Vector) -> Option<f64> {
        self.kinds
            .iter()
            .zip(u.iter())
            .map(|(k, &v)| k.conjugate(v))
            .sum()
    }
}

/// `sum_k phi_k(x^T b_k)` for an orthonormal basis given as the columns of `basis`.
#[derive(Debug, Clone)]
pub struct OrthonormalSeparable {
    basis: DMatrix<f64>,
    inner: SeparableProx,
}

impl OrthonormalSeparable {
    pub fn new(basis: DMatrix<f64>, kinds: Vec<ScalarKind>) -> Result<Self> {
        let n = basis.nrows();
        if basis.ncols() != n || kinds.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: if basis.ncols() != n { basis.ncols() } else { kinds.len() },
            });
        }
        let gap = (basis.tr_mul(&basis) - DMatrix::identity(n, n)).amax();
        if gap > 1e-10 {
            return Err(Error::Precondition(format!(
                "basis is not orthonormal (|B^T B - I| = {gap:e})"
            )));
        }
        Ok(OrthonormalSeparable {
            basis,
            inner: SeparableProx::new(kinds)?,
        })
    }
}

impl ProxFn for OrthonormalSeparable {
    fn dim(&self) -> usize {
        self.basis.nrows()
    }
    fn eval(&self, x: &Vector) -> f64 {
        self.inner.eval(&self.basis.tr_mul(x))
    }
    fn prox(&self, gamma: f64, x: &Vector) -> Vector {
        &self.basis * self.inner.prox(gamma, &self.basis.tr_mul(x))
    }
    fn eval_conjugate(&self, u: &Vector) -> Option<f64> {
        self.inner.eval_conjugate(&self.basis.tr_mul(u))
    }
}
